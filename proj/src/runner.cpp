#include "bct/runner.hpp"

#include <algorithm>
#include <chrono>
#include <memory>
#include <cmath>
#include <cstdio>
#include <thread>

#include "bct/errors.hpp"

namespace bct {

bool trace_emits(std::uint64_t t) {
  if (t <= 100000) return true;
  const std::uint64_t stride = (t + 9999) / 10000;
  return t % stride == 0;
}

namespace {

void emit(std::vector<TraceRow>& trace, const RunningEstimate& est, bool stopped_now) {
  trace.push_back({est.trials(), est.log10_estimate(), est.failures(), stopped_now});
}

// Trials are generated block by block (bounding memory), each block fanned
// out across the workers; NaN marks a dead end. Trial values depend only
// on (run_seed, trial), so neither blocking nor the worker count shows up
// in the result.
RunOutcome run_fixed(const Margins& margins, const SamplerConfig& sampler,
                     const RunParams& params, std::uint64_t run_seed) {
  const std::uint64_t total = params.max_trials;
  if (total == 0) throw ConfigError("fixed-trials mode needs max_trials > 0");

  constexpr std::uint64_t kBlock = 1 << 20;
  std::vector<double> log_mu(static_cast<size_t>(std::min(total, kBlock)));
  const int jobs = std::max(1, params.jobs);

  RunOutcome out;
  RunningEstimate est(
      {params.epsilon, params.k, margins.n_rows() + margins.n_cols()});
  std::vector<std::unique_ptr<TrialSampler>> samplers;
  for (int w = 0; w < jobs; ++w)
    samplers.push_back(std::make_unique<TrialSampler>(margins, sampler));

  for (std::uint64_t base = 0; base < total; base += kBlock) {
    const std::uint64_t count = std::min(kBlock, total - base);
    auto worker = [&](int slot, std::uint64_t lo, std::uint64_t hi) {
      for (std::uint64_t t = lo; t < hi; ++t) {
        TrialRng rng(run_seed, base + t);
        const auto lm = samplers[static_cast<size_t>(slot)]->run_log_mu(rng);
        log_mu[t] = lm ? *lm : std::nan("");
      }
    };
    if (jobs == 1) {
      worker(0, 0, count);
    } else {
      std::vector<std::thread> threads;
      const std::uint64_t chunk = (count + jobs - 1) / jobs;
      for (int w = 0; w < jobs; ++w) {
        const std::uint64_t lo = std::min(count, chunk * static_cast<std::uint64_t>(w));
        const std::uint64_t hi = std::min(count, lo + chunk);
        if (lo < hi) threads.emplace_back(worker, w, lo, hi);
      }
      for (auto& th : threads) th.join();
    }
    for (std::uint64_t t = 0; t < count; ++t) {
      if (std::isnan(log_mu[t]))
        est.add_dead_end();
      else
        est.add_success(log_mu[t]);
      const std::uint64_t trial = base + t + 1;
      if (params.keep_trace && (trace_emits(trial) || trial == total))
        emit(out.trace, est, false);
    }
  }
  out.trials = est.trials();
  out.failures = est.failures();
  out.final_log10 = est.log10_estimate();
  return out;
}

RunOutcome run_stopping(const Margins& margins, const SamplerConfig& sampler,
                        const RunParams& params, std::uint64_t run_seed) {
  RunOutcome out;
  RunningEstimate est(
      {params.epsilon, params.k, margins.n_rows() + margins.n_cols()});
  TrialSampler trial_sampler(margins, sampler);
  std::uint64_t target = params.max_trials;  // 0 = unbounded until stop
  std::uint64_t t = 0;
  while (true) {
    TrialRng rng(run_seed, t);
    const auto lm = trial_sampler.run_log_mu(rng);
    if (lm)
      est.add_success(*lm);
    else
      est.add_dead_end();
    ++t;
    bool stopped_now = false;
    if (!out.stopped_at) {
      const auto decision = est.should_stop();
      if (decision.stopped) {
        out.stopped_at = decision.at_trial;
        stopped_now = true;
        const double extended =
            std::ceil(params.past_stop_factor * static_cast<double>(*out.stopped_at));
        std::uint64_t until = static_cast<std::uint64_t>(std::max(1.0, extended));
        target = target == 0 ? until : std::min(target, until);
      }
    }
    const bool done = (target != 0 && t >= target);
    if (params.keep_trace && (trace_emits(t) || stopped_now || done))
      emit(out.trace, est, stopped_now);
    if (done) break;
  }
  out.trials = est.trials();
  out.failures = est.failures();
  out.final_log10 = est.log10_estimate();
  return out;
}

}  // namespace

RunOutcome run_estimate(const Margins& margins, const SamplerConfig& sampler,
                        const RunParams& params, std::uint64_t run_seed) {
  const auto start = std::chrono::steady_clock::now();
  RunOutcome out = params.stop_heuristic ? run_stopping(margins, sampler, params, run_seed)
                                         : run_fixed(margins, sampler, params, run_seed);
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::uint64_t trials_to_stop(const RunOutcome& outcome) {
  return outcome.stopped_at.value_or(outcome.trials);
}

void write_trace_header(std::ostream& out) {
  out << "run,trial,log10_estimate,failures,stopped\n";
}

void write_trace_rows(std::ostream& out, int run_id, const std::vector<TraceRow>& rows) {
  char buf[160];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%llu,%.10g,%llu,%d\n", run_id,
                  static_cast<unsigned long long>(row.trial), row.log10_estimate,
                  static_cast<unsigned long long>(row.failures), row.stopped ? 1 : 0);
    out << buf;
  }
}

double median(std::vector<double> values) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return (values[mid - 1] + values[mid]) / 2;
}

}  // namespace bct
