#include "bct/estimator.hpp"

#include <cmath>

#include "bct/errors.hpp"

namespace bct {

namespace {

double logaddexp(double a, double b) {
  if (a == -HUGE_VAL) return b;
  if (b == -HUGE_VAL) return a;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

constexpr double kLn10 = 2.302585092994045684;

}  // namespace

void RunningEstimate::accumulate(const TrialResult& trial) {
  if (trial.success)
    add_success(trial.log_mu);
  else
    add_dead_end();
}

void RunningEstimate::add_success(double log_mu) {
  ++trials_;
  log_sum_ = logaddexp(log_sum_, -log_mu);
  push_window();
}

void RunningEstimate::add_dead_end() {
  ++trials_;
  ++failures_;
  push_window();
}

void RunningEstimate::push_window() {
  last_log_ = log_sum_ - std::log(static_cast<double>(trials_));
  if (!window_valid_) return;
  const std::uint64_t window =
      static_cast<std::uint64_t>(params_.k) * static_cast<std::uint64_t>(params_.window_n);
  if (window == 0) return;
  while (!max_dq_.empty() && max_dq_.back().second <= last_log_) max_dq_.pop_back();
  max_dq_.emplace_back(trials_, last_log_);
  while (!min_dq_.empty() && min_dq_.back().second >= last_log_) min_dq_.pop_back();
  min_dq_.emplace_back(trials_, last_log_);
  const std::uint64_t oldest = trials_ >= window ? trials_ - window + 1 : 1;
  while (max_dq_.front().first < oldest) max_dq_.pop_front();
  while (min_dq_.front().first < oldest) min_dq_.pop_front();
}

double RunningEstimate::log10_estimate() const {
  if (trials_ == 0 || !has_estimate()) return -HUGE_VAL;
  return log_sum_ / kLn10 - std::log10(static_cast<double>(trials_));
}

StopDecision RunningEstimate::should_stop() const {
  if (!window_valid_) throw WindowInvalid("stopping window does not survive a merge");
  StopDecision decision;
  decision.at_trial = trials_;
  decision.final_log10_estimate = log10_estimate();
  const std::uint64_t window =
      static_cast<std::uint64_t>(params_.k) * static_cast<std::uint64_t>(params_.window_n);
  if (window == 0 || trials_ < window) return decision;
  const double tol = std::log1p(params_.epsilon);
  decision.stopped = max_dq_.front().second <= last_log_ + tol &&
                     min_dq_.front().second >= last_log_ - tol;
  return decision;
}

RunningEstimate RunningEstimate::merged(const RunningEstimate& a, const RunningEstimate& b) {
  if (!(a.params_ == b.params_)) {
    throw ParamMismatch("cannot merge estimates with different parameters");
  }
  RunningEstimate out(a.params_);
  out.trials_ = a.trials_ + b.trials_;
  out.failures_ = a.failures_ + b.failures_;
  out.log_sum_ = logaddexp(a.log_sum_, b.log_sum_);
  out.window_valid_ = false;
  if (out.trials_ > 0)
    out.last_log_ = out.log_sum_ - std::log(static_cast<double>(out.trials_));
  return out;
}

}  // namespace bct
