#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "bct/estimator.hpp"
#include "bct/margins.hpp"
#include "bct/sampler.hpp"

namespace bct {

struct RunParams {
  bool stop_heuristic = false;
  std::uint64_t max_trials = 100000;  // hard cap; also the trial count in fixed mode
  double epsilon = 0.01;
  int k = 5;
  int jobs = 1;                  // fixed-trials mode only; stop mode is sequential
  double past_stop_factor = 1.0; // keep sampling until factor * stop trial
  bool keep_trace = true;
};

struct TraceRow {
  std::uint64_t trial = 0;
  double log10_estimate = 0;
  std::uint64_t failures = 0;
  bool stopped = false;
};

struct RunOutcome {
  std::uint64_t trials = 0;
  std::uint64_t failures = 0;
  double final_log10 = 0;
  std::optional<std::uint64_t> stopped_at;
  std::vector<TraceRow> trace;
  double wall_seconds = 0;
};

/// Trace striding: every trial up to 1e5 is emitted; past that, trial t
/// appears only when t is a multiple of ceil(t / 1e4). The stopping rule
/// always sees every trial regardless of striding.
bool trace_emits(std::uint64_t t);

/// One estimation run. Trial k draws from the substream (run_seed, k),
/// so fixed-trials runs produce identical results for any worker count.
RunOutcome run_estimate(const Margins& margins, const SamplerConfig& sampler,
                        const RunParams& params, std::uint64_t run_seed);

/// Trials consumed before the stopping rule fired (cap value when it never did).
std::uint64_t trials_to_stop(const RunOutcome& outcome);

void write_trace_header(std::ostream& out);
void write_trace_rows(std::ostream& out, int run_id, const std::vector<TraceRow>& rows);

double median(std::vector<double> values);

}  // namespace bct
