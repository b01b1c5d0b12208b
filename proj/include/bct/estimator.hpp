#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <utility>

#include "bct/sampler.hpp"

namespace bct {

struct EstimatorParams {
  double epsilon = 0.01;
  int k = 5;
  int window_n = 0;  // N = n_rows + n_cols of the instance

  friend bool operator==(const EstimatorParams&, const EstimatorParams&) = default;
};

struct StopDecision {
  bool stopped = false;
  std::uint64_t at_trial = 0;
  double final_log10_estimate = 0;
};

/// Log-domain accumulator for X_t = (1/t) sum_i 1/mu(T_i).
///
/// Dead-end trials contribute a zero term: they advance t (and the
/// stopping window) without touching the sum. All magnitudes are carried
/// as natural logs so 1/mu values with log10 magnitudes up to ~1e6 are
/// fine; the exposed estimate is log10 X_t.
class RunningEstimate {
 public:
  explicit RunningEstimate(EstimatorParams params) : params_(params) {}

  void accumulate(const TrialResult& trial);
  void add_success(double log_mu);
  void add_dead_end();

  std::uint64_t trials() const { return trials_; }
  std::uint64_t failures() const { return failures_; }
  std::uint64_t successes() const { return trials_ - failures_; }
  bool has_estimate() const { return trials_ > failures_; }

  /// log10 X_t; -infinity while nothing has succeeded.
  double log10_estimate() const;

  /// Natural log of sum_i 1/mu; -infinity for the all-zero state.
  double log_sum() const { return log_sum_; }

  const EstimatorParams& params() const { return params_; }
  bool window_valid() const { return window_valid_; }

  /// Stop once the last k*N estimates (one per trial, the current one
  /// included) all lie within a (1+epsilon) factor of the current one.
  /// Throws WindowInvalid on a merged accumulator.
  StopDecision should_stop() const;

  /// Parallel reduction: trials and log-sums combine exactly; the
  /// stopping window does not survive a merge.
  static RunningEstimate merged(const RunningEstimate& a, const RunningEstimate& b);

 private:
  void push_window();

  EstimatorParams params_;
  std::uint64_t trials_ = 0;
  std::uint64_t failures_ = 0;
  double log_sum_ = -HUGE_VAL;
  double last_log_ = -HUGE_VAL;  // ln X_t
  bool window_valid_ = true;
  // Monotonic deques over the sliding window of ln X values.
  std::deque<std::pair<std::uint64_t, double>> max_dq_;
  std::deque<std::pair<std::uint64_t, double>> min_dq_;
};

}  // namespace bct
