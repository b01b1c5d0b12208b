#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "bct/margins.hpp"
#include "bct/rng.hpp"

namespace bct {

/// `restart` abandons a trial at the first column with no admissible
/// assignment (the trial then contributes 1/mu = 0). `feasible` prunes
/// the column distribution to assignments whose residual margins stay
/// realizable, so a trial never dead-ends on a feasible instance.
enum class Variant { restart, feasible };

/// Tables are built one column at a time; `row_wise` runs the identical
/// procedure on the transposed instance and transposes the result back.
enum class Orientation { column_wise, row_wise };

/// Order of the outer dimension (stable; ties keep the original index).
enum class Ordering { as_given, descending_sum, ascending_sum };

struct SamplerConfig {
  Variant variant = Variant::restart;
  Orientation orientation = Orientation::column_wise;
  Ordering ordering = Ordering::as_given;
  std::uint64_t seed = 0;
};

/// Permutation of outer indices (columns, or rows when row_wise) in the
/// order the sampler assigns them.
std::vector<int> order_outer(const Margins& margins, const SamplerConfig& config);

struct ColumnWeights {
  std::vector<double> weight;          // r'/(n'-r') for free rows, 0 otherwise
  std::vector<std::uint8_t> forced;    // r' == n': must take a 1
  std::vector<std::uint8_t> forbidden; // r' == 0: cannot take a 1
};

/// Per-row proposal weights for one column, with the degenerate rows
/// split out as masks instead of infinite/zero weights.
ColumnWeights column_weights(const ResidualState& residuals);

struct ColumnSample {
  std::vector<std::uint8_t> assignment;
  double log_prob;  // log of the exact probability of this assignment
};

/// Draws one column with exactly `col_sum` ones from the conditional
/// proposal distribution. Returns nullopt when no admissible assignment
/// exists (a dead end for the caller).
std::optional<ColumnSample> sample_column(const ResidualState& residuals, int col_sum,
                                          TrialRng& rng);

/// Same, but restricted (and renormalized) to assignments whose residual
/// margins against `later_col_sums` remain realizable.
std::optional<ColumnSample> sample_column_pruned(const ResidualState& residuals,
                                                 int col_sum,
                                                 std::span<const int> later_col_sums,
                                                 TrialRng& rng);

/// Exact enumeration of the (unpruned) column distribution; test
/// support, at most 20 free rows (throws TooLarge beyond that).
std::map<std::vector<std::uint8_t>, double> column_distribution(
    const ResidualState& residuals, int col_sum);

struct TrialResult {
  bool success = false;
  BinaryTable table;        // filled on success, original orientation
  double log_mu = 0;        // on success: log of the trial's proposal probability
  int dead_end_step = 0;    // 1-based position in the sampled sequence, 0 on success
  int columns_assigned = 0;
};

/// Reusable trial generator; keeps per-instance tables and workspaces so
/// repeated trials do not reallocate. One instance per thread.
class TrialSampler {
 public:
  TrialSampler(Margins margins, SamplerConfig config);

  /// Full trial with the table materialized.
  TrialResult run(TrialRng& rng);

  /// Weight-only trial: log mu on success, nullopt on a dead end.
  std::optional<double> run_log_mu(TrialRng& rng);

  const Margins& margins() const { return margins_; }
  const SamplerConfig& config() const { return config_; }

 private:
  std::optional<double> sample_columns(TrialRng& rng, BinaryTable* table, int* dead_step);

  Margins margins_;
  SamplerConfig config_;
  Margins work_;                 // column-wise view of the instance
  std::vector<int> order_;       // step -> column of `work_`
  std::vector<int> col_seq_;     // column sums in sampled order
  std::vector<std::vector<long long>> ncc_;  // per step, feasible variant only
  // per-trial scratch, reused across trials
  std::vector<int> hist_;
  std::vector<std::vector<int>> buckets_;
  std::vector<int> picks_;
  std::vector<double> dp_;
  std::vector<double> trans_;
  std::vector<long long> f_ge_;
  std::vector<long long> s_ge_;
  std::vector<double> logfact_;
};

/// One full trial. Convenience wrapper over TrialSampler.
TrialResult run_trial(const Margins& margins, const SamplerConfig& config, TrialRng& rng);

}  // namespace bct
