#include "bct/sampler.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

#include "bct/errors.hpp"

namespace bct {

namespace {

void ensure_logfact(std::vector<double>& lf, int n) {
  if (static_cast<int>(lf.size()) > n) return;
  size_t i = lf.size();
  lf.resize(static_cast<size_t>(n) + 1);
  if (i == 0) {
    lf[0] = 0.0;
    i = 1;
  }
  for (; i < lf.size(); ++i) lf[i] = lf[i - 1] + std::log(static_cast<double>(i));
}

double log_choose(const std::vector<double>& lf, int n, int k) {
  return lf[static_cast<size_t>(n)] - lf[static_cast<size_t>(k)] -
         lf[static_cast<size_t>(n - k)];
}

// Exact sampling of per-value pick counts for one column.
//
// Rows are grouped by residual value v; all rows of a class share the
// proposal weight v/(n'-v), so an assignment is a choice of k_v ones per
// class with multiplicity C(count_v, k_v). Rows with v = n' are forced,
// rows with v = 0 forbidden. The DP walks values downward tracking the
// number of ones placed so far.
//
// With `ncc` set, a transition survives only if the margins left for the
// remaining columns stay realizable. Writing F/S for count/sum of rows
// with value >= w and K for ones placed at values > w, the largest
// residuals after this column sum to S - w*k - K over the top F - k
// rows, which must not exceed ncc[F - k] = sum_j min(c''_j, F - k).
// Checking every value boundary suffices: the top-k sum is concave in k,
// so violations always show at a boundary.
//
// The fast pass runs in linear space with per-class and per-layer
// max-normalization. A single class can still span more orders of
// magnitude than a double holds (a column of sum ~240 drawn from ~300
// near-uniform rows puts the reachable band ~e^-1150 below the class
// maximum), in which case the normalized pass reports no admissible
// mass; the column is then redone in log space, where the identical
// recurrence is immune to range.
//
// On success fills picks[v] for v = 0..n_prime and the exact log
// probability of the drawn class counts net of within-class choices.
struct ColumnDp {
  const std::vector<int>& hist;
  int n_prime;
  int c;
  const std::vector<long long>* ncc;
  const std::vector<double>& logfact;
  std::vector<double>& dp;     // (n_prime+1) x (c+1) cells
  std::vector<double>& trans;  // per-class transition weights
  std::vector<long long>& f_ge;
  std::vector<long long>& s_ge;

  bool survives(int w, int placed_above, int k) const {
    if (!ncc) return true;
    const long long pos = f_ge[static_cast<size_t>(w)] - k;
    return s_ge[static_cast<size_t>(w)] - static_cast<long long>(w) * k - placed_above <=
           (*ncc)[static_cast<size_t>(pos)];
  }

  void class_range(int w, int& klo, int& khi) const {
    const int cnt = hist[static_cast<size_t>(w)];
    if (w == n_prime) {
      klo = khi = cnt;
    } else {
      klo = 0;
      khi = std::min(cnt, c);
    }
  }

  // log of C(cnt, k) * (w/(n'-w))^k, the raw transition weight
  double log_weight(int w, int k) const {
    if (w == n_prime) return 0.0;
    const double logw = std::log(static_cast<double>(w)) -
                        std::log(static_cast<double>(n_prime - w));
    return log_choose(logfact, hist[static_cast<size_t>(w)], k) + k * logw;
  }

  void fill_trans(int w, int klo, int khi, bool log_domain) const {
    trans.assign(static_cast<size_t>(khi) + 1, log_domain ? -HUGE_VAL : 0.0);
    double tmax = -HUGE_VAL;
    for (int k = klo; k <= khi; ++k) {
      trans[static_cast<size_t>(k)] = log_weight(w, k);
      tmax = std::max(tmax, trans[static_cast<size_t>(k)]);
    }
    if (log_domain) return;
    for (int k = klo; k <= khi; ++k)
      trans[static_cast<size_t>(k)] = std::exp(trans[static_cast<size_t>(k)] - tmax);
  }

  // Builds the table and samples downward; identical recurrence in both
  // domains. Returns false when no admissible mass survives (for the
  // linear domain that may also mean underflow).
  bool run(bool log_domain, TrialRng& rng, std::vector<int>& picks, double* log_prob) {
    const double none = log_domain ? -HUGE_VAL : 0.0;
    const size_t stride = static_cast<size_t>(c) + 1;
    dp.assign(static_cast<size_t>(n_prime + 1) * stride, none);
    dp[stride - 1] = log_domain ? 0.0 : 1.0;  // layer 0: everything placed

    for (int w = 1; w <= n_prime; ++w) {
      int klo = 0;
      int khi = 0;
      class_range(w, klo, khi);
      if (klo > c) return false;  // forced rows alone exceed the column sum
      fill_trans(w, klo, khi, log_domain);
      const double* prev = &dp[static_cast<size_t>(w - 1) * stride];
      double* cur = &dp[static_cast<size_t>(w) * stride];
      double layer_max = none;
      for (int placed = 0; placed <= c; ++placed) {
        const int kmax = std::min(khi, c - placed);
        double acc = none;
        for (int k = klo; k <= kmax; ++k) {
          if (!survives(w, placed, k)) continue;
          const double t = trans[static_cast<size_t>(k)];
          const double p = prev[static_cast<size_t>(placed + k)];
          if (log_domain) {
            if (p == -HUGE_VAL) continue;
            const double term = t + p;
            if (acc == -HUGE_VAL) {
              acc = term;
            } else {
              const double hi = std::max(acc, term);
              acc = hi + std::log1p(std::exp(std::min(acc, term) - hi));
            }
          } else {
            acc += t * p;
          }
        }
        cur[static_cast<size_t>(placed)] = acc;
        layer_max = std::max(layer_max, acc);
      }
      if (layer_max == none && !log_domain) return false;
      if (log_domain && layer_max == -HUGE_VAL) return false;
      if (!log_domain) {
        for (int placed = 0; placed <= c; ++placed)
          cur[static_cast<size_t>(placed)] /= layer_max;
      }
    }
    if (dp[static_cast<size_t>(n_prime) * stride] == none) return false;

    picks.assign(static_cast<size_t>(n_prime) + 1, 0);
    int placed = 0;
    double lp = 0.0;
    std::vector<double>& weights = trans;
    for (int w = n_prime; w >= 1; --w) {
      int klo = 0;
      int khi = 0;
      class_range(w, klo, khi);
      fill_trans(w, klo, khi, log_domain);
      const double* prev = &dp[static_cast<size_t>(w - 1) * stride];
      const int kmax = std::min(khi, c - placed);
      // candidate masses, shifted out of log space where needed
      double shift = 0.0;
      if (log_domain) {
        shift = -HUGE_VAL;
        for (int k = klo; k <= kmax; ++k) {
          if (!survives(w, placed, k)) continue;
          if (prev[static_cast<size_t>(placed + k)] == -HUGE_VAL) continue;
          shift = std::max(shift, weights[static_cast<size_t>(k)] +
                                      prev[static_cast<size_t>(placed + k)]);
        }
        if (shift == -HUGE_VAL) return false;
      }
      double total = 0.0;
      for (int k = klo; k <= kmax; ++k) {
        if (!survives(w, placed, k)) continue;
        const double p = prev[static_cast<size_t>(placed + k)];
        total += log_domain
                     ? (p == -HUGE_VAL ? 0.0
                                       : std::exp(weights[static_cast<size_t>(k)] + p - shift))
                     : weights[static_cast<size_t>(k)] * p;
      }
      if (!(total > 0.0)) return false;
      const double u = rng.next_unit() * total;
      double cum = 0.0;
      int chosen = -1;
      double p_chosen = 0.0;
      for (int k = klo; k <= kmax; ++k) {
        if (!survives(w, placed, k)) continue;
        const double p = prev[static_cast<size_t>(placed + k)];
        const double mass =
            log_domain ? (p == -HUGE_VAL
                              ? 0.0
                              : std::exp(weights[static_cast<size_t>(k)] + p - shift))
                       : weights[static_cast<size_t>(k)] * p;
        if (mass <= 0.0) continue;
        cum += mass;
        chosen = k;
        p_chosen = mass;
        if (u < cum) break;
      }
      if (chosen < 0) return false;
      lp += std::log(p_chosen / total);
      if (w < n_prime) lp -= log_choose(logfact, hist[static_cast<size_t>(w)], chosen);
      picks[static_cast<size_t>(w)] = chosen;
      placed += chosen;
    }
    assert(placed == c);
    *log_prob = lp;
    return true;
  }
};

bool sample_column_counts(const std::vector<int>& hist, int n_prime, int col_sum,
                          const std::vector<long long>* ncc,
                          const std::vector<double>& logfact, std::vector<double>& dp,
                          std::vector<double>& trans, std::vector<long long>& f_ge,
                          std::vector<long long>& s_ge, TrialRng& rng,
                          std::vector<int>& picks, double* log_prob) {
  const int c = col_sum;
  if (c < 0) return false;
  const int forced = hist[static_cast<size_t>(n_prime)];
  long long free_total = 0;
  for (int v = 1; v < n_prime; ++v) free_total += hist[static_cast<size_t>(v)];
  if (forced > c || c - forced > free_total) return false;

  f_ge.assign(static_cast<size_t>(n_prime) + 2, 0);
  s_ge.assign(static_cast<size_t>(n_prime) + 2, 0);
  for (int w = n_prime; w >= 1; --w) {
    f_ge[static_cast<size_t>(w)] =
        f_ge[static_cast<size_t>(w) + 1] + hist[static_cast<size_t>(w)];
    s_ge[static_cast<size_t>(w)] = s_ge[static_cast<size_t>(w) + 1] +
                                   static_cast<long long>(w) * hist[static_cast<size_t>(w)];
  }

  ColumnDp column{hist, n_prime, c, ncc, logfact, dp, trans, f_ge, s_ge};
  // The rng must not advance on a failed linear pass, or the log pass
  // would sample from a shifted stream.
  TrialRng probe = rng;
  if (column.run(/*log_domain=*/false, probe, picks, log_prob)) {
    rng = probe;
    return true;
  }
  return column.run(/*log_domain=*/true, rng, picks, log_prob);
}

void accumulate_min_profile(std::vector<long long>& acc, int col_sum) {
  const int m = static_cast<int>(acc.size()) - 1;
  for (int p = 1; p <= m; ++p) acc[static_cast<size_t>(p)] += std::min(col_sum, p);
}

// Uniform k-subset of the bucket prefix via partial Fisher-Yates; the
// chosen rows end up in bucket[0..k).
void shuffle_prefix(std::vector<int>& bucket, int k, TrialRng& rng) {
  for (int t = 0; t < k; ++t) {
    const size_t idx =
        static_cast<size_t>(t) + rng.next_below(bucket.size() - static_cast<size_t>(t));
    std::swap(bucket[idx], bucket[static_cast<size_t>(t)]);
  }
}

std::optional<ColumnSample> sample_column_impl(const ResidualState& residuals, int col_sum,
                                               const std::vector<long long>* ncc,
                                               TrialRng& rng) {
  const int n_prime = residuals.columns_remaining;
  if (n_prime < 1) throw OutOfRange("columns_remaining must be at least 1");
  const int m = static_cast<int>(residuals.residual_rows.size());
  std::vector<int> hist(static_cast<size_t>(n_prime) + 2, 0);
  for (int r : residuals.residual_rows) {
    if (r < 0 || r > n_prime) throw OutOfRange("residual row sum outside [0, n']");
    ++hist[static_cast<size_t>(r)];
  }
  std::vector<double> logfact;
  ensure_logfact(logfact, m);
  std::vector<double> dp;
  std::vector<double> trans;
  std::vector<long long> f_ge;
  std::vector<long long> s_ge;
  std::vector<int> picks;
  double lp = 0.0;
  if (!sample_column_counts(hist, n_prime, col_sum, ncc, logfact, dp, trans, f_ge, s_ge,
                            rng, picks, &lp)) {
    return std::nullopt;
  }
  std::vector<std::vector<int>> buckets(static_cast<size_t>(n_prime) + 1);
  for (int i = 0; i < m; ++i)
    buckets[static_cast<size_t>(residuals.residual_rows[static_cast<size_t>(i)])].push_back(i);
  ColumnSample out;
  out.assignment.assign(static_cast<size_t>(m), 0);
  out.log_prob = lp;
  for (int v = 1; v <= n_prime; ++v) {
    const int k = picks[static_cast<size_t>(v)];
    if (k == 0) continue;
    auto& bucket = buckets[static_cast<size_t>(v)];
    shuffle_prefix(bucket, k, rng);
    for (int t = 0; t < k; ++t) out.assignment[static_cast<size_t>(bucket[static_cast<size_t>(t)])] = 1;
  }
  return out;
}

}  // namespace

std::vector<int> order_outer(const Margins& margins, const SamplerConfig& config) {
  const auto sums = config.orientation == Orientation::column_wise ? margins.col_sums()
                                                                   : margins.row_sums();
  std::vector<int> order(sums.size());
  std::iota(order.begin(), order.end(), 0);
  if (config.ordering == Ordering::descending_sum) {
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return sums[static_cast<size_t>(a)] > sums[static_cast<size_t>(b)];
    });
  } else if (config.ordering == Ordering::ascending_sum) {
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return sums[static_cast<size_t>(a)] < sums[static_cast<size_t>(b)];
    });
  }
  return order;
}

ColumnWeights column_weights(const ResidualState& residuals) {
  const int n_prime = residuals.columns_remaining;
  if (n_prime < 1) throw OutOfRange("columns_remaining must be at least 1");
  const size_t m = residuals.residual_rows.size();
  ColumnWeights out;
  out.weight.assign(m, 0.0);
  out.forced.assign(m, 0);
  out.forbidden.assign(m, 0);
  for (size_t i = 0; i < m; ++i) {
    const int r = residuals.residual_rows[i];
    if (r < 0 || r > n_prime) throw OutOfRange("residual row sum outside [0, n']");
    if (r == 0) {
      out.forbidden[i] = 1;
    } else if (r == n_prime) {
      out.forced[i] = 1;
    } else {
      out.weight[i] = static_cast<double>(r) / static_cast<double>(n_prime - r);
    }
  }
  return out;
}

std::optional<ColumnSample> sample_column(const ResidualState& residuals, int col_sum,
                                          TrialRng& rng) {
  return sample_column_impl(residuals, col_sum, nullptr, rng);
}

std::optional<ColumnSample> sample_column_pruned(const ResidualState& residuals,
                                                 int col_sum,
                                                 std::span<const int> later_col_sums,
                                                 TrialRng& rng) {
  std::vector<long long> ncc(residuals.residual_rows.size() + 1, 0);
  for (int c : later_col_sums) accumulate_min_profile(ncc, c);
  return sample_column_impl(residuals, col_sum, &ncc, rng);
}

std::map<std::vector<std::uint8_t>, double> column_distribution(
    const ResidualState& residuals, int col_sum) {
  const auto masks = column_weights(residuals);
  const int m = static_cast<int>(residuals.residual_rows.size());
  int free_rows = 0;
  int forced = 0;
  for (int i = 0; i < m; ++i) {
    if (masks.forced[static_cast<size_t>(i)]) ++forced;
    else if (!masks.forbidden[static_cast<size_t>(i)]) ++free_rows;
  }
  if (free_rows > 20) throw TooLarge("column_distribution supports at most 20 free rows");

  std::map<std::vector<std::uint8_t>, double> dist;
  std::vector<std::uint8_t> current(static_cast<size_t>(m), 0);
  double total = 0.0;

  auto walk = [&](auto&& self, int i, int need, double weight) -> void {
    if (need < 0) return;
    if (i == m) {
      if (need == 0) {
        dist[current] = weight;
        total += weight;
      }
      return;
    }
    if (masks.forbidden[static_cast<size_t>(i)]) {
      self(self, i + 1, need, weight);
      return;
    }
    if (masks.forced[static_cast<size_t>(i)]) {
      current[static_cast<size_t>(i)] = 1;
      self(self, i + 1, need - 1, weight);
      current[static_cast<size_t>(i)] = 0;
      return;
    }
    self(self, i + 1, need, weight);
    current[static_cast<size_t>(i)] = 1;
    self(self, i + 1, need - 1, weight * masks.weight[static_cast<size_t>(i)]);
    current[static_cast<size_t>(i)] = 0;
  };
  walk(walk, 0, col_sum, 1.0);

  for (auto& [vec, w] : dist) w /= total;
  return dist;
}

TrialSampler::TrialSampler(Margins margins, SamplerConfig config)
    : margins_(std::move(margins)),
      config_(config),
      work_(config.orientation == Orientation::column_wise ? margins_
                                                           : margins_.transposed()) {
  order_ = order_outer(margins_, config_);
  col_seq_.reserve(order_.size());
  for (int j : order_) col_seq_.push_back(work_.col_sum(j));

  if (config_.variant == Variant::feasible) {
    if (!gale_ryser_feasible(margins_)) {
      throw InfeasibleInstance("feasible-variant sampling needs realizable margins");
    }
    const int m = work_.n_rows();
    const int n = work_.n_cols();
    ncc_.assign(static_cast<size_t>(n), {});
    std::vector<long long> acc(static_cast<size_t>(m) + 1, 0);
    for (int j = n - 1; j >= 0; --j) {
      ncc_[static_cast<size_t>(j)] = acc;
      accumulate_min_profile(acc, col_seq_[static_cast<size_t>(j)]);
    }
  }
  ensure_logfact(logfact_, work_.n_rows());
}

std::optional<double> TrialSampler::sample_columns(TrialRng& rng, BinaryTable* table,
                                                   int* dead_step) {
  const int n = work_.n_cols();
  hist_.assign(static_cast<size_t>(n) + 2, 0);
  for (int r : work_.row_sums()) ++hist_[static_cast<size_t>(r)];
  if (table) {
    buckets_.assign(static_cast<size_t>(n) + 2, {});
    for (int i = 0; i < work_.n_rows(); ++i)
      buckets_[static_cast<size_t>(work_.row_sum(i))].push_back(i);
  }

  double log_mu = 0.0;
  for (int j = 0; j < n; ++j) {
    const int n_prime = n - j;
    double lp = 0.0;
    const bool ok = sample_column_counts(
        hist_, n_prime, col_seq_[static_cast<size_t>(j)],
        config_.variant == Variant::feasible ? &ncc_[static_cast<size_t>(j)] : nullptr,
        logfact_, dp_, trans_, f_ge_, s_ge_, rng, picks_, &lp);
    if (!ok) {
      if (config_.variant == Variant::feasible) {
        throw Error("internal: feasible sampler hit a dead end on a realizable instance");
      }
      if (dead_step) *dead_step = j + 1;
      return std::nullopt;
    }
    log_mu += lp;
    if (table) {
      for (int v = 1; v <= n_prime; ++v) {
        const int k = picks_[static_cast<size_t>(v)];
        if (k == 0) continue;
        auto& bucket = buckets_[static_cast<size_t>(v)];
        shuffle_prefix(bucket, k, rng);
        for (int t = 0; t < k; ++t) {
          table->set(bucket[static_cast<size_t>(t)], order_[static_cast<size_t>(j)], true);
          buckets_[static_cast<size_t>(v) - 1].push_back(bucket[static_cast<size_t>(t)]);
        }
        bucket.erase(bucket.begin(), bucket.begin() + k);
      }
    }
    for (int v = 1; v <= n_prime; ++v) {
      hist_[static_cast<size_t>(v)] -= picks_[static_cast<size_t>(v)];
      hist_[static_cast<size_t>(v) - 1] += picks_[static_cast<size_t>(v)];
    }
  }
  return log_mu;
}

TrialResult TrialSampler::run(TrialRng& rng) {
  TrialResult out;
  BinaryTable table(work_.n_rows(), work_.n_cols());
  int dead = 0;
  const auto log_mu = sample_columns(rng, &table, &dead);
  if (!log_mu) {
    out.dead_end_step = dead;
    out.columns_assigned = dead - 1;
    return out;
  }
  out.success = true;
  out.log_mu = *log_mu;
  out.columns_assigned = work_.n_cols();
  out.table = config_.orientation == Orientation::row_wise ? table.transposed()
                                                           : std::move(table);
  return out;
}

std::optional<double> TrialSampler::run_log_mu(TrialRng& rng) {
  int dead = 0;
  return sample_columns(rng, nullptr, &dead);
}

TrialResult run_trial(const Margins& margins, const SamplerConfig& config, TrialRng& rng) {
  TrialSampler sampler(margins, config);
  return sampler.run(rng);
}

}  // namespace bct
