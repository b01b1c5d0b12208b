#include "bct/exact_count.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <unordered_map>
#include <vector>

#include "bct/errors.hpp"

namespace bct {

namespace {

double log10_choose(int n, int k) {
  if (k < 0 || k > n) return -1e300;
  return (std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)) /
         std::log(10.0);
}

void check_brute_budget(const Margins& margins) {
  const long long cells =
      static_cast<long long>(margins.n_rows()) * margins.n_cols();
  if (cells <= 30) return;
  double log10_work = 0;
  for (int c : margins.col_sums()) log10_work += log10_choose(margins.n_rows(), c);
  if (log10_work > 8.0) {
    throw TooLarge("brute-force enumeration would exceed ~1e8 column assignments");
  }
}

struct BruteWalker {
  const Margins& margins;
  const std::function<void(const BinaryTable&)>* visit;
  std::vector<int> residual;
  BinaryTable table;
  mpz_class count = 0;

  explicit BruteWalker(const Margins& m, const std::function<void(const BinaryTable&)>* v)
      : margins(m), visit(v),
        residual(m.row_sums().begin(), m.row_sums().end()),
        table(v ? BinaryTable(m.n_rows(), m.n_cols()) : BinaryTable()) {}

  void column(int j) {
    if (j == margins.n_cols()) {
      ++count;
      if (visit) (*visit)(table);
      return;
    }
    pick(j, margins.col_sum(j), 0);
  }

  void pick(int j, int need, int from) {
    const int m = margins.n_rows();
    if (need == 0) {
      const int left = margins.n_cols() - j - 1;
      for (int i = 0; i < m; ++i)
        if (residual[static_cast<size_t>(i)] > left) return;
      column(j + 1);
      return;
    }
    // Not enough candidate rows left to reach `need`.
    int avail = 0;
    for (int i = from; i < m && avail < need; ++i)
      if (residual[static_cast<size_t>(i)] > 0) ++avail;
    if (avail < need) return;
    for (int i = from; i <= m - need; ++i) {
      if (residual[static_cast<size_t>(i)] == 0) continue;
      --residual[static_cast<size_t>(i)];
      if (visit) table.set(i, j, true);
      pick(j, need - 1, i + 1);
      if (visit) table.set(i, j, false);
      ++residual[static_cast<size_t>(i)];
    }
  }
};

}  // namespace

BigCount brute_force_count(const Margins& margins) {
  check_brute_budget(margins);
  BruteWalker walker(margins, nullptr);
  walker.column(0);
  return walker.count;
}

void enumerate_tables(const Margins& margins,
                      const std::function<void(const BinaryTable&)>& visit) {
  check_brute_budget(margins);
  BruteWalker walker(margins, &visit);
  walker.column(0);
}

BigCount count_one_heavy(int m, int d) {
  // d = 0 is allowed here (degenerate heavy row); the marginal identity
  // pi1 = Z(m,d-1)/Z(m,d) needs it.
  if (m < 0 || d < 0) throw OutOfRange("one-heavy count needs m >= 0, d >= 0");
  mpz_class binom;
  mpz_bin_uiui(binom.get_mpz_t(), static_cast<unsigned long>(m) + static_cast<unsigned long>(d),
               static_cast<unsigned long>(d));
  mpz_class fact;
  mpz_fac_ui(fact.get_mpz_t(), static_cast<unsigned long>(m));
  return binom * fact;
}

BigCount count_two_heavy(int m, int d_r, int d_c) {
  const long long n = static_cast<long long>(m) + d_r - d_c;
  if (m < 1 || d_r < 1 || d_c < 1 || d_c > m || n < d_r) {
    throw InfeasibleFamily("two-heavy family needs m >= 1, d_r >= 1, 1 <= d_c <= m");
  }
  auto term = [&](int dc, int dr, int fac) {
    mpz_class a, b, f;
    mpz_bin_uiui(a.get_mpz_t(), static_cast<unsigned long>(m), static_cast<unsigned long>(dc));
    mpz_bin_uiui(b.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(dr));
    mpz_fac_ui(f.get_mpz_t(), static_cast<unsigned long>(fac));
    return mpz_class(a * b * f);
  };
  return term(d_c, d_r, m - d_c) + term(d_c - 1, d_r - 1, m - d_c + 1);
}

namespace {

// Binomial table with UINT64_MAX as an "overflowed, use mpz" sentinel.
class BinomTable {
 public:
  BinomTable(int n_max, int k_max) : k_max_(k_max), rows_(static_cast<size_t>(n_max) + 1) {
    for (int n = 0; n <= n_max; ++n) {
      auto& row = rows_[static_cast<size_t>(n)];
      row.assign(static_cast<size_t>(std::min(n, k_max)) + 1, 1);
      for (int k = 1; k < static_cast<int>(row.size()); ++k) {
        const std::uint64_t up = cell(n - 1, k);
        const std::uint64_t left = cell(n - 1, k - 1);
        row[static_cast<size_t>(k)] =
            (up == kOver || left == kOver || up > kOver - left) ? kOver : up + left;
      }
    }
  }

  std::uint64_t cell(int n, int k) const {
    if (k < 0 || k > n) return 0;
    if (k > k_max_) return kOver;
    return rows_[static_cast<size_t>(n)][static_cast<size_t>(k)];
  }

  static constexpr std::uint64_t kOver = ~0ull;

 private:
  int k_max_;
  std::vector<std::vector<std::uint64_t>> rows_;
};

struct DpState {
  std::unordered_map<std::uint64_t, mpz_class> cur, next;
  std::vector<int> hist;       // unpacked working histogram
  std::vector<int> picks;
  int bits = 0;
  int value_cap = 0;

  std::uint64_t pack(const std::vector<int>& h) const {
    std::uint64_t key = 0;
    for (int v = 0; v <= value_cap; ++v)
      key |= static_cast<std::uint64_t>(h[static_cast<size_t>(v)])
             << (static_cast<unsigned>(v) * static_cast<unsigned>(bits));
    return key;
  }
};

}  // namespace

BigCount dp_count(const Margins& margins, const DpBudget& budget) {
  const int m = margins.n_rows();
  const int n = margins.n_cols();
  const int cap = margins.max_row_sum();
  const int bits = std::bit_width(static_cast<unsigned>(m));
  if ((cap + 1) * bits > 64) {
    throw TooLarge("residual histogram does not fit a 64-bit key; max row sum too large");
  }

  DpState dp;
  dp.bits = bits;
  dp.value_cap = cap;
  std::vector<int> h0(static_cast<size_t>(cap) + 1, 0);
  for (int r : margins.row_sums()) ++h0[static_cast<size_t>(r)];
  dp.cur.emplace(dp.pack(h0), 1);

  std::vector<int> cols(margins.col_sums().begin(), margins.col_sums().end());
  std::sort(cols.begin(), cols.end(), std::greater<int>());

  BinomTable binom(m, std::min(cap == 0 ? 0 : m, cols.empty() ? 0 : cols.front()));
  std::uint64_t transitions = 0;

  std::vector<int> h(static_cast<size_t>(cap) + 1);
  std::vector<int> pick(static_cast<size_t>(cap) + 1, 0);

  for (int j = 0; j < n; ++j) {
    const int c = cols[static_cast<size_t>(j)];
    const int left_after = n - j - 1;
    dp.next.clear();

    for (const auto& [key, ways] : dp.cur) {
      for (int v = 0; v <= cap; ++v)
        h[static_cast<size_t>(v)] = static_cast<int>(
            (key >> (static_cast<unsigned>(v) * static_cast<unsigned>(bits))) &
            ((1ull << bits) - 1));

      // Choose pick[v] rows from each residual class v >= 1, sum = c.
      // Rows with residual == left_after + 1 must be picked; residuals
      // beyond that can never finish.
      auto descend = [&](auto&& self, int v, int need) -> void {
        if (v == 0) {
          if (need != 0) return;
          ++transitions;
          if (transitions > budget.max_transitions)
            throw TooLarge("dp_count transition budget exceeded");
          std::uint64_t mult = 1;
          bool big = false;
          for (int u = 1; u <= cap && !big; ++u) {
            const std::uint64_t b = binom.cell(h[static_cast<size_t>(u)],
                                               pick[static_cast<size_t>(u)]);
            if (b == BinomTable::kOver || __builtin_mul_overflow(mult, b, &mult)) big = true;
          }
          std::uint64_t nkey = 0;
          for (int u = 0; u <= cap; ++u) {
            const int nh = h[static_cast<size_t>(u)] - pick[static_cast<size_t>(u)] +
                           (u + 1 <= cap ? pick[static_cast<size_t>(u) + 1] : 0);
            nkey |= static_cast<std::uint64_t>(nh)
                    << (static_cast<unsigned>(u) * static_cast<unsigned>(bits));
          }
          auto& slot = dp.next[nkey];
          if (!big) {
            mpz_addmul_ui(slot.get_mpz_t(), ways.get_mpz_t(), mult);
          } else {
            mpz_class mz = 1;
            for (int u = 1; u <= cap; ++u) {
              mpz_class b;
              mpz_bin_uiui(b.get_mpz_t(),
                           static_cast<unsigned long>(h[static_cast<size_t>(u)]),
                           static_cast<unsigned long>(pick[static_cast<size_t>(u)]));
              mz *= b;
            }
            slot += ways * mz;
          }
          return;
        }
        const int have = h[static_cast<size_t>(v)];
        if (v > left_after + 1) {
          if (have != 0) return;  // dead state
          pick[static_cast<size_t>(v)] = 0;
          self(self, v - 1, need);
          return;
        }
        int lo = (v == left_after + 1) ? have : 0;
        const int hi = std::min(have, need);
        if (lo > hi) return;
        for (int k = lo; k <= hi; ++k) {
          pick[static_cast<size_t>(v)] = k;
          self(self, v - 1, need - k);
        }
        pick[static_cast<size_t>(v)] = 0;
      };
      pick.assign(pick.size(), 0);
      descend(descend, cap, c);
    }

    std::swap(dp.cur, dp.next);
    if (dp.cur.size() + dp.next.size() > budget.max_live_states)
      throw TooLarge("dp_count state budget exceeded");
  }

  std::vector<int> done(static_cast<size_t>(cap) + 1, 0);
  done[0] = m;
  auto it = dp.cur.find(dp.pack(done));
  return it == dp.cur.end() ? BigCount(0) : it->second;
}

double log10_of(const BigCount& count) {
  if (count <= 0) throw ZeroCount("log10 of a non-positive count");
  signed long int exp2 = 0;
  const double mant = mpz_get_d_2exp(&exp2, count.get_mpz_t());
  return std::log10(mant) + static_cast<double>(exp2) * std::log10(2.0);
}

std::string scientific(const BigCount& count, int significant) {
  if (count == 0) return "0";
  std::string digits = count.get_str();
  int exponent = static_cast<int>(digits.size()) - 1;
  if (static_cast<int>(digits.size()) > significant) {
    const bool round_up = digits[static_cast<size_t>(significant)] >= '5';
    digits.resize(static_cast<size_t>(significant));
    if (round_up) {
      int i = significant - 1;
      while (i >= 0 && digits[static_cast<size_t>(i)] == '9') {
        digits[static_cast<size_t>(i)] = '0';
        --i;
      }
      if (i < 0) {
        digits.insert(digits.begin(), '1');
        digits.resize(static_cast<size_t>(significant));
        ++exponent;
      } else {
        ++digits[static_cast<size_t>(i)];
      }
    }
  } else {
    digits.append(static_cast<size_t>(significant) - digits.size(), '0');
  }
  std::string out;
  out += digits[0];
  if (significant > 1) {
    out += '.';
    out += digits.substr(1);
  }
  out += " × 10^";
  out += std::to_string(exponent);
  return out;
}

std::string count_report(const BigCount& count) {
  const std::string sci = scientific(count);
  std::string dec = count.get_str();
  if (dec.size() <= 40) return dec + " (" + sci + ")";
  return sci;
}

}  // namespace bct
