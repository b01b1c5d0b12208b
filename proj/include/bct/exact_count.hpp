#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <functional>
#include <string>

#include "bct/margins.hpp"

namespace bct {

/// Exact table counts are arbitrary-precision integers.
using BigCount = mpz_class;

/// Exact |Omega| by recursive column assignment with residual pruning.
/// Intended as the ground-truth oracle for small instances; throws
/// TooLarge when the estimated search cost exceeds the budget
/// (n_rows * n_cols <= 30 is always accepted).
BigCount brute_force_count(const Margins& margins);

/// Visits every table realizing the margins, in a deterministic order.
/// Same budget rules as brute_force_count.
void enumerate_tables(const Margins& margins,
                      const std::function<void(const BinaryTable&)>& visit);

/// C(m+d, d) * m!, the count for the one-heavy family.
BigCount count_one_heavy(int m, int d);

/// Two-term closed form for the two-heavy family, n = m + d_r - d_c:
/// C(m,d_c) C(n,d_r) (m-d_c)! + C(m,d_c-1) C(n,d_r-1) (m-d_c+1)!
BigCount count_two_heavy(int m, int d_r, int d_c);

struct DpBudget {
  std::uint64_t max_live_states = 8'000'000;
  std::uint64_t max_transitions = 4'000'000'000;
};

/// Exact |Omega| by dynamic programming over the histogram of residual
/// row sums, advanced column by column (columns processed in sorted
/// order). Scales to instances like 50x50 with all sums 5. Throws
/// TooLarge when the histogram cannot be packed into a 64-bit key or a
/// budget is exceeded.
BigCount dp_count(const Margins& margins, const DpBudget& budget = {});

/// log10 of a positive count, accurate to well below 1e-9.
double log10_of(const BigCount& count);

/// "d.ddd x 10^E" with the given number of significant digits.
std::string scientific(const BigCount& count, int significant = 4);

/// Exact decimal when at most 40 digits, always followed by the
/// scientific form for large counts.
std::string count_report(const BigCount& count);

}  // namespace bct
