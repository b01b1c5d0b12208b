#pragma once

#include <optional>
#include <string>

namespace bct {

// Everything here is closed-form arithmetic in extended precision
// (long double, 64-bit significand on x86-64).

struct OneHeavyMarginals {
  long double pi1;  // true probability of a 1 at (heavy row, first column)
  long double mu1;  // the SIS proposal's probability of the same event
};

/// One-heavy family (1,...,1,d) x unit columns:
/// pi1 = d/(m+d), mu1 = d(m+d-1)/(d(m+d-1)+m^2).
OneHeavyMarginals marginals_one_heavy(int m, int d);

struct BoundPair {
  long double f;
  long double g;
};

/// f(d,m,i) = d/(m+d-i) upper-bounds the true marginal in column i;
/// g(d,m,i) = (d-i)(m+d-i-1)/(d(m+d-1)+m^2) lower-bounds the SIS one.
/// Valid for 0 <= i < d; f is increasing and g decreasing in i.
BoundPair bounds_one_heavy(int m, int d, int i);

struct OneHeavyLimits {
  long double f_inf;
  long double g_inf;
  long double delta;  // g_inf(0,beta) - f_inf(0,beta), always > 0 for beta > 0
};

/// Large-m limits along d = beta*m, i = alpha*m.
OneHeavyLimits asymptotics_one_heavy(long double alpha, long double beta);

/// The alpha < beta where the limit gap g_inf - f_inf has shrunk to
/// half of delta_beta; found by bisection (residual <= 1e-12).
long double alpha_threshold_one_heavy(long double beta);

/// Two-heavy family: f2 = true marginal, g2 = SIS marginal of a 1 at
/// (heavy row, first unit column), with n = m + d_r - d_c.
BoundPair marginals_two_heavy(int m, int d_r, int d_c);

/// Column-i bounds f3 (upper, true) and g3 (lower, SIS), valid for
/// 1 <= i < min(n - d_r, d_r).
BoundPair bounds_two_heavy(int m, int d_r, int d_c, int i);

struct TwoHeavyLimits {
  long double f2_inf;
  long double g2_inf;
  long double f3_inf;
  long double g3_inf;
  long double delta;  // g2_inf - f2_inf; zero iff beta == gamma
};

TwoHeavyLimits asymptotics_two_heavy(long double alpha, long double beta,
                                     long double gamma);

/// Same-shape threshold for the two-heavy limits when delta > 0.
long double alpha_threshold_two_heavy(long double beta, long double gamma);

/// Limits for the trailing all-unit-column subtable reached after the
/// heavy column was assigned within the first alpha*m columns.
/// f4 increasing, g4 decreasing in each of alpha, alpha_prime.
BoundPair subtable_asymptotics(long double alpha, long double beta,
                               long double alpha_prime);

struct FailureBound {
  long double b1;     // exp(-(g-f)^2 alpha / 16)
  long double bound;  // 3 (b1 b2)^m
};

/// Chernoff-based failure probability for separated marginal bounds
/// f < g over an alpha*m-column window. Requires 0 <= f < g <= 1,
/// alpha in (0,1) and 1 < b2 < 1/b1.
FailureBound failure_bound(long double alpha, long double f, long double g,
                           long double b2, int m);

/// Everything the `theory` subcommand prints for one instance family.
struct TheoryReport {
  std::string family;  // "one_heavy" or "two_heavy"
  long double beta = 0;
  long double gamma = 0;  // two-heavy only
  std::optional<int> m;
  std::optional<int> d_r;  // one-heavy stores d here
  std::optional<int> d_c;
  std::optional<OneHeavyMarginals> marginals1;
  std::optional<BoundPair> marginals2;
  long double f_limit0 = 0;  // family limit at alpha = 0
  long double g_limit0 = 0;
  long double delta = 0;
  std::string branch;
  std::optional<long double> alpha;
  std::optional<long double> epsilon;
  std::optional<long double> f_shifted;
  std::optional<long double> g_shifted;
  std::optional<long double> b1;
  std::optional<long double> b2;
  std::optional<long double> s1;
  std::optional<long double> s2;
  std::optional<long double> log10_underestimation;  // log10(s2^m)
  std::optional<long double> log10_failure_prob;     // log10(3 s1^m)
};

TheoryReport one_heavy_report(long double beta, std::optional<int> m);
TheoryReport two_heavy_report(long double beta, long double gamma,
                              std::optional<int> m);

std::string to_text(const TheoryReport& report);

}  // namespace bct
