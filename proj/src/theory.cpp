#include "bct/theory.hpp"

#include <cmath>
#include <sstream>

#include "bct/errors.hpp"
#include "bct/margins.hpp"

namespace bct {

namespace {

constexpr long double kResidualTol = 1e-12L;

void require(bool ok, const char* what) {
  if (!ok) throw OutOfRange(what);
}

long double one_heavy_gap(long double alpha, long double beta) {
  const auto lim = asymptotics_one_heavy(alpha, beta);
  return lim.g_inf - lim.f_inf;
}

long double two_heavy_gap(long double alpha, long double beta, long double gamma) {
  const auto lim = asymptotics_two_heavy(alpha, beta, gamma);
  return lim.g3_inf - lim.f3_inf;
}

// Bisection for h(alpha) = target on [0, hi); h continuous and strictly
// decreasing with h(0) > target. When h stays above target on the whole
// bracket, the supremum end is returned (any alpha with h >= target works).
template <typename H>
long double bisect_gap(H&& h, long double hi, long double target) {
  long double lo = 0;
  long double hi_in = hi * (1 - 1e-9L);
  if (h(hi_in) >= target) return hi_in;
  for (int it = 0; it < 200; ++it) {
    const long double mid = (lo + hi_in) / 2;
    if (h(mid) >= target)
      lo = mid;
    else
      hi_in = mid;
  }
  return (lo + hi_in) / 2;
}

}  // namespace

OneHeavyMarginals marginals_one_heavy(int m, int d) {
  require(m >= 1 && d >= 1, "marginals_one_heavy needs m >= 1, d >= 1");
  const long double md = static_cast<long double>(m) + d;
  const long double top = static_cast<long double>(d) * (md - 1);
  return {static_cast<long double>(d) / md,
          top / (top + static_cast<long double>(m) * m)};
}

BoundPair bounds_one_heavy(int m, int d, int i) {
  require(m >= 0 && d >= 1, "bounds_one_heavy needs m >= 0, d >= 1");
  require(0 <= i && i < d, "bounds_one_heavy needs 0 <= i < d");
  const long double md = static_cast<long double>(m) + d;
  const long double f = static_cast<long double>(d) / (md - i);
  const long double g = (static_cast<long double>(d) - i) * (md - i - 1) /
                        (static_cast<long double>(d) * (md - 1) +
                         static_cast<long double>(m) * m);
  return {f, g};
}

OneHeavyLimits asymptotics_one_heavy(long double alpha, long double beta) {
  require(beta > 0, "asymptotics_one_heavy needs beta > 0");
  require(alpha >= 0 && alpha <= beta, "asymptotics_one_heavy needs 0 <= alpha <= beta");
  OneHeavyLimits lim;
  lim.f_inf = beta / (1 + beta - alpha);
  lim.g_inf = (beta - alpha) * (1 + beta - alpha) / (beta * (1 + beta) + 1);
  lim.delta = beta * beta / ((1 + beta) * (beta * (1 + beta) + 1));
  return lim;
}

long double alpha_threshold_one_heavy(long double beta) {
  require(beta > 0, "alpha_threshold_one_heavy needs beta > 0");
  const long double target = asymptotics_one_heavy(0, beta).delta / 2;
  const long double alpha =
      bisect_gap([&](long double a) { return one_heavy_gap(a, beta); }, beta, target);
  // Postcondition; the gap is strictly decreasing so bisection converges.
  const long double residual = one_heavy_gap(alpha, beta) - target;
  if (std::fabs(residual) > kResidualTol)
    throw OutOfRange("alpha_threshold_one_heavy failed to converge");
  return alpha;
}

BoundPair marginals_two_heavy(int m, int d_r, int d_c) {
  const long long n = static_cast<long long>(m) + d_r - d_c;
  if (m < 1 || d_r < 1 || d_c < 1 || d_c > m || n < d_r) {
    throw InfeasibleFamily("two-heavy family needs m >= 1, d_r >= 1, 1 <= d_c <= m");
  }
  const long double nn = static_cast<long double>(n);
  const long double dr = d_r;
  const long double dc = d_c;
  const long double f2 =
      (dr * (nn - dr + 1) + dc * dr * (dr - 1)) / (nn * (nn - dr + 1) + nn * dc * dr);
  const long double g2 =
      dr * (nn - 1) / (dr * (nn - 1) + static_cast<long double>(m) * (nn - dr));
  return {f2, g2};
}

BoundPair bounds_two_heavy(int m, int d_r, int d_c, int i) {
  const long long n = static_cast<long long>(m) + d_r - d_c;
  if (m < 1 || d_r < 1 || d_c < 1 || d_c > m || n < d_r) {
    throw InfeasibleFamily("two-heavy family needs m >= 1, d_r >= 1, 1 <= d_c <= m");
  }
  require(1 <= i && i < std::min(n - d_r, static_cast<long long>(d_r)),
          "bounds_two_heavy needs 1 <= i < min(n - d_r, d_r)");
  const long double nn = static_cast<long double>(n);
  const long double dr = d_r;
  const long double dc = d_c;
  const long double f3 = (dr * (nn - dr + 1) + dc * dr * dr) /
                         ((nn - i) * (nn - i - dr) + (nn - i) * dc * (dr - i));
  const long double g3 =
      (dr - i) * (nn - i) / (dr * nn + static_cast<long double>(m) * (nn - dr));
  return {f3, g3};
}

TwoHeavyLimits asymptotics_two_heavy(long double alpha, long double beta,
                                     long double gamma) {
  require(beta > 0, "asymptotics_two_heavy needs beta > 0");
  require(gamma > 0 && gamma < 1, "asymptotics_two_heavy needs gamma in (0,1)");
  require(alpha >= 0 && alpha < std::min(1 - gamma, beta) + kResidualTol,
          "asymptotics_two_heavy needs 0 <= alpha < min(1-gamma, beta)");
  TwoHeavyLimits lim;
  lim.f2_inf = beta / (1 + beta - gamma);
  lim.g2_inf = beta * (1 + beta - gamma) / (beta * (1 + beta - gamma) + 1 - gamma);
  lim.f3_inf = beta * beta / ((1 + beta - gamma - alpha) * (beta - alpha));
  lim.g3_inf = (beta - alpha) * (1 + beta - gamma - alpha) /
               (beta * (1 + beta - gamma) + 1 - gamma);
  lim.delta = lim.g2_inf - lim.f2_inf;
  return lim;
}

long double alpha_threshold_two_heavy(long double beta, long double gamma) {
  const auto at0 = asymptotics_two_heavy(0, beta, gamma);
  require(at0.delta > 0, "alpha_threshold_two_heavy needs g2_inf > f2_inf");
  return bisect_gap([&](long double a) { return two_heavy_gap(a, beta, gamma); },
                    std::min(1 - gamma, beta), at0.delta / 2);
}

BoundPair subtable_asymptotics(long double alpha, long double beta,
                               long double alpha_prime) {
  require(beta > 0, "subtable_asymptotics needs beta > 0");
  require(alpha >= 0 && alpha < std::min(1.0L, beta),
          "subtable_asymptotics needs 0 <= alpha < min(1, beta)");
  require(alpha_prime >= 0 && alpha_prime < beta - alpha,
          "subtable_asymptotics needs 0 <= alpha' < beta - alpha");
  const long double s = 1 - alpha;
  const long double rest = beta - alpha - alpha_prime;
  const long double f4 = (beta / s) / (1 + beta - alpha - alpha_prime);
  const long double g4 =
      rest * (1 + rest) / ((beta / s) * (1 / s + beta / s) + 1 / (s * s));
  return {f4, g4};
}

FailureBound failure_bound(long double alpha, long double f, long double g,
                           long double b2, int m) {
  require(0 <= f && f < g && g <= 1, "failure_bound needs 0 <= f < g <= 1");
  require(alpha > 0 && alpha < 1, "failure_bound needs alpha in (0,1)");
  const long double b1 = std::exp(-(g - f) * (g - f) * alpha / 16);
  require(b2 > 1 && b2 < 1 / b1, "failure_bound needs 1 < b2 < 1/b1");
  return {b1, 3 * std::pow(b1 * b2, m)};
}

namespace {

// Lemma-2 constant wiring shared by both report builders: given the
// separated bounds' gap and window fraction alpha, pick the canonical
// b2 = (1 + 1/b1)/2 and surface s1 = b1 b2, s2 = b2.
void fill_constants(TheoryReport& rep, long double alpha, long double f_shift,
                    long double g_shift) {
  rep.alpha = alpha;
  rep.f_shifted = f_shift;
  rep.g_shifted = g_shift;
  const long double gap = g_shift - f_shift;
  const long double b1 = std::exp(-gap * gap * alpha / 16);
  const long double b2 = (1 + 1 / b1) / 2;
  rep.b1 = b1;
  rep.b2 = b2;
  rep.s1 = b1 * b2;
  rep.s2 = b2;
  if (rep.m) {
    const long double m = static_cast<long double>(*rep.m);
    rep.log10_underestimation = m * std::log10(b2);
    rep.log10_failure_prob = std::log10(3.0L) + m * std::log10(b1 * b2);
  }
}

}  // namespace

TheoryReport one_heavy_report(long double beta, std::optional<int> m) {
  TheoryReport rep;
  rep.family = "one_heavy";
  rep.beta = beta;
  rep.m = m;
  const auto at0 = asymptotics_one_heavy(0, beta);
  rep.f_limit0 = at0.f_inf;
  rep.g_limit0 = at0.g_inf;
  rep.delta = at0.delta;
  rep.branch = "sis marginal exceeds true marginal";
  if (m) {
    rep.d_r = scaled_floor(beta, *m);
    if (*rep.d_r >= 1 && *m >= 1) rep.marginals1 = marginals_one_heavy(*m, *rep.d_r);
  }
  const long double alpha = alpha_threshold_one_heavy(beta);
  const auto at_alpha = asymptotics_one_heavy(alpha, beta);
  const long double eps = rep.delta / 8;
  rep.epsilon = eps;
  fill_constants(rep, alpha, at_alpha.f_inf + eps, at_alpha.g_inf - eps);
  return rep;
}

TheoryReport two_heavy_report(long double beta, long double gamma,
                              std::optional<int> m) {
  TheoryReport rep;
  rep.family = "two_heavy";
  rep.beta = beta;
  rep.gamma = gamma;
  rep.m = m;
  const auto at0 = asymptotics_two_heavy(0, beta, gamma);
  rep.f_limit0 = at0.f2_inf;
  rep.g_limit0 = at0.g2_inf;
  rep.delta = at0.delta;
  if (m) {
    rep.d_r = scaled_floor(beta, *m);
    rep.d_c = scaled_floor(gamma, *m);
    if (*rep.d_r >= 1 && *rep.d_c >= 1 && *rep.d_c <= *m)
      rep.marginals2 = marginals_two_heavy(*m, *rep.d_r, *rep.d_c);
  }
  if (std::fabs(rep.delta) <= kResidualTol) {
    rep.branch = "no separation (delta = 0); the divergence bound needs beta != gamma";
    return rep;
  }
  const long double eps = std::fabs(rep.delta) / 8;
  rep.epsilon = eps;
  if (rep.delta > 0) {
    rep.branch = "sis marginal exceeds true marginal";
    const long double alpha = alpha_threshold_two_heavy(beta, gamma);
    const auto at_alpha = asymptotics_two_heavy(alpha, beta, gamma);
    fill_constants(rep, alpha, at_alpha.f3_inf + eps, at_alpha.g3_inf - eps);
  } else {
    // Mirrored case: the printed column bounds run in the other
    // direction, so no threshold equation applies; use the midpoint of
    // the admissible window and the half-gap convention.
    rep.branch = "true marginal exceeds sis marginal (mirrored bounds)";
    const long double alpha = std::min(1 - gamma, beta) / 2;
    const long double mid = (rep.f_limit0 + rep.g_limit0) / 2;
    fill_constants(rep, alpha, mid - std::fabs(rep.delta) / 8,
                   mid + std::fabs(rep.delta) / 8);
  }
  return rep;
}

namespace {

void line(std::ostringstream& out, const char* key, long double value) {
  out << key;
  for (size_t i = std::char_traits<char>::length(key); i < 24; ++i) out << ' ';
  out << static_cast<double>(value) << '\n';
}

}  // namespace

std::string to_text(const TheoryReport& rep) {
  std::ostringstream out;
  out.precision(12);
  out << "family                  " << rep.family << '\n';
  line(out, "beta", rep.beta);
  if (rep.family == "two_heavy") line(out, "gamma", rep.gamma);
  if (rep.m) line(out, "m", *rep.m);
  if (rep.d_r) line(out, rep.family == "one_heavy" ? "d" : "d_r", *rep.d_r);
  if (rep.d_c) line(out, "d_c", *rep.d_c);
  if (rep.marginals1) {
    line(out, "pi1", rep.marginals1->pi1);
    line(out, "mu1", rep.marginals1->mu1);
  }
  if (rep.marginals2) {
    line(out, "f2 (true marginal)", rep.marginals2->f);
    line(out, "g2 (sis marginal)", rep.marginals2->g);
  }
  line(out, "f_limit(alpha=0)", rep.f_limit0);
  line(out, "g_limit(alpha=0)", rep.g_limit0);
  line(out, "delta", rep.delta);
  out << "branch                  " << rep.branch << '\n';
  if (rep.alpha) line(out, "alpha", *rep.alpha);
  if (rep.epsilon) line(out, "epsilon", *rep.epsilon);
  if (rep.f_shifted) line(out, "f (shifted)", *rep.f_shifted);
  if (rep.g_shifted) line(out, "g (shifted)", *rep.g_shifted);
  if (rep.b1) line(out, "b1", *rep.b1);
  if (rep.b2) line(out, "b2", *rep.b2);
  if (rep.s1) line(out, "s1", *rep.s1);
  if (rep.s2) line(out, "s2", *rep.s2);
  if (rep.log10_underestimation)
    line(out, "log10(s2^m)", *rep.log10_underestimation);
  if (rep.log10_failure_prob) line(out, "log10(3 s1^m)", *rep.log10_failure_prob);
  return out.str();
}

}  // namespace bct
