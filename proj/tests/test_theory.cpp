#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <gmpxx.h>

#include <cmath>

#include "bct/errors.hpp"
#include "bct/exact_count.hpp"
#include "bct/sampler.hpp"
#include "bct/theory.hpp"

using namespace bct;

namespace {
double ld(long double v) { return static_cast<double>(v); }
}

TEST_CASE("one-heavy marginals") {
  const auto a = marginals_one_heavy(2, 1);
  CHECK(ld(a.pi1) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(ld(a.mu1) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  const auto b = marginals_one_heavy(4, 2);
  CHECK(ld(b.pi1) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(ld(b.mu1) == doctest::Approx(5.0 / 13).epsilon(1e-15));
  const auto c = marginals_one_heavy(1, 1);
  CHECK(ld(c.pi1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(ld(c.mu1) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("pi1 equals the count ratio Z(m,d-1)/Z(m,d) exactly") {
  for (int m = 1; m <= 4; ++m) {
    for (int d = 1; d <= 3; ++d) {
      mpq_class ratio(count_one_heavy(m, d - 1), count_one_heavy(m, d));
      ratio.canonicalize();
      mpq_class direct(d, m + d);
      direct.canonicalize();
      CHECK(ratio == direct);
      CHECK(ld(marginals_one_heavy(m, d).pi1) ==
            doctest::Approx(ratio.get_d()).epsilon(1e-15));
    }
  }
}

TEST_CASE("mu1 exceeds pi1 for heavy rows") {
  for (double beta : {0.1, 0.3, 0.6, 1.0, 2.0}) {
    for (int m : {10, 25, 40}) {
      const int d = static_cast<int>(std::floor(beta * m));
      if (d < 1) continue;
      const auto marg = marginals_one_heavy(m, d);
      // at d = 1 both marginals collapse to 1/(m+1)
      if (d == 1)
        CHECK(marg.mu1 == doctest::Approx(marg.pi1).epsilon(1e-15));
      else
        CHECK(marg.mu1 > marg.pi1);
    }
  }
}

TEST_CASE("one-heavy column bounds") {
  const auto at0 = bounds_one_heavy(7, 3, 0);
  CHECK(ld(at0.f) == doctest::Approx(ld(marginals_one_heavy(7, 3).pi1)).epsilon(1e-15));
  const auto spot = bounds_one_heavy(10, 5, 2);
  CHECK(ld(spot.f) == doctest::Approx(5.0 / 13).epsilon(1e-15));
  CHECK(ld(spot.g) == doctest::Approx(36.0 / 170).epsilon(1e-15));
  for (int m : {5, 10, 20}) {
    for (int d : {3, 5, 8}) {
      for (int i = 0; i + 1 < d; ++i) {
        CHECK(bounds_one_heavy(m, d, i).f < bounds_one_heavy(m, d, i + 1).f);
        CHECK(bounds_one_heavy(m, d, i).g > bounds_one_heavy(m, d, i + 1).g);
      }
    }
  }
  CHECK_THROWS_AS(bounds_one_heavy(10, 5, 5), OutOfRange);
  CHECK_THROWS_AS(bounds_one_heavy(10, 5, -1), OutOfRange);
}

TEST_CASE("one-heavy limits") {
  const auto lim = asymptotics_one_heavy(0, 1);
  CHECK(ld(lim.f_inf) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(ld(lim.g_inf) == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(ld(lim.delta) == doctest::Approx(1.0 / 6).epsilon(1e-15));

  // At alpha = beta the limit order flips.
  for (double beta : {0.2, 0.6, 1.0, 2.0}) {
    const auto edge = asymptotics_one_heavy(beta, beta);
    CHECK(edge.g_inf < edge.f_inf);
  }

  const auto d06 = asymptotics_one_heavy(0, 0.6);
  CHECK(ld(d06.delta) == doctest::Approx(0.36 / (1.6 * 1.96)).epsilon(1e-12));

  CHECK_THROWS_AS(asymptotics_one_heavy(1.5, 1.0), OutOfRange);
  CHECK_THROWS_AS(asymptotics_one_heavy(0.0, 0.0), OutOfRange);
}

TEST_CASE("limits are approached at rate O(1/m)") {
  // beta*m and alpha*m must not be integers, or the finite formulas hit
  // the limit exactly and only rounding noise remains.
  const double beta = 1.0 / 3;
  const double alpha = 1.0 / 7;
  const auto lim = asymptotics_one_heavy(alpha, beta);
  double prev_f = 0;
  double prev_g = 0;
  for (int exp10 = 3; exp10 <= 5; ++exp10) {
    const int m = static_cast<int>(std::pow(10, exp10));
    const int d = static_cast<int>(std::floor(beta * m));
    const int i = static_cast<int>(std::floor(alpha * m));
    const auto bounds = bounds_one_heavy(m, d, i);
    const double err_f = std::fabs(ld(bounds.f - lim.f_inf));
    const double err_g = std::fabs(ld(bounds.g - lim.g_inf));
    if (exp10 > 3) {
      CHECK(err_f < prev_f / 5);
      CHECK(err_g < prev_g / 5);
    }
    prev_f = err_f;
    prev_g = err_g;
  }
  CHECK(prev_f < 1e-4);
  CHECK(prev_g < 1e-4);
}

TEST_CASE("alpha threshold: frozen fine-grid scan value at beta = 1") {
  // Scan with step 1e-6 put the sign change in [0.067408, 0.067409].
  const long double alpha = alpha_threshold_one_heavy(1.0L);
  CHECK(std::fabs(ld(alpha) - 0.067408) < 1e-5);
}

TEST_CASE("alpha threshold postcondition across beta") {
  for (double beta : {0.2, 0.6, 1.0, 2.0}) {
    const long double alpha = alpha_threshold_one_heavy(beta);
    CHECK(alpha > 0);
    CHECK(alpha < beta);
    const auto lim = asymptotics_one_heavy(alpha, beta);
    const auto at0 = asymptotics_one_heavy(0, beta);
    CHECK(std::fabs(ld(lim.g_inf - lim.f_inf - at0.delta / 2)) <= 1e-12);
  }
}

TEST_CASE("two-heavy marginals") {
  const auto a = marginals_two_heavy(2, 2, 1);
  CHECK(ld(a.f) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(ld(a.g) == doctest::Approx(2.0 / 3).epsilon(1e-15));
  const auto b = marginals_two_heavy(2, 2, 2);
  CHECK(ld(b.g) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(marginals_two_heavy(2, 2, 3), InfeasibleFamily);
}

TEST_CASE("two-heavy column bounds at a frozen spot") {
  const auto spot = bounds_two_heavy(20, 12, 16, 1);
  CHECK(ld(spot.f) == doctest::Approx(788.0 / 895).epsilon(1e-15));
  CHECK(ld(spot.g) == doctest::Approx(165.0 / 272).epsilon(1e-15));
  for (int i = 1; i + 1 < 4; ++i) {
    CHECK(bounds_two_heavy(20, 12, 16, i).f < bounds_two_heavy(20, 12, 16, i + 1).f);
    CHECK(bounds_two_heavy(20, 12, 16, i).g > bounds_two_heavy(20, 12, 16, i + 1).g);
  }
  CHECK_THROWS_AS(bounds_two_heavy(20, 12, 16, 0), OutOfRange);
  CHECK_THROWS_AS(bounds_two_heavy(20, 12, 16, 4), OutOfRange);
}

TEST_CASE("two-heavy limits") {
  const auto equal = asymptotics_two_heavy(0, 0.5, 0.5);
  CHECK(ld(equal.f2_inf) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(ld(equal.g2_inf) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(std::fabs(ld(equal.delta)) < 1e-13);

  const auto spot = asymptotics_two_heavy(0, 0.6, 0.8);
  CHECK(ld(spot.f2_inf) == doctest::Approx(0.75).epsilon(1e-13));
  CHECK(ld(spot.g2_inf) == doctest::Approx(0.48 / 0.68).epsilon(1e-13));
  CHECK(ld(spot.delta) == doctest::Approx(0.48 / 0.68 - 0.75).epsilon(1e-10));
  CHECK(spot.delta < 0);

  // alpha = 0 reduces the column bounds to the marginal limits.
  for (double beta : {0.3, 0.6, 1.2}) {
    for (double gamma : {0.2, 0.5, 0.8}) {
      const auto lim = asymptotics_two_heavy(0, beta, gamma);
      CHECK(ld(lim.f3_inf) == doctest::Approx(ld(lim.f2_inf)).epsilon(1e-13));
      CHECK(ld(lim.g3_inf) == doctest::Approx(ld(lim.g2_inf)).epsilon(1e-13));
    }
  }

  // delta vanishes exactly on the diagonal of a grid.
  for (double beta : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    for (double gamma : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      const auto lim = asymptotics_two_heavy(0, beta, gamma);
      if (std::fabs(beta - gamma) < 1e-12) {
        CHECK(std::fabs(ld(lim.delta)) < 1e-12);
      } else {
        CHECK(std::fabs(ld(lim.delta)) > 1e-12);
      }
    }
  }
}

TEST_CASE("subtable limits") {
  for (double beta : {0.4, 1.0, 1.7}) {
    const auto sub = subtable_asymptotics(0, beta, 0);
    const auto lim = asymptotics_one_heavy(0, beta);
    CHECK(ld(sub.f) == doctest::Approx(ld(lim.f_inf)).epsilon(1e-13));
    CHECK(ld(sub.g - sub.f) == doctest::Approx(ld(lim.delta)).epsilon(1e-12));
  }
  const auto spot = subtable_asymptotics(0.1, 1.0, 0.1);
  CHECK(ld(spot.f) == doctest::Approx(50.0 / 81).epsilon(1e-13));
  CHECK(ld(spot.g) == doctest::Approx(972.0 / 2500).epsilon(1e-13));

  // monotone in alpha and alpha' over a grid at beta = 1
  for (double a = 0.0; a < 0.35; a += 0.05) {
    for (double ap = 0.0; ap < 0.35; ap += 0.05) {
      const auto base = subtable_asymptotics(a, 1.0, ap);
      const auto up_a = subtable_asymptotics(a + 0.04, 1.0, ap);
      const auto up_p = subtable_asymptotics(a, 1.0, ap + 0.04);
      CHECK(up_a.f > base.f);
      CHECK(up_a.g < base.g);
      CHECK(up_p.f > base.f);
      CHECK(up_p.g < base.g);
    }
  }
  CHECK_THROWS_AS(subtable_asymptotics(0.5, 0.4, 0.0), OutOfRange);
}

TEST_CASE("failure bound") {
  CHECK_THROWS_AS(failure_bound(0.1, 0.5, 0.5, 1.001, 10), OutOfRange);

  const auto spot = failure_bound(0.1, 0.5, 0.7, 1.0001, 100);
  CHECK(ld(spot.b1) == doctest::Approx(std::exp(-0.04 * 0.1 / 16)).epsilon(1e-13));
  CHECK(ld(spot.bound) ==
        doctest::Approx(3 * std::pow(std::exp(-2.5e-4) * 1.0001, 100)).epsilon(1e-10));

  // geometric decay in m when b1*b2 < 1
  const auto at10 = failure_bound(0.1, 0.5, 0.7, 1.0001, 10);
  const auto at100 = failure_bound(0.1, 0.5, 0.7, 1.0001, 100);
  CHECK(at100.bound < at10.bound);

  CHECK_THROWS_AS(failure_bound(0.1, 0.5, 0.7, 0.999, 10), OutOfRange);
  CHECK_THROWS_AS(failure_bound(0.1, 0.5, 0.7, 2.0, 10), OutOfRange);
  CHECK_THROWS_AS(failure_bound(0.0, 0.5, 0.7, 1.0001, 10), OutOfRange);
}

TEST_CASE("one-heavy report wires the constants") {
  const auto rep = one_heavy_report(1.0L, 100);
  CHECK(ld(rep.delta) == doctest::Approx(1.0 / 6).epsilon(1e-13));
  REQUIRE(rep.alpha.has_value());
  REQUIRE(rep.s1.has_value());
  REQUIRE(rep.s2.has_value());
  CHECK(*rep.s2 > 1);
  CHECK(*rep.s1 > 0);
  CHECK(*rep.s1 < 1);
  CHECK(ld(*rep.epsilon) == doctest::Approx(1.0 / 48).epsilon(1e-13));
  CHECK(*rep.g_shifted > *rep.f_shifted);
  REQUIRE(rep.log10_underestimation.has_value());
  CHECK(*rep.log10_underestimation > 0);
  REQUIRE(rep.log10_failure_prob.has_value());
  const std::string text = to_text(rep);
  CHECK(text.find("one_heavy") != std::string::npos);
  CHECK(text.find("s2") != std::string::npos);
}

TEST_CASE("two-heavy report branches") {
  const auto mirrored = two_heavy_report(0.6L, 0.8L, 300);
  CHECK(mirrored.delta < 0);
  CHECK(mirrored.branch.find("mirrored") != std::string::npos);
  CHECK(ld(mirrored.delta) == doctest::Approx(-0.04411764705882).epsilon(1e-9));
  REQUIRE(mirrored.d_r.has_value());
  CHECK(*mirrored.d_r == 180);  // floor(0.6*300); the text instance pins 179 explicitly
  REQUIRE(mirrored.s2.has_value());

  const auto none = two_heavy_report(0.5L, 0.5L, std::nullopt);
  CHECK(none.branch.find("no separation") != std::string::npos);
  CHECK_FALSE(none.alpha.has_value());

  const auto direct = two_heavy_report(0.8L, 0.3L, std::nullopt);
  CHECK(direct.delta > 0);
  REQUIRE(direct.alpha.has_value());
  const auto lim = asymptotics_two_heavy(*direct.alpha, 0.8L, 0.3L);
  CHECK(std::fabs(ld(lim.g3_inf - lim.f3_inf - direct.delta / 2)) < 1e-10);
}

TEST_CASE("gap is positive across the beta grid") {
  for (double beta = 0.1; beta <= 3.0 + 1e-9; beta += 0.1) {
    CHECK(asymptotics_one_heavy(0, beta).delta > 0);
  }
}

TEST_CASE("sampler's heavy-cell frequency matches mu1, not pi1") {
  for (const auto& [m, d] : {std::pair{10, 3}, std::pair{20, 8}, std::pair{40, 16}}) {
    const Margins margins = make_one_heavy(m, d);
    const auto marg = marginals_one_heavy(m, d);
    TrialSampler sampler(margins, {});
    const int trials = 100000;
    int ones = 0;
    for (int t = 0; t < trials; ++t) {
      TrialRng rng(4300 + static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(t));
      const auto result = sampler.run(rng);
      REQUIRE(result.success);
      if (result.table.at(m, 0)) ++ones;
    }
    const double freq = static_cast<double>(ones) / trials;
    const double mu1 = static_cast<double>(marg.mu1);
    const double pi1 = static_cast<double>(marg.pi1);
    const double se_mu = std::sqrt(mu1 * (1 - mu1) / trials);
    CHECK(std::fabs(freq - mu1) <= 3 * se_mu);
    const double se_pi = std::sqrt(pi1 * (1 - pi1) / trials);
    CHECK(std::fabs(freq - pi1) > 3 * se_pi);
  }
}
