#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bct/exact_count.hpp"
#include "bct/margins.hpp"
#include "bct/sampler.hpp"
#include "support/oracles.hpp"

using namespace bct;

namespace {

const std::vector<Variant> kVariants = {Variant::restart, Variant::feasible};
const std::vector<Orientation> kOrientations = {Orientation::column_wise,
                                                Orientation::row_wise};
const std::vector<Ordering> kOrderings = {Ordering::as_given, Ordering::descending_sum,
                                          Ordering::ascending_sum};

void check_tree(const Margins& margins, const BigCount& count) {
  for (auto variant : kVariants) {
    if (variant == Variant::feasible && count == 0) continue;
    for (auto orientation : kOrientations) {
      for (auto ordering : kOrderings) {
        const SamplerConfig config{variant, orientation, ordering, 0};
        const auto stats = test::enumerate_decision_tree(margins, config);
        CHECK(stats.prob_sum == mpq_class(1));
        CHECK(stats.unbiased_sum == mpq_class(count));
        CHECK(stats.success_leaves == count);
        CHECK_FALSE(stats.duplicate_tables);
        CHECK_FALSE(stats.margin_violation);
        if (variant == Variant::feasible) CHECK(stats.dead_leaves == 0);
      }
    }
  }
}

}  // namespace

TEST_CASE("decision tree is exactly unbiased on every small instance") {
  int instances = 0;
  test::for_each_margin_pair(4, 4, 10, [&](const std::vector<int>& rows,
                                            const std::vector<int>& cols) {
    const Margins canonical = Margins::validated(rows, cols);
    check_tree(canonical, brute_force_count(canonical));
    ++instances;
  });
  CHECK(instances > 150);
}

TEST_CASE("decision tree on scrambled arrangements and thin instances") {
  int instances = 0;
  test::for_each_margin_pair(4, 4, 7, [&](const std::vector<int>& rows,
                                           const std::vector<int>& cols) {
    if (++instances % 5 != 0) return;  // a sample is plenty at this depth
    const Margins scrambled =
        Margins::validated(test::scramble(rows, 3 * instances + 1),
                           test::scramble(cols, 7 * instances + 5));
    check_tree(scrambled, brute_force_count(scrambled));
  });
  // tall-and-thin: more rows than the 4x4 grid covers
  for (const auto& rows : {std::vector<int>{2, 1, 1, 1, 1, 1, 1}, std::vector<int>{1, 1, 1, 1}}) {
    for (const auto& cols : {std::vector<int>{4, 4}, std::vector<int>{4, 2, 2}}) {
      long long rt = 0;
      for (int r : rows) rt += r;
      long long ct = 0;
      for (int c : cols) ct += c;
      if (rt != ct) continue;
      const Margins margins = Margins::validated(rows, cols);
      check_tree(margins, brute_force_count(margins));
    }
  }
}

TEST_CASE("restart and feasible induce the same distribution on two-heavy instances") {
  for (const auto& [m, dr, dc] :
       {std::tuple{2, 2, 1}, std::tuple{2, 2, 2}, std::tuple{3, 2, 2}, std::tuple{3, 3, 1},
        std::tuple{4, 2, 3}}) {
    const Margins margins = make_two_heavy(m, dr, dc);
    for (auto orientation : kOrientations) {
      for (auto ordering : kOrderings) {
        const auto restart = test::enumerate_decision_tree(
            margins, {Variant::restart, orientation, ordering, 0});
        const auto feasible = test::enumerate_decision_tree(
            margins, {Variant::feasible, orientation, ordering, 0});
        CHECK(restart.dead_leaves == 0);  // the equivalence mechanism
        CHECK(restart.leaf_probs == feasible.leaf_probs);
      }
    }
  }
}

TEST_CASE("restart and feasible differ where dead ends exist") {
  // Sending both unit columns to the same row leaves three rows that
  // must all take the sum-2 column: a dead end for the restart variant.
  const Margins margins = Margins::validated({2, 2, 2, 2}, {1, 1, 2, 4});
  const auto restart = test::enumerate_decision_tree(
      margins, {Variant::restart, Orientation::column_wise, Ordering::as_given, 0});
  const auto feasible = test::enumerate_decision_tree(
      margins, {Variant::feasible, Orientation::column_wise, Ordering::as_given, 0});
  CHECK(restart.dead_leaves > 0);
  CHECK(feasible.dead_leaves == 0);
  CHECK(restart.prob_sum == mpq_class(1));
  CHECK(feasible.prob_sum == mpq_class(1));
  // both remain exactly unbiased
  const BigCount count = brute_force_count(margins);
  CHECK(restart.unbiased_sum == mpq_class(count));
  CHECK(feasible.unbiased_sum == mpq_class(count));
}

TEST_CASE("sampled trials land on tables with the tree's exact probability") {
  const Margins margins = make_two_heavy(3, 2, 2);
  for (auto variant : kVariants) {
    const SamplerConfig config{variant, Orientation::column_wise, Ordering::descending_sum, 0};
    const auto stats = test::enumerate_decision_tree(margins, config);
    TrialSampler sampler(margins, config);
    for (int i = 0; i < 200; ++i) {
      TrialRng rng(2718, static_cast<std::uint64_t>(i));
      const auto result = sampler.run(rng);
      REQUIRE(result.success);
      const auto it = stats.leaf_probs.find(result.table);
      REQUIRE(it != stats.leaf_probs.end());
      CHECK(std::exp(result.log_mu) ==
            doctest::Approx(it->second.get_d()).epsilon(1e-9));
    }
  }
}

TEST_CASE("zero-variance instance: every leaf weighs n! exactly") {
  const Margins margins = make_regular(5, 1);
  for (auto variant : kVariants) {
    const auto stats = test::enumerate_decision_tree(
        margins, {variant, Orientation::column_wise, Ordering::as_given, 0});
    CHECK(stats.success_leaves == 120);
    for (const auto& [table, prob] : stats.leaf_probs) {
      CHECK(prob == mpq_class(1, 120));
    }
  }
}

TEST_CASE("monte carlo unbiasedness where dead ends actually occur") {
  // Pruning reshapes the proposal here, and the restart variant loses
  // mass to dead ends; both must stay unbiased for the count.
  const Margins margins = Margins::validated({2, 2, 2, 2}, {1, 1, 2, 4});
  const double exact = static_cast<double>(brute_force_count(margins).get_ui());
  for (auto variant : kVariants) {
    for (std::uint64_t seed : {6063ull, 6064ull, 6065ull}) {
    TrialSampler sampler(margins, {variant, Orientation::column_wise, Ordering::as_given, 0});
    const int trials = 100000;
    double sum = 0;
    double sum_sq = 0;
    int dead = 0;
    for (int t = 0; t < trials; ++t) {
      TrialRng rng(seed, static_cast<std::uint64_t>(t));
      const auto lm = sampler.run_log_mu(rng);
      const double w = lm ? std::exp(-*lm) : 0.0;
      if (!lm) ++dead;
      sum += w;
      sum_sq += w * w;
    }
    const double mean = sum / trials;
    const double se =
        std::sqrt(std::max(0.0, sum_sq / trials - mean * mean) / (trials - 1));
    // pruning makes this instance exactly zero-variance, so allow for
    // se = 0 plus accumulation dust
    CHECK(std::fabs(mean - exact) <= 3 * se + 1e-9 * exact);
    if (variant == Variant::restart) {
      CHECK(dead > 0);
    } else {
      CHECK(dead == 0);
      CHECK(se <= 1e-9);
    }
    }
  }
}

TEST_CASE("feasible-variant table frequencies match the exact tree (chi-square)") {
  const Margins margins = Margins::validated({2, 2, 2, 2}, {1, 1, 2, 4});
  const SamplerConfig config{Variant::feasible, Orientation::column_wise,
                             Ordering::as_given, 0};
  const auto stats = test::enumerate_decision_tree(margins, config);
  REQUIRE(stats.dead_leaves == 0);
  TrialSampler sampler(margins, config);
  std::map<BinaryTable, int> counts;
  const int draws = 100000;
  for (int t = 0; t < draws; ++t) {
    TrialRng rng(9090, static_cast<std::uint64_t>(t));
    const auto result = sampler.run(rng);
    REQUIRE(result.success);
    ++counts[result.table];
  }
  REQUIRE(counts.size() <= stats.leaf_probs.size());
  double chi2 = 0;
  for (const auto& [table, prob] : stats.leaf_probs) {
    const double expected = prob.get_d() * draws;
    const double diff = counts[table] - expected;
    chi2 += diff * diff / expected;
  }
  CHECK(chi2 < test::chi2_crit_1e3(static_cast<int>(stats.leaf_probs.size()) - 1));
}
