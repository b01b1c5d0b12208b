#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bct/errors.hpp"
#include "bct/exact_count.hpp"
#include "bct/margins.hpp"
#include "support/oracles.hpp"

using namespace bct;

TEST_CASE("validate_margins accepts a consistent instance") {
  const Margins m = Margins::validated({1, 1, 2}, {1, 1, 1, 1});
  CHECK(m.n_rows() == 3);
  CHECK(m.n_cols() == 4);
  CHECK(m.total() == 4);
}

TEST_CASE("validate_margins rejects bad input") {
  CHECK_THROWS_AS(Margins::validated({3}, {1, 1}), TotalMismatch);
  CHECK_THROWS_AS(Margins::validated({1, 1}, {3}), EntryTooLarge);
  CHECK_THROWS_AS(Margins::validated({}, {1}), EmptyMargins);
  CHECK_THROWS_AS(Margins::validated({1}, {}), EmptyMargins);
  CHECK_THROWS_AS(Margins::validated({-1, 1}, {0}), EntryTooLarge);
}

TEST_CASE("one-heavy family construction") {
  const Margins a = make_one_heavy(2, 1);
  CHECK(a == Margins::validated({1, 1, 1}, {1, 1, 1}));
  const Margins b = make_one_heavy(0, 3);
  CHECK(b == Margins::validated({3}, {1, 1, 1}));
  const Margins c = make_one_heavy(3, 2);
  CHECK(c == Margins::validated({1, 1, 1, 2}, {1, 1, 1, 1, 1}));
  CHECK_THROWS_AS(make_one_heavy(2, 0), OutOfRange);
}

TEST_CASE("two-heavy family construction") {
  const Margins big = make_two_heavy(300, 179, 240);
  CHECK(big.n_rows() == 301);
  CHECK(big.n_cols() == 240);
  CHECK(big.row_sums().back() == 179);
  CHECK(big.col_sums().back() == 240);

  CHECK(make_two_heavy(2, 2, 1) == Margins::validated({1, 1, 2}, {1, 1, 1, 1}));
  CHECK(make_two_heavy(2, 2, 2) == Margins::validated({1, 1, 2}, {1, 1, 2}));
  CHECK_THROWS_AS(make_two_heavy(2, 2, 3), InfeasibleFamily);
  CHECK_THROWS_AS(make_two_heavy(0, 1, 1), InfeasibleFamily);
}

TEST_CASE("family constructors always validate under their preconditions") {
  for (int m = 0; m <= 6; ++m)
    for (int d = 1; d <= 5; ++d) CHECK_NOTHROW(make_one_heavy(m, d));
  for (int m = 1; m <= 6; ++m)
    for (int dr = 1; dr <= 5; ++dr)
      for (int dc = 1; dc <= m; ++dc)
        if (m + dr - dc >= dr) CHECK_NOTHROW(make_two_heavy(m, dr, dc));
}

TEST_CASE("gale-ryser basics") {
  CHECK(gale_ryser_feasible(Margins::validated({1, 1}, {1, 1})));
  CHECK(gale_ryser_feasible(Margins::validated({2, 2}, {1, 1, 1, 1})));
  CHECK(gale_ryser_feasible(Margins::validated({2, 0}, {1, 1})));
  // Infeasible fixture, found by oracle search and frozen: the two
  // heavy columns already overfill the two unit rows.
  CHECK_FALSE(gale_ryser_feasible(Margins::validated({4, 4, 1, 1}, {4, 4, 1, 1})));
  // Raw (unvalidatable) inputs.
  const std::vector<int> rows{2, 1};
  const std::vector<int> unequal{1, 1};
  CHECK_FALSE(gale_ryser_feasible(rows, unequal));
}

TEST_CASE("gale-ryser agrees with brute force exhaustively") {
  int feasible = 0;
  int infeasible = 0;
  test::for_each_margin_pair(5, 5, 16, [&](const std::vector<int>& rows,
                                            const std::vector<int>& cols) {
    const Margins m = Margins::validated(rows, cols);
    const bool gr = gale_ryser_feasible(m);
    const bool exists = brute_force_count(m) > 0;
    REQUIRE(gr == exists);
    CHECK(gr == test::oracle_feasible(rows, cols));
    (gr ? feasible : infeasible)++;
    // Scrambled arrangements must agree too.
    const Margins s = Margins::validated(test::scramble(rows, m.total()),
                                         test::scramble(cols, 7 * m.total() + 1));
    CHECK(gale_ryser_feasible(s) == gr);
  });
  CHECK(feasible > 100);
  CHECK(infeasible > 10);
}

TEST_CASE("gale-ryser agrees with brute force on random margins") {
  TrialRng rng(2024, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const int m = 1 + static_cast<int>(rng.next_below(5));
    const int n = 1 + static_cast<int>(rng.next_below(5));
    std::vector<int> rows(static_cast<size_t>(m));
    std::vector<int> cols(static_cast<size_t>(n), 0);
    long long total = 0;
    for (auto& r : rows) {
      r = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n) + 1));
      total += r;
    }
    // random split of the same total over columns (may exceed row count;
    // clamp to keep validation happy)
    for (long long u = 0; u < total; ++u) ++cols[rng.next_below(static_cast<std::uint64_t>(n))];
    bool valid = true;
    for (int c : cols)
      if (c > m) valid = false;
    if (!valid) continue;
    const Margins margins = Margins::validated(rows, cols);
    CHECK(gale_ryser_feasible(margins) == (brute_force_count(margins) > 0));
  }
}

TEST_CASE("margins_of_table") {
  BinaryTable id(2, 2);
  id.set(0, 0, true);
  id.set(1, 1, true);
  CHECK(margins_of_table(id) == Margins::validated({1, 1}, {1, 1}));

  BinaryTable ones(2, 3);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) ones.set(i, j, true);
  CHECK(margins_of_table(ones) == Margins::validated({3, 3}, {2, 2, 2}));

  const BinaryTable zero(1, 1);
  CHECK(margins_of_table(zero) == Margins::validated({0}, {0}));
}

TEST_CASE("text serialization round-trips") {
  const Margins m = Margins::validated({1, 1, 2}, {1, 1, 1, 1});
  const std::string text = to_text(m);
  CHECK(text == "rows: 1 1 2\ncols: 1 1 1 1\n");
  CHECK(margins_from_text(text) == m);
  CHECK_THROWS_AS(margins_from_text("rows: 1\nbogus: 1"), ConfigError);
  CHECK_THROWS_AS(margins_from_text("rows: 1 x\ncols: 1"), ConfigError);
}

TEST_CASE("transpose") {
  const Margins m = Margins::validated({1, 1, 2}, {1, 1, 1, 1});
  CHECK(m.transposed() == Margins::validated({1, 1, 1, 1}, {1, 1, 2}));
  CHECK(m.transposed().transposed() == m);
}
