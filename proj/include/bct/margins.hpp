#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bct {

/// Row and column sums defining a 0/1-matrix instance.
///
/// Construction goes through `validated`, which enforces equal totals,
/// per-entry bounds (r_i <= n_cols, c_j <= n_rows) and non-emptiness.
/// Values are immutable afterwards.
class Margins {
 public:
  static Margins validated(std::vector<int> row_sums, std::vector<int> col_sums);

  int n_rows() const { return static_cast<int>(rows_.size()); }
  int n_cols() const { return static_cast<int>(cols_.size()); }
  long long total() const { return total_; }
  std::span<const int> row_sums() const { return rows_; }
  std::span<const int> col_sums() const { return cols_; }
  int row_sum(int i) const { return rows_[static_cast<size_t>(i)]; }
  int col_sum(int j) const { return cols_[static_cast<size_t>(j)]; }
  int max_row_sum() const;
  Margins transposed() const;

  friend bool operator==(const Margins&, const Margins&) = default;

 private:
  Margins(std::vector<int> rows, std::vector<int> cols, long long total)
      : rows_(std::move(rows)), cols_(std::move(cols)), total_(total) {}

  std::vector<int> rows_;
  std::vector<int> cols_;
  long long total_ = 0;
};

/// Rows (1,...,1,d), m+1 of them, against m+d unit columns.
Margins make_one_heavy(int m, int d);

/// Rows (1,...,1,d_r), m+1 of them, against columns (1,...,1,d_c),
/// n+1 of them with n = m + d_r - d_c. Requires m >= 1, d_r >= 1,
/// 1 <= d_c <= m (which also gives n >= d_r).
Margins make_two_heavy(int m, int d_r, int d_c);

/// n x n instance with every row and column sum equal to r.
Margins make_regular(int n, int r);

/// floor(fraction * m) with a tiny nudge so decimal fractions whose
/// product is mathematically an integer (0.6 * 300) do not land one
/// below it after binary rounding.
int scaled_floor(long double fraction, int m);

/// Gale-Ryser: true iff some 0/1 matrix realizes the given (residual)
/// margins. Accepts zero sums; negative entries or unequal totals give
/// false. Runs in O(n_rows + n_cols) via counting sort.
bool gale_ryser_feasible(std::span<const int> row_sums, std::span<const int> col_sums);
bool gale_ryser_feasible(const Margins& margins);

/// Dense 0/1 matrix.
class BinaryTable {
 public:
  BinaryTable() = default;
  BinaryTable(int n_rows, int n_cols)
      : m_(n_rows), n_(n_cols),
        bits_(static_cast<size_t>(n_rows) * static_cast<size_t>(n_cols), 0) {}

  int n_rows() const { return m_; }
  int n_cols() const { return n_; }
  bool at(int i, int j) const { return bits_[index(i, j)] != 0; }
  void set(int i, int j, bool value) { bits_[index(i, j)] = value ? 1 : 0; }
  BinaryTable transposed() const;

  friend bool operator==(const BinaryTable&, const BinaryTable&) = default;
  friend bool operator<(const BinaryTable& a, const BinaryTable& b) {
    if (a.m_ != b.m_) return a.m_ < b.m_;
    if (a.n_ != b.n_) return a.n_ < b.n_;
    return a.bits_ < b.bits_;
  }

 private:
  size_t index(int i, int j) const {
    return static_cast<size_t>(i) * static_cast<size_t>(n_) + static_cast<size_t>(j);
  }
  int m_ = 0;
  int n_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Row/column sums of a table (not validated against anything).
Margins margins_of_table(const BinaryTable& table);

/// Residual picture while assigning a column: current residual row sums
/// r'_i and the number of columns still to assign, n', counting the one
/// being assigned right now.
struct ResidualState {
  std::vector<int> residual_rows;
  int columns_remaining = 0;
};

/// Two-line text format: "rows: a b c ..." / "cols: a b c ...".
std::string to_text(const Margins& margins);
Margins margins_from_text(std::string_view text);

}  // namespace bct
