#include "bct/margins.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bct/errors.hpp"

namespace bct {

Margins Margins::validated(std::vector<int> row_sums, std::vector<int> col_sums) {
  if (row_sums.empty() || col_sums.empty()) {
    throw EmptyMargins("margins must have at least one row and one column");
  }
  const int m = static_cast<int>(row_sums.size());
  const int n = static_cast<int>(col_sums.size());
  long long row_total = 0;
  long long col_total = 0;
  for (int c : col_sums) {
    if (c < 0) throw EntryTooLarge("negative column sum");
    if (c > m) throw EntryTooLarge("column sum " + std::to_string(c) + " exceeds " +
                                   std::to_string(m) + " rows");
    col_total += c;
  }
  for (int r : row_sums) {
    if (r < 0) throw EntryTooLarge("negative row sum");
    row_total += r;
  }
  if (row_total != col_total) {
    throw TotalMismatch("row total " + std::to_string(row_total) +
                        " != column total " + std::to_string(col_total));
  }
  for (int r : row_sums) {
    if (r > n) throw EntryTooLarge("row sum " + std::to_string(r) + " exceeds " +
                                   std::to_string(n) + " columns");
  }
  return Margins(std::move(row_sums), std::move(col_sums), row_total);
}

int Margins::max_row_sum() const {
  return *std::max_element(rows_.begin(), rows_.end());
}

Margins Margins::transposed() const {
  return Margins(cols_, rows_, total_);
}

Margins make_one_heavy(int m, int d) {
  if (m < 0 || d < 1) throw OutOfRange("one-heavy family needs m >= 0, d >= 1");
  std::vector<int> rows(static_cast<size_t>(m) + 1, 1);
  rows.back() = d;
  std::vector<int> cols(static_cast<size_t>(m) + static_cast<size_t>(d), 1);
  return Margins::validated(std::move(rows), std::move(cols));
}

Margins make_two_heavy(int m, int d_r, int d_c) {
  const long long n = static_cast<long long>(m) + d_r - d_c;
  if (m < 1 || d_r < 1 || d_c < 1 || d_c > m || n < d_r) {
    throw InfeasibleFamily("two-heavy family needs m >= 1, d_r >= 1, 1 <= d_c <= m");
  }
  std::vector<int> rows(static_cast<size_t>(m) + 1, 1);
  rows.back() = d_r;
  std::vector<int> cols(static_cast<size_t>(n) + 1, 1);
  cols.back() = d_c;
  return Margins::validated(std::move(rows), std::move(cols));
}

int scaled_floor(long double fraction, int m) {
  return static_cast<int>(std::floor(fraction * m + 1e-9L));
}

Margins make_regular(int n, int r) {
  if (n < 1 || r < 0 || r > n) throw OutOfRange("regular family needs 0 <= r <= n");
  return Margins::validated(std::vector<int>(static_cast<size_t>(n), r),
                            std::vector<int>(static_cast<size_t>(n), r));
}

bool gale_ryser_feasible(std::span<const int> row_sums, std::span<const int> col_sums) {
  const int m = static_cast<int>(row_sums.size());
  const int n = static_cast<int>(col_sums.size());
  long long row_total = 0;
  long long col_total = 0;
  for (int r : row_sums) {
    if (r < 0 || r > n) return false;
    row_total += r;
  }
  for (int c : col_sums) {
    if (c < 0 || c > m) return false;
    col_total += c;
  }
  if (row_total != col_total) return false;

  // N[k] = sum_j min(c_j, k); with equal totals the dominance condition
  // sum of k largest row sums <= N[k] for k = 1..m decides feasibility.
  std::vector<int> col_count(static_cast<size_t>(m) + 2, 0);
  for (int c : col_sums) ++col_count[static_cast<size_t>(c)];
  std::vector<long long> n_at(static_cast<size_t>(m) + 1, 0);
  long long ge = static_cast<long long>(n);  // #{j : c_j >= k}
  for (int k = 1; k <= m; ++k) {
    ge -= col_count[static_cast<size_t>(k) - 1];
    n_at[static_cast<size_t>(k)] = n_at[static_cast<size_t>(k) - 1] + ge;
  }

  std::vector<int> row_count(static_cast<size_t>(n) + 1, 0);
  for (int r : row_sums) ++row_count[static_cast<size_t>(r)];
  long long lhs = 0;
  int k = 0;
  for (int v = n; v >= 1; --v) {
    for (int t = 0; t < row_count[static_cast<size_t>(v)]; ++t) {
      ++k;
      lhs += v;
      if (lhs > n_at[static_cast<size_t>(k)]) return false;
    }
  }
  return true;
}

bool gale_ryser_feasible(const Margins& margins) {
  return gale_ryser_feasible(margins.row_sums(), margins.col_sums());
}

BinaryTable BinaryTable::transposed() const {
  BinaryTable out(n_, m_);
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < n_; ++j)
      if (at(i, j)) out.set(j, i, true);
  return out;
}

Margins margins_of_table(const BinaryTable& table) {
  std::vector<int> rows(static_cast<size_t>(table.n_rows()), 0);
  std::vector<int> cols(static_cast<size_t>(table.n_cols()), 0);
  for (int i = 0; i < table.n_rows(); ++i)
    for (int j = 0; j < table.n_cols(); ++j)
      if (table.at(i, j)) {
        ++rows[static_cast<size_t>(i)];
        ++cols[static_cast<size_t>(j)];
      }
  return Margins::validated(std::move(rows), std::move(cols));
}

std::string to_text(const Margins& margins) {
  std::ostringstream out;
  out << "rows:";
  for (int r : margins.row_sums()) out << ' ' << r;
  out << "\ncols:";
  for (int c : margins.col_sums()) out << ' ' << c;
  out << '\n';
  return out.str();
}

namespace {

std::vector<int> parse_int_line(const std::string& line, const std::string& tag) {
  auto pos = line.find(':');
  if (pos == std::string::npos || line.substr(0, pos) != tag) {
    throw ConfigError("expected line starting with '" + tag + ":'");
  }
  std::istringstream in(line.substr(pos + 1));
  std::vector<int> values;
  long long v = 0;
  while (in >> v) values.push_back(static_cast<int>(v));
  if (!in.eof()) throw ConfigError("non-integer token in '" + tag + "' line");
  return values;
}

}  // namespace

Margins margins_from_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string rows_line;
  std::string cols_line;
  if (!std::getline(in, rows_line) || !std::getline(in, cols_line)) {
    throw ConfigError("margins text needs a 'rows:' line and a 'cols:' line");
  }
  return Margins::validated(parse_int_line(rows_line, "rows"),
                            parse_int_line(cols_line, "cols"));
}

}  // namespace bct
