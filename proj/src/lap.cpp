#include "botsort/lap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "botsort/error.hpp"

namespace botsort {

namespace {

// Shortest augmenting path Hungarian method with row/column potentials; requires n <= m.
// a(i, j) is the cost of row i, column j (0-based).
template <typename Cost>
std::vector<int> hungarian(std::size_t n, std::size_t m, Cost a) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based internally; column 0 is the virtual source.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  std::vector<char> used(m + 1);

  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(n, -1);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = static_cast<int>(j - 1);
  }
  return row_to_col;
}

}  // namespace

std::vector<int> min_cost_assignment(std::span<const double> cost, std::size_t rows, std::size_t cols) {
  if (cost.size() != rows * cols) throw ShapeMismatchError("cost buffer does not match rows x cols");
  for (double c : cost) {
    if (!std::isfinite(c)) throw InvalidArgumentError("assignment costs must be finite");
  }
  if (rows == 0 || cols == 0) return std::vector<int>(rows, -1);

  if (rows <= cols) {
    return hungarian(rows, cols, [&](std::size_t i, std::size_t j) { return cost[i * cols + j]; });
  }
  const std::vector<int> col_to_row =
      hungarian(cols, rows, [&](std::size_t i, std::size_t j) { return cost[j * cols + i]; });
  std::vector<int> row_to_col(rows, -1);
  for (std::size_t c = 0; c < cols; ++c) {
    if (col_to_row[c] >= 0) row_to_col[static_cast<std::size_t>(col_to_row[c])] = static_cast<int>(c);
  }
  return row_to_col;
}

}  // namespace botsort
