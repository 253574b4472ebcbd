#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace botsort {

/// Minimum-cost rectangular assignment over a row-major rows x cols matrix of finite
/// costs: exactly min(rows, cols) pairs are formed. Returns the column assigned to each
/// row, or -1 for rows left over when rows > cols. O(n^2 m), deterministic.
std::vector<int> min_cost_assignment(std::span<const double> cost, std::size_t rows, std::size_t cols);

}  // namespace botsort
