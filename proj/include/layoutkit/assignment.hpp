#pragma once

#include <utility>
#include <vector>

namespace layoutkit {

// Minimum-cost assignment on a dense rows x cols matrix (row-major).
// Matches min(rows, cols) pairs; result is (row, col) sorted by row.
// Kuhn-Munkres with potentials, O(n^2 * m); exact for finite costs.
std::vector<std::pair<int, int>> min_cost_assignment(
    int rows, int cols, const std::vector<double>& cost);

}  // namespace layoutkit
