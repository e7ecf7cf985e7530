#include "layoutkit/assignment.hpp"

#include <algorithm>
#include <limits>

#include "layoutkit/error.hpp"

namespace layoutkit {

namespace {

// Potentials form of Kuhn-Munkres, 1-based scratch arrays, rows <= cols.
// col_owner[j] ends up holding the row matched to column j (0 = free).
std::vector<int> solve_rect(int rows, int cols,
                            const std::vector<double>& cost) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> row_pot(rows + 1, 0.0), col_pot(cols + 1, 0.0);
  std::vector<int> col_owner(cols + 1, 0), path(cols + 1, 0);

  for (int r = 1; r <= rows; ++r) {
    col_owner[0] = r;
    int j0 = 0;
    std::vector<double> min_slack(cols + 1, kInf);
    std::vector<char> visited(cols + 1, 0);
    do {
      visited[j0] = 1;
      int r0 = col_owner[j0], j_next = -1;
      double delta = kInf;
      for (int j = 1; j <= cols; ++j) {
        if (visited[j]) continue;
        double slack =
            cost[(r0 - 1) * static_cast<size_t>(cols) + (j - 1)] -
            row_pot[r0] - col_pot[j];
        if (slack < min_slack[j]) {
          min_slack[j] = slack;
          path[j] = j0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          j_next = j;
        }
      }
      for (int j = 0; j <= cols; ++j) {
        if (visited[j]) {
          row_pot[col_owner[j]] += delta;
          col_pot[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      j0 = j_next;
    } while (col_owner[j0] != 0);
    do {
      int j_prev = path[j0];
      col_owner[j0] = col_owner[j_prev];
      j0 = j_prev;
    } while (j0 != 0);
  }
  return col_owner;
}

}  // namespace

std::vector<std::pair<int, int>> min_cost_assignment(
    int rows, int cols, const std::vector<double>& cost) {
  if (rows <= 0 || cols <= 0)
    raise(ErrorCode::InvalidArgument, "assignment needs a non-empty matrix");
  if (cost.size() != static_cast<size_t>(rows) * cols)
    raise(ErrorCode::InvalidArgument, "cost matrix size mismatch");

  std::vector<std::pair<int, int>> result;
  if (rows <= cols) {
    std::vector<int> col_owner = solve_rect(rows, cols, cost);
    for (int j = 1; j <= cols; ++j)
      if (col_owner[j] > 0) result.emplace_back(col_owner[j] - 1, j - 1);
  } else {
    std::vector<double> flipped(cost.size());
    for (int r = 0; r < rows; ++r)
      for (int j = 0; j < cols; ++j)
        flipped[static_cast<size_t>(j) * rows + r] =
            cost[static_cast<size_t>(r) * cols + j];
    std::vector<int> col_owner = solve_rect(cols, rows, flipped);
    for (int j = 1; j <= rows; ++j)
      if (col_owner[j] > 0) result.emplace_back(j - 1, col_owner[j] - 1);
  }
  std::sort(result.begin(), result.end());
  return result;
}

}  // namespace layoutkit
