#include "kuramoto/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kuramoto/error.hpp"

namespace kuramoto {

Assignment solve_assignment(std::span<const double> cost, std::size_t n) {
  if (cost.size() != n * n) throw Error(Errc::DimensionMismatch, "assignment cost matrix is not n x n");
  for (double c : cost) {
    if (!std::isfinite(c)) throw Error(Errc::NonFinite, "assignment cost matrix has nonfinite entries");
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; column 0 is the virtual source of each augmentation
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> row_of(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);

  for (std::size_t i = 1; i <= n; ++i) {
    row_of[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = row_of[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[row_of[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      row_of[j0] = row_of[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment a;
  a.column_of_row.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) a.column_of_row[row_of[j] - 1] = j - 1;
  for (std::size_t i = 0; i < n; ++i) a.cost += cost[i * n + a.column_of_row[i]];
  return a;
}

}  // namespace kuramoto
