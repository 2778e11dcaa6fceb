#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kuramoto {

struct Assignment {
  std::vector<std::size_t> column_of_row;
  double cost = 0.0;
};

/// Minimum-cost perfect matching for a dense n x n cost matrix (row-major),
/// shortest augmenting paths with dual potentials, O(n^3).
Assignment solve_assignment(std::span<const double> cost, std::size_t n);

}  // namespace kuramoto
