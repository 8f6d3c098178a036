#pragma once

#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace cpt {

inline constexpr double kInfCost = std::numeric_limits<double>::infinity();

// Rectangular cost matrix; +inf marks a forbidden pairing.
struct CostMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> cost;  // row-major, rows*cols entries

  CostMatrix() = default;
  CostMatrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), cost(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return cost[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return cost[r * cols + c]; }
};

struct Assignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (row, col)
  double total_cost = 0.0;
};

// Minimum-cost matching of maximum finite-feasible cardinality.
// Forbidden (+inf) pairs never appear in the result.
Assignment solve(const CostMatrix& c);

}  // namespace cpt
