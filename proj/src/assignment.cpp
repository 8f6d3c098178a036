#include "cptrack/assignment.hpp"

#include <algorithm>
#include <cmath>

#include "cptrack/geometry.hpp"

namespace cpt {

// Shortest augmenting path formulation with row/column potentials on a
// square matrix. Forbidden (+inf) and padding entries are replaced by a
// finite cost larger than the sum of all real costs, so the minimum-total
// solution uses as few of them as possible: that yields the maximum
// finite-feasible cardinality first and the minimum total cost second.
Assignment solve(const CostMatrix& c) {
  for (double x : c.cost) {
    if (std::isnan(x) || x < 0.0)
      throw ValidationError("assignment: costs must be >= 0 or +inf");
  }
  const std::size_t n = c.rows;
  const std::size_t m = c.cols;
  if (n == 0 || m == 0) return {};

  const std::size_t N = std::max(n, m);
  double finite_sum = 0.0;
  for (double x : c.cost)
    if (std::isfinite(x)) finite_sum += x;
  const double big = finite_sum + 1.0;

  // 1-based square cost with padding.
  auto cost_at = [&](std::size_t row1, std::size_t col1) {
    if (row1 <= n && col1 <= m) {
      const double x = c.at(row1 - 1, col1 - 1);
      if (std::isfinite(x)) return x;
    }
    return big;
  };

  // p[j] holds the row matched to column j; p[0] is the row being inserted.
  std::vector<std::size_t> p(N + 1, 0);
  std::vector<double> u(N + 1, 0.0), v(N + 1, 0.0);

  for (std::size_t i = 1; i <= N; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(N + 1, kInfCost);
    std::vector<std::size_t> way(N + 1, 0);
    std::vector<char> used(N + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInfCost;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= N; ++j) {
        if (used[j]) continue;
        const double cur = cost_at(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= N; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);

    // Augment along the alternating path.
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment a;
  for (std::size_t j = 1; j <= N; ++j) {
    const std::size_t i = p[j];
    if (i == 0 || i > n || j > m) continue;
    const double cc = c.at(i - 1, j - 1);
    if (!std::isfinite(cc)) continue;  // padded match, not a real pairing
    a.pairs.emplace_back(i - 1, j - 1);
    a.total_cost += cc;
  }
  std::sort(a.pairs.begin(), a.pairs.end());
  return a;
}

}  // namespace cpt
