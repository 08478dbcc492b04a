#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "uno/metrics.hpp"

namespace uno::metrics {

namespace {

// O(n^3) shortest augmenting path solver (potentials formulation) for
// minimum-cost assignment on an n x n cost matrix. Returns row -> column.
std::vector<std::size_t> min_cost_assignment(const Matrix& cost) {
  const std::size_t n = cost.rows();
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; index 0 is the virtual root column.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
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
  std::vector<std::size_t> perm(n);
  for (std::size_t j = 1; j <= n; ++j) perm[p[j] - 1] = j - 1;
  return perm;
}

// Optimal profit over the given rows and columns.
double best_profit(const Matrix& profit, std::span<const std::size_t> rows,
                   std::span<const std::size_t> cols) {
  const std::size_t n = rows.size();
  if (n == 0) return 0.0;
  Matrix cost(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) cost(i, j) = -profit(rows[i], cols[j]);
  const auto perm = min_cost_assignment(cost);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += profit(rows[i], cols[perm[i]]);
  return total;
}

}  // namespace

double assignment_profit(const Matrix& profit, std::span<const std::size_t> perm) {
  double total = 0.0;
  for (std::size_t i = 0; i < perm.size(); ++i) total += profit(i, perm[i]);
  return total;
}

std::vector<std::size_t> hungarian(const Matrix& profit) {
  if (profit.rows() != profit.cols())
    throw std::invalid_argument("hungarian: matrix must be square, got " + profit.shape_string());
  if (!profit.all_finite()) throw std::invalid_argument("hungarian: non-finite profit");
  const std::size_t n = profit.rows();
  if (n == 0) return {};

  std::vector<std::size_t> rows(n), cols(n);
  std::iota(rows.begin(), rows.end(), 0);
  std::iota(cols.begin(), cols.end(), 0);
  double remaining = best_profit(profit, rows, cols);
  double scale = 1.0;
  for (double v : profit.values()) scale = std::max(scale, std::abs(v));
  const double tol = 1e-9 * scale * static_cast<double>(n);

  // Fix rows in order, each to the smallest column that still admits an
  // optimal completion.
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> rest_rows(rows.begin() + static_cast<std::ptrdiff_t>(i) + 1, rows.end());
    bool fixed = false;
    for (std::size_t k = 0; k < cols.size() && !fixed; ++k) {
      std::vector<std::size_t> rest_cols = cols;
      rest_cols.erase(rest_cols.begin() + static_cast<std::ptrdiff_t>(k));
      const double sub = best_profit(profit, rest_rows, rest_cols);
      if (profit(i, cols[k]) + sub >= remaining - tol) {
        perm[i] = cols[k];
        remaining = sub;
        cols = std::move(rest_cols);
        fixed = true;
      }
    }
    if (!fixed) throw std::logic_error("hungarian: lexicographic refinement failed");
  }
  return perm;
}

}  // namespace uno::metrics
