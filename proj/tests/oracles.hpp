#pragma once

// Independent reference computations shared by unit and acceptance tests.
// Each is written directly from the defining formula with no reuse of the
// library code it checks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "uno/autograd.hpp"
#include "uno/matrix.hpp"
#include "uno/rng.hpp"

namespace oracle {

inline uno::Matrix random_matrix(std::size_t r, std::size_t c, uno::Rng& rng, double scale = 1.0) {
  uno::Matrix m(r, c);
  for (double& v : m.values()) v = scale * rng.normal();
  return m;
}

// Random rows on the probability simplex.
inline uno::Matrix random_distribution_rows(std::size_t r, std::size_t c, uno::Rng& rng) {
  uno::Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += (m(i, j) = rng.uniform() + 1e-3);
    for (std::size_t j = 0; j < c; ++j) m(i, j) /= s;
  }
  return m;
}

inline double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// |a - b| / max(|a|, |b|, tiny)
inline double rel_error(std::span<const double> a, std::span<const double> b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double denom = std::max({norm2(a), norm2(b), 1e-12});
  return norm2(d) / denom;
}

// Central differences of f with respect to every entry of *x.
inline uno::Matrix numeric_gradient(const std::function<double()>& f, uno::Matrix& x,
                                    double h = 1e-5) {
  uno::Matrix g(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x.data()[i];
    x.data()[i] = orig + h;
    const double up = f();
    x.data()[i] = orig - h;
    const double down = f();
    x.data()[i] = orig;
    g.data()[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// Builds the graph from `leaves`, backpropagates, and returns the worst
// relative error between analytic and numeric gradients over all leaves.
inline double gradient_check(std::vector<uno::ag::Var> leaves,
                             const std::function<uno::ag::Var(const std::vector<uno::ag::Var>&)>& build,
                             double h = 1e-5) {
  uno::ag::zero_grad(leaves);
  uno::ag::backward(build(leaves));
  double worst = 0.0;
  for (auto& leaf : leaves) {
    const uno::Matrix analytic = leaf->grad;
    const uno::Matrix numeric =
        numeric_gradient([&] { return uno::ag::scalar(build(leaves)); }, leaf->value, h);
    worst = std::max(worst, rel_error(analytic.values(), numeric.values()));
  }
  return worst;
}

// Mean over rows of -sum t log softmax(x / tau), in long double.
inline double softmax_ce(const uno::Matrix& x, const uno::Matrix& t, double tau) {
  long double total = 0.0L;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    long double z = 0.0L;
    for (std::size_t j = 0; j < x.cols(); ++j) z += std::exp(static_cast<long double>(x(i, j)) / tau);
    for (std::size_t j = 0; j < x.cols(); ++j)
      total -= t(i, j) * (static_cast<long double>(x(i, j)) / tau - std::log(z));
  }
  return static_cast<double>(total / static_cast<long double>(x.rows()));
}

// Sinkhorn-Knopp from the textbook definition: Q = exp(L / eps) / sum, then
// alternate row (1/C) and column (1/B) scaling. Long double, no shift.
inline uno::Matrix sinkhorn_plan(const uno::Matrix& logits, double eps, std::size_t iters) {
  const std::size_t c = logits.rows(), b = logits.cols();
  std::vector<long double> q(c * b);
  long double s = 0.0L;
  for (std::size_t i = 0; i < c * b; ++i) s += (q[i] = std::exp(static_cast<long double>(logits.data()[i]) / eps));
  for (auto& v : q) v /= s;
  for (std::size_t it = 0; it < iters; ++it) {
    for (std::size_t i = 0; i < c; ++i) {
      long double r = 0.0L;
      for (std::size_t j = 0; j < b; ++j) r += q[i * b + j];
      for (std::size_t j = 0; j < b; ++j) q[i * b + j] /= r * static_cast<long double>(c);
    }
    for (std::size_t j = 0; j < b; ++j) {
      long double col = 0.0L;
      for (std::size_t i = 0; i < c; ++i) col += q[i * b + j];
      for (std::size_t i = 0; i < c; ++i) q[i * b + j] /= col * static_cast<long double>(b);
    }
  }
  uno::Matrix out(c, b);
  for (std::size_t i = 0; i < c * b; ++i) out.data()[i] = static_cast<double>(q[i]);
  return out;
}

// Largest |row sum - 1/C| and |col sum - 1/B|.
inline std::pair<double, double> marginal_errors(const uno::Matrix& plan) {
  const double c = static_cast<double>(plan.rows()), b = static_cast<double>(plan.cols());
  double row_err = 0.0, col_err = 0.0;
  for (std::size_t i = 0; i < plan.rows(); ++i) {
    double s = 0.0;
    for (double v : plan.row(i)) s += v;
    row_err = std::max(row_err, std::abs(s - 1.0 / c));
  }
  for (std::size_t j = 0; j < plan.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < plan.rows(); ++i) s += plan(i, j);
    col_err = std::max(col_err, std::abs(s - 1.0 / b));
  }
  return {row_err, col_err};
}

// Maximum assignment profit by enumerating every permutation.
inline double brute_force_profit(const uno::Matrix& profit) {
  std::vector<std::size_t> perm(profit.rows());
  std::iota(perm.begin(), perm.end(), 0);
  double best = -INFINITY;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) s += profit(i, perm[i]);
    best = std::max(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Clustering accuracy by enumerating every cluster->class permutation.
// Needs equal, small id ranges.
inline double brute_force_cluster_accuracy(const std::vector<std::size_t>& pred,
                                           const std::vector<std::size_t>& truth, std::size_t k) {
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best = 0;
  do {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hit += perm[pred[i]] == truth[i];
    best = std::max(best, hit);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(pred.size());
}

}  // namespace oracle
