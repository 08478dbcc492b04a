#pragma once

// Per-row bodies shared by the serial and OpenMP kernels. Keeping a single
// definition is what makes the two paths bit-identical.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

#include "uno/matrix.hpp"

namespace uno::kernels::detail {

inline void check_gemm(const char* name, std::size_t m, std::size_t n, std::size_t ka,
                       std::size_t kb, const Matrix& c) {
  if (ka != kb)
    throw std::invalid_argument(std::string(name) + ": inner dimension mismatch (" +
                                std::to_string(ka) + " vs " + std::to_string(kb) + ")");
  if (c.rows() != m || c.cols() != n)
    throw std::invalid_argument(std::string(name) + ": output has shape " + c.shape_string() +
                                ", expected " + std::to_string(m) + "x" + std::to_string(n));
}

// Row i of c += a * b.
inline void gemm_nn_row(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i) {
  const std::size_t k = a.cols(), n = b.cols();
  double* out = c.data() + i * n;
  const double* arow = a.data() + i * k;
  for (std::size_t p = 0; p < k; ++p) {
    const double av = arow[p];
    const double* brow = b.data() + p * n;
    for (std::size_t j = 0; j < n; ++j) out[j] += av * brow[j];
  }
}

// Row i of c += a * b^T.
inline void gemm_nt_row(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i) {
  const std::size_t k = a.cols(), n = b.rows();
  double* out = c.data() + i * n;
  const double* arow = a.data() + i * k;
  for (std::size_t j = 0; j < n; ++j) {
    const double* brow = b.data() + j * k;
    double acc = 0.0;
    for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
    out[j] += acc;
  }
}

// Row i of c += a^T * b.
inline void gemm_tn_row(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i) {
  const std::size_t k = a.rows(), m = a.cols(), n = b.cols();
  double* out = c.data() + i * n;
  for (std::size_t p = 0; p < k; ++p) {
    const double av = a.data()[p * m + i];
    if (av == 0.0) continue;
    const double* brow = b.data() + p * n;
    for (std::size_t j = 0; j < n; ++j) out[j] += av * brow[j];
  }
}

inline double l2_normalize_row(const Matrix& x, double eps, Matrix& y, std::size_t r) {
  const auto in = x.row(r);
  double sq = 0.0;
  for (double v : in) sq += v * v;
  const double norm = std::sqrt(sq + eps);
  if (!(norm > 0.0)) throw std::domain_error("l2_normalize_rows: zero row " + std::to_string(r));
  auto out = y.row(r);
  for (std::size_t c = 0; c < in.size(); ++c) out[c] = in[c] / norm;
  return norm;
}

inline void l2_normalize_row_backward(const Matrix& y, double norm, const Matrix& gy,
                                      Matrix& gx, std::size_t r) {
  const auto yr = y.row(r);
  const auto gr = gy.row(r);
  double dot = 0.0;
  for (std::size_t c = 0; c < yr.size(); ++c) dot += yr[c] * gr[c];
  auto out = gx.row(r);
  for (std::size_t c = 0; c < yr.size(); ++c) out[c] += (gr[c] - yr[c] * dot) / norm;
}

inline double softmax_xent_row(const Matrix& x, const Matrix& target, double scale,
                               Matrix& probs, std::size_t r) {
  const auto in = x.row(r);
  auto p = probs.row(r);
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : in) mx = std::max(mx, scale * v);
  double sum = 0.0;
  for (std::size_t c = 0; c < in.size(); ++c) {
    p[c] = std::exp(scale * in[c] - mx);
    sum += p[c];
  }
  const double log_sum = std::log(sum);
  double loss = 0.0;
  for (std::size_t c = 0; c < in.size(); ++c) {
    p[c] /= sum;
    if (target.empty()) continue;
    const double t = target(r, c);
    if (t != 0.0) loss -= t * (scale * in[c] - mx - log_sum);
  }
  return loss;
}

}  // namespace uno::kernels::detail
