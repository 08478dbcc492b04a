#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "kernel_rows.hpp"
#include "uno/kernels.hpp"

namespace uno::kernels {

namespace {

// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::size_t kParallelWork = 1 << 15;

// Runs body(r) for r in [0, n), in parallel when work is large enough.
// Exceptions thrown inside the region are rethrown on the calling thread.
template <typename Body>
void for_rows(std::size_t n, std::size_t work, Body&& body) {
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (work >= kParallelWork)
  for (std::ptrdiff_t r = 0; r < count; ++r) {
    try {
      body(static_cast<std::size_t>(r));
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

namespace omp {

void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c) {
  detail::check_gemm("gemm_nn", a.rows(), b.cols(), a.cols(), b.rows(), c);
  for_rows(a.rows(), a.rows() * a.cols() * b.cols(),
           [&](std::size_t i) { detail::gemm_nn_row(a, b, c, i); });
}

void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c) {
  detail::check_gemm("gemm_nt", a.rows(), b.rows(), a.cols(), b.cols(), c);
  for_rows(a.rows(), a.rows() * a.cols() * b.rows(),
           [&](std::size_t i) { detail::gemm_nt_row(a, b, c, i); });
}

void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c) {
  detail::check_gemm("gemm_tn", a.cols(), b.cols(), a.rows(), b.rows(), c);
  for_rows(a.cols(), a.rows() * a.cols() * b.cols(),
           [&](std::size_t i) { detail::gemm_tn_row(a, b, c, i); });
}

void l2_normalize_rows(const Matrix& x, double eps, Matrix& y, std::vector<double>& norms) {
  y = Matrix(x.rows(), x.cols());
  norms.assign(x.rows(), 0.0);
  for_rows(x.rows(), x.size() * 4,
           [&](std::size_t r) { norms[r] = detail::l2_normalize_row(x, eps, y, r); });
}

void l2_normalize_rows_backward(const Matrix& y, std::span<const double> norms,
                                const Matrix& gy, Matrix& gx) {
  for_rows(y.rows(), y.size() * 4, [&](std::size_t r) {
    detail::l2_normalize_row_backward(y, norms[r], gy, gx, r);
  });
}

std::vector<double> softmax_xent_rows(const Matrix& x, const Matrix& target, double scale,
                                      Matrix& probs) {
  probs = Matrix(x.rows(), x.cols());
  std::vector<double> loss(x.rows(), 0.0);
  for_rows(x.rows(), x.size() * 16, [&](std::size_t r) {
    loss[r] = detail::softmax_xent_row(x, target, scale, probs, r);
  });
  return loss;
}

}  // namespace omp

Matrix softmax_rows(const Matrix& x, double scale) {
  Matrix probs;
  softmax_xent_rows(x, Matrix{}, scale, probs);
  return probs;
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace uno::kernels
