#include "kernel_rows.hpp"
#include "uno/kernels.hpp"

namespace uno::kernels::serial {

void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c) {
  detail::check_gemm("gemm_nn", a.rows(), b.cols(), a.cols(), b.rows(), c);
  for (std::size_t i = 0; i < a.rows(); ++i) detail::gemm_nn_row(a, b, c, i);
}

void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c) {
  detail::check_gemm("gemm_nt", a.rows(), b.rows(), a.cols(), b.cols(), c);
  for (std::size_t i = 0; i < a.rows(); ++i) detail::gemm_nt_row(a, b, c, i);
}

void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c) {
  detail::check_gemm("gemm_tn", a.cols(), b.cols(), a.rows(), b.rows(), c);
  for (std::size_t i = 0; i < a.cols(); ++i) detail::gemm_tn_row(a, b, c, i);
}

void l2_normalize_rows(const Matrix& x, double eps, Matrix& y, std::vector<double>& norms) {
  y = Matrix(x.rows(), x.cols());
  norms.assign(x.rows(), 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) norms[r] = detail::l2_normalize_row(x, eps, y, r);
}

void l2_normalize_rows_backward(const Matrix& y, std::span<const double> norms,
                                const Matrix& gy, Matrix& gx) {
  for (std::size_t r = 0; r < y.rows(); ++r)
    detail::l2_normalize_row_backward(y, norms[r], gy, gx, r);
}

std::vector<double> softmax_xent_rows(const Matrix& x, const Matrix& target, double scale,
                                      Matrix& probs) {
  probs = Matrix(x.rows(), x.cols());
  std::vector<double> loss(x.rows(), 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r)
    loss[r] = detail::softmax_xent_row(x, target, scale, probs, r);
  return loss;
}

}  // namespace uno::kernels::serial
