#pragma once

#include <span>
#include <vector>

#include "uno/matrix.hpp"

// Dense numeric kernels used by the differentiable ops.
//
// Two implementations share one signature set: `serial` is the plain
// reference kept for testing, `omp` parallelizes over output rows. Every
// output element is reduced in the same order by both, so results are
// bit-identical regardless of thread count.
//
// All gemm variants accumulate into `c`, which must already have the
// output shape.
namespace uno::kernels {

namespace serial {
void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c);  // c += a * b
void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c);  // c += a * b^T
void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c);  // c += a^T * b

// y = x / sqrt(|x|^2 + eps) per row; norms receives the denominators.
void l2_normalize_rows(const Matrix& x, double eps, Matrix& y, std::vector<double>& norms);
// gx += (gy - y * <y, gy>) / norm per row.
void l2_normalize_rows_backward(const Matrix& y, std::span<const double> norms,
                                const Matrix& gy, Matrix& gx);

// probs = softmax(scale * x) per row, max-shifted. Returns -sum target*log(probs) per row.
std::vector<double> softmax_xent_rows(const Matrix& x, const Matrix& target, double scale,
                                      Matrix& probs);
}  // namespace serial

namespace omp {
void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c);
void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c);
void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c);
void l2_normalize_rows(const Matrix& x, double eps, Matrix& y, std::vector<double>& norms);
void l2_normalize_rows_backward(const Matrix& y, std::span<const double> norms,
                                const Matrix& gy, Matrix& gx);
std::vector<double> softmax_xent_rows(const Matrix& x, const Matrix& target, double scale,
                                      Matrix& probs);
}  // namespace omp

// Default dispatch used by the library.
using omp::gemm_nn;
using omp::gemm_nt;
using omp::gemm_tn;
using omp::l2_normalize_rows;
using omp::l2_normalize_rows_backward;
using omp::softmax_xent_rows;

// Row softmax of scale * x without a loss term.
Matrix softmax_rows(const Matrix& x, double scale);

int max_threads();

}  // namespace uno::kernels
