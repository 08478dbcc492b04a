#include "uno/sinkhorn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace uno::sinkhorn {

Matrix transport_plan(const Problem& problem) {
  const Matrix& L = problem.logits;
  if (!(problem.epsilon > 0.0)) throw std::invalid_argument("sinkhorn: epsilon must be > 0");
  if (L.rows() == 0 || L.cols() == 0)
    throw std::invalid_argument("sinkhorn: empty logits " + L.shape_string());
  if (!L.all_finite()) throw std::invalid_argument("sinkhorn: non-finite logits");

  const std::size_t clusters = L.rows(), samples = L.cols();
  const double max = *std::max_element(L.values().begin(), L.values().end());
  Matrix q(clusters, samples);
  double total = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    q.data()[i] = std::exp((L.data()[i] - max) / problem.epsilon);
    total += q.data()[i];
  }
  // The max entry maps to exp(0) = 1, so the total can neither vanish nor overflow.
  if (!(total >= 1.0) || !std::isfinite(total))
    throw std::logic_error("sinkhorn: max-shift failed to bound exp");
  for (double& v : q.values()) v /= total;

  const double row_target = 1.0 / static_cast<double>(clusters);
  const double col_target = 1.0 / static_cast<double>(samples);
  std::vector<double> col_sum(samples);
  for (std::size_t it = 0; it < problem.n_iter; ++it) {
    for (std::size_t r = 0; r < clusters; ++r) {
      auto row = q.row(r);
      double s = 0.0;
      for (double v : row) s += v;
      if (!(s > 0.0))
        throw std::domain_error("sinkhorn: cluster " + std::to_string(r) +
                                " underflowed to zero mass; increase epsilon");
      for (double& v : row) v = v / s * row_target;
    }
    std::fill(col_sum.begin(), col_sum.end(), 0.0);
    for (std::size_t r = 0; r < clusters; ++r)
      for (std::size_t c = 0; c < samples; ++c) col_sum[c] += q(r, c);
    for (std::size_t c = 0; c < samples; ++c)
      if (!(col_sum[c] > 0.0))
        throw std::domain_error("sinkhorn: sample " + std::to_string(c) +
                                " underflowed to zero mass; increase epsilon");
    for (std::size_t r = 0; r < clusters; ++r)
      for (std::size_t c = 0; c < samples; ++c) q(r, c) = q(r, c) / col_sum[c] * col_target;
  }
  return q;
}

PseudoLabels solve(const Problem& problem, Mode mode) {
  PseudoLabels out;
  out.mode = mode;
  out.plan = transport_plan(problem);
  const std::size_t clusters = out.plan.rows(), samples = out.plan.cols();
  out.targets = Matrix(samples, clusters);
  for (std::size_t c = 0; c < samples; ++c) {
    if (mode == Mode::Hard) {
      std::size_t best = 0;
      for (std::size_t r = 1; r < clusters; ++r)
        if (out.plan(r, c) > out.plan(best, c)) best = r;
      out.targets(c, best) = 1.0;
    } else {
      double s = 0.0;
      for (std::size_t r = 0; r < clusters; ++r) s += out.plan(r, c);
      for (std::size_t r = 0; r < clusters; ++r) out.targets(c, r) = out.plan(r, c) / s;
    }
  }
  return out;
}

double entropy(const Matrix& y) {
  double h = 0.0;
  for (double v : y.values()) {
    if (v < 0.0) throw std::invalid_argument("entropy: negative entry");
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

Matrix batch_targets(const Matrix& batch_logits, double epsilon, std::size_t n_iter,
                     Mode mode) {
  return solve(Problem{batch_logits.transposed(), epsilon, n_iter}, mode).targets;
}

Matrix greedy_targets(const Matrix& batch_logits) {
  Matrix t(batch_logits.rows(), batch_logits.cols());
  const auto best = argmax_rows(batch_logits);
  for (std::size_t r = 0; r < t.rows(); ++r) t(r, best[r]) = 1.0;
  return t;
}

}  // namespace uno::sinkhorn
