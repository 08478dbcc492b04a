#pragma once

#include <cstddef>

#include "uno/matrix.hpp"

namespace uno::sinkhorn {

enum class Mode { Soft, Hard };

// Entropy-regularized assignment of B samples to C clusters. `logits` is
// C x B: column j holds the cluster logits of sample j.
struct Problem {
  Matrix logits;
  double epsilon = 0.05;
  std::size_t n_iter = 3;
};

struct PseudoLabels {
  // C x B transport plan; rows sum to 1/C and columns to 1/B at convergence.
  Matrix plan;
  // B x C per-sample targets: plan columns rescaled to sum 1 (soft) or the
  // one-hot of each column's argmax (hard).
  Matrix targets;
  Mode mode = Mode::Soft;
};

// exp(L / eps), max-shifted, then n_iter rounds of row then column scaling.
Matrix transport_plan(const Problem& problem);

PseudoLabels solve(const Problem& problem, Mode mode = Mode::Soft);

// -sum Y log Y with 0 log 0 = 0.
double entropy(const Matrix& y);

// Targets for a B x C batch of logits (the natural layout coming out of a
// head). Transposes into the solver's C x B layout.
Matrix batch_targets(const Matrix& batch_logits, double epsilon, std::size_t n_iter,
                     Mode mode = Mode::Soft);

// One-hot of each row's argmax with no balancing term. Used as the
// collapse-prone control.
Matrix greedy_targets(const Matrix& batch_logits);

}  // namespace uno::sinkhorn
