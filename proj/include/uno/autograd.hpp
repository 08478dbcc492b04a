#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "uno/matrix.hpp"

// Minimal reverse-mode differentiation over dense matrices.
//
// A graph is built eagerly by calling the ops below; `backward` on a 1x1
// result walks it in reverse topological order. Gradients accumulate
// additively, so a node used twice receives the sum of both contributions.
// Leaf parameters keep their gradient across calls until `zero_grad`.
namespace uno::ag {

struct Node {
  Matrix value;
  Matrix grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Pushes this node's grad into its parents' grads.
  std::function<void(Node&)> backward_fn;
  std::string name;

  Matrix& ensure_grad() {
    if (!grad.same_shape(value)) grad = Matrix(value.rows(), value.cols());
    return grad;
  }
  bool is_leaf() const { return parents.empty(); }
};

using Var = std::shared_ptr<Node>;

// Default guard added under the square root by l2_normalize_rows.
inline constexpr double kNormEps = 1e-12;

Var constant(Matrix value);
Var parameter(Matrix value, std::string name = {});

double scalar(const Var& v);

void backward(const Var& root);
void zero_grad(std::span<const Var> params);

Var matmul(const Var& a, const Var& b);     // a * b
Var matmul_nt(const Var& a, const Var& b);  // a * b^T
Var add_bias(const Var& x, const Var& bias);
Var relu(const Var& x);
Var tanh(const Var& x);
// Each row divided by sqrt(|row|^2 + eps). eps = 0 disables the guard and
// makes an all-zero row an error.
Var l2_normalize_rows(const Var& x, double eps = kNormEps);
Var concat_cols(const Var& a, const Var& b);
Var select_rows(const Var& x, std::vector<std::size_t> idx);
Var add(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var mean(std::span<const Var> scalars);

// Mean over rows of -sum_c target_c * log softmax(logits / temperature)_c.
// The target is a plain matrix: it never receives gradient.
Var softmax_ce(const Var& logits, const Matrix& target, double temperature);

}  // namespace uno::ag
