#include "uno/autograd.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "uno/kernels.hpp"

namespace uno::ag {

namespace {

Var make_node(Matrix value, std::vector<Var> parents, std::function<void(Node&)> fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  for (const auto& p : parents) n->requires_grad = n->requires_grad || p->requires_grad;
  n->parents = std::move(parents);
  if (n->requires_grad) n->backward_fn = std::move(fn);
  return n;
}

void require_scalar(const Var& v, const char* what) {
  if (v->value.rows() != 1 || v->value.cols() != 1)
    throw std::invalid_argument(std::string(what) + ": expected a 1x1 value, got " +
                                v->value.shape_string());
}

}  // namespace

Var constant(Matrix value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return n;
}

Var parameter(Matrix value, std::string name) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  n->name = std::move(name);
  return n;
}

double scalar(const Var& v) {
  require_scalar(v, "scalar");
  return v->value(0, 0);
}

void backward(const Var& root) {
  require_scalar(root, "backward");
  if (!root->requires_grad) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{root.get(), 0}};
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* n : order)
    if (!n->is_leaf()) n->grad = Matrix(n->value.rows(), n->value.cols());
  root->ensure_grad()(0, 0) += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn) n->backward_fn(*n);
  }
}

void zero_grad(std::span<const Var> params) {
  for (const auto& p : params) p->grad = Matrix(p->value.rows(), p->value.cols());
}

Var matmul(const Var& a, const Var& b) {
  if (a->value.cols() != b->value.rows())
    throw std::invalid_argument("matmul: shape mismatch " + a->value.shape_string() + " * " +
                                b->value.shape_string());
  Matrix out(a->value.rows(), b->value.cols());
  kernels::gemm_nn(a->value, b->value, out);
  return make_node(std::move(out), {a, b}, [a, b](Node& self) {
    if (a->requires_grad) kernels::gemm_nt(self.grad, b->value, a->ensure_grad());
    if (b->requires_grad) kernels::gemm_tn(a->value, self.grad, b->ensure_grad());
  });
}

Var matmul_nt(const Var& a, const Var& b) {
  if (a->value.cols() != b->value.cols())
    throw std::invalid_argument("matmul_nt: shape mismatch " + a->value.shape_string() +
                                " * (" + b->value.shape_string() + ")^T");
  Matrix out(a->value.rows(), b->value.rows());
  kernels::gemm_nt(a->value, b->value, out);
  return make_node(std::move(out), {a, b}, [a, b](Node& self) {
    if (a->requires_grad) kernels::gemm_nn(self.grad, b->value, a->ensure_grad());
    if (b->requires_grad) kernels::gemm_tn(self.grad, a->value, b->ensure_grad());
  });
}

Var add_bias(const Var& x, const Var& bias) {
  const Matrix& xv = x->value;
  if (bias->value.rows() != 1 || bias->value.cols() != xv.cols())
    throw std::invalid_argument("add_bias: bias shape " + bias->value.shape_string() +
                                " does not fit " + xv.shape_string());
  Matrix out = xv;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += bias->value(0, c);
  return make_node(std::move(out), {x, bias}, [x, bias](Node& self) {
    if (x->requires_grad) {
      auto& g = x->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] += self.grad.data()[i];
    }
    if (bias->requires_grad) {
      auto& g = bias->ensure_grad();
      for (std::size_t r = 0; r < self.grad.rows(); ++r)
        for (std::size_t c = 0; c < self.grad.cols(); ++c) g(0, c) += self.grad(r, c);
    }
  });
}

Var relu(const Var& x) {
  Matrix out = x->value;
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return make_node(std::move(out), {x}, [x](Node& self) {
    auto& g = x->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (x->value.data()[i] > 0.0) g.data()[i] += self.grad.data()[i];
  });
}

Var tanh(const Var& x) {
  Matrix out = x->value;
  for (double& v : out.values()) v = std::tanh(v);
  return make_node(std::move(out), {x}, [x](Node& self) {
    auto& g = x->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double y = self.value.data()[i];
      g.data()[i] += self.grad.data()[i] * (1.0 - y * y);
    }
  });
}

Var l2_normalize_rows(const Var& x, double eps) {
  if (eps < 0.0) throw std::invalid_argument("l2_normalize_rows: negative epsilon");
  Matrix out;
  std::vector<double> norms;
  kernels::l2_normalize_rows(x->value, eps, out, norms);
  return make_node(std::move(out), {x}, [x, norms = std::move(norms)](Node& self) {
    kernels::l2_normalize_rows_backward(self.value, norms, self.grad, x->ensure_grad());
  });
}

Var concat_cols(const Var& a, const Var& b) {
  Matrix out = hconcat(a->value, b->value);
  return make_node(std::move(out), {a, b}, [a, b](Node& self) {
    const std::size_t ca = a->value.cols();
    if (a->requires_grad) {
      auto& g = a->ensure_grad();
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < ca; ++c) g(r, c) += self.grad(r, c);
    }
    if (b->requires_grad) {
      auto& g = b->ensure_grad();
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) g(r, c) += self.grad(r, ca + c);
    }
  });
}

Var select_rows(const Var& x, std::vector<std::size_t> idx) {
  Matrix out = x->value.select_rows(idx);
  return make_node(std::move(out), {x}, [x, idx = std::move(idx)](Node& self) {
    auto& g = x->ensure_grad();
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t c = 0; c < g.cols(); ++c) g(idx[i], c) += self.grad(i, c);
  });
}

Var add(const Var& a, const Var& b) {
  if (!a->value.same_shape(b->value))
    throw std::invalid_argument("add: shape mismatch " + a->value.shape_string() + " vs " +
                                b->value.shape_string());
  Matrix out = a->value;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b->value.data()[i];
  return make_node(std::move(out), {a, b}, [a, b](Node& self) {
    for (const Var& p : {a, b}) {
      if (!p->requires_grad) continue;
      auto& g = p->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] += self.grad.data()[i];
    }
  });
}

Var scale(const Var& a, double s) {
  Matrix out = a->value;
  for (double& v : out.values()) v *= s;
  return make_node(std::move(out), {a}, [a, s](Node& self) {
    auto& g = a->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] += s * self.grad.data()[i];
  });
}

Var mean(std::span<const Var> scalars) {
  if (scalars.empty()) throw std::invalid_argument("mean: no terms");
  double acc = 0.0;
  for (const auto& s : scalars) acc += scalar(s);
  const double inv = 1.0 / static_cast<double>(scalars.size());
  std::vector<Var> parents(scalars.begin(), scalars.end());
  return make_node(Matrix(1, 1, acc * inv), parents, [parents, inv](Node& self) {
    for (const auto& p : parents)
      if (p->requires_grad) p->ensure_grad()(0, 0) += inv * self.grad(0, 0);
  });
}

Var softmax_ce(const Var& logits, const Matrix& target, double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("softmax_ce: temperature must be > 0");
  const Matrix& lv = logits->value;
  if (!target.same_shape(lv))
    throw std::invalid_argument("softmax_ce: target shape " + target.shape_string() +
                                " does not match logits " + lv.shape_string());
  if (lv.rows() == 0) throw std::invalid_argument("softmax_ce: empty batch");
  for (std::size_t r = 0; r < target.rows(); ++r) {
    double s = 0.0;
    for (double t : target.row(r)) {
      if (t < 0.0) throw std::invalid_argument("softmax_ce: negative target entry");
      s += t;
    }
    if (std::abs(s - 1.0) > 1e-6)
      throw std::invalid_argument("softmax_ce: target row " + std::to_string(r) + " sums to " +
                                  std::to_string(s));
  }

  const double inv_tau = 1.0 / temperature;
  Matrix probs;
  const auto per_row = kernels::softmax_xent_rows(lv, target, inv_tau, probs);
  double loss = 0.0;
  for (double v : per_row) loss += v;
  const double inv_rows = 1.0 / static_cast<double>(lv.rows());

  return make_node(Matrix(1, 1, loss * inv_rows), {logits},
                   [logits, target, probs = std::move(probs), inv_tau, inv_rows](Node& self) {
                     auto& g = logits->ensure_grad();
                     const double k = self.grad(0, 0) * inv_tau * inv_rows;
                     for (std::size_t i = 0; i < g.size(); ++i)
                       g.data()[i] += k * (probs.data()[i] - target.data()[i]);
                   });
}

}  // namespace uno::ag
