#include "uno/objective.hpp"

#include <cmath>
#include <stdexcept>

namespace uno {

namespace {

constexpr double kSumTol = 1e-6;

Matrix average(const Matrix& a, const Matrix& b) {
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = 0.5 * (a.data()[i] + b.data()[i]);
  return out;
}

void put_row(Matrix& m, std::size_t r, std::span<const double> v) {
  for (std::size_t c = 0; c < v.size(); ++c) m(r, c) = v[c];
}

// Cross-entropy of one view for one head.
ag::Var view_loss(const ViewPair& views, const LogitsBundle& b, HeadRef head,
                  const Matrix& unlabeled_targets, bool concat, double temperature) {
  const ag::Var& lh = b.labeled;
  const ag::Var& lu = b.head(head.kind, head.index);
  const std::size_t cl = lh->value.cols(), cu = lu->value.cols();
  const auto lab = views.labeled_rows();
  const auto unl = views.unlabeled_rows();
  if (unlabeled_targets.rows() != unl.size())
    throw std::invalid_argument("view_loss: target rows do not match unlabeled samples");

  if (concat) {
    Matrix target(views.size(), cl + cu);
    std::vector<double> one_hot(cl);
    for (std::size_t r : lab) {
      std::fill(one_hot.begin(), one_hot.end(), 0.0);
      one_hot.at(static_cast<std::size_t>(views.labels[r])) = 1.0;
      put_row(target, r, pad_label(one_hot, cu).y);
    }
    for (std::size_t i = 0; i < unl.size(); ++i)
      put_row(target, unl[i], pad_pseudo(unlabeled_targets.row(i), cl).y);
    return ag::softmax_ce(ag::concat_cols(lh, lu), target, temperature);
  }

  // Separate softmax layers, row-weighted so the result is still a mean over the batch.
  std::vector<ag::Var> parts;
  const double n = static_cast<double>(views.size());
  if (!lab.empty()) {
    Matrix target(lab.size(), cl);
    for (std::size_t i = 0; i < lab.size(); ++i)
      target(i, static_cast<std::size_t>(views.labels[lab[i]])) = 1.0;
    auto ce = ag::softmax_ce(ag::select_rows(lh, lab), target, temperature);
    parts.push_back(ag::scale(ce, static_cast<double>(lab.size()) / n));
  }
  if (!unl.empty()) {
    auto ce = ag::softmax_ce(ag::select_rows(lu, unl), unlabeled_targets, temperature);
    parts.push_back(ag::scale(ce, static_cast<double>(unl.size()) / n));
  }
  return parts.size() == 1 ? parts[0] : ag::add(parts[0], parts[1]);
}

}  // namespace

std::string to_string(Aggregation a) {
  switch (a) {
    case Aggregation::Swap: return "swap";
    case Aggregation::AvgPseudo: return "avg_pseudo";
    case Aggregation::AvgLogits: return "avg_logits";
  }
  return "?";
}

Aggregation parse_aggregation(const std::string& s) {
  if (s == "swap") return Aggregation::Swap;
  if (s == "avg_pseudo") return Aggregation::AvgPseudo;
  if (s == "avg_logits") return Aggregation::AvgLogits;
  throw std::invalid_argument("unknown aggregation mode '" + s + "'");
}

std::string to_string(Labeler l) { return l == Labeler::Sinkhorn ? "sinkhorn" : "greedy"; }

Labeler parse_labeler(const std::string& s) {
  if (s == "sinkhorn") return Labeler::Sinkhorn;
  if (s == "greedy") return Labeler::Greedy;
  throw std::invalid_argument("unknown pseudo-labeler '" + s + "'");
}

PaddedLabel pad_label(std::span<const double> one_hot, std::size_t unlabeled_width) {
  std::size_t ones = 0;
  for (double v : one_hot) {
    if (v == 1.0)
      ++ones;
    else if (v != 0.0)
      throw std::invalid_argument("pad_label: entries must be 0 or 1");
  }
  if (ones != 1) throw std::invalid_argument("pad_label: input is not one-hot");
  PaddedLabel out{std::vector<double>(one_hot.begin(), one_hot.end()), LabelSource::GroundTruth};
  out.y.resize(one_hot.size() + unlabeled_width, 0.0);
  return out;
}

PaddedLabel pad_pseudo(std::span<const double> pseudo, std::size_t labeled_width) {
  double s = 0.0;
  for (double v : pseudo) {
    if (v < 0.0) throw std::invalid_argument("pad_pseudo: negative entry");
    s += v;
  }
  if (std::abs(s - 1.0) > kSumTol)
    throw std::invalid_argument("pad_pseudo: pseudo-label sums to " + std::to_string(s));
  PaddedLabel out{std::vector<double>(labeled_width, 0.0), LabelSource::Pseudo};
  out.y.insert(out.y.end(), pseudo.begin(), pseudo.end());
  return out;
}

Matrix assign(const Matrix& batch_logits, const PseudoLabelConfig& cfg) {
  if (batch_logits.rows() == 0) return Matrix(0, batch_logits.cols());
  if (cfg.labeler == Labeler::Greedy) return sinkhorn::greedy_targets(batch_logits);
  return sinkhorn::batch_targets(batch_logits, cfg.epsilon, cfg.n_iter, cfg.mode);
}

HeadTargets head_targets(const Matrix& unlabeled_logits_v1, const Matrix& unlabeled_logits_v2,
                         Aggregation aggregation, const PseudoLabelConfig& cfg) {
  if (!unlabeled_logits_v1.same_shape(unlabeled_logits_v2))
    throw std::invalid_argument("head_targets: view logits differ in shape");
  HeadTargets t;
  switch (aggregation) {
    case Aggregation::Swap:
      t.own_v1 = assign(unlabeled_logits_v1, cfg);
      t.own_v2 = assign(unlabeled_logits_v2, cfg);
      t.for_v1 = t.own_v2;
      t.for_v2 = t.own_v1;
      break;
    case Aggregation::AvgPseudo:
      t.own_v1 = assign(unlabeled_logits_v1, cfg);
      t.own_v2 = assign(unlabeled_logits_v2, cfg);
      t.for_v1 = average(t.own_v1, t.own_v2);
      t.for_v2 = t.for_v1;
      break;
    case Aggregation::AvgLogits:
      t.own_v1 = assign(average(unlabeled_logits_v1, unlabeled_logits_v2), cfg);
      t.own_v2 = t.own_v1;
      t.for_v1 = t.own_v1;
      t.for_v2 = t.own_v1;
      break;
    default:
      throw std::invalid_argument("head_targets: unknown aggregation mode");
  }
  return t;
}

ag::Var swapped_loss(const ViewPair& views, const LogitsBundle& b1, const LogitsBundle& b2,
                     HeadRef head, const HeadTargets& targets, bool concat, double temperature) {
  if (b1.batch() != views.size() || b2.batch() != views.size())
    throw std::invalid_argument("swapped_loss: logits do not match the view batch");
  return ag::add(view_loss(views, b1, head, targets.for_v1, concat, temperature),
                 view_loss(views, b2, head, targets.for_v2, concat, temperature));
}

TargetSet compute_targets(const ViewPair& views, const LogitsBundle& b1, const LogitsBundle& b2,
                          const ObjectiveConfig& cfg) {
  const auto unl = views.unlabeled_rows();
  TargetSet set;
  auto build = [&](HeadKind kind, std::vector<HeadTargets>& out) {
    const auto& heads = kind == HeadKind::Clustering ? b1.clustering : b1.overclustering;
    for (std::size_t i = 0; i < heads.size(); ++i) {
      out.push_back(head_targets(b1.head(kind, i)->value.select_rows(unl),
                                 b2.head(kind, i)->value.select_rows(unl), cfg.aggregation,
                                 cfg.pseudo));
    }
  };
  build(HeadKind::Clustering, set.clustering);
  if (cfg.overclustering) build(HeadKind::Overclustering, set.overclustering);
  return set;
}

LossTerms total_loss(const ViewPair& views, const LogitsBundle& b1, const LogitsBundle& b2,
                     const TargetSet& targets, const ObjectiveConfig& cfg, double temperature) {
  LossTerms terms;
  for (std::size_t i = 0; i < targets.clustering.size(); ++i)
    terms.clustering.push_back(swapped_loss(views, b1, b2, {HeadKind::Clustering, i},
                                            targets.clustering[i], cfg.concat, temperature));
  if (cfg.overclustering)
    for (std::size_t i = 0; i < targets.overclustering.size(); ++i)
      terms.overclustering.push_back(swapped_loss(views, b1, b2, {HeadKind::Overclustering, i},
                                                  targets.overclustering[i], cfg.concat,
                                                  temperature));
  std::vector<ag::Var> all = terms.clustering;
  all.insert(all.end(), terms.overclustering.begin(), terms.overclustering.end());
  terms.total = ag::mean(all);
  return terms;
}

ObjectiveResult total_loss(const ViewPair& views, const Model& model, const ObjectiveConfig& cfg) {
  ObjectiveResult r{model.forward(views.v1, cfg.overclustering),
                    model.forward(views.v2, cfg.overclustering), {}, {}};
  r.targets = compute_targets(views, r.v1, r.v2, cfg);
  r.loss = total_loss(views, r.v1, r.v2, r.targets, cfg, model.config().temperature);
  return r;
}

}  // namespace uno
