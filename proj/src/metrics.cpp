#include "uno/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace uno::metrics {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::size_t argmax_range(std::span<const double> row, std::size_t begin, std::size_t end) {
  std::size_t best = begin;
  for (std::size_t c = begin + 1; c < end; ++c)
    if (row[c] > row[best]) best = c;
  return best;
}

void finish(SubsetScores& s) {
  s.labeled = s.n_labeled ? static_cast<double>(s.labeled_correct) / static_cast<double>(s.n_labeled) : 0.0;
  s.unlabeled = s.n_unlabeled ? static_cast<double>(s.unlabeled_matched) / static_cast<double>(s.n_unlabeled) : 0.0;
  const std::size_t n = s.n_labeled + s.n_unlabeled;
  s.all = n ? static_cast<double>(s.labeled_correct + s.unlabeled_matched) / static_cast<double>(n) : 0.0;
}

SubsetScores average(const std::vector<HeadMetrics>& heads, Protocol protocol) {
  SubsetScores avg;
  if (heads.empty()) return avg;
  for (const auto& h : heads) {
    const auto& s = protocol == Protocol::TaskAware ? h.task_aware : h.task_agnostic;
    avg.n_labeled = s.n_labeled;
    avg.n_unlabeled = s.n_unlabeled;
    avg.labeled += s.labeled;
    avg.unlabeled += s.unlabeled;
    avg.all += s.all;
  }
  const double k = static_cast<double>(heads.size());
  avg.labeled /= k;
  avg.unlabeled /= k;
  avg.all /= k;
  return avg;
}

}  // namespace

ClusterMatch match_clusters(std::span<const std::size_t> pred, std::span<const std::size_t> truth,
                            std::size_t denominator) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("match_clusters: prediction/truth length mismatch");
  const std::size_t total = denominator ? denominator : pred.size();
  if (total == 0) throw std::invalid_argument("match_clusters: empty input");
  ClusterMatch out;
  if (pred.empty()) return out;
  const std::size_t d = std::max(*std::max_element(pred.begin(), pred.end()),
                                 *std::max_element(truth.begin(), truth.end())) + 1;
  Matrix counts(d, d);
  for (std::size_t i = 0; i < pred.size(); ++i) counts(pred[i], truth[i]) += 1.0;
  out.mapping = hungarian(counts);
  out.matched = static_cast<std::size_t>(assignment_profit(counts, out.mapping));
  out.accuracy = static_cast<double>(out.matched) / static_cast<double>(total);
  return out;
}

double cluster_accuracy(std::span<const std::size_t> pred, std::span<const std::size_t> truth) {
  if (pred.empty()) throw std::invalid_argument("cluster_accuracy: empty input");
  return match_clusters(pred, truth).accuracy;
}

std::string to_string(Protocol p) {
  return p == Protocol::TaskAware ? "task_aware" : "task_agnostic";
}

SubsetScores score_head(const Matrix& labeled_logits_lab, const Matrix& head_logits_lab,
                        std::span<const int> labels, const Matrix& labeled_logits_unl,
                        const Matrix& head_logits_unl, std::span<const int> hidden,
                        std::size_t num_labeled_classes, Protocol protocol,
                        std::vector<std::size_t>* perm) {
  const std::size_t cl = num_labeled_classes;
  SubsetScores s;
  s.n_labeled = labels.size();
  s.n_unlabeled = hidden.size();

  if (protocol == Protocol::TaskAware) {
    const auto pred = argmax_rows(labeled_logits_lab);
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (pred[i] == static_cast<std::size_t>(labels[i])) ++s.labeled_correct;
    if (!hidden.empty()) {
      const auto clusters = argmax_rows(head_logits_unl);
      std::vector<std::size_t> truth(hidden.size());
      for (std::size_t i = 0; i < hidden.size(); ++i) truth[i] = static_cast<std::size_t>(hidden[i]) - cl;
      auto m = match_clusters(clusters, truth);
      s.unlabeled_matched = m.matched;
      if (perm) *perm = std::move(m.mapping);
    }
  } else {
    const Matrix lab = hconcat(labeled_logits_lab, head_logits_lab);
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (argmax_range(lab.row(i), 0, lab.cols()) == static_cast<std::size_t>(labels[i]))
        ++s.labeled_correct;
    if (!hidden.empty()) {
      const Matrix unl = hconcat(labeled_logits_unl, head_logits_unl);
      // Predictions landing in the labeled block are errors; the rest are
      // matched within the unlabeled block.
      std::vector<std::size_t> clusters, truth;
      for (std::size_t i = 0; i < hidden.size(); ++i) {
        const std::size_t p = argmax_range(unl.row(i), 0, unl.cols());
        if (p < cl) continue;
        clusters.push_back(p - cl);
        truth.push_back(static_cast<std::size_t>(hidden[i]) - cl);
      }
      if (!clusters.empty()) {
        auto m = match_clusters(clusters, truth, hidden.size());
        s.unlabeled_matched = m.matched;
        if (perm) *perm = std::move(m.mapping);
      }
    }
  }
  finish(s);
  return s;
}

std::vector<HeadMetrics> evaluate(const Model& model, const Split& split, Protocol protocol) {
  const auto lab = model.forward(split.labeled_x, false);
  const auto unl = model.forward(split.unlabeled_x, false);
  std::vector<HeadMetrics> out;
  for (std::size_t h = 0; h < model.config().num_heads; ++h) {
    HeadMetrics m;
    m.head = h;
    auto& scores = protocol == Protocol::TaskAware ? m.task_aware : m.task_agnostic;
    auto& perm = protocol == Protocol::TaskAware ? m.perm_aware : m.perm_agnostic;
    scores = score_head(lab.labeled->value, lab.clustering[h]->value, split.labeled_y,
                        unl.labeled->value, unl.clustering[h]->value, split.unlabeled_hidden,
                        model.config().num_labeled, protocol, &perm);
    out.push_back(std::move(m));
  }
  return out;
}

std::size_t best_head_index(std::span<const double> head_losses) {
  if (head_losses.empty()) return 0;
  return static_cast<std::size_t>(std::min_element(head_losses.begin(), head_losses.end()) -
                                  head_losses.begin());
}

MetricsReport evaluate(const Model& model, const Split& split, std::span<const double> head_losses) {
  if (!head_losses.empty() && head_losses.size() != model.config().num_heads)
    throw std::invalid_argument("evaluate: one training loss per clustering head expected");
  MetricsReport report;
  report.heads = evaluate(model, split, Protocol::TaskAware);
  auto agnostic = evaluate(model, split, Protocol::TaskAgnostic);
  for (std::size_t h = 0; h < report.heads.size(); ++h) {
    report.heads[h].task_agnostic = agnostic[h].task_agnostic;
    report.heads[h].perm_agnostic = std::move(agnostic[h].perm_agnostic);
  }
  report.head_losses.assign(head_losses.begin(), head_losses.end());
  report.best_head = best_head_index(head_losses);
  report.avg_aware = average(report.heads, Protocol::TaskAware);
  report.avg_agnostic = average(report.heads, Protocol::TaskAgnostic);
  return report;
}

std::string format_table(const MetricsReport& report) {
  std::ostringstream os;
  os << "head      | task-aware               | task-agnostic\n";
  os << "          | Lab     Unlab   All      | Lab     Unlab   All\n";
  auto line = [&](const std::string& name, const SubsetScores& a, const SubsetScores& g) {
    std::string label = name;
    label.resize(10, ' ');
    os << label << "| " << fmt(a.labeled) << "  " << fmt(a.unlabeled) << "  " << fmt(a.all)
       << "   | " << fmt(g.labeled) << "  " << fmt(g.unlabeled) << "  " << fmt(g.all) << '\n';
  };
  for (const auto& h : report.heads) line(std::to_string(h.head), h.task_aware, h.task_agnostic);
  line("avg", report.avg_aware, report.avg_agnostic);
  if (!report.heads.empty())
    line("best(" + std::to_string(report.best_head) + ")", report.best().task_aware,
         report.best().task_agnostic);
  return os.str();
}

std::string format_records(const MetricsReport& report) {
  std::ostringstream os;
  os << "head\tprotocol\tlab\tunlab\tall\n";
  auto rec = [&](const std::string& name, const SubsetScores& a, const SubsetScores& g) {
    os << name << "\ttask_aware\t" << fmt(a.labeled) << '\t' << fmt(a.unlabeled) << '\t'
       << fmt(a.all) << '\n';
    os << name << "\ttask_agnostic\t" << fmt(g.labeled) << '\t' << fmt(g.unlabeled) << '\t'
       << fmt(g.all) << '\n';
  };
  for (const auto& h : report.heads) rec(std::to_string(h.head), h.task_aware, h.task_agnostic);
  rec("avg", report.avg_aware, report.avg_agnostic);
  if (!report.heads.empty()) rec("best", report.best().task_aware, report.best().task_agnostic);
  return os.str();
}

}  // namespace uno::metrics
