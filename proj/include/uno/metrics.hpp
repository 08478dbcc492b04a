#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "uno/data.hpp"
#include "uno/matrix.hpp"
#include "uno/model.hpp"

namespace uno::metrics {

// Maximum-profit assignment on a square matrix. Returns perm with
// perm[row] = column. Among optimal permutations the lexicographically
// smallest is returned.
std::vector<std::size_t> hungarian(const Matrix& profit);

double assignment_profit(const Matrix& profit, std::span<const std::size_t> perm);

struct ClusterMatch {
  double accuracy = 0.0;
  std::size_t matched = 0;
  // mapping[cluster] = class, over the zero-padded square contingency.
  std::vector<std::size_t> mapping;
};

// Best one-to-one matching of predicted cluster ids onto class ids. Both id
// sets start at 0; the contingency is padded to square. `denominator`
// overrides the sample count used for the accuracy (0 = pred.size()).
ClusterMatch match_clusters(std::span<const std::size_t> pred, std::span<const std::size_t> truth,
                            std::size_t denominator = 0);

double cluster_accuracy(std::span<const std::size_t> pred, std::span<const std::size_t> truth);

enum class Protocol { TaskAware, TaskAgnostic };
std::string to_string(Protocol p);

struct SubsetScores {
  std::size_t n_labeled = 0;
  std::size_t n_unlabeled = 0;
  std::size_t labeled_correct = 0;
  std::size_t unlabeled_matched = 0;
  double labeled = 0.0;
  double unlabeled = 0.0;
  double all = 0.0;
};

struct HeadMetrics {
  std::size_t head = 0;
  SubsetScores task_aware;
  SubsetScores task_agnostic;
  std::vector<std::size_t> perm_aware;     // cluster -> unlabeled class offset
  std::vector<std::size_t> perm_agnostic;
};

struct MetricsReport {
  std::vector<HeadMetrics> heads;
  std::vector<double> head_losses;  // final-epoch training loss per clustering head
  std::size_t best_head = 0;
  SubsetScores avg_aware;
  SubsetScores avg_agnostic;

  const HeadMetrics& best() const { return heads.at(best_head); }
};

// Scores one clustering head from raw logits under one protocol.
SubsetScores score_head(const Matrix& labeled_logits_lab, const Matrix& head_logits_lab,
                        std::span<const int> labels, const Matrix& labeled_logits_unl,
                        const Matrix& head_logits_unl, std::span<const int> hidden,
                        std::size_t num_labeled_classes, Protocol protocol,
                        std::vector<std::size_t>* perm = nullptr);

// Per clustering head under one protocol; overclustering heads are never scored.
std::vector<HeadMetrics> evaluate(const Model& model, const Split& split, Protocol protocol);

// Both protocols for every clustering head. best_head = argmin head_losses
// (head 0 when no losses are given).
MetricsReport evaluate(const Model& model, const Split& split,
                       std::span<const double> head_losses = {});

std::size_t best_head_index(std::span<const double> head_losses);

// Human-readable table: rows per head plus avg and best; columns
// Lab/Unlab/All for each protocol.
std::string format_table(const MetricsReport& report);
// Tab-separated records: head, protocol, lab, unlab, all.
std::string format_records(const MetricsReport& report);

}  // namespace uno::metrics
