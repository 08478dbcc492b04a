#pragma once

#include <span>
#include <string>
#include <vector>

#include "uno/autograd.hpp"
#include "uno/data.hpp"
#include "uno/model.hpp"
#include "uno/sinkhorn.hpp"

namespace uno {

// How the two views' pseudo-labels are combined.
enum class Aggregation {
  Swap,       // pseudo-label of v1 supervises v2 and vice versa
  AvgPseudo,  // (y1 + y2) / 2 supervises both views
  AvgLogits,  // one assignment on (l1 + l2) / 2 supervises both views
};

enum class Labeler {
  Sinkhorn,  // balanced optimal-transport assignment
  Greedy,    // argmax of the head's own logits, no balancing
};

struct PseudoLabelConfig {
  double epsilon = 0.05;
  std::size_t n_iter = 3;
  sinkhorn::Mode mode = sinkhorn::Mode::Soft;
  Labeler labeler = Labeler::Sinkhorn;
};

struct ObjectiveConfig {
  Aggregation aggregation = Aggregation::Swap;
  PseudoLabelConfig pseudo;
  // Off: labeled and unlabeled samples use separate softmax layers over l_h
  // and the head's logits respectively.
  bool concat = true;
  bool overclustering = true;
};

std::string to_string(Aggregation a);
Aggregation parse_aggregation(const std::string& s);
std::string to_string(Labeler l);
Labeler parse_labeler(const std::string& s);

enum class LabelSource { GroundTruth, Pseudo };

struct PaddedLabel {
  std::vector<double> y;
  LabelSource source;
};

// [y_l, 0 ... 0]; y_l must be one-hot.
PaddedLabel pad_label(std::span<const double> one_hot, std::size_t unlabeled_width);
// [0 ... 0, y_hat]; y_hat must sum to 1.
PaddedLabel pad_pseudo(std::span<const double> pseudo, std::size_t labeled_width);

struct HeadRef {
  HeadKind kind;
  std::size_t index;
};

// Targets for the unlabeled rows of one head: `for_v1` supervises view 1,
// `for_v2` view 2. `own_v1`/`own_v2` are each view's own assignment, kept
// for cluster-usage statistics.
struct HeadTargets {
  Matrix for_v1;
  Matrix for_v2;
  Matrix own_v1;
  Matrix own_v2;
};

Matrix assign(const Matrix& batch_logits, const PseudoLabelConfig& cfg);

HeadTargets head_targets(const Matrix& unlabeled_logits_v1, const Matrix& unlabeled_logits_v2,
                         Aggregation aggregation, const PseudoLabelConfig& cfg);

// Per-view cross-entropy summed over the two views, with padded ground truth
// for labeled rows and padded `targets` for unlabeled rows.
ag::Var swapped_loss(const ViewPair& views, const LogitsBundle& b1, const LogitsBundle& b2,
                     HeadRef head, const HeadTargets& targets, bool concat, double temperature);

struct TargetSet {
  std::vector<HeadTargets> clustering;
  std::vector<HeadTargets> overclustering;
};

TargetSet compute_targets(const ViewPair& views, const LogitsBundle& b1, const LogitsBundle& b2,
                          const ObjectiveConfig& cfg);

struct LossTerms {
  ag::Var total;  // mean over all head passes
  std::vector<ag::Var> clustering;
  std::vector<ag::Var> overclustering;
};

LossTerms total_loss(const ViewPair& views, const LogitsBundle& b1, const LogitsBundle& b2,
                     const TargetSet& targets, const ObjectiveConfig& cfg, double temperature);

struct ObjectiveResult {
  LogitsBundle v1;
  LogitsBundle v2;
  TargetSet targets;
  LossTerms loss;
};

// Forward both views, assign pseudo-labels from the current logits, and
// build the loss.
ObjectiveResult total_loss(const ViewPair& views, const Model& model, const ObjectiveConfig& cfg);

}  // namespace uno
