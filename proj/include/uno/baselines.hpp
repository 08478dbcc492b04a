#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "uno/matrix.hpp"

namespace uno::baselines {

struct KMeansResult {
  std::vector<std::size_t> labels;
  Matrix centroids;
  double inertia = 0.0;
  // Inertia after each assignment step.
  std::vector<double> inertia_history;
  std::size_t iterations = 0;
};

// Lloyd iterations from k-means++ seeding. An empty cluster is re-seeded at
// the point farthest from its current centroid. The lowest-inertia run of
// `n_init` restarts is returned.
KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iter = 100, std::size_t n_init = 10);

struct ConstrainedKMeansResult {
  // Probe classes are mapped to clusters 0..P-1 in ascending label order.
  std::vector<int> anchor_classes;
  std::vector<std::size_t> probe_labels;
  std::vector<std::size_t> unlabeled_labels;
  Matrix centroids;
  double inertia = 0.0;  // over unlabeled points
};

// Semi-supervised k-means over probe and unlabeled points. Probe class
// centroids are fixed at the class means and probe points never leave their
// class; the remaining k - P centroids and all unlabeled points move freely.
// Best of `n_init` restarts by unlabeled inertia.
ConstrainedKMeansResult constrained_kmeans(const Matrix& probe_x, std::span<const int> probe_y,
                                           const Matrix& unlabeled_x, std::size_t k,
                                           std::uint64_t seed, std::size_t max_iter = 100,
                                           std::size_t n_init = 10);

// Mean silhouette of the points under the given assignment (Euclidean).
double silhouette(const Matrix& points, std::span<const std::size_t> labels);

struct KEstimate {
  std::size_t k = 0;
  std::vector<std::size_t> candidates;
  std::vector<double> probe_accuracy;
  std::vector<double> pool_silhouette;
  std::vector<double> score;
};

// Estimates the number of unlabeled classes. Probe classes are split into an
// anchor half (constrained) and a validation half whose labels are hidden
// during clustering. For each candidate c, constrained k-means runs with
// P_anchor + P_val + c clusters; the score is the mean of the validation
// probe's cluster accuracy and the silhouette of all clustered points
// (anchor, validation and unlabeled). Ties go to the smaller candidate.
KEstimate estimate_num_classes(const Matrix& probe_x, std::span<const int> probe_y,
                               const Matrix& unlabeled_x, std::span<const std::size_t> candidates,
                               std::uint64_t seed);

}  // namespace uno::baselines
