#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "uno/matrix.hpp"
#include "uno/rng.hpp"

namespace uno {

inline constexpr int kUnlabeled = -1;

// One split of an NCD dataset. Unlabeled hidden classes are stored in the
// global index space [C^l, C^l + C^u) and are read only by evaluation code.
struct Split {
  Matrix labeled_x;
  std::vector<int> labeled_y;
  Matrix unlabeled_x;
  std::vector<int> unlabeled_hidden;

  std::size_t num_labeled() const { return labeled_x.rows(); }
  std::size_t num_unlabeled() const { return unlabeled_x.rows(); }
};

// The part of a split that training code is allowed to see.
struct TrainingView {
  const Matrix& labeled_x;
  std::span<const int> labeled_y;
  const Matrix& unlabeled_x;
};

struct Dataset {
  std::size_t input_dim = 0;
  std::size_t num_labeled_classes = 0;
  std::size_t num_unlabeled_classes = 0;
  std::uint64_t seed = 0;
  Split train;
  Split test;

  TrainingView training_view() const {
    return TrainingView{train.labeled_x, train.labeled_y, train.unlabeled_x};
  }
  void validate() const;
};

struct GaussianConfig {
  std::size_t num_classes = 8;
  double labeled_fraction = 0.5;
  std::size_t samples_per_class = 500;
  std::size_t test_samples_per_class = 100;
  std::size_t input_dim = 32;
  double separation = 4.0;
  std::uint64_t seed = 0;
};

// Isotropic unit-variance Gaussian classes whose means lie on a sphere of
// radius `separation`. The first ceil(fraction * classes) are labeled.
Dataset make_gaussian_ncd(const GaussianConfig& gc);

void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

enum class AugmentStrength { None, Weak, Strong };

// Vector analogues of image augmentation:
//   weak   = additive Gaussian noise
//   strong = noise, then per-sample scale jitter, then coordinate masking
struct AugmentPolicy {
  AugmentStrength strength = AugmentStrength::Strong;
  double noise_sigma = 0.1;
  double mask_fraction = 0.2;
  double scale_min = 0.8;
  double scale_max = 1.2;

  void validate() const;
};

std::string to_string(AugmentStrength s);
AugmentStrength parse_augment_strength(const std::string& s);

Matrix augment(const Matrix& x, const AugmentPolicy& policy, Rng& rng);

// Two views of a mixed batch. labels[i] is the ground-truth class of a
// labeled sample or kUnlabeled.
struct ViewPair {
  Matrix v1;
  Matrix v2;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  bool is_labeled(std::size_t i) const { return labels[i] != kUnlabeled; }
  std::vector<std::size_t> labeled_rows() const;
  std::vector<std::size_t> unlabeled_rows() const;
};

ViewPair two_views(const Matrix& x, std::vector<int> labels, const AugmentPolicy& policy,
                   Rng& rng);

}  // namespace uno
