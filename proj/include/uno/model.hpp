#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "uno/autograd.hpp"
#include "uno/matrix.hpp"

namespace uno {

enum class Activation { Relu, Tanh };
enum class HeadKind { Clustering, Overclustering };

struct ModelConfig {
  std::size_t input_dim = 32;
  std::vector<std::size_t> encoder_hidden{64};
  std::size_t feature_dim = 32;
  std::size_t num_labeled = 4;
  std::size_t num_unlabeled = 4;
  std::size_t overcluster_factor = 3;
  std::size_t num_heads = 4;
  std::size_t projection_hidden = 64;
  std::size_t projection_out = 32;
  double temperature = 0.1;
  Activation activation = Activation::Relu;

  std::size_t num_overclusters() const { return num_unlabeled * overcluster_factor; }
  std::size_t num_classes() const { return num_labeled + num_unlabeled; }
  std::size_t head_width(HeadKind kind) const {
    return kind == HeadKind::Clustering ? num_unlabeled : num_overclusters();
  }
  void validate() const;
};

// y = x W^T + b, W stored out x in.
struct Linear {
  ag::Var weight;
  ag::Var bias;
  ag::Var operator()(const ag::Var& x) const;
};

// Logits are cosine similarities between unit-norm inputs and the
// row-normalized prototype matrix.
struct CosineClassifier {
  ag::Var prototypes;  // classes x dim
  ag::Var operator()(const ag::Var& unit_x) const;
};

// Projection MLP -> l2 normalization -> cosine classifier.
struct ClusterHead {
  Linear hidden;
  Linear out;
  CosineClassifier classifier;
};

struct LogitsBundle {
  ag::Var features;  // z, unit rows
  ag::Var labeled;   // batch x C^l
  std::vector<ag::Var> clustering;      // n x (batch x C^u)
  std::vector<ag::Var> overclustering;  // n x (batch x K); empty when skipped

  const ag::Var& head(HeadKind kind, std::size_t index) const;
  std::size_t batch() const { return labeled->value.rows(); }
};

struct NamedParam {
  std::string name;
  ag::Var var;
};

class Model {
 public:
  Model(ModelConfig config, std::uint64_t init_seed);

  const ModelConfig& config() const { return config_; }

  ag::Var encode(const Matrix& x) const;
  LogitsBundle forward(const Matrix& x, bool with_overclustering = true) const;
  // Encoder and labeled head only.
  ag::Var forward_labeled(const Matrix& x) const;

  // softmax(([l_h, l_head]) / tau) per row.
  Matrix unified_posterior(const LogitsBundle& bundle, std::size_t head_index,
                           HeadKind kind) const;

  // Fixed order; identical names and shapes for identical configs.
  std::vector<NamedParam> named_parameters() const;
  std::vector<ag::Var> parameters() const;
  std::vector<ag::Var> encoder_and_labeled_parameters() const;
  std::vector<ag::Var> unlabeled_head_parameters() const;

  // Deep copy with independent parameter storage.
  Model clone() const;

 private:
  ag::Var activate(const ag::Var& x) const;
  ag::Var head_logits(const ClusterHead& head, const ag::Var& z) const;

  ModelConfig config_;
  std::vector<Linear> encoder_;
  CosineClassifier labeled_head_;
  std::vector<ClusterHead> clustering_;
  std::vector<ClusterHead> overclustering_;
};

// Versioned text format; values written as hex floats so round-trips are exact.
void save_checkpoint(const Model& model, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);

std::string to_string(Activation a);
Activation parse_activation(const std::string& s);

}  // namespace uno
