#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "uno/data.hpp"
#include "uno/model.hpp"
#include "uno/objective.hpp"

namespace uno {

struct TrainConfig {
  std::size_t pretrain_epochs = 50;
  std::size_t discovery_epochs = 100;
  std::size_t batch_size = 128;
  double base_lr = 0.1;
  double min_lr = 0.001;
  double weight_decay = 1e-4;
  double momentum = 0.9;
  std::size_t warmup_epochs = 10;
  ObjectiveConfig objective;
  AugmentPolicy augment;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochRecord {
  std::string phase;  // "pretrain" or "discover"
  std::size_t epoch = 0;
  double lr = 0.0;  // learning rate of the epoch's last step
  double loss = 0.0;
  // discover: mean swapped loss per clustering / overclustering head.
  std::vector<double> head_losses;
  std::vector<double> overcluster_losses;
  // discover: entropy of each clustering head's hard pseudo-label usage.
  std::vector<double> usage_entropy;
  // pretrain: labeled training accuracy of the epoch's predictions.
  double labeled_accuracy = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::vector<double> final_head_losses;
  std::size_t best_head = 0;
};

using EpochCallback = std::function<void(const EpochRecord&, const Model&)>;

// Supervised cross-entropy on the labeled head over labeled samples only.
// Unlabeled heads are not touched.
TrainHistory pretrain(Model& model, const TrainingView& data, const TrainConfig& config,
                      const EpochCallback& on_epoch = {});

// Joint training on labeled and unlabeled samples with the unified objective.
TrainHistory discover(Model& model, const TrainingView& data, const TrainConfig& config,
                      const EpochCallback& on_epoch = {});

// Entropy of the empirical distribution given by `counts`.
double usage_entropy(std::span<const std::size_t> counts);

std::string to_json_line(const EpochRecord& record);
void write_log(const TrainHistory& history, const std::filesystem::path& path);

}  // namespace uno
