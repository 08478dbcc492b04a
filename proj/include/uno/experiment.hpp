#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "uno/baselines.hpp"
#include "uno/config.hpp"
#include "uno/data.hpp"
#include "uno/metrics.hpp"
#include "uno/model.hpp"
#include "uno/trainer.hpp"

namespace uno {

// Generates the synthetic dataset, or loads `data.path` when set.
Dataset make_dataset(const ExperimentConfig& config);

// Fresh model whose weights come from the Init stream of the config seed.
Model init_model(const ExperimentConfig& config);

// The split scored by evaluation (`eval.split`).
const Split& eval_split(const Dataset& ds, const ExperimentConfig& config);

// Encoder features (unit rows) without building a graph that outlives the call.
Matrix features(const Model& model, const Matrix& x);

// k-means with C^u clusters on the encoder features of the split's unlabeled
// samples; returns the clustering accuracy against the hidden classes.
double kmeans_feature_baseline(const Model& model, const Split& split, std::uint64_t seed);

// Where a run writes its artifacts; empty dir disables all file output.
struct RunSink {
  std::filesystem::path dir;
  std::size_t checkpoint_every = 0;
  bool enabled() const { return !dir.empty(); }
};

struct DiscoveryRun {
  Model model;
  TrainHistory pretrain;
  TrainHistory discover;
  metrics::MetricsReport report;
  double kmeans_accuracy = 0.0;  // k-means baseline on pretrained features
};

// Supervised phase only.
Model run_pretrain(const ExperimentConfig& config, const Dataset& ds, TrainHistory* history,
                   const RunSink& sink = {});

// Full pipeline: pretrain (or load init.checkpoint), k-means baseline on the
// pretrained features, discovery, evaluation on the configured split.
DiscoveryRun run_discovery(const ExperimentConfig& config, const Dataset& ds,
                           const RunSink& sink = {});

// Class-count estimation on the training split. The last
// `estimate.probe_classes` labeled classes form the probe; with
// `estimate.use_features` a model is first pretrained on the remaining
// labeled classes and clustering runs on its features.
baselines::KEstimate run_estimate(const ExperimentConfig& config, const Dataset& ds);

// Creates `<root>/<command>-<hash>-s<seed>`, appending -1, -2, ... when the
// name is taken, so earlier runs are never touched.
std::filesystem::path make_run_dir(const std::filesystem::path& root, const std::string& command,
                                   const ExperimentConfig& config);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// metrics.txt (table) and metrics.tsv (records) in `dir`.
void write_metrics(const std::filesystem::path& dir, const metrics::MetricsReport& report);

}  // namespace uno
