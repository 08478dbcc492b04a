#include "uno/experiment.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "uno/rng.hpp"

namespace uno {

namespace {

void append_line(const std::filesystem::path& path, const std::string& line) {
  std::ofstream os(path, std::ios::app);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << line << '\n';
}

EpochCallback sink_callback(const RunSink& sink, const std::string& phase, std::size_t epochs) {
  if (!sink.enabled()) return {};
  return [sink, phase, epochs](const EpochRecord& rec, const Model& model) {
    append_line(sink.dir / "train_log.jsonl", to_json_line(rec));
    const std::size_t done = rec.epoch + 1;
    const bool periodic = sink.checkpoint_every > 0 && done % sink.checkpoint_every == 0;
    if (periodic && done < epochs)
      save_checkpoint(model, sink.dir / (phase + "-epoch" + std::to_string(done) + ".ckpt"));
  };
}

std::vector<std::size_t> hidden_offsets(const Split& split, std::size_t num_labeled) {
  std::vector<std::size_t> out;
  out.reserve(split.unlabeled_hidden.size());
  for (int c : split.unlabeled_hidden) out.push_back(static_cast<std::size_t>(c) - num_labeled);
  return out;
}

}  // namespace

Dataset make_dataset(const ExperimentConfig& config) {
  if (!config.data_path.empty()) {
    Dataset ds = load_dataset(config.data_path);
    if (ds.input_dim != config.model.input_dim ||
        ds.num_labeled_classes != config.model.num_labeled ||
        ds.num_unlabeled_classes != config.model.num_unlabeled)
      throw ConfigError("data.path", "dataset shape does not match data.* settings");
    return ds;
  }
  GaussianConfig gc = config.data;
  gc.seed = config.seed;
  return make_gaussian_ncd(gc);
}

Model init_model(const ExperimentConfig& config) {
  return Model(config.model, stream_seed(config.seed, Stream::Init));
}

const Split& eval_split(const Dataset& ds, const ExperimentConfig& config) {
  return config.eval_split == "train" ? ds.train : ds.test;
}

Matrix features(const Model& model, const Matrix& x) { return model.encode(x)->value; }

double kmeans_feature_baseline(const Model& model, const Split& split, std::uint64_t seed) {
  const Matrix z = features(model, split.unlabeled_x);
  const std::size_t k = model.config().num_unlabeled;
  const auto km = baselines::kmeans(z, k, stream_seed(seed, Stream::KMeans));
  return metrics::cluster_accuracy(km.labels, hidden_offsets(split, model.config().num_labeled));
}

Model run_pretrain(const ExperimentConfig& config, const Dataset& ds, TrainHistory* history,
                   const RunSink& sink) {
  Model model = init_model(config);
  auto h = pretrain(model, ds.training_view(), config.train,
                    sink_callback(sink, "pretrain", config.train.pretrain_epochs));
  if (history) *history = std::move(h);
  return model;
}

DiscoveryRun run_discovery(const ExperimentConfig& config, const Dataset& ds,
                           const RunSink& sink) {
  TrainHistory pre;
  Model model = config.init_checkpoint.empty() ? run_pretrain(config, ds, &pre, sink)
                                               : load_checkpoint(config.init_checkpoint);
  const Split& split = eval_split(ds, config);
  const double km = kmeans_feature_baseline(model, split, config.seed);
  if (sink.enabled()) save_checkpoint(model, sink.dir / "pretrained.ckpt");

  auto hist = discover(model, ds.training_view(), config.train,
                       sink_callback(sink, "discover", config.train.discovery_epochs));
  auto report = metrics::evaluate(model, split, hist.final_head_losses);
  if (sink.enabled()) save_checkpoint(model, sink.dir / "final.ckpt");
  return DiscoveryRun{std::move(model), std::move(pre), std::move(hist), std::move(report), km};
}

baselines::KEstimate run_estimate(const ExperimentConfig& config, const Dataset& ds) {
  const std::size_t cl = ds.num_labeled_classes;
  const std::size_t probes = config.estimate.probe_classes;
  if (probes < 2 || probes > cl)
    throw ConfigError("estimate.probe_classes", "must be in [2, num labeled classes]");
  if (config.estimate.candidates.empty())
    throw ConfigError("estimate.candidates", "must not be empty");
  const int first_probe = static_cast<int>(cl - probes);

  const Split& tr = ds.train;
  std::vector<std::size_t> probe_rows, rest_rows;
  std::vector<int> probe_y, rest_y;
  for (std::size_t i = 0; i < tr.labeled_y.size(); ++i) {
    if (tr.labeled_y[i] >= first_probe) {
      probe_rows.push_back(i);
      probe_y.push_back(tr.labeled_y[i]);
    } else {
      rest_rows.push_back(i);
      rest_y.push_back(tr.labeled_y[i]);
    }
  }
  Matrix probe_x = tr.labeled_x.select_rows(probe_rows);
  Matrix unl_x = tr.unlabeled_x;

  if (config.estimate.use_features) {
    if (rest_rows.empty())
      throw ConfigError("estimate.use_features", "needs labeled classes outside the probe");
    ModelConfig mc = config.model;
    mc.num_labeled = cl - probes;
    Model model(mc, stream_seed(config.seed, Stream::Init));
    const Matrix rest_x = tr.labeled_x.select_rows(rest_rows);
    pretrain(model, TrainingView{rest_x, rest_y, unl_x}, config.train);
    probe_x = features(model, probe_x);
    unl_x = features(model, unl_x);
  }
  return baselines::estimate_num_classes(probe_x, probe_y, unl_x, config.estimate.candidates,
                                         stream_seed(config.seed, Stream::KMeans));
}

std::filesystem::path make_run_dir(const std::filesystem::path& root, const std::string& command,
                                   const ExperimentConfig& config) {
  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016" PRIx64, config_hash(config));
  const std::string base = command + "-" + std::string(hash).substr(0, 12) + "-s" +
                           std::to_string(config.seed);
  std::filesystem::create_directories(root);
  for (std::size_t attempt = 0;; ++attempt) {
    const auto dir = root / (attempt == 0 ? base : base + "-" + std::to_string(attempt));
    // create_directory reports false when the entry already exists.
    if (std::filesystem::create_directory(dir)) return dir;
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_metrics(const std::filesystem::path& dir, const metrics::MetricsReport& report) {
  write_text(dir / "metrics.txt", metrics::format_table(report));
  write_text(dir / "metrics.tsv", metrics::format_records(report));
}

}  // namespace uno
