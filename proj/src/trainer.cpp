#include "uno/trainer.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

#include "uno/metrics.hpp"
#include "uno/optim.hpp"
#include "uno/rng.hpp"

namespace uno {

namespace {

std::size_t div_ceil(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

SgdConfig sgd_config(const TrainConfig& c, std::size_t epochs, std::size_t steps_per_epoch) {
  SgdConfig s;
  s.schedule.base_lr = c.base_lr;
  s.schedule.min_lr = c.min_lr;
  s.schedule.warmup_steps = std::min(c.warmup_epochs, epochs) * steps_per_epoch;
  s.schedule.total_steps = epochs * steps_per_epoch;
  s.momentum = c.momentum;
  s.weight_decay = c.weight_decay;
  return s;
}

Matrix gather(const Matrix& x, std::span<const std::size_t> idx) { return x.select_rows(idx); }

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 2) throw std::invalid_argument("train: batch_size must be >= 2");
  if (!(base_lr > 0.0) || min_lr < 0.0 || min_lr > base_lr)
    throw std::invalid_argument("train: need 0 <= min_lr <= base_lr, base_lr > 0");
  if (weight_decay < 0.0 || momentum < 0.0 || momentum >= 1.0)
    throw std::invalid_argument("train: invalid weight_decay or momentum");
  if (!(objective.pseudo.epsilon > 0.0)) throw std::invalid_argument("train: epsilon must be > 0");
  augment.validate();
}

double usage_entropy(std::span<const std::size_t> counts) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log(p);
  }
  return h;
}

TrainHistory pretrain(Model& model, const TrainingView& data, const TrainConfig& config,
                      const EpochCallback& on_epoch) {
  config.validate();
  TrainHistory history;
  const std::size_t n = data.labeled_x.rows();
  if (n == 0 || config.pretrain_epochs == 0) return history;

  const std::size_t steps_per_epoch = div_ceil(n, config.batch_size);
  auto params = model.encoder_and_labeled_parameters();
  SgdMomentum opt(params, sgd_config(config, config.pretrain_epochs, steps_per_epoch));
  Rng batch_rng(stream_seed(config.seed, Stream::Batch));
  Rng aug_rng(stream_seed(config.seed, Stream::Augment));
  const double tau = model.config().temperature;
  const std::size_t classes = model.config().num_labeled;

  std::vector<std::size_t> order(n);
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.pretrain_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    batch_rng.shuffle(order.begin(), order.end());
    EpochRecord rec;
    rec.phase = "pretrain";
    rec.epoch = epoch;
    std::size_t correct = 0;
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < steps_per_epoch; ++b) {
      const std::size_t lo = b * config.batch_size, hi = std::min(n, lo + config.batch_size);
      std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(lo),
                                   order.begin() + static_cast<std::ptrdiff_t>(hi));
      const Matrix x = augment(gather(data.labeled_x, idx), config.augment, aug_rng);
      Matrix target(idx.size(), classes);
      for (std::size_t i = 0; i < idx.size(); ++i)
        target(i, static_cast<std::size_t>(data.labeled_y[idx[i]])) = 1.0;

      auto logits = model.forward_labeled(x);
      auto loss = ag::softmax_ce(logits, target, tau);
      ag::zero_grad(params);
      ag::backward(loss);
      rec.lr = opt.step(step++);
      loss_sum += ag::scalar(loss) * static_cast<double>(idx.size());
      const auto pred = argmax_rows(logits->value);
      for (std::size_t i = 0; i < idx.size(); ++i)
        if (pred[i] == static_cast<std::size_t>(data.labeled_y[idx[i]])) ++correct;
    }
    rec.loss = loss_sum / static_cast<double>(n);
    rec.labeled_accuracy = static_cast<double>(correct) / static_cast<double>(n);
    if (!std::isfinite(rec.loss)) throw std::runtime_error("pretrain: loss diverged");
    history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec, model);
  }
  return history;
}

TrainHistory discover(Model& model, const TrainingView& data, const TrainConfig& config,
                      const EpochCallback& on_epoch) {
  config.validate();
  TrainHistory history;
  const std::size_t n_lab = data.labeled_x.rows(), n_unl = data.unlabeled_x.rows();
  const std::size_t n = n_lab + n_unl;
  if (n == 0 || config.discovery_epochs == 0) return history;

  const auto& objective = config.objective;
  const std::size_t steps_per_epoch = div_ceil(n, config.batch_size);
  std::vector<ag::Var> params = model.encoder_and_labeled_parameters();
  for (const auto& p : model.named_parameters())
    if (p.name.rfind("clustering.", 0) == 0 ||
        (objective.overclustering && p.name.rfind("overclustering.", 0) == 0))
      params.push_back(p.var);
  SgdMomentum opt(params, sgd_config(config, config.discovery_epochs, steps_per_epoch));
  Rng batch_rng(stream_seed(config.seed, Stream::Batch));
  Rng aug_rng(stream_seed(config.seed, Stream::Augment));

  const std::size_t heads = model.config().num_heads;
  const std::size_t clusters = model.config().num_unlabeled;
  std::vector<std::size_t> lab_order(n_lab), unl_order(n_unl);
  std::size_t step = 0;

  for (std::size_t epoch = 0; epoch < config.discovery_epochs; ++epoch) {
    std::iota(lab_order.begin(), lab_order.end(), 0);
    std::iota(unl_order.begin(), unl_order.end(), 0);
    batch_rng.shuffle(lab_order.begin(), lab_order.end());
    batch_rng.shuffle(unl_order.begin(), unl_order.end());

    EpochRecord rec;
    rec.phase = "discover";
    rec.epoch = epoch;
    rec.head_losses.assign(heads, 0.0);
    rec.overcluster_losses.assign(objective.overclustering ? heads : 0, 0.0);
    std::vector<std::vector<std::size_t>> usage(heads, std::vector<std::size_t>(clusters, 0));
    double loss_sum = 0.0;

    // Batch b takes a proportional slice of each set.
    for (std::size_t b = 0; b < steps_per_epoch; ++b) {
      const std::size_t l0 = b * n_lab / steps_per_epoch, l1 = (b + 1) * n_lab / steps_per_epoch;
      const std::size_t u0 = b * n_unl / steps_per_epoch, u1 = (b + 1) * n_unl / steps_per_epoch;
      std::vector<std::size_t> lab_idx(lab_order.begin() + static_cast<std::ptrdiff_t>(l0),
                                       lab_order.begin() + static_cast<std::ptrdiff_t>(l1));
      std::vector<std::size_t> unl_idx(unl_order.begin() + static_cast<std::ptrdiff_t>(u0),
                                       unl_order.begin() + static_cast<std::ptrdiff_t>(u1));
      const Matrix x = vconcat(gather(data.labeled_x, lab_idx), gather(data.unlabeled_x, unl_idx));
      std::vector<int> labels;
      for (auto i : lab_idx) labels.push_back(data.labeled_y[i]);
      labels.insert(labels.end(), unl_idx.size(), kUnlabeled);

      const ViewPair views = two_views(x, std::move(labels), config.augment, aug_rng);
      auto result = total_loss(views, model, objective);
      ag::zero_grad(params);
      ag::backward(result.loss.total);
      rec.lr = opt.step(step++);

      loss_sum += ag::scalar(result.loss.total);
      for (std::size_t h = 0; h < heads; ++h) {
        rec.head_losses[h] += ag::scalar(result.loss.clustering[h]);
        const auto& t = result.targets.clustering[h];
        for (const Matrix* own : {&t.own_v1, &t.own_v2})
          for (auto c : argmax_rows(*own)) ++usage[h][c];
      }
      for (std::size_t h = 0; h < rec.overcluster_losses.size(); ++h)
        rec.overcluster_losses[h] += ag::scalar(result.loss.overclustering[h]);
    }
    const double steps = static_cast<double>(steps_per_epoch);
    rec.loss = loss_sum / steps;
    for (double& v : rec.head_losses) v /= steps;
    for (double& v : rec.overcluster_losses) v /= steps;
    for (const auto& u : usage) rec.usage_entropy.push_back(usage_entropy(u));
    if (!std::isfinite(rec.loss)) throw std::runtime_error("discover: loss diverged");
    history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec, model);
  }
  history.final_head_losses = history.epochs.back().head_losses;
  history.best_head = metrics::best_head_index(history.final_head_losses);
  return history;
}

std::string to_json_line(const EpochRecord& r) {
  nlohmann::ordered_json j;
  j["phase"] = r.phase;
  j["epoch"] = r.epoch;
  j["lr"] = r.lr;
  j["loss"] = r.loss;
  if (r.phase == "pretrain") {
    j["labeled_accuracy"] = r.labeled_accuracy;
  } else {
    j["head_losses"] = r.head_losses;
    j["overcluster_losses"] = r.overcluster_losses;
    j["usage_entropy"] = r.usage_entropy;
  }
  return j.dump();
}

void write_log(const TrainHistory& history, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::app);
  if (!os) throw std::runtime_error("cannot write log " + path.string());
  for (const auto& r : history.epochs) os << to_json_line(r) << '\n';
}

}  // namespace uno
