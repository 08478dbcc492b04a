#include "uno/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace uno {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a real number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ConfigError(key, "expected true/false, got '" + v + "'");
}

std::vector<std::size_t> to_list(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(to_u64(key, tok));
  }
  return out;
}

// Shortest text that parses back to the same double.
std::string real(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::string list(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

template <typename F>
auto wrap(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key, e.what());
  }
}

struct Field {
  const char* key;
  const char* type;
  const char* doc;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define UNO_UINT(KEY, MEMBER, DOC)                                                           \
  Field{KEY, "uint", DOC,                                                                    \
        [](ExperimentConfig& c, const std::string& v) { c.MEMBER = to_u64(KEY, v); },        \
        [](const ExperimentConfig& c) { return std::to_string(c.MEMBER); }}
#define UNO_REAL(KEY, MEMBER, DOC)                                                           \
  Field{KEY, "real", DOC,                                                                    \
        [](ExperimentConfig& c, const std::string& v) { c.MEMBER = to_double(KEY, v); },     \
        [](const ExperimentConfig& c) { return real(c.MEMBER); }}
#define UNO_BOOL(KEY, MEMBER, DOC)                                                           \
  Field{KEY, "bool", DOC,                                                                    \
        [](ExperimentConfig& c, const std::string& v) { c.MEMBER = to_bool(KEY, v); },       \
        [](const ExperimentConfig& c) { return std::string(c.MEMBER ? "true" : "false"); }}
#define UNO_TEXT(KEY, MEMBER, DOC)                                                           \
  Field{KEY, "text", DOC, [](ExperimentConfig& c, const std::string& v) { c.MEMBER = v; },   \
        [](const ExperimentConfig& c) { return c.MEMBER; }}
#define UNO_ENUM(KEY, MEMBER, PARSE, DOC)                                                    \
  Field{KEY, "enum", DOC,                                                                    \
        [](ExperimentConfig& c, const std::string& v) {                                      \
          c.MEMBER = wrap(KEY, [&] { return PARSE(v); });                                    \
        },                                                                                   \
        [](const ExperimentConfig& c) { return to_string(c.MEMBER); }}
#define UNO_LIST(KEY, MEMBER, DOC)                                                           \
  Field{KEY, "list", DOC,                                                                    \
        [](ExperimentConfig& c, const std::string& v) { c.MEMBER = to_list(KEY, v); },       \
        [](const ExperimentConfig& c) { return list(c.MEMBER); }}

sinkhorn::Mode parse_mode(const std::string& s) {
  if (s == "soft") return sinkhorn::Mode::Soft;
  if (s == "hard") return sinkhorn::Mode::Hard;
  throw std::invalid_argument("expected soft|hard, got '" + s + "'");
}

}  // namespace

}  // namespace uno

namespace uno::sinkhorn {
inline std::string to_string(Mode m) { return m == Mode::Soft ? "soft" : "hard"; }
}  // namespace uno::sinkhorn

namespace uno {

namespace {

using sinkhorn::to_string;

const std::vector<Field>& fields() {
  static const std::vector<Field> table{
      UNO_UINT("seed", seed, "base seed; data, init, augmentation and batching streams derive from it"),
      UNO_UINT("data.num_classes", data.num_classes, "total classes"),
      UNO_REAL("data.labeled_fraction", data.labeled_fraction, "fraction of classes that are labeled (ceil)"),
      UNO_UINT("data.samples_per_class", data.samples_per_class, "training samples per class"),
      UNO_UINT("data.test_samples_per_class", data.test_samples_per_class, "test samples per class"),
      UNO_UINT("data.input_dim", data.input_dim, "input vector width"),
      UNO_REAL("data.separation", data.separation, "radius of the sphere holding class means"),
      UNO_TEXT("data.path", data_path, "load this dataset file instead of generating one"),
      UNO_LIST("model.encoder_hidden", model.encoder_hidden, "hidden widths of the encoder MLP"),
      UNO_UINT("model.feature_dim", model.feature_dim, "feature width k"),
      UNO_UINT("model.overcluster_factor", model.overcluster_factor, "m; overclustering heads have m * C^u outputs"),
      UNO_UINT("model.num_heads", model.num_heads, "n clustering and n overclustering heads"),
      UNO_UINT("model.projection_hidden", model.projection_hidden, "projection MLP hidden width"),
      UNO_UINT("model.projection_out", model.projection_out, "projection MLP output width"),
      UNO_REAL("model.temperature", model.temperature, "softmax temperature tau"),
      UNO_ENUM("model.activation", model.activation, parse_activation, "relu|tanh"),
      UNO_UINT("train.pretrain_epochs", train.pretrain_epochs, "supervised epochs on labeled data"),
      UNO_UINT("train.discovery_epochs", train.discovery_epochs, "joint epochs on labeled + unlabeled data"),
      UNO_UINT("train.batch_size", train.batch_size, "samples per step"),
      UNO_REAL("train.base_lr", train.base_lr, "peak learning rate"),
      UNO_REAL("train.min_lr", train.min_lr, "final learning rate"),
      UNO_REAL("train.weight_decay", train.weight_decay, "L2 weight decay"),
      UNO_REAL("train.momentum", train.momentum, "SGD momentum (not given by the method; default 0.9)"),
      UNO_UINT("train.warmup_epochs", train.warmup_epochs, "linear warmup length in epochs"),
      UNO_ENUM("objective.aggregation", train.objective.aggregation, parse_aggregation, "swap|avg_pseudo|avg_logits"),
      UNO_BOOL("objective.concat", train.objective.concat, "shared softmax over [labeled, unlabeled] logits"),
      UNO_BOOL("objective.overclustering", train.objective.overclustering, "train overclustering heads"),
      UNO_REAL("pseudo.epsilon", train.objective.pseudo.epsilon, "entropy weight of the assignment"),
      UNO_UINT("pseudo.n_iter", train.objective.pseudo.n_iter, "Sinkhorn-Knopp iterations"),
      UNO_ENUM("pseudo.mode", train.objective.pseudo.mode, parse_mode, "soft|hard"),
      UNO_ENUM("pseudo.labeler", train.objective.pseudo.labeler, parse_labeler, "sinkhorn|greedy"),
      UNO_ENUM("augment.strength", train.augment.strength, parse_augment_strength, "none|weak|strong"),
      UNO_REAL("augment.noise_sigma", train.augment.noise_sigma, "additive noise std"),
      UNO_REAL("augment.mask_fraction", train.augment.mask_fraction, "strong: probability of zeroing a coordinate"),
      UNO_REAL("augment.scale_min", train.augment.scale_min, "strong: lower per-sample scale"),
      UNO_REAL("augment.scale_max", train.augment.scale_max, "strong: upper per-sample scale"),
      UNO_TEXT("init.checkpoint", init_checkpoint, "start discovery from this checkpoint"),
      UNO_UINT("run.checkpoint_every", checkpoint_every, "write a checkpoint every N discovery epochs (0 = final only)"),
      UNO_TEXT("eval.checkpoint", eval_checkpoint, "checkpoint scored by 'evaluate'"),
      UNO_TEXT("eval.split", eval_split, "train|test"),
      UNO_LIST("estimate.candidates", estimate.candidates, "candidate unlabeled class counts"),
      UNO_UINT("estimate.probe_classes", estimate.probe_classes, "labeled classes held out as the probe"),
      UNO_BOOL("estimate.use_features", estimate.use_features, "cluster encoder features instead of raw inputs"),
  };
  return table;
}

}  // namespace

void ExperimentConfig::resolve() {
  const auto labeled = static_cast<std::size_t>(
      std::ceil(data.labeled_fraction * static_cast<double>(data.num_classes) - 1e-12));
  model.input_dim = data.input_dim;
  model.num_labeled = labeled;
  model.num_unlabeled = data.num_classes > labeled ? data.num_classes - labeled : 0;
  data.seed = seed;
  train.seed = seed;
  if (eval_split != "train" && eval_split != "test")
    throw ConfigError("eval.split", "expected train|test, got '" + eval_split + "'");
}

void set_field(ExperimentConfig& config, const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(config, value);
      return;
    }
  }
  throw ConfigError(key, "unknown key");
}

void apply_override(ExperimentConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError(assignment, "override must have the form key=value");
  set_field(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.find('=') == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    apply_override(base, line);
  }
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream is(path);
  if (!is) throw ConfigError(path.string(), "cannot open config file");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string serialize_config(const ExperimentConfig& config) {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(config) + "\n";
  return out;
}

std::string config_schema() {
  std::string out;
  const ExperimentConfig defaults;
  for (const auto& f : fields()) {
    std::string key = f.key;
    key.resize(28, ' ');
    std::string type = f.type;
    type.resize(6, ' ');
    out += "  " + key + type + f.doc + " [default: " + f.get(defaults) + "]\n";
  }
  return out;
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize_config(config)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace uno
