#include "uno/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "text_io.hpp"
#include "uno/kernels.hpp"
#include "uno/rng.hpp"

namespace uno {

namespace {

constexpr const char* kCheckpointMagic = "uno-checkpoint";
constexpr int kCheckpointVersion = 1;

Matrix uniform_init(std::size_t rows, std::size_t cols, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-bound, bound);
  return m;
}

Linear make_linear(std::size_t in, std::size_t out, Rng& rng) {
  return Linear{ag::parameter(uniform_init(out, in, in, rng)),
                ag::parameter(uniform_init(1, out, in, rng))};
}

CosineClassifier make_cosine(std::size_t in, std::size_t classes, Rng& rng) {
  return CosineClassifier{ag::parameter(uniform_init(classes, in, in, rng))};
}

ClusterHead make_head(const ModelConfig& c, std::size_t classes, Rng& rng) {
  ClusterHead h{make_linear(c.feature_dim, c.projection_hidden, rng),
                make_linear(c.projection_hidden, c.projection_out, rng),
                make_cosine(c.projection_out, classes, rng)};
  return h;
}

void push_linear(std::vector<NamedParam>& out, const std::string& prefix, const Linear& l) {
  out.push_back({prefix + ".weight", l.weight});
  out.push_back({prefix + ".bias", l.bias});
}

void push_head(std::vector<NamedParam>& out, const std::string& prefix, const ClusterHead& h) {
  push_linear(out, prefix + ".proj.0", h.hidden);
  push_linear(out, prefix + ".proj.1", h.out);
  out.push_back({prefix + ".prototypes", h.classifier.prototypes});
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

}  // namespace

void ModelConfig::validate() const {
  if (input_dim == 0 || feature_dim == 0) throw std::invalid_argument("model: zero dimension");
  if (num_labeled == 0) throw std::invalid_argument("model: num_labeled must be >= 1");
  if (num_unlabeled == 0) throw std::invalid_argument("model: num_unlabeled must be >= 1");
  if (num_heads == 0) throw std::invalid_argument("model: num_heads must be >= 1");
  if (overcluster_factor == 0) throw std::invalid_argument("model: overcluster_factor must be >= 1");
  if (projection_hidden == 0 || projection_out == 0)
    throw std::invalid_argument("model: zero projection size");
  if (!(temperature > 0.0)) throw std::invalid_argument("model: temperature must be > 0");
  for (auto h : encoder_hidden)
    if (h == 0) throw std::invalid_argument("model: zero encoder width");
}

ag::Var Linear::operator()(const ag::Var& x) const {
  return ag::add_bias(ag::matmul_nt(x, weight), bias);
}

ag::Var CosineClassifier::operator()(const ag::Var& unit_x) const {
  return ag::matmul_nt(unit_x, ag::l2_normalize_rows(prototypes));
}

const ag::Var& LogitsBundle::head(HeadKind kind, std::size_t index) const {
  const auto& heads = kind == HeadKind::Clustering ? clustering : overclustering;
  if (index >= heads.size())
    throw std::out_of_range("LogitsBundle: head index " + std::to_string(index) +
                            " out of range (" + std::to_string(heads.size()) + " heads)");
  return heads[index];
}

Model::Model(ModelConfig config, std::uint64_t init_seed) : config_(std::move(config)) {
  config_.validate();
  Rng rng(init_seed);
  std::size_t in = config_.input_dim;
  for (std::size_t width : config_.encoder_hidden) {
    encoder_.push_back(make_linear(in, width, rng));
    in = width;
  }
  encoder_.push_back(make_linear(in, config_.feature_dim, rng));
  labeled_head_ = make_cosine(config_.feature_dim, config_.num_labeled, rng);
  for (std::size_t i = 0; i < config_.num_heads; ++i)
    clustering_.push_back(make_head(config_, config_.num_unlabeled, rng));
  for (std::size_t i = 0; i < config_.num_heads; ++i)
    overclustering_.push_back(make_head(config_, config_.num_overclusters(), rng));
}

ag::Var Model::activate(const ag::Var& x) const {
  return config_.activation == Activation::Relu ? ag::relu(x) : ag::tanh(x);
}

ag::Var Model::encode(const Matrix& x) const {
  if (x.cols() != config_.input_dim && !(x.rows() == 0 && x.cols() == 0))
    throw std::invalid_argument("encode: input width " + std::to_string(x.cols()) +
                                " != input_dim " + std::to_string(config_.input_dim));
  ag::Var h = ag::constant(x.cols() == 0 ? Matrix(0, config_.input_dim) : x);
  for (std::size_t i = 0; i < encoder_.size(); ++i) {
    h = encoder_[i](h);
    if (i + 1 < encoder_.size()) h = activate(h);
  }
  return ag::l2_normalize_rows(h);
}

ag::Var Model::head_logits(const ClusterHead& head, const ag::Var& z) const {
  auto projected = head.out(activate(head.hidden(z)));
  return head.classifier(ag::l2_normalize_rows(projected));
}

LogitsBundle Model::forward(const Matrix& x, bool with_overclustering) const {
  LogitsBundle b;
  b.features = encode(x);
  b.labeled = labeled_head_(b.features);
  for (const auto& h : clustering_) b.clustering.push_back(head_logits(h, b.features));
  if (with_overclustering)
    for (const auto& h : overclustering_) b.overclustering.push_back(head_logits(h, b.features));
  return b;
}

ag::Var Model::forward_labeled(const Matrix& x) const { return labeled_head_(encode(x)); }

Matrix Model::unified_posterior(const LogitsBundle& bundle, std::size_t head_index,
                                HeadKind kind) const {
  const auto& head = bundle.head(kind, head_index);
  return kernels::softmax_rows(hconcat(bundle.labeled->value, head->value),
                               1.0 / config_.temperature);
}

std::vector<NamedParam> Model::named_parameters() const {
  std::vector<NamedParam> out;
  for (std::size_t i = 0; i < encoder_.size(); ++i)
    push_linear(out, "encoder." + std::to_string(i), encoder_[i]);
  out.push_back({"labeled.prototypes", labeled_head_.prototypes});
  for (std::size_t i = 0; i < clustering_.size(); ++i)
    push_head(out, "clustering." + std::to_string(i), clustering_[i]);
  for (std::size_t i = 0; i < overclustering_.size(); ++i)
    push_head(out, "overclustering." + std::to_string(i), overclustering_[i]);
  return out;
}

std::vector<ag::Var> Model::parameters() const {
  std::vector<ag::Var> out;
  for (auto& p : named_parameters()) out.push_back(p.var);
  return out;
}

std::vector<ag::Var> Model::encoder_and_labeled_parameters() const {
  std::vector<ag::Var> out;
  for (const auto& l : encoder_) {
    out.push_back(l.weight);
    out.push_back(l.bias);
  }
  out.push_back(labeled_head_.prototypes);
  return out;
}

std::vector<ag::Var> Model::unlabeled_head_parameters() const {
  std::vector<ag::Var> out;
  for (auto& p : named_parameters())
    if (p.name.rfind("clustering.", 0) == 0 || p.name.rfind("overclustering.", 0) == 0)
      out.push_back(p.var);
  return out;
}

Model Model::clone() const {
  Model copy(config_, 0);
  auto src = named_parameters();
  auto dst = copy.named_parameters();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i].var->value = src[i].var->value;
  return copy;
}

std::string to_string(Activation a) { return a == Activation::Relu ? "relu" : "tanh"; }

Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::Relu;
  if (s == "tanh") return Activation::Tanh;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write checkpoint " + path.string());
  const auto& c = model.config();
  os << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  os << "input_dim " << c.input_dim << '\n';
  os << "encoder_hidden " << join(c.encoder_hidden) << '\n';
  os << "feature_dim " << c.feature_dim << '\n';
  os << "num_labeled " << c.num_labeled << '\n';
  os << "num_unlabeled " << c.num_unlabeled << '\n';
  os << "overcluster_factor " << c.overcluster_factor << '\n';
  os << "num_heads " << c.num_heads << '\n';
  os << "projection_hidden " << c.projection_hidden << '\n';
  os << "projection_out " << c.projection_out << '\n';
  os << "temperature " << io::hex(c.temperature) << '\n';
  os << "activation " << to_string(c.activation) << '\n';
  const auto params = model.named_parameters();
  os << "params " << params.size() << '\n';
  for (const auto& p : params) {
    os << "param " << p.name << ' ' << p.var->value.rows() << ' ' << p.var->value.cols() << '\n';
    io::write_matrix(os, p.var->value);
  }
  os << "end\n";
  if (!os) throw std::runtime_error("failed writing checkpoint " + path.string());
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint " + path.string());
  const auto version = io::expect_line(is, kCheckpointMagic);
  if (version != std::to_string(kCheckpointVersion))
    throw std::runtime_error("unsupported checkpoint version " + version);

  auto count = [](const std::string& s) { return static_cast<std::size_t>(std::stoull(s)); };
  ModelConfig c;
  c.input_dim = count(io::expect_line(is, "input_dim"));
  c.encoder_hidden.clear();
  {
    std::stringstream ss(io::expect_line(is, "encoder_hidden"));
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) c.encoder_hidden.push_back(count(tok));
  }
  c.feature_dim = count(io::expect_line(is, "feature_dim"));
  c.num_labeled = count(io::expect_line(is, "num_labeled"));
  c.num_unlabeled = count(io::expect_line(is, "num_unlabeled"));
  c.overcluster_factor = count(io::expect_line(is, "overcluster_factor"));
  c.num_heads = count(io::expect_line(is, "num_heads"));
  c.projection_hidden = count(io::expect_line(is, "projection_hidden"));
  c.projection_out = count(io::expect_line(is, "projection_out"));
  c.temperature = io::parse_hex(io::expect_line(is, "temperature"));
  c.activation = parse_activation(io::expect_line(is, "activation"));

  Model model(c, 0);
  auto params = model.named_parameters();
  if (count(io::expect_line(is, "params")) != params.size())
    throw std::runtime_error("checkpoint parameter count does not match its config");
  for (auto& p : params) {
    std::stringstream header(io::expect_line(is, "param"));
    std::string name;
    std::size_t rows = 0, cols = 0;
    header >> name >> rows >> cols;
    if (name != p.name || rows != p.var->value.rows() || cols != p.var->value.cols())
      throw std::runtime_error("checkpoint parameter '" + name + "' does not match expected '" +
                               p.name + "' " + p.var->value.shape_string());
    p.var->value = io::read_matrix(is, rows, cols);
  }
  io::expect_line(is, "end");
  return model;
}

}  // namespace uno
