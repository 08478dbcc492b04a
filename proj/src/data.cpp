#include "uno/data.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "text_io.hpp"

namespace uno {

namespace {

constexpr const char* kDatasetMagic = "uno-dataset";
constexpr int kDatasetVersion = 1;

void append_class(Matrix& x, std::vector<int>& y, std::span<const double> mean, int label,
                  std::size_t count, Rng& rng) {
  Matrix block(count, mean.size());
  for (std::size_t r = 0; r < count; ++r)
    for (std::size_t c = 0; c < mean.size(); ++c) block(r, c) = mean[c] + rng.normal();
  x = vconcat(x, block);
  y.insert(y.end(), count, label);
}

void write_block(std::ostream& os, const std::string& header, const Matrix& x,
                 const std::vector<int>& y) {
  os << header << ' ' << x.rows() << '\n';
  for (std::size_t r = 0; r < x.rows(); ++r) {
    os << y[r];
    for (double v : x.row(r)) os << ' ' << io::hex(v);
    os << '\n';
  }
}

void read_block(std::istream& is, const std::string& header, std::size_t dim, Matrix& x,
                std::vector<int>& y) {
  const auto n = static_cast<std::size_t>(std::stoull(io::expect_line(is, header)));
  x = Matrix(n, dim);
  y.assign(n, 0);
  std::string tok;
  for (std::size_t r = 0; r < n; ++r) {
    if (!(is >> y[r])) throw std::runtime_error("dataset: truncated block '" + header + "'");
    for (std::size_t c = 0; c < dim; ++c) {
      if (!(is >> tok)) throw std::runtime_error("dataset: truncated block '" + header + "'");
      x(r, c) = io::parse_hex(tok);
    }
  }
}

void validate_split(const Split& s, const Dataset& ds, const char* which) {
  auto fail = [&](const std::string& why) {
    throw std::invalid_argument(std::string("dataset ") + which + ": " + why);
  };
  if (s.labeled_x.rows() != s.labeled_y.size()) fail("labeled rows/labels mismatch");
  if (s.unlabeled_x.rows() != s.unlabeled_hidden.size()) fail("unlabeled rows/labels mismatch");
  if (s.labeled_x.rows() && s.labeled_x.cols() != ds.input_dim) fail("labeled width");
  if (s.unlabeled_x.rows() && s.unlabeled_x.cols() != ds.input_dim) fail("unlabeled width");
  const int cl = static_cast<int>(ds.num_labeled_classes);
  const int c = cl + static_cast<int>(ds.num_unlabeled_classes);
  for (int y : s.labeled_y)
    if (y < 0 || y >= cl) fail("labeled class outside [0, C^l)");
  for (int y : s.unlabeled_hidden)
    if (y < cl || y >= c) fail("unlabeled class outside [C^l, C^l + C^u)");
}

}  // namespace

void Dataset::validate() const {
  if (num_labeled_classes == 0 || num_unlabeled_classes == 0)
    throw std::invalid_argument("dataset: need at least one labeled and one unlabeled class");
  validate_split(train, *this, "train");
  validate_split(test, *this, "test");
}

Dataset make_gaussian_ncd(const GaussianConfig& gc) {
  if (!(gc.labeled_fraction > 0.0 && gc.labeled_fraction < 1.0))
    throw std::invalid_argument("make_gaussian_ncd: labeled_fraction must lie in (0, 1)");
  if (gc.num_classes < 2 || gc.input_dim == 0 || gc.samples_per_class == 0)
    throw std::invalid_argument("make_gaussian_ncd: need >= 2 classes, dim >= 1, samples >= 1");
  if (gc.separation < 0.0) throw std::invalid_argument("make_gaussian_ncd: negative separation");
  const auto labeled = static_cast<std::size_t>(
      std::ceil(gc.labeled_fraction * static_cast<double>(gc.num_classes) - 1e-12));
  if (labeled < 1 || labeled >= gc.num_classes)
    throw std::invalid_argument("make_gaussian_ncd: fraction leaves no labeled or no unlabeled class");

  Dataset ds;
  ds.input_dim = gc.input_dim;
  ds.num_labeled_classes = labeled;
  ds.num_unlabeled_classes = gc.num_classes - labeled;
  ds.seed = gc.seed;

  Rng rng(stream_seed(gc.seed, Stream::Data));
  Matrix means(gc.num_classes, gc.input_dim);
  for (std::size_t k = 0; k < gc.num_classes; ++k) {
    auto m = means.row(k);
    double norm = 0.0;
    for (double& v : m) {
      v = rng.normal();
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double& v : m) v = v / norm * gc.separation;
  }

  for (Split* split : {&ds.train, &ds.test}) {
    const std::size_t n = split == &ds.train ? gc.samples_per_class : gc.test_samples_per_class;
    split->labeled_x = Matrix(0, gc.input_dim);
    split->unlabeled_x = Matrix(0, gc.input_dim);
    for (std::size_t k = 0; k < gc.num_classes; ++k) {
      const int label = static_cast<int>(k);
      if (k < labeled)
        append_class(split->labeled_x, split->labeled_y, means.row(k), label, n, rng);
      else
        append_class(split->unlabeled_x, split->unlabeled_hidden, means.row(k), label, n, rng);
    }
  }
  ds.validate();
  return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write dataset " + path.string());
  os << kDatasetMagic << ' ' << kDatasetVersion << '\n';
  os << "input_dim " << ds.input_dim << '\n';
  os << "num_labeled_classes " << ds.num_labeled_classes << '\n';
  os << "num_unlabeled_classes " << ds.num_unlabeled_classes << '\n';
  os << "seed " << ds.seed << '\n';
  write_block(os, "train_labeled", ds.train.labeled_x, ds.train.labeled_y);
  write_block(os, "train_unlabeled", ds.train.unlabeled_x, ds.train.unlabeled_hidden);
  write_block(os, "test_labeled", ds.test.labeled_x, ds.test.labeled_y);
  write_block(os, "test_unlabeled", ds.test.unlabeled_x, ds.test.unlabeled_hidden);
  os << "end\n";
  if (!os) throw std::runtime_error("failed writing dataset " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open dataset " + path.string());
  if (io::expect_line(is, kDatasetMagic) != std::to_string(kDatasetVersion))
    throw std::runtime_error("unsupported dataset version");
  Dataset ds;
  ds.input_dim = std::stoull(io::expect_line(is, "input_dim"));
  ds.num_labeled_classes = std::stoull(io::expect_line(is, "num_labeled_classes"));
  ds.num_unlabeled_classes = std::stoull(io::expect_line(is, "num_unlabeled_classes"));
  ds.seed = std::stoull(io::expect_line(is, "seed"));
  read_block(is, "train_labeled", ds.input_dim, ds.train.labeled_x, ds.train.labeled_y);
  read_block(is, "train_unlabeled", ds.input_dim, ds.train.unlabeled_x, ds.train.unlabeled_hidden);
  read_block(is, "test_labeled", ds.input_dim, ds.test.labeled_x, ds.test.labeled_y);
  read_block(is, "test_unlabeled", ds.input_dim, ds.test.unlabeled_x, ds.test.unlabeled_hidden);
  io::expect_line(is, "end");
  ds.validate();
  return ds;
}

void AugmentPolicy::validate() const {
  if (noise_sigma < 0.0) throw std::invalid_argument("augment: negative noise_sigma");
  if (mask_fraction < 0.0 || mask_fraction > 1.0)
    throw std::invalid_argument("augment: mask_fraction outside [0, 1]");
  if (scale_min > scale_max || scale_min < 0.0)
    throw std::invalid_argument("augment: invalid scale range");
}

std::string to_string(AugmentStrength s) {
  switch (s) {
    case AugmentStrength::None: return "none";
    case AugmentStrength::Weak: return "weak";
    case AugmentStrength::Strong: return "strong";
  }
  return "?";
}

AugmentStrength parse_augment_strength(const std::string& s) {
  if (s == "none") return AugmentStrength::None;
  if (s == "weak") return AugmentStrength::Weak;
  if (s == "strong") return AugmentStrength::Strong;
  throw std::invalid_argument("unknown augmentation strength '" + s + "'");
}

Matrix augment(const Matrix& x, const AugmentPolicy& policy, Rng& rng) {
  Matrix out = x;
  if (policy.strength == AugmentStrength::None) return out;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (double& v : row) v += policy.noise_sigma * rng.normal();
    if (policy.strength != AugmentStrength::Strong) continue;
    const double s = rng.uniform(policy.scale_min, policy.scale_max);
    for (double& v : row) {
      v *= s;
      if (rng.uniform() < policy.mask_fraction) v = 0.0;
    }
  }
  return out;
}

std::vector<std::size_t> ViewPair::labeled_rows() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (is_labeled(i)) out.push_back(i);
  return out;
}

std::vector<std::size_t> ViewPair::unlabeled_rows() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (!is_labeled(i)) out.push_back(i);
  return out;
}

ViewPair two_views(const Matrix& x, std::vector<int> labels, const AugmentPolicy& policy,
                   Rng& rng) {
  policy.validate();
  if (labels.size() != x.rows())
    throw std::invalid_argument("two_views: labels do not match batch size");
  ViewPair vp;
  vp.v1 = augment(x, policy, rng);
  vp.v2 = augment(x, policy, rng);
  vp.labels = std::move(labels);
  return vp;
}

}  // namespace uno
