#include "uno/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "uno/metrics.hpp"
#include "uno/rng.hpp"

namespace uno::baselines {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::size_t nearest(std::span<const double> p, const Matrix& centroids, double* dist = nullptr) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = sq_dist(p, centroids.row(c));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (dist) *dist = best_d;
  return best;
}

// k-means++: each new centroid is a point drawn with probability
// proportional to its squared distance from the nearest existing centroid.
// Rows [0, fixed) of `centroids` are already set.
void seed_plus_plus(const Matrix& points, Matrix& centroids, std::size_t fixed, Rng& rng) {
  const std::size_t n = points.rows();
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  auto refresh = [&](std::size_t c) {
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(points.row(i), centroids.row(c)));
  };
  for (std::size_t c = 0; c < fixed; ++c) refresh(c);
  for (std::size_t c = fixed; c < centroids.rows(); ++c) {
    std::size_t pick = 0;
    double total = 0.0;
    if (c > 0)
      for (double v : d2) total += v;
    if (c == 0 || !(total > 0.0)) {
      pick = static_cast<std::size_t>(rng.index(n));
    } else {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    }
    std::copy(points.row(pick).begin(), points.row(pick).end(), centroids.row(c).begin());
    refresh(c);
  }
}

}  // namespace

static KMeansResult kmeans_once(const Matrix& points, std::size_t k, std::uint64_t seed,
                                std::size_t max_iter) {
  const std::size_t n = points.rows(), dim = points.cols();
  Rng rng(seed);
  KMeansResult r;
  r.centroids = Matrix(k, dim);
  seed_plus_plus(points, r.centroids, 0, rng);
  r.labels.assign(n, 0);
  std::vector<double> dist(n);

  for (std::size_t it = 0; it < max_iter; ++it) {
    bool changed = it == 0;
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = nearest(points.row(i), r.centroids, &dist[i]);
      changed = changed || c != r.labels[i];
      r.labels[i] = c;
      inertia += dist[i];
    }
    r.inertia_history.push_back(inertia);
    r.inertia = inertia;
    r.iterations = it + 1;
    if (!changed) break;

    Matrix sums(k, dim);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[r.labels[i]];
      auto s = sums.row(r.labels[i]);
      for (std::size_t d = 0; d < dim; ++d) s[d] += points(i, d);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        const auto far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
        std::copy(points.row(far).begin(), points.row(far).end(), r.centroids.row(c).begin());
        dist[far] = 0.0;
        continue;
      }
      for (std::size_t d = 0; d < dim; ++d)
        r.centroids(c, d) = sums(c, d) / static_cast<double>(counts[c]);
    }
  }
  return r;
}

KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t max_iter,
                    std::size_t n_init) {
  if (k == 0 || k > points.rows()) throw std::invalid_argument("kmeans: need 1 <= k <= number of points");
  if (n_init == 0) throw std::invalid_argument("kmeans: n_init must be >= 1");
  Rng seeds(seed);
  KMeansResult best;
  for (std::size_t run = 0; run < n_init; ++run) {
    auto r = kmeans_once(points, k, seeds.next_seed(), max_iter);
    if (run == 0 || r.inertia < best.inertia) best = std::move(r);
  }
  return best;
}

static ConstrainedKMeansResult constrained_once(const Matrix& probe_x, std::span<const int> probe_y,
                                                const Matrix& unlabeled_x, std::size_t k,
                                                std::uint64_t seed, std::size_t max_iter) {
  if (probe_x.rows() != probe_y.size())
    throw std::invalid_argument("constrained_kmeans: probe points/labels mismatch");
  if (probe_x.rows() == 0) throw std::invalid_argument("constrained_kmeans: empty probe set");
  if (unlabeled_x.rows() > 0 && unlabeled_x.cols() != probe_x.cols())
    throw std::invalid_argument("constrained_kmeans: dimension mismatch");

  ConstrainedKMeansResult r;
  std::map<int, std::size_t> cls;
  for (int y : probe_y) cls.emplace(y, 0);
  for (auto& [label, idx] : cls) {
    idx = r.anchor_classes.size();
    r.anchor_classes.push_back(label);
  }
  const std::size_t anchors = cls.size(), dim = probe_x.cols();
  if (k < anchors)
    throw std::invalid_argument("constrained_kmeans: k = " + std::to_string(k) +
                                " is smaller than the number of probe classes (" +
                                std::to_string(anchors) + ")");
  const std::size_t free = k - anchors, n = unlabeled_x.rows();
  if (free > n)
    throw std::invalid_argument("constrained_kmeans: more free clusters than unlabeled points");

  r.centroids = Matrix(k, dim);
  std::vector<std::size_t> counts(anchors, 0);
  r.probe_labels.resize(probe_y.size());
  for (std::size_t i = 0; i < probe_y.size(); ++i) {
    const std::size_t c = cls.at(probe_y[i]);
    r.probe_labels[i] = c;
    ++counts[c];
    for (std::size_t d = 0; d < dim; ++d) r.centroids(c, d) += probe_x(i, d);
  }
  for (std::size_t c = 0; c < anchors; ++c)
    for (std::size_t d = 0; d < dim; ++d) r.centroids(c, d) /= static_cast<double>(counts[c]);

  r.unlabeled_labels.assign(n, 0);
  if (n == 0) return r;
  Rng rng(seed);
  if (free > 0) seed_plus_plus(unlabeled_x, r.centroids, anchors, rng);

  std::vector<double> dist(n);
  for (std::size_t it = 0; it < max_iter; ++it) {
    bool changed = it == 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = nearest(unlabeled_x.row(i), r.centroids, &dist[i]);
      changed = changed || c != r.unlabeled_labels[i];
      r.unlabeled_labels[i] = c;
    }
    if (!changed || free == 0) break;
    Matrix sums(k, dim);
    std::vector<std::size_t> cnt(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = r.unlabeled_labels[i];
      if (c < anchors) continue;
      ++cnt[c];
      for (std::size_t d = 0; d < dim; ++d) sums(c, d) += unlabeled_x(i, d);
    }
    for (std::size_t c = anchors; c < k; ++c) {
      if (cnt[c] == 0) {
        const auto far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
        std::copy(unlabeled_x.row(far).begin(), unlabeled_x.row(far).end(), r.centroids.row(c).begin());
        dist[far] = 0.0;
        continue;
      }
      for (std::size_t d = 0; d < dim; ++d) r.centroids(c, d) = sums(c, d) / static_cast<double>(cnt[c]);
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    r.inertia += sq_dist(unlabeled_x.row(i), r.centroids.row(r.unlabeled_labels[i]));
  return r;
}

ConstrainedKMeansResult constrained_kmeans(const Matrix& probe_x, std::span<const int> probe_y,
                                           const Matrix& unlabeled_x, std::size_t k,
                                           std::uint64_t seed, std::size_t max_iter,
                                           std::size_t n_init) {
  if (n_init == 0) throw std::invalid_argument("constrained_kmeans: n_init must be >= 1");
  Rng seeds(seed);
  ConstrainedKMeansResult best;
  for (std::size_t run = 0; run < n_init; ++run) {
    auto r = constrained_once(probe_x, probe_y, unlabeled_x, k, seeds.next_seed(), max_iter);
    if (run == 0 || r.inertia < best.inertia) best = std::move(r);
  }
  return best;
}

double silhouette(const Matrix& points, std::span<const std::size_t> labels) {
  const std::size_t n = points.rows();
  if (labels.size() != n) throw std::invalid_argument("silhouette: label count mismatch");
  if (n == 0) return 0.0;
  const std::size_t k = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::size_t> size(k, 0);
  for (auto l : labels) ++size[l];
  if (std::count_if(size.begin(), size.end(), [](std::size_t s) { return s > 0; }) < 2) return 0.0;

  double total = 0.0;
  std::vector<double> sum(k);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sum.begin(), sum.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) sum[labels[j]] += std::sqrt(sq_dist(points.row(i), points.row(j)));
    const std::size_t own = labels[i];
    if (size[own] <= 1) continue;  // singleton scores 0
    const double a = sum[own] / static_cast<double>(size[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c)
      if (c != own && size[c] > 0) b = std::min(b, sum[c] / static_cast<double>(size[c]));
    total += (b - a) / std::max(a, b);
  }
  return total / static_cast<double>(n);
}

KEstimate estimate_num_classes(const Matrix& probe_x, std::span<const int> probe_y,
                               const Matrix& unlabeled_x, std::span<const std::size_t> candidates,
                               std::uint64_t seed) {
  if (candidates.empty()) throw std::invalid_argument("estimate_num_classes: no candidates");
  if (probe_x.rows() != probe_y.size())
    throw std::invalid_argument("estimate_num_classes: probe points/labels mismatch");

  std::vector<int> classes(probe_y.begin(), probe_y.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.empty()) throw std::invalid_argument("estimate_num_classes: empty probe set");
  // First half of the probe classes anchor the clustering, the rest validate it.
  const std::size_t n_anchor = classes.size() == 1 ? 1 : (classes.size() + 1) / 2;
  const std::vector<int> anchor(classes.begin(), classes.begin() + static_cast<std::ptrdiff_t>(n_anchor));
  const std::size_t n_val = classes.size() - n_anchor;

  std::vector<std::size_t> anchor_rows, val_rows;
  for (std::size_t i = 0; i < probe_y.size(); ++i)
    (std::binary_search(anchor.begin(), anchor.end(), probe_y[i]) ? anchor_rows : val_rows).push_back(i);
  const Matrix anchor_x = probe_x.select_rows(anchor_rows);
  std::vector<int> anchor_y;
  for (auto i : anchor_rows) anchor_y.push_back(probe_y[i]);
  // Validation probe points are clustered as if unlabeled, after the real unlabeled ones.
  const Matrix pool = vconcat(unlabeled_x, probe_x.select_rows(val_rows));
  const std::size_t n_unl = unlabeled_x.rows();
  const Matrix everything = vconcat(anchor_x, pool);

  KEstimate est;
  est.candidates.assign(candidates.begin(), candidates.end());
  for (std::size_t cand : est.candidates) {
    const auto r = constrained_kmeans(anchor_x, anchor_y, pool, n_anchor + n_val + cand, seed);

    double acc = 0.0;
    if (n_val > 0) {
      std::vector<std::size_t> pred, truth;
      for (std::size_t j = 0; j < val_rows.size(); ++j) {
        pred.push_back(r.unlabeled_labels[n_unl + j]);
        truth.push_back(static_cast<std::size_t>(
            std::lower_bound(classes.begin(), classes.end(), probe_y[val_rows[j]]) - classes.begin()));
      }
      acc = metrics::cluster_accuracy(pred, truth);
    }
    // Silhouette over every clustered point, so merging an unlabeled class
    // into a probe cluster is penalized too.
    std::vector<std::size_t> all_labels = r.probe_labels;
    all_labels.insert(all_labels.end(), r.unlabeled_labels.begin(), r.unlabeled_labels.end());
    const double sil = silhouette(everything, all_labels);
    est.probe_accuracy.push_back(acc);
    est.pool_silhouette.push_back(sil);
    est.score.push_back(n_val > 0 ? 0.5 * (acc + sil) : sil);
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < est.candidates.size(); ++i) {
    const bool better = est.score[i] > est.score[best] + 1e-12;
    const bool tie_smaller = std::abs(est.score[i] - est.score[best]) <= 1e-12 &&
                             est.candidates[i] < est.candidates[best];
    if (better || tie_smaller) best = i;
  }
  est.k = est.candidates[best];
  return est;
}

}  // namespace uno::baselines
