#include "doctest.h"
#include "oracles.hpp"

#include "uno/baselines.hpp"
#include "uno/metrics.hpp"

using namespace uno;
using namespace uno::baselines;

namespace {

// Tight blobs at the given centres, `per` points each.
Matrix blobs(const std::vector<std::vector<double>>& centres, std::size_t per, Rng& rng,
             std::vector<std::size_t>* truth = nullptr, double sd = 0.1) {
  Matrix m(centres.size() * per, centres[0].size());
  for (std::size_t c = 0; c < centres.size(); ++c)
    for (std::size_t i = 0; i < per; ++i) {
      for (std::size_t d = 0; d < centres[c].size(); ++d) m(c * per + i, d) = centres[c][d] + sd * rng.normal();
      if (truth) truth->push_back(c);
    }
  return m;
}

double inertia(const Matrix& x, const std::vector<std::size_t>& labels, const Matrix& centroids) {
  double s = 0;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t d = 0; d < x.cols(); ++d) s += std::pow(x(i, d) - centroids(labels[i], d), 2);
  return s;
}

}  // namespace

TEST_CASE("k-means recovers well-separated blobs") {
  Rng rng(1);
  std::vector<std::size_t> truth;
  const Matrix x = blobs({{0, 0}, {5, 0}, {0, 5}, {5, 5}}, 30, rng, &truth);
  const auto r = kmeans(x, 4, 7);
  CHECK(metrics::cluster_accuracy(r.labels, truth) == 1.0);
  CHECK(r.inertia == doctest::Approx(inertia(x, r.labels, r.centroids)));
}

TEST_CASE("k-means inertia never increases and runs are seeded") {
  Rng rng(2);
  const Matrix x = oracle::random_matrix(200, 3, rng);
  const auto r = kmeans(x, 6, 3);
  for (std::size_t i = 1; i < r.inertia_history.size(); ++i)
    CHECK(r.inertia_history[i] <= r.inertia_history[i - 1] + 1e-9);
  const auto again = kmeans(x, 6, 3);
  CHECK(again.labels == r.labels);
  CHECK(again.centroids == r.centroids);
  CHECK_THROWS_AS(kmeans(x, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(kmeans(x, 201, 1), std::invalid_argument);
}

TEST_CASE("k-means with duplicate points leaves no cluster empty") {
  Matrix x(10, 2, 1.0);
  x(9, 0) = 4.0;
  const auto r = kmeans(x, 3, 1);
  std::vector<std::size_t> count(3, 0);
  for (auto l : r.labels) ++count[l];
  CHECK(r.labels.size() == 10);
  CHECK(std::count(count.begin(), count.end(), 0u) <= 1);  // 2 distinct points for 3 clusters
}

TEST_CASE("constrained k-means keeps probe classes anchored") {
  Rng rng(3);
  std::vector<std::size_t> t;
  const Matrix probe = blobs({{0, 0}, {5, 0}}, 20, rng, &t);
  std::vector<int> py;
  for (auto v : t) py.push_back(static_cast<int>(v) + 10);
  std::vector<std::size_t> unl_truth;
  const Matrix unl = blobs({{0, 5}, {5, 5}, {0.1, 0.1}}, 25, rng, &unl_truth);
  const auto r = constrained_kmeans(probe, py, unl, 4, 9);
  CHECK(r.anchor_classes == std::vector<int>{10, 11});
  for (std::size_t i = 0; i < probe.rows(); ++i) CHECK(r.probe_labels[i] == t[i]);
  // Points near the first probe class join its anchored cluster.
  for (std::size_t i = 50; i < 75; ++i) CHECK(r.unlabeled_labels[i] == 0);
  CHECK(r.unlabeled_labels[0] != r.unlabeled_labels[25]);
  CHECK(r.unlabeled_labels[0] >= 2);
  CHECK_THROWS_AS(constrained_kmeans(probe, py, unl, 1, 9), std::invalid_argument);
}

TEST_CASE("silhouette against a direct computation") {
  const Matrix x{{0}, {1}, {5}, {7}};
  const std::vector<std::size_t> l{0, 0, 1, 1};
  // a/b per point from the definition.
  const double s0 = (5.0 + 7.0) / 2;
  const double p0 = (s0 - 1.0) / s0;
  const double p1 = ((4.0 + 6.0) / 2 - 1.0) / 5.0;
  const double p2 = ((5.0 + 4.0) / 2 - 2.0) / 4.5;
  const double p3 = ((7.0 + 6.0) / 2 - 2.0) / 6.5;
  CHECK(silhouette(x, l) == doctest::Approx((p0 + p1 + p2 + p3) / 4));
  CHECK(silhouette(x, std::vector<std::size_t>{0, 0, 0, 0}) == 0.0);
}

TEST_CASE("class-count estimate finds the number of blobs") {
  Rng rng(4);
  std::vector<std::size_t> t;
  const Matrix probe = blobs({{0, 0, 0}, {8, 0, 0}}, 30, rng, &t, 0.5);
  std::vector<int> py(t.begin(), t.end());
  const Matrix unl = blobs({{0, 8, 0}, {0, 0, 8}, {8, 8, 0}}, 40, rng, nullptr, 0.5);
  const std::vector<std::size_t> cands{1, 2, 3, 4, 5, 6};
  const auto est = estimate_num_classes(probe, py, unl, cands, 5);
  CHECK(est.k == 3);
  CHECK(est.score.size() == cands.size());
  CHECK_THROWS_AS(estimate_num_classes(probe, py, unl, std::vector<std::size_t>{}, 5), std::invalid_argument);
}
