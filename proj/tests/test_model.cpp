#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "oracles.hpp"

#include "uno/model.hpp"

using namespace uno;

TEST_CASE("forward shapes and cosine logits in [-1, 1]") {
  ModelConfig c;
  Model m(c, 1);
  Rng rng(2);
  const auto b = m.forward(oracle::random_matrix(10, c.input_dim, rng));
  CHECK(b.batch() == 10);
  CHECK(b.features->value.cols() == c.feature_dim);
  CHECK(b.labeled->value.cols() == c.num_labeled);
  REQUIRE(b.clustering.size() == c.num_heads);
  REQUIRE(b.overclustering.size() == c.num_heads);
  CHECK(b.clustering[0]->value.cols() == c.num_unlabeled);
  CHECK(b.overclustering[0]->value.cols() == c.num_unlabeled * c.overcluster_factor);
  for (const auto* v : {&b.labeled, &b.clustering[2], &b.overclustering[3]})
    for (double x : (*v)->value.values()) {
      CHECK(x <= 1.0 + 1e-12);
      CHECK(x >= -1.0 - 1e-12);
    }
  for (std::size_t i = 0; i < 10; ++i) CHECK(oracle::norm2(b.features->value.row(i)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(b.head(HeadKind::Clustering, 4), std::out_of_range);
  CHECK(m.forward(oracle::random_matrix(3, c.input_dim, rng), false).overclustering.empty());
}

TEST_CASE("cosine classifier is invariant to prototype and feature scale") {
  ModelConfig c;
  Model m(c, 3);
  Rng rng(4);
  const Matrix x = oracle::random_matrix(5, c.input_dim, rng);
  const Matrix before = m.forward_labeled(x)->value;
  for (auto& p : m.named_parameters())
    if (p.name == "labeled.prototypes")
      for (double& v : p.var->value.values()) v *= 7.5;
  const Matrix after = m.forward_labeled(x)->value;
  CHECK(oracle::rel_error(before.values(), after.values()) < 1e-10);
}

TEST_CASE("unified posterior is a distribution over C^l + C^u") {
  ModelConfig c;
  Model m(c, 5);
  Rng rng(6);
  const auto b = m.forward(oracle::random_matrix(4, c.input_dim, rng));
  const Matrix p = m.unified_posterior(b, 1, HeadKind::Clustering);
  CHECK(p.cols() == c.num_classes());
  for (std::size_t i = 0; i < 4; ++i) {
    double s = 0;
    for (double v : p.row(i)) s += v;
    CHECK(s == doctest::Approx(1.0));
  }
}

TEST_CASE("initialization is seeded and clone is independent") {
  ModelConfig c;
  Model a(c, 7), b(c, 7), d(c, 8);
  CHECK(a.named_parameters()[0].var->value == b.named_parameters()[0].var->value);
  CHECK_FALSE(a.named_parameters()[0].var->value == d.named_parameters()[0].var->value);
  Model e = a.clone();
  e.named_parameters()[0].var->value(0, 0) += 1.0;
  CHECK_FALSE(a.named_parameters()[0].var->value == e.named_parameters()[0].var->value);
}

TEST_CASE("parameter groups partition the model") {
  ModelConfig c;
  Model m(c, 9);
  CHECK(m.encoder_and_labeled_parameters().size() + m.unlabeled_head_parameters().size() ==
        m.parameters().size());
}

TEST_CASE("checkpoint round-trip is exact and mismatches are rejected") {
  ModelConfig c;
  c.activation = Activation::Tanh;
  c.temperature = 0.07;
  Model m(c, 10);
  const auto path = std::filesystem::temp_directory_path() / "uno_test_model.ckpt";
  save_checkpoint(m, path);
  const Model back = load_checkpoint(path);
  CHECK(back.config().activation == Activation::Tanh);
  CHECK(back.config().temperature == 0.07);
  const auto pa = m.named_parameters(), pb = back.named_parameters();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].name == pb[i].name);
    CHECK(pa[i].var->value == pb[i].var->value);
  }
  {
    std::ofstream os(path);
    os << "uno-checkpoint 99\n";
  }
  CHECK_THROWS(load_checkpoint(path));
  std::filesystem::remove(path);
}

TEST_CASE("invalid configs and inputs are rejected") {
  ModelConfig c;
  c.num_unlabeled = 0;
  CHECK_THROWS_AS(Model(c, 0), std::invalid_argument);
  c = ModelConfig{};
  c.temperature = 0.0;
  CHECK_THROWS_AS(Model(c, 0), std::invalid_argument);
  Model m(ModelConfig{}, 0);
  CHECK_THROWS_AS(m.encode(Matrix(2, 3)), std::invalid_argument);
  CHECK(parse_activation("relu") == Activation::Relu);
  CHECK_THROWS_AS(parse_activation("gelu"), std::invalid_argument);
}
