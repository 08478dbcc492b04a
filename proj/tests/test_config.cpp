#include "doctest.h"

#include "uno/config.hpp"

using namespace uno;

TEST_CASE("defaults resolve into model and training sections") {
  ExperimentConfig c;
  c.seed = 9;
  c.resolve();
  CHECK(c.model.num_labeled == 4);
  CHECK(c.model.num_unlabeled == 4);
  CHECK(c.model.input_dim == 32);
  CHECK(c.train.seed == 9);
  CHECK(c.train.pretrain_epochs == 50);
  CHECK(c.train.discovery_epochs == 100);
  CHECK(c.train.batch_size == 128);
  CHECK(c.model.temperature == 0.1);
  CHECK(c.train.objective.pseudo.epsilon == 0.05);
  CHECK(c.train.objective.pseudo.n_iter == 3);
}

TEST_CASE("parse, overrides and comments") {
  const auto c = parse_config(
      "# comment\n"
      "seed = 3\n"
      "model.encoder_hidden = 8, 4   # trailing\n"
      "objective.aggregation = avg_logits\n"
      "objective.concat = false\n"
      "pseudo.mode = hard\n"
      "\n"
      "train.base_lr = 0.25\n");
  CHECK(c.seed == 3);
  CHECK(c.model.encoder_hidden == std::vector<std::size_t>{8, 4});
  CHECK(c.train.objective.aggregation == Aggregation::AvgLogits);
  CHECK_FALSE(c.train.objective.concat);
  CHECK(c.train.objective.pseudo.mode == sinkhorn::Mode::Hard);
  CHECK(c.train.base_lr == 0.25);
  ExperimentConfig d = c;
  apply_override(d, "augment.strength=weak");
  CHECK(d.train.augment.strength == AugmentStrength::Weak);
}

TEST_CASE("errors name the offending field") {
  auto field_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  CHECK(field_of("train.batch_size = -3") == "train.batch_size");
  CHECK(field_of("model.temperature = hot") == "model.temperature");
  CHECK(field_of("objective.aggregation = mean") == "objective.aggregation");
  CHECK(field_of("objective.concat = maybe") == "objective.concat");
  CHECK(field_of("no.such.key = 1") == "no.such.key");
  CHECK(field_of("seed 3") == "line 1");
  ExperimentConfig c;
  c.eval_split = "val";
  CHECK_THROWS_AS(c.resolve(), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/uno.cfg"), ConfigError);
}

TEST_CASE("serialization round-trips and the hash tracks content") {
  ExperimentConfig c;
  c.seed = 17;
  c.model.temperature = 0.1 + 1e-17;  // not exactly representable in short decimal
  c.data.separation = 1.0 / 3.0;
  c.train.objective.pseudo.labeler = Labeler::Greedy;
  c.estimate.candidates = {3, 5};
  c.data_path = "some/file.txt";
  const std::string text = serialize_config(c);
  const auto back = parse_config(text);
  CHECK(serialize_config(back) == text);
  CHECK(back.data.separation == c.data.separation);
  CHECK(config_hash(back) == config_hash(c));
  ExperimentConfig other = c;
  other.seed = 18;
  CHECK(config_hash(other) != config_hash(c));
  CHECK(config_schema().find("pseudo.epsilon") != std::string::npos);
}
