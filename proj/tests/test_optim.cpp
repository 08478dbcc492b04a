#include <cmath>
#include <numbers>

#include "doctest.h"

#include "uno/optim.hpp"

using namespace uno;

TEST_CASE("schedule: linear warmup, exact peak, cosine to the floor") {
  LrSchedule s{0.1, 0.001, 10, 110};
  CHECK(s.at(0) == 0.0);
  CHECK(s.at(5) == doctest::Approx(0.05));
  CHECK(s.at(10) == 0.1);
  CHECK(s.at(60) == doctest::Approx(0.001 + 0.5 * (0.1 - 0.001)));
  CHECK(s.at(110) == 0.001);
  CHECK(s.at(500) == 0.001);
  // Independent closed form at an arbitrary point.
  const double t = (37.0 - 10.0) / 100.0;
  CHECK(s.at(37) == doctest::Approx(0.001 + 0.5 * 0.099 * (1 + std::cos(std::numbers::pi * t))));
}

TEST_CASE("schedule is monotone in each phase") {
  LrSchedule s{0.1, 0.001, 20, 200};
  for (std::size_t i = 1; i <= 20; ++i) CHECK(s.at(i) >= s.at(i - 1));
  for (std::size_t i = 21; i <= 200; ++i) CHECK(s.at(i) <= s.at(i - 1));
  for (std::size_t i = 0; i <= 200; ++i) {
    CHECK(s.at(i) <= 0.1);
    CHECK(s.at(i) >= 0.0);
  }
}

TEST_CASE("no warmup starts at the base rate") {
  LrSchedule s{0.1, 0.0, 0, 10};
  CHECK(s.at(0) == 0.1);
}

TEST_CASE("sgd momentum update matches the hand-computed recurrence") {
  auto p = ag::parameter(Matrix{{1.0, -2.0}});
  SgdConfig cfg;
  cfg.schedule = {0.5, 0.5, 0, 100};
  cfg.momentum = 0.9;
  cfg.weight_decay = 0.1;
  SgdMomentum opt({p}, cfg);
  double buf0 = 0, buf1 = 0, w0 = 1.0, w1 = -2.0;
  for (int step = 0; step < 3; ++step) {
    p->grad = Matrix{{0.3, 0.4}};
    opt.step(step);
    buf0 = 0.9 * buf0 + (0.3 + 0.1 * w0);
    buf1 = 0.9 * buf1 + (0.4 + 0.1 * w1);
    w0 -= 0.5 * buf0;
    w1 -= 0.5 * buf1;
    CHECK(p->value(0, 0) == doctest::Approx(w0).epsilon(1e-14));
    CHECK(p->value(0, 1) == doctest::Approx(w1).epsilon(1e-14));
  }
  CHECK(opt.momentum_buffers()[0](0, 0) == doctest::Approx(buf0));
}

TEST_CASE("sgd rejects constants") {
  CHECK_THROWS_AS(SgdMomentum({ag::constant(Matrix(1, 1))}, SgdConfig{}), std::invalid_argument);
}
