#include <cmath>
#include <random>

#include "doctest.h"

#include "cdrl/lagrangian.hpp"

using namespace cdrl;

namespace {

std::vector<Commodity> two_commodities() {
  return {Commodity{"c1", 0, 4, 6, 0.7, 6.0}, Commodity{"c2", 1, 4, 4, 0.6, 6.0}};
}

}  // namespace

TEST_CASE("initial multipliers") {
  auto commodities = two_commodities();
  commodities.push_back(Commodity{"c3", 0, 4, 4, 0.0, 6.0});
  const DualState s = init_lambda(commodities, DualConfig{});
  CHECK(s.lambda[0] == doctest::Approx(1.25 * std::sqrt(4.2)));
  CHECK(s.lambda[0] == doctest::Approx(2.5617).epsilon(1e-4));
  CHECK(s.lambda[1] == doctest::Approx(2.3717).epsilon(1e-4));
  CHECK(s.lambda[2] == 0.0);
  CHECK(s.eta == std::vector<double>(3, 0.005));
}

TEST_CASE("shaped reward") {
  const std::vector<double> lambda{2.0, 1.0}, m{0.1, -0.05};
  CHECK(shaped_reward(0.3, m, lambda) == doctest::Approx(-0.15));
  CHECK(shaped_reward(0.3, m, std::vector<double>{0.0, 0.0}) == doctest::Approx(-0.3));
  CHECK(shaped_reward(0.0, std::vector<double>{0.0, 0.0}, lambda) == 0.0);
}

TEST_CASE("mhat estimate") {
  CHECK(estimate_mhat({{{1.0}, {1.0}, {1.0}}}, 0.5)[0] == doctest::Approx(1.75));
  CHECK(estimate_mhat({{{0.0, 0.0}, {0.0, 0.0}}}, 0.97) == std::vector<double>{0.0, 0.0});
  const auto first = estimate_mhat({{{0.4}, {9.0}}, {{0.2}, {-3.0}}}, 0.0);
  CHECK(first[0] == doctest::Approx(0.3));
  CHECK_THROWS(estimate_mhat({}, 0.9));
}

TEST_CASE("dual update") {
  DualState s;
  s.lambda = {2.0, 0.001, 1.0};
  s.eta = {0.005, 0.005, 0.005};
  const std::vector<double> mhat{0.5, 1.0, -0.5};
  dual_update(s, mhat);
  CHECK(s.lambda[0] == doctest::Approx(1.9975));
  CHECK(s.lambda[1] == 0.0);
  CHECK(s.lambda[2] == doctest::Approx(1.0025));
  CHECK(s.iteration == 1);
}

TEST_CASE("pinned positive mhat drives lambda to zero") {
  DualState s = init_lambda({Commodity{"c1", 0, 4, 6, 0.7, 6.0}}, DualConfig{});
  const std::vector<double> one{1.0};
  int updates = 0;
  while (s.lambda[0] > 0.0) {
    dual_update(s, one);
    ++updates;
  }
  CHECK(updates == static_cast<int>(std::ceil(1.25 * std::sqrt(4.2) / 0.005)));
  CHECK(updates == 513);
  for (int k = 0; k < 10; ++k) {
    dual_update(s, one);
    CHECK(s.lambda[0] == 0.0);
  }
}

TEST_CASE("checkpoint clauses") {
  const std::vector<double> good{0.1, 0.2}, bad{-0.1, 0.2}, calm{0.01, 0.02}, noisy{0.01, 0.2};
  CHECK(checkpoint_criteria(good, calm, 0.05, 10.0, 9.0));
  CHECK(!checkpoint_criteria(bad, calm, 0.05, 10.0, 9.0));
  CHECK(!checkpoint_criteria(good, noisy, 0.05, 10.0, 9.0));
  CHECK(!checkpoint_criteria(good, calm, 0.05, 9.0, 9.0));

  // Flipping any failing clause to passing never turns true into false.
  for (int mask = 0; mask < 8; ++mask) {
    const bool a = mask & 1, b = mask & 2, c = mask & 4;
    const bool v = checkpoint_criteria(a ? good : bad, b ? calm : noisy, 0.05, c ? 10.0 : 8.0, 9.0);
    CHECK(v == (a && b && c));
  }
}

TEST_CASE("checkpoint_ok uses the window") {
  DualConfig cfg;
  cfg.window = 5;
  DualState s = init_lambda(two_commodities(), cfg);
  const std::vector<double> mhat{0.1, 0.1};
  for (int k = 0; k < 4; ++k) {
    s.record(1.0);
    CHECK(!checkpoint_ok(s, mhat));
  }
  s.record(1.0);
  CHECK(s.lambda_stddev() == std::vector<double>{0.0, 0.0});
  CHECK(checkpoint_ok(s, mhat));
  CHECK(s.best_window_mean == doctest::Approx(1.0));
  CHECK(!checkpoint_ok(s, mhat));  // no improvement over the best window
  s.record(2.0);
  CHECK(s.lambda_history.size() == 5);
  CHECK(checkpoint_ok(s, mhat));
  CHECK(s.best_window_mean == doctest::Approx(1.2));
}

TEST_CASE("lambda never negative under random estimates") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(0.0, 2.0);
  DualState s = init_lambda(two_commodities(), DualConfig{});
  for (int k = 0; k < 5000; ++k) {
    const std::vector<double> mhat{noise(rng), noise(rng)};
    dual_update(s, mhat);
    CHECK(s.lambda[0] >= 0.0);
    CHECK(s.lambda[1] >= 0.0);
  }
}
