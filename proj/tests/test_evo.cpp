#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "vtalign/evo.hpp"

using namespace vtalign;
using Catch::Matchers::WithinAbs;

TEST_CASE("1-D quadratic converges near the analytic minimum") {
  auto cost = [](const std::vector<double>& v) { return (v[0] - 3.0) * (v[0] - 3.0); };
  EvoConfig cfg;
  cfg.seed = 42;
  cfg.initial_radius = 1.0;
  const EvoResult r = run({0.0}, cost, cfg);
  CHECK(std::abs(r.best[0] - 3.0) < 1e-2);

  // rerun must match bit-exactly
  const EvoResult r2 = run({0.0}, cost, cfg);
  REQUIRE(r2.best[0] == r.best[0]);
  REQUIRE(r2.best_cost == r.best_cost);
  REQUIRE(r2.trace.size() == r.trace.size());
  for (size_t i = 0; i < r.trace.size(); ++i) {
    REQUIRE(r2.trace[i].cost == r.trace[i].cost);
    REQUIRE(r2.trace[i].radius == r.trace[i].radius);
  }
}

TEST_CASE("constant cost decays the radius geometrically to epsilon") {
  auto cost = [](const std::vector<double>&) { return 1.0; };
  EvoConfig cfg;
  cfg.initial_radius = 1.0;
  cfg.epsilon = 1e-3;
  cfg.shrink_factor = 0.5;
  cfg.max_iterations = 1000;
  const EvoResult r = run({0.0}, cost, cfg);
  CHECK(r.reason == StopReason::RadiusBelowEpsilon);
  // closed form: smallest k with r0 * shrink^k < eps
  const int expected =
      int(std::ceil(std::log(cfg.epsilon / cfg.initial_radius) / std::log(cfg.shrink_factor)));
  CHECK(int(r.trace.size()) == expected);
  for (const TracePoint& t : r.trace) CHECK_FALSE(t.accepted);
  CHECK(r.best_cost == 1.0);
}

TEST_CASE("scaled 2-D quadratic converges through the scaling plumbing") {
  // optimum offset only in the coordinate that needs the large scale
  auto cost = [](const std::vector<double>& v) {
    const double a = v[0], b = v[1] - 250.0;
    return a * a + 1e-4 * b * b;
  };
  EvoConfig cfg;
  cfg.seed = 5;
  cfg.scales = {1.0, 100.0};
  cfg.initial_radius = 1.0;
  cfg.max_iterations = 300;
  cfg.epsilon = 1e-9;
  const EvoResult r = run({0.0, 0.0}, cost, cfg);
  CHECK(r.best_cost < 1e-2);
}

TEST_CASE("step accepts strict improvement and grows the radius") {
  EvoConfig cfg;
  cfg.validate(1);
  EvolutionState state;
  state.parent = {0.0};
  state.parent_cost = 10.0;
  state.radius = 1.0;
  state.rng.seed(1);
  auto improving = [](const std::vector<double>&) { return 5.0; };
  step(state, improving, cfg);
  CHECK(state.parent_cost == 5.0);
  CHECK_THAT(state.radius, WithinAbs(1.05, 1e-15));
  CHECK(state.trace.back().accepted);
}

TEST_CASE("step rejects ties and shrinks the radius") {
  EvoConfig cfg;
  EvolutionState state;
  state.parent = {0.0};
  state.parent_cost = 10.0;
  state.radius = 1.0;
  state.rng.seed(1);
  auto tie = [](const std::vector<double>&) { return 10.0; };
  step(state, tie, cfg);
  CHECK(state.parent == std::vector<double>{0.0});
  CHECK(state.parent_cost == 10.0);
  CHECK_THAT(state.radius, WithinAbs(0.98, 1e-15));
  CHECK_FALSE(state.trace.back().accepted);
}

TEST_CASE("cost failures count as +inf and are rejected") {
  EvoConfig cfg;
  EvolutionState state;
  state.parent = {0.0};
  state.parent_cost = 10.0;
  state.radius = 1.0;
  state.rng.seed(1);
  auto failing = [](const std::vector<double>&) -> double {
    throw std::runtime_error("no overlap");
  };
  step(state, failing, cfg);
  CHECK(state.parent_cost == 10.0);
  CHECK_THAT(state.radius, WithinAbs(0.98, 1e-15));
}

TEST_CASE("run refuses a failing start") {
  auto failing = [](const std::vector<double>&) -> double {
    throw std::runtime_error("bad start");
  };
  EvoConfig cfg;
  CHECK_THROWS_AS(run({0.0}, failing, cfg), InvalidStart);

  auto infinite = [](const std::vector<double>&) {
    return std::numeric_limits<double>::infinity();
  };
  CHECK_THROWS_AS(run({0.0}, infinite, cfg), InvalidStart);
}

TEST_CASE("parent cost is monotone and the radius follows the accept/reject ledger") {
  auto cost = [](const std::vector<double>& v) {
    return std::abs(v[0] - 1.0) + 0.5 * std::abs(v[1] + 2.0);
  };
  EvoConfig cfg;
  cfg.seed = 77;
  cfg.initial_radius = 0.5;
  cfg.max_iterations = 200;
  const EvoResult r = run({0.0, 0.0}, cost, cfg);

  double prev = std::numeric_limits<double>::infinity();
  double radius = cfg.initial_radius;
  for (size_t i = 0; i < r.trace.size(); ++i) {
    REQUIRE(r.trace[i].cost <= prev);
    prev = r.trace[i].cost;
    radius *= r.trace[i].accepted ? cfg.growth_factor : cfg.shrink_factor;
    REQUIRE(r.trace[i].radius == radius);  // bit-exact replay of the same products
    REQUIRE(r.trace[i].iteration == int(i) + 1);
  }
}

TEST_CASE("config validation") {
  EvoConfig cfg;
  cfg.growth_factor = 1.0;
  CHECK_THROWS_AS(cfg.validate(1), std::invalid_argument);
  cfg = EvoConfig{};
  cfg.shrink_factor = 1.0;
  CHECK_THROWS_AS(cfg.validate(1), std::invalid_argument);
  cfg = EvoConfig{};
  cfg.scales = {1.0, 2.0};
  CHECK_THROWS_AS(cfg.validate(3), std::invalid_argument);
  CHECK_NOTHROW(cfg.validate(2));
}

TEST_CASE("trace CSV has a header and one line per iteration") {
  auto cost = [](const std::vector<double>& v) { return v[0] * v[0]; };
  EvoConfig cfg;
  cfg.max_iterations = 10;
  const EvoResult r = run({1.0}, cost, cfg);
  const std::string csv = trace_csv(r.trace);
  CHECK(csv.rfind("iteration,cost,radius\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == int(r.trace.size()) + 1);
}
