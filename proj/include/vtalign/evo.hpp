#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace vtalign {

struct EvoConfig {
  double growth_factor = 1.05;
  double shrink_factor = 0.98;
  double initial_radius = 6.25e-3;
  double epsilon = 1.5e-6;
  int max_iterations = 300;
  std::uint64_t seed = 0;
  std::vector<double> scales;  // per-parameter step multipliers; empty = all ones

  void validate(size_t dof) const {
    if (growth_factor <= 1.0) throw std::invalid_argument("EvoConfig: growthFactor must be > 1");
    if (!(shrink_factor > 0.0 && shrink_factor < 1.0))
      throw std::invalid_argument("EvoConfig: shrinkFactor must be in (0,1)");
    if (initial_radius <= 0.0) throw std::invalid_argument("EvoConfig: initialRadius must be > 0");
    if (epsilon <= 0.0) throw std::invalid_argument("EvoConfig: epsilon must be > 0");
    if (max_iterations < 1) throw std::invalid_argument("EvoConfig: maxIterations must be >= 1");
    if (!scales.empty() && scales.size() != dof)
      throw std::invalid_argument("EvoConfig: scales length must match parameter count");
    for (double s : scales)
      if (s <= 0.0) throw std::invalid_argument("EvoConfig: scales must be positive");
  }
};

enum class StopReason { RadiusBelowEpsilon, MaxIterations };

inline const char* to_string(StopReason r) {
  return r == StopReason::RadiusBelowEpsilon ? "radius_below_epsilon" : "max_iterations";
}

struct TracePoint {
  int iteration = 0;
  double cost = 0.0;
  double radius = 0.0;
  bool accepted = false;
};

struct EvolutionState {
  std::vector<double> parent;
  double parent_cost = std::numeric_limits<double>::infinity();
  double radius = 0.0;
  int iteration = 0;
  std::mt19937_64 rng;
  std::vector<TracePoint> trace;
};

struct InvalidStart : std::runtime_error {
  InvalidStart() : std::runtime_error("cost function fails at the initial parameters") {}
};

// Cost functions signal failure (e.g. insufficient overlap) by returning
// +inf or NaN; both are unconditional rejections.
using CostFunction = std::function<double(const std::vector<double>&)>;

namespace detail {

// Box-Muller on the raw engine keeps mutations identical across standard
// library implementations.
inline double standard_normal(std::mt19937_64& rng) {
  std::uint64_t a = rng(), b = rng();
  const double u1 = (double(a >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  const double u2 = double(b >> 11) * (1.0 / 9007199254740992.0);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace detail

// One (1+1) EA iteration: mutate, evaluate, accept on strict improvement,
// grow radius on acceptance and shrink it on rejection.
inline void step(EvolutionState& state, const CostFunction& cost, const EvoConfig& cfg) {
  const size_t dof = state.parent.size();
  std::vector<double> descendant(dof);
  for (size_t i = 0; i < dof; ++i) {
    const double scale = cfg.scales.empty() ? 1.0 : cfg.scales[i];
    descendant[i] = state.parent[i] + state.radius * scale * detail::standard_normal(state.rng);
  }
  double c;
  try {
    c = cost(descendant);
  } catch (const std::exception&) {
    c = std::numeric_limits<double>::infinity();
  }
  if (std::isnan(c)) c = std::numeric_limits<double>::infinity();

  const bool accepted = c < state.parent_cost;
  if (accepted) {
    state.parent = std::move(descendant);
    state.parent_cost = c;
    state.radius *= cfg.growth_factor;
  } else {
    state.radius *= cfg.shrink_factor;
  }
  ++state.iteration;
  state.trace.push_back({state.iteration, state.parent_cost, state.radius, accepted});
}

struct EvoResult {
  std::vector<double> best;
  double best_cost = 0.0;
  StopReason reason = StopReason::MaxIterations;
  std::vector<TracePoint> trace;
};

inline EvoResult run(const std::vector<double>& initial, const CostFunction& cost,
                     const EvoConfig& cfg) {
  cfg.validate(initial.size());
  EvolutionState state;
  state.parent = initial;
  state.radius = cfg.initial_radius;
  state.rng.seed(cfg.seed);

  double c0;
  try {
    c0 = cost(initial);
  } catch (const std::exception&) {
    throw InvalidStart();
  }
  if (!std::isfinite(c0)) throw InvalidStart();
  state.parent_cost = c0;

  StopReason reason = StopReason::MaxIterations;
  while (state.iteration < cfg.max_iterations) {
    step(state, cost, cfg);
    if (state.radius < cfg.epsilon) {
      reason = StopReason::RadiusBelowEpsilon;
      break;
    }
  }
  return {std::move(state.parent), state.parent_cost, reason, std::move(state.trace)};
}

inline std::string trace_csv(const std::vector<TracePoint>& trace) {
  std::string out = "iteration,cost,radius\n";
  char line[96];
  for (const TracePoint& t : trace) {
    std::snprintf(line, sizeof(line), "%d,%.17g,%.17g\n", t.iteration, t.cost, t.radius);
    out += line;
  }
  return out;
}

}  // namespace vtalign
