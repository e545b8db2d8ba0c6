#pragma once

#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "controller.hpp"
#include "errors.hpp"
#include "interaction.hpp"
#include "metrics.hpp"
#include "perception.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace fda {

struct InitSpec {
  double pos_low = 0.0;
  double pos_high = 10.0;
  double vel_std = 1.0;
};

/// Everything needed to reproduce one run.
struct ScenarioConfig {
  FlockParams params;
  bool perturbed = false;
  NoiseSchedule noise;
  InitSpec init;
  std::uint64_t seed = 1;
  int record_every = 1;
  IsolatedPolicy gamma_isolated = IsolatedPolicy::kExclude;
};

inline void validate(const ScenarioConfig& c) {
  validate(c.params);
  if (c.perturbed) validate(c.noise);
  if (!(c.init.pos_low < c.init.pos_high))
    throw ValidationError("init.pos_low", "must be < init.pos_high");
  if (!std::isfinite(c.init.pos_low) || !std::isfinite(c.init.pos_high))
    throw ValidationError("init.pos_low", "bounds must be finite");
  if (!(c.init.vel_std >= 0) || !std::isfinite(c.init.vel_std))
    throw ValidationError("init.vel_std", "must be finite and >= 0");
  if (c.record_every < 1) throw ValidationError("run.record_every", "must be >= 1");
}

inline Perturbation perturbation_of(const ScenarioConfig& c) {
  if (!c.perturbed) return {};
  return {true, c.noise, lag_steps(c.params)};
}

class InitializationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uniform positions in [pos_low, pos_high)^m and Gaussian velocities scaled by
/// vel_std then saturated. Configurations with a pair closer than the distance
/// floor are redrawn.
inline FlockState initialize(const ScenarioConfig& c) {
  const auto& p = c.params;
  SplitMix64 gen(derive_seed(c.seed, {static_cast<std::uint64_t>(Stream::kInit)}));
  std::uniform_real_distribution<double> uniform(c.init.pos_low, c.init.pos_high);
  std::normal_distribution<double> normal(0.0, 1.0);
  constexpr int kMaxAttempts = 1000;

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    FlockState s;
    s.agents.resize(p.n);
    for (auto& a : s.agents) {
      a.position.resize(p.m);
      for (int k = 0; k < p.m; ++k) a.position[k] = uniform(gen);
    }
    for (auto& a : s.agents) {
      VecM v(p.m);
      for (int k = 0; k < p.m; ++k) v[k] = c.init.vel_std * normal(gen);
      a.velocity = saturate(v, p.v_max);
      a.control = VecM::Zero(p.m);
    }
    const auto pos = positions_of(s);
    if (p.n < 2 || distance_stats(pos).min > kDistanceFloor) return s;
  }
  throw InitializationError("could not draw a collision-free initial configuration");
}

/// Advances the flock one step. All controls are evaluated on the same
/// snapshot, then velocities then positions are updated (semi-implicit Euler)
/// and the new snapshot is pushed onto the buffer.
inline const FlockState& step(HistoryBuffer& buffer, const ScenarioConfig& c,
                              const NoiseSource& noise) {
  const auto& p = c.params;
  const FlockState& now = buffer.newest();
  const Perturbation pert = perturbation_of(c);
  const auto pos = positions_of(now);
  const int n = now.size();

  std::vector<VecM> u(n);
  for (int i = 0; i < n; ++i) {
    const NeighborSet nbrs = neighbors(pos, i, p.r);
    const auto views = perceive(buffer, i, nbrs, now.time, pert, noise);
    try {
      u[i] = control(now.agents[i], views, p).applied;
    } catch (const DegeneracyError& e) {
      throw DegeneracyError(now.step, i, e.neighbor(), e.distance());
    }
  }

  FlockState next;
  next.step = now.step + 1;
  next.time = static_cast<double>(next.step) * p.dt;
  next.agents.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto& a = now.agents[i];
    auto& b = next.agents[i];
    b.velocity = saturate(a.velocity + p.dt * u[i], p.v_max);
    b.position = a.position + p.dt * b.velocity;
    b.control = std::move(u[i]);
  }
  buffer.push(std::move(next));
  return buffer.newest();
}

struct RunSummary {
  double final_gamma = 0.0;
  double S = 0.0;
  double min_distance = std::numeric_limits<double>::infinity();
  double time_to_gamma90 = std::numeric_limits<double>::infinity();
  int final_components = 1;
  int max_components = 1;
  int max_isolated = 0;
  std::int64_t steps_completed = 0;
  double wall_time_s = 0.0;
};

struct RunFailure {
  std::int64_t step = 0;
  int agent = -1;
  int neighbor = -1;
  double distance = 0.0;
  std::string message;
};

struct RunRecord {
  ScenarioConfig config;
  std::vector<FlockState> states;      // at record_every cadence, if kept
  std::vector<MetricsSample> samples;  // at record_every cadence
  std::optional<FlockState> final_state;
  RunSummary summary;
  std::optional<RunFailure> failure;  // set when the run stopped early

  bool ok() const { return !failure.has_value(); }
};

inline constexpr double kAlignedThreshold = 0.9;

/// Metrics of one snapshot; S_cum is filled by the caller.
inline MetricsSample measure(const FlockState& s, const FlockParams& p,
                             IsolatedPolicy policy) {
  const auto pos = positions_of(s);
  const auto sets = all_neighbors(pos, p.r);
  MetricsSample m;
  m.t = s.time;
  m.gamma = alignment_gamma(s.agents, sets, policy);
  const auto d = distance_stats(pos);
  m.d_min = d.min;
  m.d_mean = d.mean;
  m.d_max = d.max;
  m.centroid = centroid(pos);
  m.components = interaction_components(pos, p.r);
  for (const auto& ns : sets) m.isolated += ns.empty() ? 1 : 0;
  return m;
}

/// Runs T/dt steps from the given initial state. Metrics are evaluated every
/// step on true states (S and the summary use full resolution) and recorded
/// every record_every steps. A degeneracy stops the run and is reported in
/// RunRecord::failure with everything recorded so far. keep_states=false
/// drops the per-sample snapshots (metrics are still recorded).
inline RunRecord run_from(const ScenarioConfig& c, FlockState initial,
                          bool keep_states = true) {
  validate(c);
  if (initial.size() != c.params.n)
    throw ValidationError("initial", "agent count does not match model.n");
  for (const auto& a : initial.agents)
    if (a.position.size() != c.params.m || a.velocity.size() != c.params.m ||
        a.control.size() != c.params.m)
      throw ValidationError("initial", "agent state dimension does not match model.m");
  const auto t0 = std::chrono::steady_clock::now();
  const auto& p = c.params;
  RunRecord rec;
  rec.config = c;

  HistoryBuffer buffer(c.perturbed ? lag_steps(p) : 0);
  const NoiseSource noise(c.seed);
  buffer.push(std::move(initial));

  RunSummary& sum = rec.summary;
  auto observe = [&](const FlockState& s, MetricsSample m) {
    sum.final_gamma = m.gamma;
    sum.S = m.S_cum;
    sum.min_distance = std::min(sum.min_distance, m.d_min);
    if (m.gamma >= kAlignedThreshold && !std::isfinite(sum.time_to_gamma90))
      sum.time_to_gamma90 = m.t;
    sum.final_components = m.components;
    sum.max_components = std::max(sum.max_components, m.components);
    sum.max_isolated = std::max(sum.max_isolated, m.isolated);
    sum.steps_completed = s.step;
    if (s.step % c.record_every == 0) {
      if (keep_states) rec.states.push_back(s);
      rec.samples.push_back(std::move(m));
    }
  };

  MetricsSample prev = measure(buffer.newest(), p, c.gamma_isolated);
  observe(buffer.newest(), prev);
  const auto steps = total_steps(p);
  try {
    for (std::int64_t k = 0; k < steps; ++k) {
      const FlockState& s = step(buffer, c, noise);
      MetricsSample m = measure(s, p, c.gamma_isolated);
      m.S_cum = prev.S_cum + (m.centroid - prev.centroid).norm();
      prev = m;
      observe(s, std::move(m));
    }
  } catch (const DegeneracyError& e) {
    rec.failure = RunFailure{e.step(), e.agent(), e.neighbor(), e.distance(), e.what()};
  }
  rec.final_state = buffer.newest();
  sum.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

/// Runs T/dt steps from a fresh seeded initialization.
inline RunRecord run(const ScenarioConfig& c, bool keep_states = true) {
  validate(c);
  return run_from(c, initialize(c), keep_states);
}

}  // namespace fda
