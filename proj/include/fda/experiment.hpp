#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "analysis.hpp"
#include "format.hpp"
#include "rng.hpp"
#include "sim.hpp"

namespace fda {

/// Seed of the k-th replicate derived from a master seed. Depends only on
/// (master, k), so adding arms or replicates never changes existing ones.
inline std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t k) {
  return derive_seed(master, {static_cast<std::uint64_t>(Stream::kCell), k});
}

/// Runs every config on a bounded pool of worker threads. Results are in
/// input order. Non-degeneracy exceptions are turned into failed records.
inline std::vector<RunRecord> run_all(const std::vector<ScenarioConfig>& configs,
                                      int workers, bool keep_states = false) {
  std::vector<RunRecord> out(configs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < configs.size();) {
      try {
        out[i] = run(configs[i], keep_states);
      } catch (const std::exception& e) {
        out[i].config = configs[i];
        out[i].failure = RunFailure{0, -1, -1, 0.0, e.what()};
      }
    }
  };
  const auto n = static_cast<std::size_t>(std::max(1, workers));
  std::vector<std::jthread> pool;
  for (std::size_t w = 1; w < std::min(n, configs.size()); ++w) pool.emplace_back(work);
  work();
  return out;
}

/// Linear-interpolated quantile (q in [0,1]); infinities are ordered values.
inline double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) return std::nan("");
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  const double f = pos - static_cast<double>(lo);
  if (f == 0.0 || xs[lo] == xs[hi]) return xs[lo];
  return xs[lo] + f * (xs[hi] - xs[lo]);
}

inline double median(std::vector<double> xs) { return quantile(std::move(xs), 0.5); }

struct Spread {
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

inline Spread spread(const std::vector<double>& xs) {
  return {quantile(xs, 0.5), quantile(xs, 0.25), quantile(xs, 0.75)};
}

struct Arm {
  Model model;
  bool perturbed;

  std::string name() const {
    return std::string(to_string(model)) + (perturbed ? "/perturbed" : "/nominal");
  }
};

inline std::vector<Arm> comparison_arms() {
  return {{Model::kReactive, false}, {Model::kFda, false},
          {Model::kReactive, true}, {Model::kFda, true}};
}

struct ArmResult {
  Arm arm;
  std::vector<RunRecord> runs;  // one per replicate, seed order

  std::vector<double> collect(double RunSummary::*field) const {
    std::vector<double> xs;
    for (const auto& r : runs)
      if (r.ok()) xs.push_back(r.summary.*field);
    return xs;
  }
  int failures() const {
    return static_cast<int>(std::count_if(runs.begin(), runs.end(),
                                          [](const auto& r) { return !r.ok(); }));
  }
};

/// Reactive vs FDA, nominal vs perturbed, over the same K replicate seeds.
inline std::vector<ArmResult> compare(const ScenarioConfig& base, int replicates,
                                      int workers) {
  if (replicates < 1) throw ValidationError("seeds", "must be >= 1");
  const auto arms = comparison_arms();
  std::vector<ScenarioConfig> configs;
  for (const auto& arm : arms) {
    for (int k = 0; k < replicates; ++k) {
      ScenarioConfig c = base;
      c.params.model = arm.model;
      c.perturbed = arm.perturbed;
      c.seed = replicate_seed(base.seed, static_cast<std::uint64_t>(k));
      validate(c);
      configs.push_back(c);
    }
  }
  auto records = run_all(configs, workers);
  std::vector<ArmResult> out;
  for (std::size_t a = 0; a < arms.size(); ++a) {
    ArmResult r{arms[a], {}};
    for (int k = 0; k < replicates; ++k)
      r.runs.push_back(std::move(records[a * replicates + k]));
    out.push_back(std::move(r));
  }
  return out;
}

inline const std::vector<std::string>& sweepable_parameters() {
  static const std::vector<std::string> names{"theta", "t_ph", "tau", "r", "delta", "n"};
  return names;
}

/// Sets one sweepable parameter; rejects unknown names.
inline void set_parameter(ScenarioConfig& c, const std::string& name, double value) {
  auto& p = c.params;
  if (name == "theta") p.theta = value;
  else if (name == "t_ph") p.t_ph = value;
  else if (name == "tau") p.tau = value;
  else if (name == "r") p.r = value;
  else if (name == "delta") p.delta = value;
  else if (name == "n") {
    if (value != std::floor(value)) throw ValidationError("n", "must be an integer");
    p.n = static_cast<int>(value);
  } else {
    throw ValidationError("parameter", "'" + name +
                          "' is not sweepable (theta, t_ph, tau, r, delta, n)");
  }
}

struct SweepCell {
  std::string parameter;
  double value = 0.0;
  bool perturbed = false;
  int seed_index = 0;
  RunRecord record;
  std::string linear;  // stable | unstable | marginal | singular
  double slowest_decay = 0.0;
};

/// Linearized consensus stability of a frozen configuration, with the scalar
/// alignment weight 1/(mean degree).
inline std::pair<std::string, double> linear_stability(const FlockState& s,
                                                       const FlockParams& p) {
  const auto pos = positions_of(s);
  const auto g = build_graph(pos, p.r);
  const double mean_degree = g.laplacian.diagonal().mean();
  if (mean_degree == 0.0) return {"marginal", 0.0};
  OperatorOptions o;
  o.theta = p.theta;
  o.t_ph = p.t_ph;
  o.phi = 1.0 / mean_degree;
  try {
    const auto rep = analyze(g, o);
    if (rep.trivially_marginal) return {"marginal", 0.0};
    return {rep.stable ? "stable" : "unstable", rep.slowest_decay};
  } catch (const SingularPreconditionerError&) {
    return {"singular", std::nan("")};
  }
}

/// Grid of values x modes x replicates for one parameter.
inline std::vector<SweepCell> sweep(const ScenarioConfig& base, const std::string& parameter,
                                    const std::vector<double>& values,
                                    const std::vector<bool>& modes, int replicates,
                                    int workers) {
  if (values.empty()) throw ValidationError("values", "must not be empty");
  if (modes.empty()) throw ValidationError("mode", "at least one mode is required");
  if (replicates < 1) throw ValidationError("seeds", "must be >= 1");
  std::vector<SweepCell> cells;
  std::vector<ScenarioConfig> configs;
  for (bool perturbed : modes) {
    for (double v : values) {
      for (int k = 0; k < replicates; ++k) {
        ScenarioConfig c = base;
        set_parameter(c, parameter, v);
        c.perturbed = perturbed;
        c.seed = replicate_seed(base.seed, static_cast<std::uint64_t>(k));
        validate(c);
        configs.push_back(c);
        cells.push_back({parameter, v, perturbed, k, {}, "", 0.0});
      }
    }
  }
  auto records = run_all(configs, workers, /*keep_states=*/false);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    cells[i].record = std::move(records[i]);
    if (cells[i].record.final_state) {
      auto [lin, decay] = linear_stability(*cells[i].record.final_state,
                                           cells[i].record.config.params);
      cells[i].linear = lin;
      cells[i].slowest_decay = decay;
    } else {
      cells[i].linear = "n/a";
      cells[i].slowest_decay = std::nan("");
    }
  }
  return cells;
}

}  // namespace fda
