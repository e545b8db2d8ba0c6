#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "vec.hpp"

namespace fda {

enum class Model { kReactive, kFda };

inline std::string_view to_string(Model m) {
  return m == Model::kReactive ? "reactive" : "fda";
}

inline Model parse_model(std::string_view s) {
  if (s == "reactive") return Model::kReactive;
  if (s == "fda") return Model::kFda;
  throw ValidationError("model", "expected 'reactive' or 'fda', got '" +
                                     std::string(s) + "'");
}

struct AgentState {
  VecM position;
  VecM velocity;
  VecM control;  // last applied (saturated) control
};

/// Model constants shared by every agent of the flock.
struct FlockParams {
  int n = 10;
  int m = 3;
  double dt = 0.02;
  double T = 25.0;
  double r = 7.5;
  double delta = 1.0;
  double theta = 0.8;
  double t_ph = 1.0;
  double tau = 0.4;
  double v_max = 4.0;
  double u_max = 8.0;
  Model model = Model::kFda;
};

namespace detail {

// Whole number of dt in x, or -1 if x is not (numerically) a multiple of dt.
inline std::int64_t steps_in(double x, double dt) {
  const double q = x / dt;
  const double k = std::round(q);
  if (std::abs(q - k) > 1e-9 * std::max(1.0, std::abs(q))) return -1;
  return static_cast<std::int64_t>(k);
}

}  // namespace detail

/// Delay expressed in integration steps.
inline std::int64_t lag_steps(const FlockParams& p) {
  return detail::steps_in(p.tau, p.dt);
}

inline std::int64_t total_steps(const FlockParams& p) {
  return detail::steps_in(p.T, p.dt);
}

inline void validate(const FlockParams& p) {
  auto finite = [](const char* f, double x) {
    if (!std::isfinite(x)) throw ValidationError(f, "must be finite");
  };
  finite("dt", p.dt); finite("T", p.T); finite("r", p.r);
  finite("delta", p.delta); finite("theta", p.theta); finite("t_ph", p.t_ph);
  finite("tau", p.tau); finite("v_max", p.v_max); finite("u_max", p.u_max);
  if (p.n < 2) throw ValidationError("n", "must be >= 2");
  if (p.m < 1) throw ValidationError("m", "must be >= 1");
  if (!(p.dt > 0)) throw ValidationError("dt", "must be > 0");
  if (!(p.T >= 0)) throw ValidationError("T", "must be >= 0");
  if (!(p.r > 0)) throw ValidationError("r", "must be > 0");
  if (!(p.delta >= 0)) throw ValidationError("delta", "must be >= 0");
  if (!(p.theta >= 0 && p.theta <= 1))
    throw ValidationError("theta", "must lie in [0,1]");
  if (!(p.t_ph >= 0)) throw ValidationError("t_ph", "must be >= 0");
  if (!(p.tau >= 0)) throw ValidationError("tau", "must be >= 0");
  if (!(p.v_max > 0)) throw ValidationError("v_max", "must be > 0");
  if (!(p.u_max > 0)) throw ValidationError("u_max", "must be > 0");
  if (lag_steps(p) < 0)
    throw ValidationError("tau", "must be an integer multiple of dt");
  if (total_steps(p) < 0)
    throw ValidationError("T", "must be an integer multiple of dt");
}

struct FlockState {
  double time = 0.0;
  std::int64_t step = 0;
  std::vector<AgentState> agents;

  int size() const { return static_cast<int>(agents.size()); }
};

inline std::vector<VecM> positions_of(const FlockState& s) {
  std::vector<VecM> out;
  out.reserve(s.agents.size());
  for (const auto& a : s.agents) out.push_back(a.position);
  return out;
}

}  // namespace fda

namespace fda {

/// A neighbor as seen by one observer: exact under nominal sensing, delayed
/// and noise-corrupted otherwise.
struct PerceivedNeighbor {
  int index = 0;
  VecM p;
  VecM v;
  VecM u;
};

}  // namespace fda
