#pragma once

#include <cmath>
#include <limits>
#include <span>

#include "errors.hpp"
#include "interaction.hpp"
#include "types.hpp"
#include "vec.hpp"

namespace fda {

/// Smooth tanh magnitude limiter. Direction is kept, zero maps to zero and
/// the output norm stays strictly below x_max.
inline VecM saturate(const VecM& x_cmd, double x_max) {
  const double mag = x_cmd.norm();
  if (mag == 0.0) return VecM::Zero(x_cmd.size());
  VecM out = x_cmd * (x_max * std::tanh(mag / x_max) / mag);
  // tanh rounds to 1 for large arguments; pull the result back inside.
  constexpr double kShrink = 1.0 - std::numeric_limits<double>::epsilon();
  while (out.norm() >= x_max) out *= kShrink;
  return out;
}

/// Neighbor velocity extrapolated over the prediction horizon, saturated.
inline VecM predict_velocity(const VecM& v_j, const VecM& u_j, double t_ph,
                             double v_max) {
  return saturate(v_j + t_ph * u_j, v_max);
}

struct ControlCommand {
  VecM raw;
  VecM applied;
};

namespace detail {

// Cohesion-separation sum over perceived neighbors. psi uses the true
// neighborhood size k = views.size().
inline VecM cohesion_separation(const AgentState& self,
                                std::span<const PerceivedNeighbor> views,
                                double delta) {
  VecM acc = VecM::Zero(self.position.size());
  const int k = static_cast<int>(views.size());
  for (const auto& nb : views) {
    const VecM diff = nb.p - self.position;
    const double d = diff.norm();
    if (!(d > kDistanceFloor)) throw DegeneracyError(-1, -1, nb.index, d);
    acc += psi(d, delta, k) * diff;
  }
  return acc;
}

// Blended alignment. theta == 0 skips the predictive sum so the result is
// bit-identical to the reactive law.
inline VecM blended_alignment(const AgentState& self,
                              std::span<const PerceivedNeighbor> views,
                              double theta, double t_ph, double v_max) {
  const VecM& v_i = self.velocity;
  VecM current = VecM::Zero(v_i.size());
  for (const auto& nb : views) current += nb.v - v_i;
  const double w = phi(static_cast<int>(views.size()));
  if (theta == 0.0) return w * current;

  VecM predicted = VecM::Zero(v_i.size());
  for (const auto& nb : views)
    predicted += predict_velocity(nb.v, nb.u, t_ph, v_max) - v_i;
  return (1.0 - theta) * w * current + theta * w * predicted;
}

inline ControlCommand finish(VecM raw, double u_max) {
  VecM applied = saturate(raw, u_max);
  return {std::move(raw), std::move(applied)};
}

}  // namespace detail

/// Reactive law: cohesion-separation plus alignment with current neighbor
/// velocities. An agent without neighbors gets a zero command.
inline ControlCommand reactive_control(const AgentState& self,
                                       std::span<const PerceivedNeighbor> views,
                                       const FlockParams& params) {
  const auto m = self.position.size();
  if (views.empty()) return {VecM::Zero(m), VecM::Zero(m)};
  VecM raw = detail::cohesion_separation(self, views, params.delta);
  raw += detail::blended_alignment(self, views, 0.0, params.t_ph, params.v_max);
  return detail::finish(std::move(raw), params.u_max);
}

/// FDA law: the alignment term blends current neighbor velocities with their
/// predicted velocities by theta. Cohesion-separation is never blended.
inline ControlCommand fda_control(const AgentState& self,
                                  std::span<const PerceivedNeighbor> views,
                                  const FlockParams& params) {
  const auto m = self.position.size();
  if (views.empty()) return {VecM::Zero(m), VecM::Zero(m)};
  VecM raw = detail::cohesion_separation(self, views, params.delta);
  raw += detail::blended_alignment(self, views, params.theta, params.t_ph,
                                   params.v_max);
  return detail::finish(std::move(raw), params.u_max);
}

inline ControlCommand control(const AgentState& self,
                              std::span<const PerceivedNeighbor> views,
                              const FlockParams& params) {
  return params.model == Model::kReactive ? reactive_control(self, views, params)
                                          : fda_control(self, views, params);
}

}  // namespace fda
