#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "errors.hpp"
#include "interaction.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace fda {

/// Fixed-capacity ring of consecutive flock snapshots. The newest entry is
/// the current step; capacity is lag + 1.
class HistoryBuffer {
 public:
  explicit HistoryBuffer(std::int64_t lag)
      : capacity_(static_cast<std::size_t>(lag) + 1) {
    if (lag < 0) throw ValidationError("lag", "must be >= 0");
    ring_.reserve(capacity_);
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return ring_.size(); }
  bool empty() const { return ring_.empty(); }

  void push(FlockState s) {
    if (ring_.size() < capacity_) {
      ring_.push_back(std::move(s));
    } else {
      ring_[head_] = std::move(s);
      head_ = (head_ + 1) % capacity_;
    }
  }

  /// k = 0 is the newest snapshot; k = size()-1 the oldest.
  const FlockState& back(std::size_t k) const {
    const std::size_t oldest_to_k = ring_.size() - 1 - k;
    return ring_[(head_ + oldest_to_k) % ring_.size()];
  }

  const FlockState& newest() const { return back(0); }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // index of the oldest entry once full
  std::vector<FlockState> ring_;
};

/// Snapshot lag_steps behind the newest. During warm-up (not enough history)
/// the oldest available snapshot is returned.
inline const FlockState& delayed_state(const HistoryBuffer& buffer,
                                       std::int64_t lag_steps) {
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(lag_steps),
                                       buffer.size() - 1);
  return buffer.back(k);
}

struct NoiseSigmas {
  double p = 0.0;
  double v = 0.0;
  double u = 0.0;
};

/// Sinusoidal noise intensities sigma(t) = base + amp * sin(omega t + phase).
struct NoiseSchedule {
  double base_p = 0.5, amp_p = 0.10, phase_p = 0.0;
  double base_v = 0.2, amp_v = 0.05, phase_v = std::numbers::pi / 4;
  double base_u = 0.1, amp_u = 0.02, phase_u = std::numbers::pi / 2;
  double omega = 5.0;

  static NoiseSchedule zero() {
    return {0, 0, 0, 0, 0, 0, 0, 0, 0, 0};
  }
};

inline NoiseSigmas sigma_at(const NoiseSchedule& s, double t) {
  return {s.base_p + s.amp_p * std::sin(s.omega * t + s.phase_p),
          s.base_v + s.amp_v * std::sin(s.omega * t + s.phase_v),
          s.base_u + s.amp_u * std::sin(s.omega * t + s.phase_u)};
}

/// Rejects schedules whose sigma could go negative. base >= |amp| bounds
/// sigma from below over any horizon.
inline void validate(const NoiseSchedule& s) {
  auto check = [](const char* field, double base, double amp) {
    if (!std::isfinite(base) || !std::isfinite(amp))
      throw ValidationError(field, "must be finite");
    if (base - std::abs(amp) < 0)
      throw ValidationError(field, "base must be >= |amplitude| so sigma(t) >= 0");
  };
  check("noise.sigma_p", s.base_p, s.amp_p);
  check("noise.sigma_v", s.base_v, s.amp_v);
  check("noise.sigma_u", s.base_u, s.amp_u);
  if (!std::isfinite(s.omega) || !std::isfinite(s.phase_p) ||
      !std::isfinite(s.phase_v) || !std::isfinite(s.phase_u))
    throw ValidationError("noise.omega", "must be finite");
}

enum class NoiseChannel : std::uint64_t { kPosition = 0, kVelocity = 1, kControl = 2 };

/// Pairwise sensing noise n_{c,ij}. Every (step, observer, neighbor, channel)
/// tuple gets its own keyed stream, so draws do not depend on evaluation
/// order.
class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t run_seed)
      : key_(derive_seed(run_seed, {static_cast<std::uint64_t>(Stream::kNoise)})) {}

  VecM draw(std::int64_t step, int observer, int neighbor, NoiseChannel c,
            double sigma, int m) const {
    SplitMix64 gen(derive_seed(key_, {static_cast<std::uint64_t>(step),
                                      static_cast<std::uint64_t>(observer),
                                      static_cast<std::uint64_t>(neighbor),
                                      static_cast<std::uint64_t>(c)}));
    std::normal_distribution<double> normal(0.0, 1.0);
    VecM out(m);
    for (int k = 0; k < m; ++k) out[k] = sigma * normal(gen);
    return out;
  }

 private:
  std::uint64_t key_;
};

/// How agents see their neighbors.
struct Perturbation {
  bool enabled = false;  // false: exact, current neighbor states
  NoiseSchedule noise;
  std::int64_t lag = 0;
};

/// Views of agent i's neighbors at time t. The neighborhood itself is built
/// on true current positions by the caller; delay and noise affect only what
/// is seen of each member.
inline std::vector<PerceivedNeighbor> perceive(const HistoryBuffer& buffer, int i,
                                               const NeighborSet& nbrs, double t,
                                               const Perturbation& pert,
                                               const NoiseSource& noise) {
  std::vector<PerceivedNeighbor> out;
  out.reserve(nbrs.members.size());
  const FlockState& now = buffer.newest();
  if (!pert.enabled) {
    for (int j : nbrs.members) {
      const auto& a = now.agents[j];
      out.push_back({j, a.position, a.velocity, a.control});
    }
    return out;
  }

  const FlockState& past = delayed_state(buffer, pert.lag);
  const NoiseSigmas sig = sigma_at(pert.noise, t);
  const int m = static_cast<int>(now.agents[i].position.size());
  const auto step = now.step;
  auto corrupt = [&](VecM x, int j, NoiseChannel c, double sigma) {
    if (sigma > 0) x += noise.draw(step, i, j, c, sigma, m);
    return x;
  };
  for (int j : nbrs.members) {
    const auto& a = past.agents[j];
    out.push_back({j, corrupt(a.position, j, NoiseChannel::kPosition, sig.p),
                   corrupt(a.velocity, j, NoiseChannel::kVelocity, sig.v),
                   corrupt(a.control, j, NoiseChannel::kControl, sig.u)});
  }
  return out;
}

}  // namespace fda
