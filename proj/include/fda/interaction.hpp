#pragma once

#include <span>
#include <vector>

#include "errors.hpp"
#include "vec.hpp"

namespace fda {

/// Pairwise distances at or below this are treated as a collision.
inline constexpr double kDistanceFloor = 1e-6;

struct NeighborSet {
  int owner = 0;
  std::vector<int> members;

  int size() const { return static_cast<int>(members.size()); }
  bool empty() const { return members.empty(); }
};

/// Metric neighborhood of agent i: every other agent within the closed ball of
/// radius r.
inline NeighborSet neighbors(std::span<const VecM> positions, int i, double r) {
  NeighborSet out{i, {}};
  const auto n = static_cast<int>(positions.size());
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    if ((positions[j] - positions[i]).norm() <= r) out.members.push_back(j);
  }
  return out;
}

inline std::vector<NeighborSet> all_neighbors(std::span<const VecM> positions,
                                              double r) {
  std::vector<NeighborSet> out;
  out.reserve(positions.size());
  for (int i = 0; i < static_cast<int>(positions.size()); ++i)
    out.push_back(neighbors(positions, i, r));
  return out;
}

/// Cohesion-separation weight 1 - delta*k/d. Repulsive below the equilibrium
/// spacing delta*k, attractive above it.
inline double psi(double d, double delta, int k) {
  if (!(d > kDistanceFloor)) throw DegeneracyError(-1, -1, -1, d);
  return 1.0 - delta * static_cast<double>(k) / d;
}

/// Alignment weight 1/k. An empty neighborhood has no alignment term.
inline double phi(int k) {
  if (k < 1) throw ValidationError("k", "alignment weight needs a nonempty neighborhood");
  return 1.0 / static_cast<double>(k);
}

}  // namespace fda
