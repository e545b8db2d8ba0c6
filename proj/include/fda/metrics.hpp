#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "interaction.hpp"
#include "types.hpp"
#include "vec.hpp"

namespace fda {

struct MetricsSample {
  double t = 0.0;
  double gamma = 0.0;
  double d_min = 0.0;
  double d_mean = 0.0;
  double d_max = 0.0;
  VecM centroid;
  double S_cum = 0.0;
  int components = 1;
  int isolated = 0;  // agents with an empty neighborhood (not in the CSV)
};

/// How agents with no neighbors enter the flock-average alignment.
enum class IsolatedPolicy { kExclude, kZero };

/// Directed alignment: per-agent mean cosine similarity with its neighbors,
/// then averaged across agents.
inline double alignment_gamma(std::span<const AgentState> states,
                              std::span<const NeighborSet> neighbor_sets,
                              IsolatedPolicy policy = IsolatedPolicy::kExclude) {
  double total = 0.0;
  int counted = 0;
  for (const auto& ns : neighbor_sets) {
    if (ns.empty()) {
      if (policy == IsolatedPolicy::kZero) ++counted;
      continue;
    }
    double inner = 0.0;
    for (int j : ns.members)
      inner += cosine_similarity(states[ns.owner].velocity, states[j].velocity);
    total += inner / ns.size();
    ++counted;
  }
  return counted == 0 ? 0.0 : total / counted;
}

struct DistanceStats {
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
};

/// Min / mean / max over all unordered pairs.
inline DistanceStats distance_stats(std::span<const VecM> positions) {
  const auto n = positions.size();
  if (n < 2) return {};
  DistanceStats s{std::numeric_limits<double>::infinity(), 0.0, 0.0};
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = (positions[i] - positions[j]).norm();
      s.min = std::min(s.min, d);
      s.max = std::max(s.max, d);
      sum += d;
      ++pairs;
    }
  }
  s.mean = sum / static_cast<double>(pairs);
  return s;
}

inline VecM centroid(std::span<const VecM> positions) {
  VecM c = VecM::Zero(positions.front().size());
  for (const auto& p : positions) c += p;
  return c / static_cast<double>(positions.size());
}

/// Arc length of a centroid polyline.
inline double centroid_path_length(std::span<const VecM> series) {
  double s = 0.0;
  for (std::size_t k = 1; k < series.size(); ++k)
    s += (series[k] - series[k - 1]).norm();
  return s;
}

/// Connected components of the r-ball graph.
inline int interaction_components(std::span<const VecM> positions, double r) {
  const int n = static_cast<int>(positions.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  int components = n;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if ((positions[i] - positions[j]).norm() > r) continue;
      const int a = find(i), b = find(j);
      if (a != b) {
        parent[a] = b;
        --components;
      }
    }
  }
  return components;
}

}  // namespace fda
