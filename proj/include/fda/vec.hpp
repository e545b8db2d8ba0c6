#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>

namespace fda {

/// A vector in the ambient space R^m. The dimension is a runtime quantity so
/// planar and spatial flocks share one code path.
using VecM = Eigen::VectorXd;

/// Speeds below this are treated as "no heading" by cosine_similarity.
inline constexpr double kMinHeadingSpeed = 1e-9;

inline double norm(const VecM& v) { return v.norm(); }

/// Cosine of the angle between a and b, or 0 when either has no heading.
inline double cosine_similarity(const VecM& a, const VecM& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na < kMinHeadingSpeed || nb < kMinHeadingSpeed) return 0.0;
  const double c = a.dot(b) / (na * nb);
  return std::clamp(c, -1.0, 1.0);
}

inline VecM zeros(int m) { return VecM::Zero(m); }

}  // namespace fda
