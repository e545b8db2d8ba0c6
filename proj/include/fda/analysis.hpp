#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <complex>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "errors.hpp"
#include "metrics.hpp"
#include "vec.hpp"

namespace fda {

struct GraphMatrices {
  Eigen::MatrixXd adjacency;
  Eigen::MatrixXd laplacian;

  int size() const { return static_cast<int>(adjacency.rows()); }
};

inline GraphMatrices graph_from_adjacency(Eigen::MatrixXd a) {
  Eigen::MatrixXd l = -a;
  l.diagonal() = a.rowwise().sum();
  return {std::move(a), std::move(l)};
}

/// r-ball interaction graph of a frozen configuration.
inline GraphMatrices build_graph(std::span<const VecM> positions, double r) {
  const auto n = static_cast<Eigen::Index>(positions.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if ((positions[i] - positions[j]).norm() <= r) a(i, j) = a(j, i) = 1.0;
  return graph_from_adjacency(std::move(a));
}

/// Connected components of a graph given by its adjacency matrix.
inline int component_count(const GraphMatrices& g) {
  const int n = g.size();
  std::vector<int> label(n, -1);
  int count = 0;
  for (int s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    std::vector<int> stack{s};
    label[s] = count;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w = 0; w < n; ++w)
        if (g.adjacency(v, w) != 0.0 && label[w] < 0) {
          label[w] = count;
          stack.push_back(w);
        }
    }
    ++count;
  }
  return count;
}

/// Sign inside the preconditioner. kPlus is (I + c A)^{-1}; kMinus is
/// (I - c A)^{-1}, which is what substituting u_j ~ dv_j/dt into the blended
/// alignment law and solving for dv/dt yields.
enum class PreconditionerForm { kPlus, kMinus };

struct OperatorOptions {
  double theta = 0.0;
  double t_ph = 1.0;
  double phi = 1.0;              // scalar alignment weight
  bool per_agent_phi = false;    // use phi_i = 1/deg_i instead of the scalar
  PreconditionerForm form = PreconditionerForm::kPlus;
};

struct ReducedOperator {
  Eigen::MatrixXd matrix;
  double margin = 0.0;     // smallest singular value of the preconditioner
  double condition = 1.0;  // its 2-norm condition number
};

inline constexpr double kSingularRcond = 1e-12;

/// Diagonal alignment weights: the scalar phi, or 1/deg_i per agent.
inline Eigen::MatrixXd alignment_weights(const GraphMatrices& g, const OperatorOptions& o) {
  const int n = g.size();
  Eigen::MatrixXd weights = Eigen::MatrixXd::Identity(n, n) * o.phi;
  if (o.per_agent_phi) {
    for (int i = 0; i < n; ++i) {
      const double deg = g.laplacian(i, i);
      weights(i, i) = deg > 0 ? 1.0 / deg : 0.0;
    }
  }
  return weights;
}

/// Preconditioner P such that the operator is -Phi * P^{-1} * L.
inline Eigen::MatrixXd preconditioner(const GraphMatrices& g, const OperatorOptions& o) {
  const int n = g.size();
  const double sign = o.form == PreconditionerForm::kPlus ? 1.0 : -1.0;
  const Eigen::MatrixXd weights = alignment_weights(g, o);
  return Eigen::MatrixXd::Identity(n, n) + sign * o.theta * o.t_ph * weights * g.adjacency;
}

/// n x n reduction of the linearized consensus operator. The m-dimensional
/// operator is this matrix Kronecker the m x m identity, so its spectrum is
/// this spectrum repeated m times.
inline ReducedOperator reduced_operator(const GraphMatrices& g, const OperatorOptions& o) {
  const Eigen::MatrixXd weights = alignment_weights(g, o);
  const Eigen::MatrixXd pre = preconditioner(g, o);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(pre);
  const auto& sv = svd.singularValues();
  const double smax = sv.maxCoeff();
  const double smin = sv.minCoeff();
  const double condition = smin > 0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(smin > kSingularRcond * smax)) throw SingularPreconditionerError(condition);

  ReducedOperator out;
  if (o.theta == 0.0) {
    out.matrix = -weights * g.laplacian;
  } else {
    out.matrix = -weights * pre.partialPivLu().solve(g.laplacian);
  }
  out.margin = smin;
  out.condition = condition;
  return out;
}

struct SpectralReport {
  std::vector<std::complex<double>> eigenvalues;  // sorted by descending real part
  int zero_modes = 0;
  int components = 1;
  double slowest_decay = 0.0;  // max Re(lambda) over nonzero modes
  double margin = 0.0;
  double condition = 1.0;
  bool trivially_marginal = false;  // no edges at all
  bool zero_modes_match_components = false;
  bool stable = false;
};

inline constexpr double kZeroModeTol = 1e-9;

class EigensolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Spectrum and stability of a reduced operator. Zero modes are eigenvalues
/// with |lambda| below kZeroModeTol times the largest |lambda|. The operator
/// is stable when the graph is connected, there is exactly one zero mode and
/// every other eigenvalue has negative real part.
inline SpectralReport spectral_report(const Eigen::MatrixXd& m, int components) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw EigensolverError("eigensolver did not converge");

  SpectralReport rep;
  rep.components = components;
  const auto& ev = es.eigenvalues();
  rep.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  for (const auto& l : rep.eigenvalues)
    if (!std::isfinite(l.real()) || !std::isfinite(l.imag()))
      throw EigensolverError("eigensolver produced non-finite eigenvalues");
  std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end(),
            [](auto a, auto b) {
              return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
            });

  double scale = 0.0;
  for (const auto& l : rep.eigenvalues) scale = std::max(scale, std::abs(l));
  const double tol = kZeroModeTol * scale;
  rep.trivially_marginal = scale == 0.0;

  bool others_negative = true;
  bool any_nonzero = false;
  double slowest = -std::numeric_limits<double>::infinity();
  for (const auto& l : rep.eigenvalues) {
    if (std::abs(l) <= tol) {
      ++rep.zero_modes;
      continue;
    }
    any_nonzero = true;
    slowest = std::max(slowest, l.real());
    if (!(l.real() < 0.0)) others_negative = false;
  }
  rep.slowest_decay = any_nonzero ? slowest : 0.0;
  rep.zero_modes_match_components = rep.zero_modes == components;
  rep.stable = !rep.trivially_marginal && components == 1 && rep.zero_modes == 1 &&
               others_negative;
  return rep;
}

/// Builds the operator and reports on it in one call.
inline SpectralReport analyze(const GraphMatrices& g, const OperatorOptions& o) {
  const auto op = reduced_operator(g, o);
  auto rep = spectral_report(op.matrix, component_count(g));
  rep.margin = op.margin;
  rep.condition = op.condition;
  return rep;
}

}  // namespace fda
