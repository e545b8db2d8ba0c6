#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include <fda/controller.hpp>

#include "test_util.hpp"

namespace fda {
namespace {

using testing::random_vec;
using testing::vec;

// tanh via expm1, independent of std::tanh.
double reference_tanh(double x) {
  const long double e = std::expm1(2.0L * x);
  return static_cast<double>(e / (e + 2.0L));
}

// Saturation written out from the formula with the reference tanh.
VecM reference_saturate(const VecM& x, double x_max) {
  const double n = std::sqrt(x.squaredNorm());
  if (n == 0.0) return VecM::Zero(x.size());
  return x_max * reference_tanh(n / x_max) * x / n;
}

AgentState agent(VecM p, VecM v, VecM u) { return {std::move(p), std::move(v), std::move(u)}; }

TEST(Saturate, ZeroMapsToZero) {
  EXPECT_EQ(saturate(vec({0, 0, 0}), 4.0), vec({0, 0, 0}));
  EXPECT_EQ(saturate(vec({0, 0, 0}), 1e-3), vec({0, 0, 0}));
}

TEST(Saturate, LargeInputApproachesBound) {
  const VecM y = saturate(vec({1000, 0, 0}), 4.0);
  EXPECT_NEAR(y.norm(), 4.0, 1e-9);
  EXPECT_LT(y.norm(), 4.0);
  EXPECT_EQ(y[1], 0.0);
  EXPECT_EQ(y[2], 0.0);
}

TEST(Saturate, AtScaleMatchesTanhOfOne) {
  const VecM y = saturate(vec({4, 0, 0}), 4.0);
  EXPECT_NEAR(y.norm(), 3.0463766238230596, 1e-14);  // 4 tanh(1), mpmath
  EXPECT_NEAR(y.norm(), 4.0 * reference_tanh(1.0), 1e-14);
}

TEST(Saturate, MatchesReferenceFormula) {
  std::mt19937_64 g(21);
  for (int i = 0; i < 5000; ++i) {
    const VecM x = random_vec(g, 3, 6.0);
    const VecM a = saturate(x, 4.0), b = reference_saturate(x, 4.0);
    EXPECT_LT((a - b).norm(), 1e-12);
  }
}

TEST(Saturate, StrictBoundAndDirection) {
  std::mt19937_64 g(22);
  std::uniform_real_distribution<double> logmag(-8, 12), xm(0.01, 50);
  for (int i = 0; i < 100000; ++i) {
    VecM x = random_vec(g, 3, 1.0);
    x *= std::pow(10.0, logmag(g)) / x.norm();
    const double x_max = xm(g);
    const VecM y = saturate(x, x_max);
    ASSERT_LT(y.norm(), x_max);
    ASSERT_GT(cosine_similarity(x, y), 1.0 - 1e-12);
  }
}

TEST(Saturate, MonotoneInMagnitude) {
  const VecM dir = vec({0.6, -0.8, 0.0});
  double prev = 0.0;
  for (double m = 0.01; m < 20.0; m *= 1.1) {
    const double out = saturate(m * dir, 4.0).norm();
    EXPECT_GT(out, prev);
    prev = out;
  }
}

TEST(PredictVelocity, Examples) {
  const VecM a = predict_velocity(vec({1, 0, 0}), vec({0, 0, 0}), 1.0, 4.0);
  EXPECT_NEAR(a[0], 0.97967464961483652, 1e-15);  // 4 tanh(1/4), mpmath
  EXPECT_EQ(a[1], 0.0);

  EXPECT_EQ(predict_velocity(vec({0, 0, 0}), vec({0, 0, 0}), 1.0, 4.0), vec({0, 0, 0}));

  const VecM c = predict_velocity(vec({1, 0, 0}), vec({0, 2, 0}), 1.0, 4.0);
  EXPECT_EQ(c, saturate(vec({1, 2, 0}), 4.0));
  EXPECT_NEAR(c[0], 0.90739230481155544, 1e-14);
  EXPECT_NEAR(c[1], 1.8147846096231109, 1e-14);
}

FlockParams params(double theta, double t_ph = 1.0) {
  FlockParams p;
  p.delta = 1.0;
  p.theta = theta;
  p.t_ph = t_ph;
  return p;
}

TEST(ReactiveControl, EquilibriumGivesZero) {
  const auto self = agent(vec({0, 0, 0}), vec({1, 0, 0}), vec({0, 0, 0}));
  const std::vector<PerceivedNeighbor> nb{{1, vec({1, 0, 0}), vec({1, 0, 0}), vec({0, 0, 0})}};
  const auto cmd = reactive_control(self, nb, params(0.0));
  EXPECT_EQ(cmd.raw, vec({0, 0, 0}));
  EXPECT_EQ(cmd.applied, vec({0, 0, 0}));
}

TEST(ReactiveControl, LoneAgentCoasts) {
  const auto self = agent(vec({0, 0, 0}), vec({1, 2, 3}), vec({0, 0, 0}));
  const auto cmd = reactive_control(self, {}, params(0.0));
  EXPECT_EQ(cmd.raw, vec({0, 0, 0}));
  EXPECT_EQ(cmd.applied, vec({0, 0, 0}));
}

TEST(ReactiveControl, AttractionBeyondEquilibrium) {
  const auto self = agent(vec({0, 0, 0}), vec({0, 0, 0}), vec({0, 0, 0}));
  const std::vector<PerceivedNeighbor> nb{{1, vec({2, 0, 0}), vec({0, 0, 0}), vec({0, 0, 0})}};
  const auto cmd = reactive_control(self, nb, params(0.0));
  EXPECT_EQ(cmd.raw, vec({1, 0, 0}));
  EXPECT_EQ(cmd.applied, saturate(vec({1, 0, 0}), 8.0));
}

TEST(ReactiveControl, NearCoincidentNeighborIsDegenerate) {
  const auto self = agent(vec({0, 0, 0}), vec({0, 0, 0}), vec({0, 0, 0}));
  const std::vector<PerceivedNeighbor> nb{{3, vec({1e-7, 0, 0}), vec({0, 0, 0}), vec({0, 0, 0})}};
  try {
    reactive_control(self, nb, params(0.0));
    FAIL() << "expected DegeneracyError";
  } catch (const DegeneracyError& e) {
    EXPECT_EQ(e.neighbor(), 3);
  }
}

std::vector<PerceivedNeighbor> random_views(std::mt19937_64& g, int k) {
  std::vector<PerceivedNeighbor> out;
  for (int j = 0; j < k; ++j)
    out.push_back({j + 1, random_vec(g, 3, 3.0), random_vec(g, 3, 2.0), random_vec(g, 3, 4.0)});
  return out;
}

TEST(FdaControl, ThetaZeroIsBitIdenticalToReactive) {
  std::mt19937_64 g(31);
  for (int i = 0; i < 2000; ++i) {
    const auto self = agent(random_vec(g, 3, 3.0), random_vec(g, 3, 2.0), random_vec(g, 3, 1.0));
    const auto views = random_views(g, 1 + i % 6);
    const auto a = fda_control(self, views, params(0.0));
    const auto b = reactive_control(self, views, params(0.0));
    for (int k = 0; k < 3; ++k) {
      ASSERT_EQ(std::signbit(a.raw[k]), std::signbit(b.raw[k]));
      ASSERT_EQ(a.raw[k], b.raw[k]);
      ASSERT_EQ(a.applied[k], b.applied[k]);
    }
  }
}

TEST(FdaControl, ThetaOneWithZeroControlsSaturatesNeighborVelocities) {
  const auto self = agent(vec({0, 0, 0}), vec({0.5, 0, 0}), vec({0, 0, 0}));
  const std::vector<PerceivedNeighbor> nb{{1, vec({1, 0, 0}), vec({3, 1, 0}), vec({0, 0, 0})}};
  const auto cmd = fda_control(self, nb, params(1.0));
  const VecM expected = saturate(vec({3, 1, 0}), 4.0) - vec({0.5, 0, 0});
  EXPECT_LT((cmd.raw - expected).norm(), 1e-15);
  EXPECT_NE(cmd.raw, reactive_control(self, nb, params(0.0)).raw);
}

TEST(FdaControl, PredictiveAlignmentExample) {
  const auto self = agent(vec({0, 0, 0}), vec({1, 0, 0}), vec({0, 0, 0}));
  const std::vector<PerceivedNeighbor> nb{{1, vec({1, 0, 0}), vec({1, 0, 0}), vec({0, 1, 0})}};
  const auto cmd = fda_control(self, nb, params(0.8, 1.0));
  // 0.8 * (saturate((1,1,0), 4) - (1,0,0)), evaluated with mpmath
  EXPECT_NEAR(cmd.raw[0], -0.031746926632872367, 1e-15);
  EXPECT_NEAR(cmd.raw[1], 0.76825307336712768, 1e-15);
  EXPECT_EQ(cmd.raw[2], 0.0);
}

TEST(FdaControl, RawIsAffineInTheta) {
  std::mt19937_64 g(41);
  for (int i = 0; i < 500; ++i) {
    const auto self = agent(random_vec(g, 3, 3.0), random_vec(g, 3, 2.0), random_vec(g, 3, 1.0));
    const auto views = random_views(g, 1 + i % 5);
    const VecM r0 = fda_control(self, views, params(0.0)).raw;
    const VecM r1 = fda_control(self, views, params(1.0)).raw;
    for (double th : {0.2, 0.5, 0.8}) {
      const VecM rt = fda_control(self, views, params(th)).raw;
      EXPECT_LT((rt - ((1 - th) * r0 + th * r1)).norm(), 1e-10 * (1 + r0.norm() + r1.norm()));
    }
  }
}

TEST(FdaControl, CohesionIsNotBlended) {
  // Equal velocities and zero controls: only cohesion-separation acts, for
  // any theta, up to saturation of the neighbor velocity which is zero here.
  const auto self = agent(vec({0, 0, 0}), vec({0, 0, 0}), vec({0, 0, 0}));
  const std::vector<PerceivedNeighbor> nb{{1, vec({3, 0, 0}), vec({0, 0, 0}), vec({0, 0, 0})}};
  for (double th : {0.0, 0.3, 1.0})
    EXPECT_LT((fda_control(self, nb, params(th)).raw - vec({2, 0, 0})).norm(), 1e-15);
}

TEST(FdaControl, ZeroHorizonDoesNotReduceToReactive) {
  const auto self = agent(vec({0, 0, 0}), vec({0.2, 0, 0}), vec({0, 0, 0}));
  const std::vector<PerceivedNeighbor> nb{{1, vec({1.5, 0, 0}), vec({2, 1, 0}), vec({0, 3, 0})}};
  const auto fda = fda_control(self, nb, params(0.8, 0.0));
  const auto reactive = reactive_control(self, nb, params(0.8, 0.0));
  EXPECT_GT((fda.raw - reactive.raw).norm(), 1e-3);
}

TEST(ControlCommand, AppliedIsBoundedScalingOfRaw) {
  std::mt19937_64 g(51);
  for (int i = 0; i < 2000; ++i) {
    const auto self = agent(random_vec(g, 3, 3.0), random_vec(g, 3, 2.0), random_vec(g, 3, 1.0));
    const auto views = random_views(g, 1 + i % 6);
    const auto cmd = fda_control(self, views, params(0.8));
    EXPECT_LT(cmd.applied.norm(), 8.0);
    if (cmd.raw.norm() > 0) { EXPECT_GT(cosine_similarity(cmd.raw, cmd.applied), 1 - 1e-12); }
    EXPECT_LE(cmd.applied.norm(), cmd.raw.norm() + 1e-12);
  }
}

}  // namespace
}  // namespace fda
