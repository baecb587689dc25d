#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "coriolis/rotframe.hpp"
#include "oracles.hpp"

using namespace coriolis;
using coriolis::testing::Point2;

namespace {

void expect_vec_near(const Vec3& a, const Vec3& b, double tol) {
  EXPECT_NEAR(a.x, b.x, tol);
  EXPECT_NEAR(a.y, b.y, tol);
  EXPECT_NEAR(a.z, b.z, tol);
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

TEST(FictitiousForces, CoriolisExamples) {
  EXPECT_EQ(coriolis_accel(RotatingFrame(1.0), {1, 0, 0}), (Vec3{0, -2, 0}));
  EXPECT_EQ(coriolis_accel(RotatingFrame(1.0), {0, 0, 0}), (Vec3{0, 0, 0}));
  expect_vec_near(coriolis_accel(RotatingFrame(2.0), {0, 0, 5}), {0, 0, 0}, 0.0);
}

TEST(FictitiousForces, CentrifugalExamples) {
  EXPECT_EQ(centrifugal_accel(RotatingFrame(2.0), {1, 0, 0}), (Vec3{4, 0, 0}));
  expect_vec_near(centrifugal_accel(RotatingFrame(2.0), {0, 0, 0}), {0, 0, 0}, 0.0);
  expect_vec_near(centrifugal_accel(RotatingFrame(2.0), {0, 0, 3}), {0, 0, 0}, 0.0);
}

TEST(FictitiousForces, EulerExamples) {
  expect_vec_near(euler_accel(RotatingFrame(1.0, 0.0), {3, -2, 0}), {0, 0, 0}, 0.0);
  expect_vec_near(euler_accel(RotatingFrame(0.0, 1.0), {1, 0, 0}), {0, -1, 0}, 0.0);
  expect_vec_near(euler_accel(RotatingFrame(0.0, 1.0), {0, 0, 4}), {0, 0, 0}, 0.0);
}

TEST(FictitiousForces, NonFiniteInputsRejected) {
  const RotatingFrame f(1.0);
  for (auto call : {+[](const RotatingFrame& fr) { coriolis_accel(fr, {kNaN, 0, 0}); },
                    +[](const RotatingFrame& fr) { centrifugal_accel(fr, {0, INFINITY, 0}); },
                    +[](const RotatingFrame& fr) { euler_accel(fr, {0, 0, kNaN}); }}) {
    try {
      call(f);
      FAIL() << "expected invalid-input";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::invalid_input);
    }
  }
  EXPECT_THROW((void)RotatingFrame(kNaN), Error);
}

TEST(RotatingFrameTest, NonAxialSpinRejected) {
  EXPECT_THROW(RotatingFrame(Vec3{0.1, 0, 1}, {}, 0.0), Error);
  EXPECT_THROW(RotatingFrame(Vec3{0, 0, 1}, Vec3{0, 1, 0}, 0.0), Error);
  EXPECT_NO_THROW(RotatingFrame(Vec3{0, 0, 1}, Vec3{0, 0, 0.5}, 0.0));
}

TEST(RotatingFrameTest, AngleAdvancesInClosedForm) {
  RotatingFrame f(0.7);
  for (int i = 0; i < 10000; ++i) f = f.advanced(1e-3);
  EXPECT_NEAR(f.theta(), 0.7 * 10.0, 1e-12 * 7.0);

  const RotatingFrame g = RotatingFrame(1.0, 2.0).advanced(0.5);
  EXPECT_DOUBLE_EQ(g.theta(), 0.5 + 0.5 * 2.0 * 0.25);
  EXPECT_DOUBLE_EQ(g.spin(), 2.0);
}

TEST(Friction, KineticOpposesVelocity) {
  const BodyState s{0, {}, {2, 0, 0}, 1.0};
  const FrictionParams p{0.3, 0.3, 9.81};
  const Vec3 f = surface_friction(s, p, {}, true);
  EXPECT_NEAR(f.x, -2.943, 1e-12);
  EXPECT_EQ(f.y, 0.0);
}

TEST(Friction, StaticBalancesLoadBelowThreshold) {
  const BodyState s{0, {}, {}, 1.0};
  const FrictionParams p{0.3, 0.3, 9.81};
  EXPECT_EQ(surface_friction(s, p, {1, 0, 0}, true), (Vec3{-1, 0, 0}));
}

TEST(Friction, StaticBreaksAwayAboveThreshold) {
  const BodyState s{0, {}, {}, 1.0};
  const FrictionParams p{0.3, 0.2, 9.81};
  const Vec3 f = surface_friction(s, p, {0, 5, 0}, true);
  EXPECT_NEAR(f.y, -0.2 * 9.81, 1e-12);
  EXPECT_EQ(f.x, 0.0);
}

TEST(Friction, OffSurfaceIsZero) {
  const BodyState s{0, {3, 0, 0}, {1, 1, 0}, 2.0};
  EXPECT_EQ(surface_friction(s, FrictionParams{1.0, 0.5}, {4, 0, 0}, false), (Vec3{}));
}

TEST(Friction, InvalidParamsRejected) {
  const BodyState s{};
  try {
    surface_friction(s, FrictionParams{0.2, 0.3}, {}, true);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_params);
  }
  EXPECT_THROW(surface_friction(s, FrictionParams{0.2, -0.1}, {}, true), Error);
}

TEST(NetForces, Examples) {
  const FrictionParams none{};
  ForceBreakdown zero = net_forces(BodyState{}, RotatingFrame(0.0), none, {}, true);
  EXPECT_EQ(zero.total(), (Vec3{}));

  ForceBreakdown c = net_forces(BodyState{0, {}, {1, 0, 0}, 2.0}, RotatingFrame(1.0), none, {}, true);
  EXPECT_EQ(c.coriolis, (Vec3{0, -4, 0}));
  EXPECT_EQ(c.centrifugal, (Vec3{}));
  EXPECT_EQ(c.friction, (Vec3{}));

  ForceBreakdown r = net_forces(BodyState{0, {1, 0, 0}, {}, 1.0}, RotatingFrame(1.0), none, {}, true);
  EXPECT_EQ(r.centrifugal, (Vec3{1, 0, 0}));
}

TEST(NetForces, StaticBalanceSumsToExactZero) {
  const BodyState s{0, {0.3, -0.2, 0}, {}, 0.5};
  const ForceBreakdown f = net_forces(s, RotatingFrame(0.8, 0.1), FrictionParams{1.0, 0.5}, {0.1, 0.05, 0}, true);
  EXPECT_EQ(f.total(), (Vec3{}));
}

TEST(NetForces, FictitiousComponentsLinearInMass) {
  const RotatingFrame fr(1.3, 0.4);
  const BodyState a{0, {0.2, 0.5, 0}, {-0.7, 0.1, 0}, 1.0};
  BodyState b = a;
  b.mass = 3.0;
  const ForceBreakdown fa = net_forces(a, fr, {}, {}, false);
  const ForceBreakdown fb = net_forces(b, fr, {}, {}, false);
  expect_vec_near(fb.coriolis, 3.0 * fa.coriolis, 1e-14);
  expect_vec_near(fb.centrifugal, 3.0 * fa.centrifugal, 1e-14);
  expect_vec_near(fb.euler, 3.0 * fa.euler, 1e-14);
}

TEST(Step, RejectsBadTimestep) {
  try {
    step(BodyState{}, RotatingFrame(), {}, {}, false, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_timestep);
  }
  EXPECT_THROW(step(BodyState{}, RotatingFrame(), {}, {}, false, -1e-3), Error);
}

TEST(Step, NonRotatingFreeParticleMovesStraight) {
  const StepResult r = step(BodyState{0, {}, {1, 0, 0}, 1.0}, RotatingFrame(0.0), {}, {}, false, 1e-3);
  EXPECT_EQ(r.state.r_rot, (Vec3{1e-3, 0, 0}));
  EXPECT_EQ(r.state.v_rot, (Vec3{1, 0, 0}));
  EXPECT_EQ(r.state.t, 1e-3);
}

// Integrates the free particle and compares against the closed form.
TEST(Step, FreeParticleMatchesClosedForm) {
  BodyState s{0, {}, {1, 0, 0}, 1.0};
  RotatingFrame f(1.0);
  double worst = 0.0;
  for (int i = 1; i <= 1000; ++i) {
    const StepResult r = step(s, f, {}, {}, false, 1e-3);
    s = r.state;
    f = r.frame;
    const Point2 ref = coriolis::testing::free_particle_rotating(1.0, {0, 0}, {1, 0}, s.t);
    worst = std::max(worst, std::hypot(s.r_rot.x - ref.x, s.r_rot.y - ref.y));
  }
  EXPECT_LT(worst, 1e-8);
  EXPECT_NEAR(s.r_rot.x, std::cos(1.0), 1e-8);
  EXPECT_NEAR(s.r_rot.y, -std::sin(1.0), 1e-8);
  EXPECT_NEAR(s.r_rot.x, 0.5403, 1e-4);
  EXPECT_NEAR(s.r_rot.y, -0.8415, 1e-4);

  const InertialState in = to_inertial(s, f);
  EXPECT_NEAR(in.r_in.x, 1.0, 1e-8);
  EXPECT_NEAR(in.r_in.y, 0.0, 1e-8);
}

TEST(Step, FreeParticleFromOffsetStartMatchesClosedForm) {
  // r0 = (0.5, 0.2), v_rot0 = (-0.3, 0.4), omega = -1.7
  const double w = -1.7;
  BodyState s{0, {0.5, 0.2, 0}, {-0.3, 0.4, 0}, 2.0};
  RotatingFrame f(w);
  const Point2 u{-0.3 - w * 0.2, 0.4 + w * 0.5};  // v_rot0 + w x r0
  double worst = 0.0;
  for (int i = 0; i < 3000; ++i) {
    const StepResult r = step(s, f, {}, {}, false, 1e-3);
    s = r.state;
    f = r.frame;
    const Point2 ref = coriolis::testing::free_particle_rotating(w, {0.5, 0.2}, u, s.t);
    worst = std::max(worst, std::hypot(s.r_rot.x - ref.x, s.r_rot.y - ref.y));
  }
  EXPECT_LT(worst, 1e-8);
}

TEST(Step, KineticFrictionNeverReversesMotion) {
  BodyState s{0, {}, {1, 0, 0}, 1.0};
  RotatingFrame f(0.0);
  const FrictionParams p{2.0, 2.0};
  for (int i = 0; i < 200; ++i) {
    const StepResult r = step(s, f, p, {}, true, 1e-3);
    EXPECT_GE(r.state.v_rot.x, 0.0);
    s = r.state;
    f = r.frame;
  }
  EXPECT_EQ(s.v_rot, (Vec3{}));
  // v^2 / (2 mu g)
  EXPECT_NEAR(s.r_rot.x, 1.0 / (2.0 * 2.0 * 9.81), 1e-9);
}

TEST(Step, RestingBodyHoldsAgainstSubThresholdLoad) {
  BodyState s{0, {0.4, 0.1, 0}, {}, 0.5};
  RotatingFrame f(0.5);
  const FrictionParams p{0.4, 0.3};
  for (int i = 0; i < 1000; ++i) {
    const StepResult r = step(s, f, p, {0.3, -0.2, 0}, true, 1e-3);
    s = r.state;
    f = r.frame;
  }
  EXPECT_EQ(s.v_rot, (Vec3{}));
  EXPECT_EQ(s.r_rot, (Vec3{0.4, 0.1, 0}));
}

TEST(Step, StepIsDeterministic) {
  const BodyState s{0.25, {0.1, -0.3, 0}, {0.7, 0.2, 0}, 0.8};
  const RotatingFrame f(0.9, 0.3, 1.1);
  const FrictionParams p{0.5, 0.4};
  const StepResult a = step(s, f, p, {0.2, 0.1, 0}, true, 1e-3);
  const StepResult b = step(s, f, p, {0.2, 0.1, 0}, true, 1e-3);
  EXPECT_EQ(a.state, b.state);
  EXPECT_EQ(a.frame, b.frame);
}

TEST(Transforms, Examples) {
  const BodyState s{0, {0.3, 0.4, 0}, {1, -1, 0}, 1.0};
  const RotatingFrame f0(2.0);
  const InertialState a = to_inertial(s, f0);
  EXPECT_EQ(a.r_in, s.r_rot);
  expect_vec_near(a.v_in, s.v_rot + cross(f0.omega(), s.r_rot), 0.0);

  const InertialState q =
      to_inertial(BodyState{0, {1, 0, 0}, {}, 1.0}, RotatingFrame(0.0, 0.0, std::numbers::pi / 2));
  expect_vec_near(q.r_in, {0, 1, 0}, 1e-15);

  const RotatingState h = to_rotating({1, 0, 0}, {}, RotatingFrame(0.0, 0.0, std::numbers::pi));
  expect_vec_near(h.r_rot, {-1, 0, 0}, 1e-15);

  const RotatingState id = to_rotating({0.2, 0.7, 0}, {1, 2, 0}, RotatingFrame(0.0));
  EXPECT_EQ(id.r_rot, (Vec3{0.2, 0.7, 0}));
  EXPECT_EQ(id.v_rot, (Vec3{1, 2, 0}));
}

TEST(Transforms, RoundTripProperty) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 2000; ++i) {
    const BodyState s{0, {u(rng), u(rng), 0}, {u(rng), u(rng), 0}, 1.0};
    const RotatingFrame f(u(rng), 0.0, 4.0 * u(rng));
    const InertialState in = to_inertial(s, f);
    const RotatingState back = to_rotating(in.r_in, in.v_in, f);
    expect_vec_near(back.r_rot, s.r_rot, 1e-12);
    expect_vec_near(back.v_rot, s.v_rot, 1e-12);
  }
}

TEST(Jacobi, Examples) {
  EXPECT_EQ(jacobi_energy(BodyState{}, RotatingFrame(1.0)), 0.0);
  EXPECT_EQ(jacobi_energy(BodyState{0, {}, {1, 0, 0}, 1.0}, RotatingFrame(1.0)), 0.5);
}

TEST(Jacobi, ConservedOverFreeRun) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    BodyState s{0, {u(rng), u(rng), 0}, {u(rng), u(rng), 0}, 1.0};
    RotatingFrame f(2.0 * u(rng));
    const double j0 = jacobi_energy(s, f);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const StepResult r = step(s, f, {}, {}, false, 1e-3);
      s = r.state;
      f = r.frame;
      worst = std::max(worst, std::abs(jacobi_energy(s, f) - j0));
    }
    EXPECT_LT(worst / std::abs(j0), 1e-9) << "trial " << trial;
  }
}

TEST(Properties, CoriolisPerpendicularAndDeflectsRight) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 10000; ++i) {
    const double w = u(rng);
    const Vec3 v{u(rng), u(rng), u(rng)};
    const Vec3 a = coriolis_accel(RotatingFrame(w), v);
    EXPECT_LE(std::abs(dot(a, v)), 1e-12 * std::abs(w) * dot(v, v) + 1e-300);
    const Vec3 vp = planar(v);
    if (w > 0.0 && norm(vp) > 0.0) {
      EXPECT_LT(cross(vp, coriolis_accel(RotatingFrame(w), vp)).z, 0.0);
    }
  }
}

TEST(Properties, NoRotationCollapsesFrames) {
  BodyState s{0, {0.1, 0.2, 0}, {0.5, -0.4, 0}, 1.0};
  RotatingFrame f(0.0);
  for (int i = 0; i < 500; ++i) {
    const StepResult r = step(s, f, FrictionParams{0.2, 0.1}, {0.05, 0, 0}, true, 1e-3);
    s = r.state;
    f = r.frame;
    const InertialState in = to_inertial(s, f);
    EXPECT_EQ(in.r_in, s.r_rot);
    EXPECT_EQ(in.v_in, s.v_rot);
  }
}
