#include "geoctl/properties.hpp"
#include "geoctl/trajectory.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace geoctl;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(Euler321, Examples) {
  EXPECT_TRUE(euler321_to_rotation(0, 0, 0).matrix().isIdentity(0.0));
  const Mat3 roll = euler321_to_rotation(kPi, 0, 0).matrix();
  EXPECT_LT((roll - Vec3(1, -1, -1).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Euler321, RoundTripThroughExtraction) {
  Sampler s(31);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 a(s.uniform(-kPi + 1e-3, kPi - 1e-3), s.uniform(-1.4, 1.4), s.uniform(-kPi + 1e-3, kPi - 1e-3));
    const Rotation R = euler321_to_rotation(a(0), a(1), a(2));
    EXPECT_LE(R.orthogonality_error(), 1e-14);
    EXPECT_LT((oracle::euler321_from_rotation(R.matrix()) - a).norm(), 1e-12);
  }
}

TEST(PaperCommand, ScheduleAtKnownTimes) {
  const Vec3 a0 = oracle::euler321_from_rotation(paper_command(0.0).R_d.matrix());
  EXPECT_NEAR(a0(0), 0.0, 1e-15);
  EXPECT_NEAR(a0(1), kPi / 9, 1e-15);
  EXPECT_NEAR(a0(2), 0.0, 1e-15);
  const Vec3 a1 = oracle::euler321_from_rotation(paper_command(0.5).R_d.matrix());
  EXPECT_NEAR(a1(0), kPi / 9, 1e-15);
  EXPECT_NEAR(a1(1), 0.0, 1e-15);
  EXPECT_NEAR(a1(2), 0.0, 1e-15);
  EXPECT_THROW(paper_command(-0.1), std::invalid_argument);
}

TEST(PaperCommand, AnalyticRatesMatchFiniteDifferences) {
  const double h = 1e-6;
  double worst = 0.0, worst_acc = 0.0;
  for (int k = 0; k <= 1000; ++k) {
    const double t = std::max(0.01 * k, 1e-4);
    const CommandSample c = paper_command(t);
    const Mat3 dR = (paper_command(t + h).R_d.matrix() - paper_command(t - h).R_d.matrix()) / (2 * h);
    const Vec3 w_fd = vee(Mat3(c.R_d.matrix().transpose() * dR));
    worst = std::max(worst, (w_fd - c.Omega_d).norm());
    const Vec3 dw_fd = (paper_command(t + 1e-4).Omega_d - paper_command(t - 1e-4).Omega_d) / 2e-4;
    worst_acc = std::max(worst_acc, (dw_fd - c.Omega_d_dot).norm());
  }
  EXPECT_LT(worst, 1e-6);
  EXPECT_LT(worst_acc, 1e-6);
}

TEST(EulerCommand, GeneralYawRatesMatchFiniteDifferences) {
  // Exercise the yaw-rate terms that the reference schedule leaves at zero.
  const auto angles = [](double t) {
    return EulerKinematics{Vec3(0.4 * std::sin(1.3 * t), 0.3 * std::cos(0.7 * t), 0.5 * t * t),
                           Vec3(0.52 * std::cos(1.3 * t), -0.21 * std::sin(0.7 * t), t),
                           Vec3(-0.676 * std::sin(1.3 * t), -0.147 * std::cos(0.7 * t), 1.0)};
  };
  const auto R_at = [&](double t) {
    const Vec3 a = angles(t).angles;
    return euler321_to_rotation(a(0), a(1), a(2)).matrix();
  };
  for (double t : {0.2, 1.1, 2.5}) {
    Vec3 w, dw;
    euler321_body_rates(angles(t), w, dw);
    const double h = 1e-6;
    const Vec3 w_fd = vee(Mat3(R_at(t).transpose() * (R_at(t + h) - R_at(t - h)) / (2 * h)));
    EXPECT_LT((w_fd - w).norm(), 1e-8);
    const double H = 1e-4;
    Vec3 wp, wm, scratch;
    euler321_body_rates(angles(t + H), wp, scratch);
    euler321_body_rates(angles(t - H), wm, scratch);
    EXPECT_LT(((wp - wm) / (2 * H) - dw).norm(), 1e-7);
  }
}

TEST(EulerCommand, RejectsInvalidParameters) {
  EulerCommand c;
  c.frequency = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.frequency = std::nan("");
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(NumericCommandWrapper, ConstantAttitude) {
  const Rotation Rd = exp_so3(Vec3(0.1, 0.2, -0.3));
  const CommandFn f = numeric_command_wrapper([Rd](double) { return Rd; });
  const CommandSample c = f(1.0);
  EXPECT_LT(c.Omega_d.norm(), 1e-12);
  EXPECT_LT(c.Omega_d_dot.norm(), 1e-5);
  EXPECT_TRUE(c.R_d.matrix().isApprox(Rd.matrix()));
}

TEST(NumericCommandWrapper, ConstantRateSpin) {
  const double w = 1.3;
  const CommandFn f = numeric_command_wrapper([w](double t) { return exp_so3(Vec3(0, 0, w * t)); });
  for (double t : {0.0, 0.5, 3.0}) {
    const CommandSample c = f(t);
    EXPECT_LT((c.Omega_d - Vec3(0, 0, w)).norm(), 1e-8);
  }
}

TEST(NumericCommandWrapper, ReproducesAnalyticSchedule) {
  const EulerCommand cmd;
  const CommandFn f = numeric_command_wrapper([cmd](double t) { return cmd(t).R_d; });
  double worst = 0.0, worst_acc = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double t = 0.1 * k;
    const CommandSample a = cmd(t), n = f(t);
    worst = std::max(worst, (a.Omega_d - n.Omega_d).norm());
    worst_acc = std::max(worst_acc, (a.Omega_d_dot - n.Omega_d_dot).norm());
  }
  EXPECT_LT(worst, 1e-6);
  EXPECT_LT(worst_acc, 1e-3);
}

TEST(NumericCommandWrapper, RejectsBadInput) {
  EXPECT_THROW(numeric_command_wrapper([](double) { return Rotation(); }, 0.0), std::invalid_argument);
  const CommandFn bad = numeric_command_wrapper([](double t) {
    Mat3 M = Mat3::Identity();
    if (t > 1.0) M(0, 0) = std::nan("");
    return Rotation::unchecked(M);
  });
  EXPECT_NO_THROW(bad(0.0));
  EXPECT_THROW(bad(1.0), std::runtime_error);
}

TEST(ConstantCommand, ZeroRates) {
  const Rotation Rd = exp_so3(Vec3(0.4, 0, 0));
  const CommandSample c = constant_command(Rd)(2.0);
  EXPECT_EQ(c.t, 2.0);
  EXPECT_TRUE(c.Omega_d.isZero(0.0));
  EXPECT_TRUE(c.Omega_d_dot.isZero(0.0));
}
