#include "geoctl/attitude_error.hpp"
#include "geoctl/properties.hpp"
#include "geoctl/trajectory.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <array>
#include <functional>
#include <numbers>

using namespace geoctl;

namespace {

constexpr double kPi = std::numbers::pi;

Mat3 diag(double a, double b, double c) { return Vec3(a, b, c).asDiagonal(); }

Rotation half_turn(int axis) { return exp_so3(kPi * Vec3::Unit(axis)); }

// Central-difference error of a scalar or vector quantity for the step
// sequence h, h/2, h/4; returns the three errors.
std::array<double, 3> fd_errors(const std::function<double(double)>& err_at_h, double h) {
  return {err_at_h(h), err_at_h(h / 2), err_at_h(h / 4)};
}

void expect_second_order(const std::array<double, 3>& e) {
  for (int i = 0; i < 2; ++i) {
    const double ratio = e[i] / e[i + 1];
    EXPECT_GT(ratio, 3.5) << "errors " << e[0] << ", " << e[1] << ", " << e[2];
    EXPECT_LT(ratio, 4.5) << "errors " << e[0] << ", " << e[1] << ", " << e[2];
  }
}

// Actual attitude follows a polynomial spin, the command follows the Euler schedule.
struct TrackingPair {
  oracle::PolynomialSpin body{exp_so3(Vec3(0.3, -0.2, 0.5)).matrix(), Vec3(0.7, -1.1, 0.4),
                              Vec3(-0.3, 0.2, 0.6)};
  EulerCommand command{};

  Rotation R(double t) const { return Rotation::unchecked(body.R(t)); }
  ErrorState errors(double t, const GainMatrix& G) const {
    const CommandSample c = command(t);
    return error_state(R(t), body.Omega(t), c.R_d, c.Omega_d, c.Omega_d_dot, G, 1.0);
  }
};

}  // namespace

TEST(GainMatrix, RejectsInvalidEntries) {
  EXPECT_NO_THROW(GainMatrix(0.9, 1.0, 1.1));
  EXPECT_THROW(GainMatrix(1.0, 1.0, 2.0), std::invalid_argument);
  EXPECT_THROW(GainMatrix(0.0, 1.0, 2.0), std::invalid_argument);
  EXPECT_THROW(GainMatrix(-1.0, 1.0, 2.0), std::invalid_argument);
  EXPECT_DOUBLE_EQ(GainMatrix::standard().trace(), 3.0);
}

TEST(Psi, ZeroOnDiagonalAndHalfTurnValues) {
  const GainMatrix G = GainMatrix::standard();
  Sampler s(21);
  const Rotation Rd = s.rotation();
  EXPECT_NEAR(psi(Rd, Rd, G), 0.0, 1e-15);
  EXPECT_NEAR(psi(Rd * half_turn(2), Rd, G), 0.9 + 1.0, 1e-14);
  EXPECT_NEAR(psi(Rd * half_turn(0), Rd, G), 1.0 + 1.1, 1e-14);
  EXPECT_NEAR(psi(Rd * half_turn(1), Rd, G), 1.1 + 0.9, 1e-14);
}

TEST(Psi, MatchesAxisAngleClosedForm) {
  const GainMatrix G(0.7, 1.3, 2.2);
  Sampler s(22);
  for (int i = 0; i < 1000; ++i) {
    const Rotation Rd = s.rotation();
    const Vec3 x = log_so3(s.rotation_with_max_angle(kPi - 1e-3));
    const Rotation R = Rd * exp_so3(x);
    EXPECT_NEAR(psi(R, Rd, G), oracle::psi_axis_angle(x, G.diagonal()), 1e-13);
    EXPECT_NEAR(attitude_error_vector(R, Rd, G).squaredNorm(),
                oracle::eR_normsq_axis_angle(x, G.diagonal()), 1e-13);
    EXPECT_NEAR((R.matrix().transpose() * Rd.matrix() * G.matrix()).trace(),
                oracle::trace_axis_angle(x, G.diagonal()), 1e-13);
  }
}

TEST(AttitudeErrorVector, ZeroAtTheFourCriticalPoints) {
  const GainMatrix G = GainMatrix::standard();
  Sampler s(23);
  for (int i = 0; i < 100; ++i) {
    const Rotation Rd = s.rotation();
    EXPECT_LT(attitude_error_vector(Rd, Rd, G).norm(), 1e-14);
    for (int axis = 0; axis < 3; ++axis) {
      EXPECT_LT(attitude_error_vector(Rd * half_turn(axis), Rd, G).norm(), 1e-14);
    }
  }
}

TEST(AttitudeErrorVector, NonzeroAwayFromCriticalSet) {
  const GainMatrix G = GainMatrix::standard();
  const std::array<Rotation, 4> critical{Rotation(), half_turn(0), half_turn(1), half_turn(2)};
  Sampler s(24);
  int checked = 0;
  while (checked < 1000) {
    const Rotation Rd = s.rotation(), R = s.rotation();
    const Rotation Q = Rd.inverse() * R;
    double dist = 1e9;
    for (const Rotation& C : critical) dist = std::min(dist, log_so3(C.inverse() * Q).norm());
    if (dist <= 0.01) continue;
    ++checked;
    EXPECT_GT(attitude_error_vector(R, Rd, G).norm(), 1e-6);
  }
}

TEST(AttitudeErrorVector, AgreesWithSkewFormula) {
  const GainMatrix G(1.0, 2.0, 3.0);
  Sampler s(25);
  for (int i = 0; i < 1000; ++i) {
    const Rotation R = s.rotation(), Rd = s.rotation();
    const Mat3 Q = Rd.matrix().transpose() * R.matrix();
    const Mat3 S = G.matrix() * Q - Q.transpose() * G.matrix();
    const Vec3 expect = 0.5 * Vec3(S(2, 1), S(0, 2), S(1, 0));
    EXPECT_LT((attitude_error_vector(R, Rd, G) - expect).norm(), 1e-14);
  }
}

TEST(AngularVelocityError, Examples) {
  Sampler s(26);
  const Rotation R = s.rotation(), Rd = s.rotation();
  const Vec3 W(0.1, -0.4, 2.0), Wd(0.5, 0.3, -0.2);
  EXPECT_LT((angular_velocity_error(Rd, W, Rd, Wd) - (W - Wd)).norm(), 1e-15);
  const Vec3 matched = R.matrix().transpose() * Rd.matrix() * Wd;
  EXPECT_LT(angular_velocity_error(R, matched, Rd, Wd).norm(), 1e-15);
}

TEST(TransportMatrix, Examples) {
  const Rotation I;
  EXPECT_LT((transport_matrix(I, I, GainMatrix(1, 2, 3)) - diag(2.5, 2.0, 1.5)).cwiseAbs().maxCoeff(),
            1e-15);
  const double g = 1.7;
  EXPECT_LT((raw::transport_matrix<double>(Mat3::Identity(), Mat3::Identity(), Vec3::Constant(g)) -
             g * Mat3::Identity())
                .cwiseAbs()
                .maxCoeff(),
            1e-15);
}

TEST(TransportMatrix, SpectralNormBound) {
  const GainMatrix G = GainMatrix::standard();
  EXPECT_NEAR(transport_bound(G), 3.0 / std::numbers::sqrt2, 1e-15);
  EXPECT_NEAR(transport_bound(Vec3(1, 1, 1)), 3.0 / std::numbers::sqrt2, 1e-15);
  Sampler s(27);
  long violations = 0;
  for (long i = 0; i < 100000; ++i) {
    const Rotation R = s.rotation(), Rd = s.rotation();
    if (spectral_norm(transport_matrix(R, Rd, G)) > transport_bound(G) + 1e-12) ++violations;
  }
  EXPECT_EQ(violations, 0);
}

TEST(FeedforwardAcceleration, Examples) {
  Sampler s(28);
  const Rotation R = s.rotation();
  const Vec3 Wd(0.2, -0.1, 0.7), Wd_dot(1.0, 2.0, -3.0);
  EXPECT_LT((feedforward_acceleration(R, Wd, R, Wd, Wd_dot) - Wd_dot).norm(), 1e-15);
  EXPECT_TRUE(feedforward_acceleration(R, Vec3(1, 2, 3), s.rotation(), Vec3::Zero(), Vec3::Zero())
                  .isZero(0.0));
}

TEST(BoundConstants, Arithmetic) {
  const BoundConstants a = bound_constants(GainMatrix::standard(), 0.95);
  EXPECT_NEAR(a.h1, 1.9, 1e-15);
  EXPECT_NEAR(a.h2, 0.04, 1e-15);
  EXPECT_NEAR(a.h3, 4.41, 1e-14);
  EXPECT_NEAR(a.h4, 2.1, 1e-15);
  EXPECT_NEAR(a.h5, 3.61, 1e-14);
  EXPECT_NEAR(a.b1, 1.9 / 4.45, 1e-15);
  EXPECT_NEAR(a.b2, 1.9 * 2.1 / (3.61 * 0.95), 1e-14);

  const BoundConstants b = bound_constants(GainMatrix(1, 2, 3), 2.9);
  EXPECT_NEAR(b.h1, 3.0, 1e-15);
  EXPECT_NEAR(b.b1, 3.0 / 29.0, 1e-15);

  EXPECT_THROW(bound_constants(GainMatrix::standard(), 1.9), std::invalid_argument);
  EXPECT_THROW(bound_constants(GainMatrix::standard(), 0.0), std::invalid_argument);
  EXPECT_DOUBLE_EQ(default_psi_bar(GainMatrix::standard()), 0.95);
}

TEST(BoundConstants, QuadraticBoundsHoldOnSampledPairs) {
  const GainMatrix G = GainMatrix::standard();
  const BoundConstants bc = bound_constants(G, default_psi_bar(G));
  Sampler s(29);
  long lower = 0, upper = 0, in_sublevel = 0;
  for (long i = 0; i < 100000; ++i) {
    const Rotation R = s.rotation(), Rd = s.rotation();
    const double p = psi(R, Rd, G);
    const double e2 = attitude_error_vector(R, Rd, G).squaredNorm();
    if (bc.b1 * e2 > p) ++lower;
    if (p < bc.psi_bar) {
      ++in_sublevel;
      if (p > bc.b2 * e2) ++upper;
    }
  }
  EXPECT_EQ(lower, 0);
  EXPECT_EQ(upper, 0);
  EXPECT_GT(in_sublevel, 1000);
}

TEST(ErrorDynamics, PsiRateMatchesInnerProduct) {
  const GainMatrix G = GainMatrix::standard();
  const TrackingPair tp;
  for (double t : {0.3, 1.7, 4.2}) {
    const ErrorState e = tp.errors(t, G);
    const double expect = e.e_R.dot(e.e_Omega);
    const auto err = [&](double h) {
      const double d = (tp.errors(t + h, G).psi - tp.errors(t - h, G).psi) / (2 * h);
      return std::abs(d - expect);
    };
    const auto errs = fd_errors(err, 0.02);
    expect_second_order(errs);
  }
}

TEST(ErrorDynamics, AttitudeErrorRateIsTransportTimesVelocityError) {
  const GainMatrix G = GainMatrix::standard();
  const TrackingPair tp;
  for (double t : {0.3, 1.7, 4.2}) {
    const ErrorState e = tp.errors(t, G);
    const Vec3 expect = e.E * e.e_Omega;
    const auto err = [&](double h) {
      const Vec3 d = (tp.errors(t + h, G).e_R - tp.errors(t - h, G).e_R) / (2 * h);
      return (d - expect).norm();
    };
    const auto errs = fd_errors(err, 0.02);
    expect_second_order(errs);
  }
}

TEST(ErrorDynamics, RelativeAttitudeRate) {
  const GainMatrix G = GainMatrix::standard();
  const TrackingPair tp;
  for (double t : {0.3, 1.7, 4.2}) {
    const ErrorState e = tp.errors(t, G);
    const Mat3 Q = tp.command(t).R_d.matrix().transpose() * tp.body.R(t);
    const Mat3 expect = Q * hat(e.e_Omega);
    const auto Qat = [&](double tt) { return Mat3(tp.command(tt).R_d.matrix().transpose() * tp.body.R(tt)); };
    const auto err = [&](double h) {
      return (Mat3((Qat(t + h) - Qat(t - h)) / (2 * h)) - expect).norm();
    };
    const auto errs = fd_errors(err, 0.02);
    expect_second_order(errs);
  }
}

TEST(ErrorDynamics, VelocityErrorRate) {
  const GainMatrix G = GainMatrix::standard();
  const TrackingPair tp;
  for (double t : {0.3, 1.7, 4.2}) {
    const ErrorState e = tp.errors(t, G);
    const Vec3 expect = tp.body.Omega_dot(t) - e.alpha_d;
    const auto err = [&](double h) {
      const Vec3 d = (tp.errors(t + h, G).e_Omega - tp.errors(t - h, G).e_Omega) / (2 * h);
      return (d - expect).norm();
    };
    const auto errs = fd_errors(err, 0.02);
    expect_second_order(errs);
  }
}

TEST(ErrorState, CombinedVectorUsesC) {
  Sampler s(30);
  const Rotation R = s.rotation(), Rd = s.rotation();
  const ErrorState e =
      error_state(R, Vec3(1, 2, 3), Rd, Vec3(0.1, 0.2, 0.3), Vec3::Zero(), GainMatrix::standard(), 0.7);
  EXPECT_LT((e.e_A - (e.e_Omega + 0.7 * e.e_R)).norm(), 1e-15);
}
