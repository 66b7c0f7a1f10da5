// Rigid-body rotational dynamics and two integrators: a Lie group
// variational integrator and a projected classical Runge-Kutta scheme.
#pragma once

#include "geoctl/so3.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace geoctl {

/// Symmetric positive-definite inertia in body axes [kg m^2].
class InertiaMatrix {
 public:
  explicit InertiaMatrix(const Mat3& J) {
    if (!J.allFinite()) throw std::invalid_argument("InertiaMatrix: non-finite entries");
    if ((J - J.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw std::invalid_argument("InertiaMatrix: matrix is not symmetric");
    }
    J_ = 0.5 * (J + J.transpose());
    const auto e = symmetric_eigenvalues(J_);
    if (!(e[0] > 0.0)) throw std::invalid_argument("InertiaMatrix: not positive definite");
    lambda_min_ = e[0];
    lambda_max_ = e[2];
    J_inv_ = J_.inverse();
  }

  const Mat3& matrix() const { return J_; }
  const Mat3& inverse() const { return J_inv_; }
  double lambda_min() const { return lambda_min_; }
  double lambda_max() const { return lambda_max_; }

 private:
  Mat3 J_;
  Mat3 J_inv_;
  double lambda_min_ = 0.0;
  double lambda_max_ = 0.0;
};

/// Inertia of the quadrotor used in the reference simulations.
inline InertiaMatrix inertia_from_paper() {
  Mat3 J;
  J << 1.059e-2, -5.156e-6, 2.361e-5,
       -5.156e-6, 1.059e-2, -1.026e-5,
       2.361e-5, -1.026e-5, 1.005e-2;
  return InertiaMatrix(0.5 * (J + J.transpose()));
}

struct BodyState {
  Rotation R;
  Vec3 Omega = Vec3::Zero();
};

struct BodyRates {
  Vec3 Omega_dot;
  Vec3 R_dot_body;  // body-frame tangent, R_dot = R hat(R_dot_body)
};

/// J dOmega + Omega x J Omega = u + delta, R_dot = R hat(Omega).
inline BodyRates body_dynamics_rhs(const BodyState& s, const Vec3& u, const Vec3& delta,
                                   const InertiaMatrix& J) {
  const Vec3 JW = J.matrix() * s.Omega;
  return {J.inverse() * (-s.Omega.cross(JW) + u + delta), s.Omega};
}

enum class IntegratorMethod { lgvi, rk4_projected };

struct IntegratorConfig {
  double step_size = 1e-3;
  IntegratorMethod method = IntegratorMethod::lgvi;
  double newton_tol = 1e-14;
  int newton_max_iter = 50;

  void validate() const {
    if (!(step_size > 0.0)) throw std::invalid_argument("IntegratorConfig: step_size must be positive");
    if (!(newton_tol > 0.0)) throw std::invalid_argument("IntegratorConfig: newton_tol must be positive");
    if (newton_max_iter < 1) throw std::invalid_argument("IntegratorConfig: newton_max_iter must be >= 1");
  }
};

/// Raised when a step cannot be completed (Newton failure, projection
/// failure, non-finite state).
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string to_string(IntegratorMethod m) {
  return m == IntegratorMethod::lgvi ? "lgvi" : "rk4_projected";
}

inline IntegratorMethod integrator_method_from_string(const std::string& s) {
  if (s == "lgvi") return IntegratorMethod::lgvi;
  if (s == "rk4_projected") return IntegratorMethod::rk4_projected;
  throw std::invalid_argument("unknown integrator method '" + s + "'");
}

/// Solves h hat(g) = F Jd - Jd F^T for F in SO(3), with Jd = tr(J)/2 I - J.
///
/// Newton iterations on right-multiplicative updates F <- F exp(xi); the
/// Jacobian of vee(F Jd - Jd F^T) along xi is assembled column by column,
/// so F stays on SO(3) up to roundoff of the exponential.
inline Mat3 solve_lgvi_rotation(const Vec3& g, const Mat3& Jd, const Vec3& F0,
                                double tol, int max_iter) {
  Mat3 F = exp_so3_matrix<double>(F0);
  const auto residual = [&](const Mat3& Fm) {
    return Vec3(vee(Mat3(Fm * Jd - Jd * Fm.transpose())) - g);
  };
  // Re-exponentiating the converged F drops the orthogonality error that
  // accumulates over the Newton products.
  const auto clean = [](const Mat3& Fm) {
    return exp_so3_matrix<double>(log_so3(Rotation::unchecked(Fm)));
  };
  Vec3 r = residual(F);
  for (int it = 0; it < max_iter; ++it) {
    if (std::sqrt(2.0) * r.norm() <= tol) return clean(F);
    Mat3 Jac;
    for (int i = 0; i < 3; ++i) {
      const Mat3 X = F * hat(Vec3(Vec3::Unit(i))) * Jd;
      Jac.col(i) = vee(Mat3(X - X.transpose()));
    }
    const Vec3 xi = Jac.partialPivLu().solve(-r);
    F = F * exp_so3_matrix<double>(xi);
    r = residual(F);
    // Roundoff floor: a step at machine precision with no further progress.
    if (xi.norm() < 1e-15 && std::sqrt(2.0) * r.norm() <= 1e3 * tol) return clean(F);
  }
  if (std::sqrt(2.0) * r.norm() <= tol) return clean(F);
  throw IntegrationError("LGVI: Newton iteration did not converge (step too large?)");
}

/// One LGVI step with moments M_k = u + delta at the start of the step and
/// M_next at its end:
///   h hat(J Omega_k + h/2 M_k) = F Jd - Jd F^T,  R_{k+1} = R_k F,
///   J Omega_{k+1} = F^T J Omega_k + h/2 (F^T M_k + M_next).
/// Returns F alongside the new state so callers can re-evaluate M_next.
struct LgviStage {
  Mat3 F;
  Vec3 Pi_base;  // F^T (J Omega_k + h/2 M_k)
};

inline LgviStage lgvi_rotation_stage(const BodyState& s, const Vec3& M_k, const InertiaMatrix& J,
                                     double h, double tol, int max_iter) {
  const Mat3& Jm = J.matrix();
  const Mat3 Jd = 0.5 * Jm.trace() * Mat3::Identity() - Jm;
  const Vec3 Pi_half = Jm * s.Omega + 0.5 * h * M_k;
  const Vec3 g = h * Pi_half;
  LgviStage st;
  st.F = solve_lgvi_rotation(g, Jd, h * s.Omega, tol, max_iter);
  st.Pi_base = st.F.transpose() * Pi_half;
  return st;
}

inline BodyState lgvi_finish(const BodyState& s, const LgviStage& st, const Vec3& M_next,
                             const InertiaMatrix& J, double h) {
  BodyState out;
  out.R = Rotation::unchecked(s.R.matrix() * st.F);
  out.Omega = J.inverse() * (st.Pi_base + 0.5 * h * M_next);
  if (!out.R.matrix().allFinite() || !out.Omega.allFinite()) {
    throw IntegrationError("LGVI: non-finite state");
  }
  return out;
}

/// LGVI step with the moment held constant over the step (M_next = M_k).
inline BodyState step_lgvi(const BodyState& s, const Vec3& u, const Vec3& delta,
                           const InertiaMatrix& J, double h, const IntegratorConfig& cfg = {}) {
  if (!(h > 0.0)) throw std::invalid_argument("step_lgvi: h must be positive");
  const Vec3 M = u + delta;
  const LgviStage st = lgvi_rotation_stage(s, M, J, h, cfg.newton_tol, cfg.newton_max_iter);
  return lgvi_finish(s, st, M, J, h);
}

/// Moment as a function of (time, state).
using MomentFn = std::function<Vec3(double, const BodyState&)>;

/// Classical RK4 on (R as nine reals, Omega), then projection onto SO(3).
inline BodyState step_rk4_projected(const BodyState& s, double t, const MomentFn& u_fn,
                                    const MomentFn& delta_fn, const InertiaMatrix& J, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("step_rk4_projected: h must be positive");
  struct D {
    Mat3 R;
    Vec3 W;
  };
  const auto f = [&](double tt, const Mat3& R, const Vec3& W) {
    const BodyState bs{Rotation::unchecked(R), W};
    const BodyRates r = body_dynamics_rhs(bs, u_fn(tt, bs), delta_fn(tt, bs), J);
    return D{R * hat(W), r.Omega_dot};
  };
  const Mat3& R0 = s.R.matrix();
  const D k1 = f(t, R0, s.Omega);
  const D k2 = f(t + 0.5 * h, R0 + 0.5 * h * k1.R, s.Omega + 0.5 * h * k1.W);
  const D k3 = f(t + 0.5 * h, R0 + 0.5 * h * k2.R, s.Omega + 0.5 * h * k2.W);
  const D k4 = f(t + h, R0 + h * k3.R, s.Omega + h * k3.W);
  const Mat3 R1 = R0 + (h / 6.0) * (k1.R + 2.0 * k2.R + 2.0 * k3.R + k4.R);
  const Vec3 W1 = s.Omega + (h / 6.0) * (k1.W + 2.0 * k2.W + 2.0 * k3.W + k4.W);
  if (!R1.allFinite() || !W1.allFinite()) throw IntegrationError("RK4: non-finite state");
  if (!(R1.determinant() > 0.0)) throw IntegrationError("RK4: projection failed, step too large");
  return {project_to_so3(R1), W1};
}

}  // namespace geoctl
