// Adaptive and robust adaptive attitude tracking laws with online inertia
// estimation, gain-condition checks and Lyapunov instrumentation.
//
// The control laws and update rates only see the estimate J_bar. The true
// inertia enters through lyapunov_value() (instrumentation) and through
// validate_gains(), which reads only its eigenvalue bounds.
#pragma once

#include "geoctl/attitude_error.hpp"
#include "geoctl/dynamics.hpp"
#include "geoctl/trajectory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace geoctl {

struct Gains {
  double k_R = 0.0424;
  double k_Omega = 0.0296;
  double k_J = 0.1;
  double c = 1.0;
  GainMatrix G = GainMatrix::standard();
  bool override_c_condition = false;

  void validate() const {
    if (!(k_R > 0.0 && k_Omega > 0.0 && k_J > 0.0 && c > 0.0)) {
      throw std::invalid_argument("Gains: k_R, k_Omega, k_J and c must be positive");
    }
  }
};

struct RobustParams {
  double sigma = 0.01;
  double epsilon = 0.002;
  double delta_bound = 0.2;

  void validate() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("RobustParams: sigma must be positive");
    if (!(epsilon > 0.0)) throw std::invalid_argument("RobustParams: epsilon must be positive");
    if (!(delta_bound > 0.0)) throw std::invalid_argument("RobustParams: delta must be positive");
  }
};

struct EstimatorState {
  Mat3 J_bar = 1e-3 * Mat3::Identity();

  void resymmetrize() { J_bar = 0.5 * (J_bar + J_bar.transpose()); }
};

inline ErrorState tracking_errors(const BodyState& s, const CommandSample& cmd, const Gains& g) {
  return error_state(s.R, s.Omega, cmd.R_d, cmd.Omega_d, cmd.Omega_d_dot, g.G, g.c);
}

/// Upper limit on c: the minimum of sqrt(2 b1 k_R lm / lM^2),
/// sqrt(2) k_Omega / (lM tr G) and 4 k_R k_Omega / (k_Omega^2 + k_R lM tr G / sqrt 2).
inline double c_max(double k_R, double k_Omega, const GainMatrix& G, double lambda_m,
                    double lambda_M) {
  const double trG = G.trace();
  const double b1 = bound_constants(G, default_psi_bar(G)).b1;  // b1 does not depend on psi_bar
  const double t1 = std::sqrt(2.0 * b1 * k_R * lambda_m / (lambda_M * lambda_M));
  const double t2 = std::numbers::sqrt2 * k_Omega / (lambda_M * trG);
  const double t3 = 4.0 * k_R * k_Omega /
                    (k_Omega * k_Omega + k_R * lambda_M * trG / std::numbers::sqrt2);
  return std::min({t1, t2, t3});
}

/// Largest c for which det W2 > 0: 4 k_R k_Omega / (k_Omega^2 + 2 sqrt(2) k_R lM tr G).
/// This can be smaller than c_max, whose third term is looser.
inline double c_w2_limit(double k_R, double k_Omega, const GainMatrix& G, double lambda_M) {
  return 4.0 * k_R * k_Omega /
         (k_Omega * k_Omega + 2.0 * std::numbers::sqrt2 * k_R * lambda_M * G.trace());
}

namespace detail {

inline Vec3 adaptive_control(const BodyState& s, const ErrorState& e, const Gains& g,
                             const Mat3& J_bar) {
  return -g.k_R * e.e_R - g.k_Omega * e.e_Omega + s.Omega.cross(J_bar * s.Omega) +
         J_bar * e.alpha_d;
}

inline Vec3 robust_term(const Vec3& e_A, const RobustParams& rp) {
  const double d = rp.delta_bound;
  return -(d * d / (d * e_A.norm() + rp.epsilon)) * e_A;
}

inline Mat3 adaptive_update_rate(const BodyState& s, const ErrorState& e, const Gains& g) {
  const Mat3 eA_hat = hat(e.e_A);
  const Mat3 WW = s.Omega * s.Omega.transpose();
  const Mat3 S = WW * eA_hat - e.alpha_d * e.e_A.transpose();
  const Mat3 rate = S + S.transpose();  // entrywise S_ij + S_ji, symmetric to the bit
  return 0.5 * g.k_J * rate;
}

}  // namespace detail

/// u = -k_R e_R - k_Omega e_Omega + Omega x J_bar Omega + J_bar alpha_d.
inline Vec3 adaptive_control(const BodyState& s, const CommandSample& cmd, const Gains& g,
                             const EstimatorState& est) {
  return detail::adaptive_control(s, tracking_errors(s, cmd, g), g, est.J_bar);
}

/// dJ_bar/dt = k_J/2 (-alpha_d e_A^T - e_A alpha_d^T + Omega Omega^T e_A^ - e_A^ Omega Omega^T).
/// Each pair is X + X^T, so the result is symmetric to the last bit.
inline Mat3 adaptive_update_rate(const BodyState& s, const CommandSample& cmd, const Gains& g,
                                 const EstimatorState&) {
  return detail::adaptive_update_rate(s, tracking_errors(s, cmd, g), g);
}

/// Adaptive law plus v = -delta^2 e_A / (delta ||e_A|| + epsilon); ||v|| < delta.
inline Vec3 robust_control(const BodyState& s, const CommandSample& cmd, const Gains& g,
                           const RobustParams& rp, const EstimatorState& est) {
  const ErrorState e = tracking_errors(s, cmd, g);
  return detail::adaptive_control(s, e, g, est.J_bar) + detail::robust_term(e.e_A, rp);
}

/// Adaptive rate with sigma leakage, minus k_J sigma J_bar.
inline Mat3 robust_update_rate(const BodyState& s, const CommandSample& cmd, const Gains& g,
                               const RobustParams& rp, const EstimatorState& est) {
  return adaptive_update_rate(s, cmd, g, est) - g.k_J * rp.sigma * est.J_bar;
}

/// V = 1/2 e_W.J e_W + k_R Psi + c J e_W.e_R + ||J - J_bar||_F^2 / (2 k_J).
inline double lyapunov_value(const BodyState& s, const CommandSample& cmd, const Gains& g,
                             const EstimatorState& est, const InertiaMatrix& J_true) {
  const ErrorState e = tracking_errors(s, cmd, g);
  const Mat3& J = J_true.matrix();
  const Vec3 JeW = J * e.e_Omega;
  const double Jt = (J - est.J_bar).norm();
  return 0.5 * e.e_Omega.dot(JeW) + g.k_R * e.psi + g.c * JeW.dot(e.e_R) +
         Jt * Jt / (2.0 * g.k_J);
}

/// zeta = (||e_R||, ||e_Omega||)
inline Eigen::Vector2d zeta(const ErrorState& e) { return {e.e_R.norm(), e.e_Omega.norm()}; }

/// z = (||e_R||, ||e_Omega||, ||J_tilde||_F)
inline Vec3 z_vector(const ErrorState& e, const Mat3& J_tilde) {
  return {e.e_R.norm(), e.e_Omega.norm(), J_tilde.norm()};
}

/// Ascending eigenvalues of a symmetric 2x2 matrix.
inline std::array<double, 2> symmetric_eigenvalues(const Eigen::Matrix2d& A) {
  const double m = 0.5 * (A(0, 0) + A(1, 1));
  const double d = 0.5 * (A(0, 0) - A(1, 1));
  const double off = 0.5 * (A(0, 1) + A(1, 0));
  const double r = std::hypot(d, off);
  return {m - r, m + r};
}

/// Gain-condition diagnostics for both control laws.
struct GainReport {
  bool robust = false;
  double c = 0.0;
  double c_max = 0.0;
  double c_w2 = 0.0;  // c_w2_limit
  double b1 = 0.0;
  double b2 = 0.0;
  double psi_bar = 0.0;
  double lambda_m = 0.0;
  double lambda_M = 0.0;

  Mat3 W11 = Mat3::Zero();
  Mat3 W12 = Mat3::Zero();
  Eigen::Matrix2d W2 = Eigen::Matrix2d::Zero();
  Mat3 W3 = Mat3::Zero();
  std::array<double, 3> eig_W11{};
  std::array<double, 3> eig_W12{};
  std::array<double, 2> eig_W2{};
  std::array<double, 3> eig_W3{};

  // Robust case only.
  double d1 = 0.0;
  double d2 = 0.0;
  double ultimate_bound = 0.0;  // bound on ||z||^2

  bool feasible = false;
  std::vector<std::string> violations;

  bool W11_pd() const { return eig_W11[0] > 0.0; }
  bool W12_pd() const { return eig_W12[0] > 0.0; }
  bool W2_pd() const { return eig_W2[0] > 0.0; }
  bool W3_pd() const { return eig_W3[0] > 0.0; }
  bool c_condition() const { return c < c_max; }
};

/// Builds W11, W2 (adaptive) and W12, W3, d1, d2 (robust) and decides
/// feasibility: every matrix positive definite and, for the robust law,
/// d1 < d2. Only the eigenvalue bounds of the true inertia are used.
inline GainReport validate_gains(const Gains& g, const std::optional<RobustParams>& robust,
                                 double lambda_m, double lambda_M,
                                 std::optional<double> psi_bar = std::nullopt) {
  g.validate();
  if (!(lambda_m > 0.0 && lambda_M >= lambda_m)) {
    throw std::invalid_argument("validate_gains: need 0 < lambda_m <= lambda_M");
  }
  if (robust) robust->validate();

  GainReport rep;
  rep.robust = robust.has_value();
  rep.c = g.c;
  rep.lambda_m = lambda_m;
  rep.lambda_M = lambda_M;
  rep.psi_bar = psi_bar.value_or(default_psi_bar(g.G));
  const BoundConstants bc = bound_constants(g.G, rep.psi_bar);
  rep.b1 = bc.b1;
  rep.b2 = bc.b2;
  rep.c_max = c_max(g.k_R, g.k_Omega, g.G, lambda_m, lambda_M);
  rep.c_w2 = c_w2_limit(g.k_R, g.k_Omega, g.G, lambda_M);

  const double c = g.c;
  const double trG = g.G.trace();
  rep.W11 << bc.b1 * g.k_R, 0.5 * c * lambda_M, 0.0,
             0.5 * c * lambda_M, 0.5 * lambda_m, 0.0,
             0.0, 0.0, 1.0 / (2.0 * g.k_J);
  rep.W2 << c * g.k_R, -0.5 * c * g.k_Omega,
            -0.5 * c * g.k_Omega, g.k_Omega - c / std::numbers::sqrt2 * lambda_M * trG;
  rep.eig_W11 = symmetric_eigenvalues(rep.W11);
  rep.eig_W2 = symmetric_eigenvalues(rep.W2);

  if (!rep.W11_pd()) rep.violations.emplace_back("W11 is not positive definite");
  if (!rep.W2_pd()) rep.violations.emplace_back("W2 is not positive definite");

  if (robust) {
    rep.W12 << bc.b2 * g.k_R, 0.5 * c * lambda_M, 0.0,
               0.5 * c * lambda_M, 0.5 * lambda_M, 0.0,
               0.0, 0.0, 1.0 / (2.0 * g.k_J);
    rep.W3.setZero();
    rep.W3.topLeftCorner<2, 2>() = rep.W2;
    rep.W3(2, 2) = 0.5 * robust->sigma;
    rep.eig_W12 = symmetric_eigenvalues(rep.W12);
    rep.eig_W3 = symmetric_eigenvalues(rep.W3);
    if (!rep.W12_pd()) rep.violations.emplace_back("W12 is not positive definite");
    if (!rep.W3_pd()) rep.violations.emplace_back("W3 is not positive definite");

    const double forcing = 1.5 * robust->sigma * lambda_M * lambda_M + robust->epsilon;
    rep.d1 = rep.eig_W12[2] / rep.eig_W3[0] * forcing;
    rep.d2 = rep.psi_bar / bc.b2 * rep.eig_W11[0];
    rep.ultimate_bound = rep.eig_W12[2] / (rep.eig_W11[0] * rep.eig_W3[0]) * forcing;
    if (!(rep.d1 < rep.d2)) rep.violations.emplace_back("d1 < d2 does not hold");
  }
  rep.feasible = rep.violations.empty();
  return rep;
}

inline std::string format_gain_report(const GainReport& r) {
  std::ostringstream os;
  os.precision(6);
  const auto pd = [](bool b) { return b ? "positive definite" : "INDEFINITE"; };
  const auto eig = [](const auto& e) {
    std::ostringstream s;
    s.precision(6);
    s << "[";
    for (std::size_t i = 0; i < e.size(); ++i) s << (i ? ", " : "") << e[i];
    s << "]";
    return s.str();
  };
  os << "Gain report (" << (r.robust ? "robust adaptive" : "adaptive") << " law)\n";
  os << "  lambda_m, lambda_M : " << r.lambda_m << ", " << r.lambda_M << "\n";
  os << "  b1, b2, psi_bar    : " << r.b1 << ", " << r.b2 << ", " << r.psi_bar << "\n";
  os << "  c                  : " << r.c << "\n";
  os << "  c_max              : " << r.c_max << (r.c_condition() ? "  (c < c_max)" : "  (c >= c_max)")
     << "\n";
  os << "  W2 det limit on c  : " << r.c_w2 << "\n";
  os << "  W11 eigenvalues    : " << eig(r.eig_W11) << "  " << pd(r.W11_pd()) << "\n";
  os << "  W2 eigenvalues     : " << eig(r.eig_W2) << "  " << pd(r.W2_pd()) << "\n";
  if (r.robust) {
    os << "  W12 eigenvalues    : " << eig(r.eig_W12) << "  " << pd(r.W12_pd()) << "\n";
    os << "  W3 eigenvalues     : " << eig(r.eig_W3) << "  " << pd(r.W3_pd()) << "\n";
    os << "  d1, d2             : " << r.d1 << ", " << r.d2
       << (r.d1 < r.d2 ? "  (d1 < d2)" : "  (d1 >= d2)") << "\n";
    os << "  ultimate bound     : ||z||^2 <= " << r.ultimate_bound << "\n";
  }
  os << "  feasible           : " << (r.feasible ? "yes" : "no") << "\n";
  for (const auto& v : r.violations) os << "  violated           : " << v << "\n";
  return os.str();
}

inline std::string gain_report_kv(const GainReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "law=" << (r.robust ? "robust" : "adaptive") << "\n";
  os << "lambda_m=" << r.lambda_m << "\nlambda_M=" << r.lambda_M << "\n";
  os << "b1=" << r.b1 << "\nb2=" << r.b2 << "\npsi_bar=" << r.psi_bar << "\n";
  os << "c=" << r.c << "\nc_max=" << r.c_max << "\nc_w2_limit=" << r.c_w2 << "\n";
  os << "c_condition=" << (r.c_condition() ? "true" : "false") << "\n";
  for (int i = 0; i < 3; ++i) os << "W11_eig" << i << "=" << r.eig_W11[i] << "\n";
  for (int i = 0; i < 2; ++i) os << "W2_eig" << i << "=" << r.eig_W2[i] << "\n";
  os << "W11_pd=" << (r.W11_pd() ? "true" : "false") << "\n";
  os << "W2_pd=" << (r.W2_pd() ? "true" : "false") << "\n";
  if (r.robust) {
    for (int i = 0; i < 3; ++i) os << "W12_eig" << i << "=" << r.eig_W12[i] << "\n";
    for (int i = 0; i < 3; ++i) os << "W3_eig" << i << "=" << r.eig_W3[i] << "\n";
    os << "W12_pd=" << (r.W12_pd() ? "true" : "false") << "\n";
    os << "W3_pd=" << (r.W3_pd() ? "true" : "false") << "\n";
    os << "d1=" << r.d1 << "\nd2=" << r.d2 << "\n";
    os << "d1_lt_d2=" << (r.d1 < r.d2 ? "true" : "false") << "\n";
    os << "ultimate_bound=" << r.ultimate_bound << "\n";
  }
  os << "feasible=" << (r.feasible ? "true" : "false") << "\n";
  return os.str();
}

}  // namespace geoctl
