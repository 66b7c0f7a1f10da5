// Trace-form configuration error on SO(3) and the quantities of its
// error dynamics.
#pragma once

#include "geoctl/so3.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace geoctl {

/// G = diag(g1, g2, g3) with distinct, positive entries.
class GainMatrix {
 public:
  GainMatrix(double g1, double g2, double g3) : g_(g1, g2, g3) {
    if (!(g1 > 0.0 && g2 > 0.0 && g3 > 0.0)) {
      throw std::invalid_argument("GainMatrix: entries must be positive");
    }
    if (g1 == g2 || g2 == g3 || g3 == g1) {
      throw std::invalid_argument("GainMatrix: entries must be pairwise distinct");
    }
  }

  /// Near-isotropic default, diag(0.9, 1.0, 1.1).
  static GainMatrix standard() { return {0.9, 1.0, 1.1}; }

  const Vec3& diagonal() const { return g_; }
  Mat3 matrix() const { return g_.asDiagonal(); }
  double trace() const { return g_.sum(); }

 private:
  Vec3 g_;
};

struct BoundConstants {
  double h1, h2, h3, h4, h5;
  double b1, b2;
  double psi_bar;
};

/// The functions in this namespace take the raw diagonal of G and accept
/// equal gains; the public overloads below require a GainMatrix.
namespace raw {

template <typename Scalar>
Scalar psi(const Mat3T<Scalar>& R, const Mat3T<Scalar>& Rd, const Vec3T<Scalar>& g) {
  const Mat3T<Scalar> Q = Rd.transpose() * R;
  Scalar s(0);
  for (int i = 0; i < 3; ++i) s += g(i) * (Scalar(1) - Q(i, i));
  return Scalar(0.5) * s;
}

template <typename Scalar>
Vec3T<Scalar> attitude_error_vector(const Mat3T<Scalar>& R, const Mat3T<Scalar>& Rd,
                                    const Vec3T<Scalar>& g) {
  const Mat3T<Scalar> G = g.asDiagonal();
  const Mat3T<Scalar> GQ = G * Rd.transpose() * R;
  return vee<Scalar>(Scalar(0.5) * (GQ - GQ.transpose()));
}

template <typename Scalar>
Mat3T<Scalar> transport_matrix(const Mat3T<Scalar>& R, const Mat3T<Scalar>& Rd,
                               const Vec3T<Scalar>& g) {
  const Mat3T<Scalar> P = R.transpose() * Rd * Mat3T<Scalar>(g.asDiagonal());
  return Scalar(0.5) * (P.trace() * Mat3T<Scalar>::Identity() - P);
}

}  // namespace raw

/// Psi(R, Rd) = 1/2 tr[G (I - Rd^T R)].
inline double psi(const Rotation& R, const Rotation& Rd, const GainMatrix& G) {
  return raw::psi(R.matrix(), Rd.matrix(), G.diagonal());
}

/// e_R = 1/2 (G Rd^T R - R^T Rd G)^vee.
inline Vec3 attitude_error_vector(const Rotation& R, const Rotation& Rd, const GainMatrix& G) {
  return raw::attitude_error_vector(R.matrix(), Rd.matrix(), G.diagonal());
}

/// e_Omega = Omega - R^T Rd Omega_d.
inline Vec3 angular_velocity_error(const Rotation& R, const Vec3& Omega, const Rotation& Rd,
                                   const Vec3& Omega_d) {
  return Omega - R.matrix().transpose() * (Rd.matrix() * Omega_d);
}

/// E = 1/2 (tr[R^T Rd G] I - R^T Rd G), so that d/dt e_R = E e_Omega.
inline Mat3 transport_matrix(const Rotation& R, const Rotation& Rd, const GainMatrix& G) {
  return raw::transport_matrix(R.matrix(), Rd.matrix(), G.diagonal());
}

/// Commanded angular acceleration seen in the body frame,
/// alpha_d = -Omega^ R^T Rd Omega_d + R^T Rd dOmega_d.
inline Vec3 feedforward_acceleration(const Rotation& R, const Vec3& Omega, const Rotation& Rd,
                                     const Vec3& Omega_d, const Vec3& Omega_d_dot) {
  const Mat3 Q = R.matrix().transpose() * Rd.matrix();
  return -hat(Omega) * (Q * Omega_d) + Q * Omega_d_dot;
}

/// Constants of the quadratic bounds b1 ||e_R||^2 <= Psi and, for
/// Psi < psi_bar, Psi <= b2 ||e_R||^2. Requires 0 < psi_bar < h1.
inline BoundConstants bound_constants(const GainMatrix& G, double psi_bar) {
  const Vec3& g = G.diagonal();
  const double s12 = g(0) + g(1), s23 = g(1) + g(2), s31 = g(2) + g(0);
  const double d12 = g(0) - g(1), d23 = g(1) - g(2), d31 = g(2) - g(0);

  BoundConstants k{};
  k.h1 = std::min({s12, s23, s31});
  k.h2 = std::max({d12 * d12, d23 * d23, d31 * d31});
  k.h3 = std::max({s12 * s12, s23 * s23, s31 * s31});
  k.h4 = std::max({s12, s23, s31});
  k.h5 = std::min({s12 * s12, s23 * s23, s31 * s31});
  if (!(psi_bar > 0.0) || !(psi_bar < k.h1)) {
    throw std::invalid_argument("bound_constants: psi_bar must lie in (0, h1)");
  }
  k.psi_bar = psi_bar;
  k.b1 = k.h1 / (k.h2 + k.h3);
  k.b2 = k.h1 * k.h4 / (k.h5 * (k.h1 - psi_bar));
  return k;
}

/// Default sublevel bound psi_bar = h1 / 2.
inline double default_psi_bar(const GainMatrix& G) {
  const Vec3& g = G.diagonal();
  return 0.5 * std::min({g(0) + g(1), g(1) + g(2), g(2) + g(0)});
}

/// ||E|| <= tr(G) / sqrt(2) for every (R, Rd).
inline double transport_bound(const Vec3& g) { return g.sum() / std::numbers::sqrt2; }
inline double transport_bound(const GainMatrix& G) { return transport_bound(G.diagonal()); }

struct ErrorState {
  double psi;
  Vec3 e_R;
  Vec3 e_Omega;
  Vec3 e_A;  // e_Omega + c e_R
  Mat3 E;
  Vec3 alpha_d;
};

inline ErrorState error_state(const Rotation& R, const Vec3& Omega, const Rotation& Rd,
                              const Vec3& Omega_d, const Vec3& Omega_d_dot,
                              const GainMatrix& G, double c) {
  ErrorState s;
  s.psi = psi(R, Rd, G);
  s.e_R = attitude_error_vector(R, Rd, G);
  s.e_Omega = angular_velocity_error(R, Omega, Rd, Omega_d);
  s.e_A = s.e_Omega + c * s.e_R;
  s.E = transport_matrix(R, Rd, G);
  s.alpha_d = feedforward_acceleration(R, Omega, Rd, Omega_d, Omega_d_dot);
  return s;
}

}  // namespace geoctl
