// Attitude commands: the 3-2-1 Euler schedule with analytic rates, and a
// finite-difference wrapper for commands given only as R_d(t).
#pragma once

#include "geoctl/so3.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace geoctl {

struct CommandSample {
  double t = 0.0;
  Rotation R_d;
  Vec3 Omega_d = Vec3::Zero();
  Vec3 Omega_d_dot = Vec3::Zero();
};

using CommandFn = std::function<CommandSample(double)>;

/// R = R_z(psi) R_y(theta) R_x(phi), body to inertial.
inline Rotation euler321_to_rotation(double phi, double theta, double psi) {
  const double cf = std::cos(phi), sf = std::sin(phi);
  const double ct = std::cos(theta), st = std::sin(theta);
  const double cp = std::cos(psi), sp = std::sin(psi);
  Mat3 Rx, Ry, Rz;
  Rx << 1, 0, 0, 0, cf, -sf, 0, sf, cf;
  Ry << ct, 0, st, 0, 1, 0, -st, 0, ct;
  Rz << cp, -sp, 0, sp, cp, 0, 0, 0, 1;
  return Rotation::unchecked(Rz * Ry * Rx);
}

/// Euler angles and their first two derivatives at one instant.
struct EulerKinematics {
  Vec3 angles;  // phi, theta, psi
  Vec3 rates;
  Vec3 accels;
};

/// Body angular velocity and acceleration of a 3-2-1 sequence.
inline void euler321_body_rates(const EulerKinematics& k, Vec3& omega, Vec3& omega_dot) {
  const double f = k.angles(0), th = k.angles(1);
  const double fd = k.rates(0), thd = k.rates(1), pd = k.rates(2);
  const double fdd = k.accels(0), thdd = k.accels(1), pdd = k.accels(2);
  const double cf = std::cos(f), sf = std::sin(f);
  const double ct = std::cos(th), st = std::sin(th);

  omega << fd - pd * st,
           thd * cf + pd * sf * ct,
           -thd * sf + pd * cf * ct;
  omega_dot << fdd - pdd * st - pd * thd * ct,
               thdd * cf - thd * fd * sf + pdd * sf * ct + pd * fd * cf * ct - pd * thd * sf * st,
               -thdd * sf - thd * fd * cf + pdd * cf * ct - pd * fd * sf * ct - pd * thd * cf * st;
}

/// phi = a_phi sin(w t), theta = a_theta cos(w t), psi = const.
struct EulerCommand {
  double amplitude_phi = std::numbers::pi / 9.0;
  double amplitude_theta = std::numbers::pi / 9.0;
  double frequency = std::numbers::pi;
  double psi_const = 0.0;

  void validate() const {
    if (!std::isfinite(amplitude_phi) || !std::isfinite(amplitude_theta) ||
        !std::isfinite(psi_const) || !std::isfinite(frequency)) {
      throw std::invalid_argument("EulerCommand: non-finite parameter");
    }
    if (!(frequency > 0.0)) throw std::invalid_argument("EulerCommand: frequency must be positive");
  }

  EulerKinematics kinematics(double t) const {
    const double w = frequency;
    const double s = std::sin(w * t), c = std::cos(w * t);
    EulerKinematics k;
    k.angles << amplitude_phi * s, amplitude_theta * c, psi_const;
    k.rates << amplitude_phi * w * c, -amplitude_theta * w * s, 0.0;
    k.accels << -amplitude_phi * w * w * s, -amplitude_theta * w * w * c, 0.0;
    return k;
  }

  CommandSample operator()(double t) const {
    const EulerKinematics k = kinematics(t);
    CommandSample out;
    out.t = t;
    out.R_d = euler321_to_rotation(k.angles(0), k.angles(1), k.angles(2));
    euler321_body_rates(k, out.Omega_d, out.Omega_d_dot);
    return out;
  }
};

/// The reference schedule phi = (pi/9) sin(pi t), theta = (pi/9) cos(pi t), psi = 0.
inline CommandSample paper_command(double t) {
  if (t < 0.0) throw std::invalid_argument("paper_command: t must be nonnegative");
  return EulerCommand{}(t);
}

/// Fixed attitude with zero rates.
inline CommandFn constant_command(const Rotation& R_d) {
  return [R_d](double t) {
    CommandSample s;
    s.t = t;
    s.R_d = R_d;
    return s;
  };
}

inline constexpr double kDefaultCommandFdStep = 1e-5;

/// Wraps R_d(t) into a full command. Omega_d is the vee of the skew part of
/// R_d^T (R_d(t+h) - R_d(t-h)) / 2h; Omega_d_dot the vee of the skew part of
/// R_d^T times the second central difference (R_d^T R_d'' = hat(dw) + hat(w)^2).
inline CommandFn numeric_command_wrapper(std::function<Rotation(double)> R_d_fn,
                                         double h_fd = kDefaultCommandFdStep) {
  if (!(h_fd > 0.0)) throw std::invalid_argument("numeric_command_wrapper: h_fd must be positive");
  return [fn = std::move(R_d_fn), h_fd](double t) {
    const Mat3 R0 = fn(t).matrix();
    const Mat3 Rp = fn(t + h_fd).matrix();
    const Mat3 Rm = fn(t - h_fd).matrix();
    if (!R0.allFinite() || !Rp.allFinite() || !Rm.allFinite()) {
      throw std::runtime_error("numeric_command_wrapper: non-finite attitude sample");
    }
    const Mat3 first = R0.transpose() * (Rp - Rm) / (2.0 * h_fd);
    const Mat3 second = R0.transpose() * (Rp - 2.0 * R0 + Rm) / (h_fd * h_fd);
    CommandSample s;
    s.t = t;
    s.R_d = Rotation::unchecked(R0);
    s.Omega_d = vee(first);
    s.Omega_d_dot = vee(second);
    return s;
  };
}

}  // namespace geoctl
