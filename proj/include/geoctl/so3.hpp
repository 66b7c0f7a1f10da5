// Exact small-matrix geometry on SO(3): hat/vee, Rodrigues exp/log,
// polar projection and the 3x3 spectral norm.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace geoctl {

template <typename Scalar>
using Vec3T = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Mat3T = Eigen::Matrix<Scalar, 3, 3>;

using Vec3 = Vec3T<double>;
using Mat3 = Mat3T<double>;

/// Tolerance on the symmetric part accepted by vee() in strict mode.
inline constexpr double kVeeStrictTol = 1e-10;
/// Below this rotation angle exp/log switch to their Taylor series.
inline constexpr double kSmallAngle = 1e-8;
/// Orthogonality / determinant tolerance of a checked Rotation.
inline constexpr double kRotationTol = 1e-12;

template <typename Scalar>
Mat3T<Scalar> hat(const Vec3T<Scalar>& v) {
  Mat3T<Scalar> m;
  m << Scalar(0), -v(2), v(1),
       v(2), Scalar(0), -v(0),
       -v(1), v(0), Scalar(0);
  return m;
}

/// Inverse of hat(). Only the skew part of M is read; with strict = true a
/// symmetric part larger than kVeeStrictTol (max-abs) is rejected.
template <typename Scalar>
Vec3T<Scalar> vee(const Mat3T<Scalar>& M, bool strict = false) {
  if (strict) {
    const Mat3T<Scalar> sym = Scalar(0.5) * (M + M.transpose());
    if (sym.cwiseAbs().maxCoeff() > Scalar(kVeeStrictTol)) {
      throw std::invalid_argument("vee: matrix is not skew-symmetric");
    }
  }
  return Vec3T<Scalar>(Scalar(0.5) * (M(2, 1) - M(1, 2)),
                       Scalar(0.5) * (M(0, 2) - M(2, 0)),
                       Scalar(0.5) * (M(1, 0) - M(0, 1)));
}

inline Mat3 hat(const Vec3& v) { return hat<double>(v); }
inline Vec3 vee(const Mat3& M, bool strict = false) { return vee<double>(M, strict); }

/// Rodrigues' formula.
template <typename Scalar>
Mat3T<Scalar> exp_so3_matrix(const Vec3T<Scalar>& v) {
  using std::sin;
  const Scalar theta = v.norm();
  const Mat3T<Scalar> K = hat(v);
  Scalar a, b;  // sin(t)/t, (1-cos(t))/t^2
  if (theta < Scalar(kSmallAngle)) {
    const Scalar t2 = theta * theta;
    a = Scalar(1) - t2 / Scalar(6);
    b = Scalar(0.5) - t2 / Scalar(24);
  } else {
    const Scalar half = sin(Scalar(0.5) * theta) / theta;
    a = sin(theta) / theta;
    b = Scalar(2) * half * half;  // avoids the cancellation in 1 - cos(t)
  }
  return Mat3T<Scalar>::Identity() + a * K + b * K * K;
}

/// A 3x3 matrix on SO(3).
///
/// The checked constructor enforces ||R^T R - I||_F <= kRotationTol and
/// |det R - 1| <= kRotationTol. Integrator output that is orthogonal by
/// construction enters through unchecked().
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  explicit Rotation(const Mat3& m) : m_(m) {
    if (!m.allFinite()) throw std::invalid_argument("Rotation: non-finite entries");
    if (orthogonality_error() > kRotationTol ||
        std::abs(m.determinant() - 1.0) > kRotationTol) {
      throw std::invalid_argument("Rotation: matrix is not on SO(3)");
    }
  }

  static Rotation unchecked(const Mat3& m) {
    Rotation r;
    r.m_ = m;
    return r;
  }

  static Rotation identity() { return Rotation(); }

  const Mat3& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  Rotation inverse() const { return unchecked(m_.transpose()); }
  Rotation operator*(const Rotation& other) const { return unchecked(m_ * other.m_); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

  /// ||R^T R - I||_F
  double orthogonality_error() const {
    return (m_.transpose() * m_ - Mat3::Identity()).norm();
  }

 private:
  Mat3 m_;
};

inline Rotation exp_so3(const Vec3& v) { return Rotation::unchecked(exp_so3_matrix<double>(v)); }

namespace detail {

// Unit axis from the symmetric part of R when the angle is close to pi.
inline Vec3 axis_near_pi(const Mat3& R, double cos_theta) {
  const Mat3 B = 0.5 * (R + R.transpose()) - cos_theta * Mat3::Identity();
  // B = (1 - cos) n n^T; the largest diagonal entry gives the best column.
  int k = 0;
  B.diagonal().maxCoeff(&k);
  Vec3 n = B.col(k);
  return n / n.norm();
}

// At exactly pi both signs are valid: make the largest-magnitude component
// positive, ties broken by the lowest index.
inline Vec3 canonical_sign(Vec3 n) {
  int k = 0;
  double best = std::abs(n(0));
  for (int i = 1; i < 3; ++i) {
    if (std::abs(n(i)) > best) {
      best = std::abs(n(i));
      k = i;
    }
  }
  return n(k) < 0 ? Vec3(-n) : n;
}

}  // namespace detail

/// Principal logarithm; the result has norm in [0, pi].
inline Vec3 log_so3(const Rotation& rot) {
  const Mat3& R = rot.matrix();
  const Vec3 w(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));  // 2 sin(t) n
  const double s = 0.5 * w.norm();
  const double c = std::clamp(0.5 * (R.trace() - 1.0), -1.0, 1.0);
  const double theta = std::atan2(s, c);

  if (theta < kSmallAngle) {
    return 0.5 * (1.0 + theta * theta / 6.0) * w;
  }
  if (c > -0.9) {
    return (0.5 * theta / s) * w;
  }
  Vec3 n = detail::axis_near_pi(R, c);
  const double proj = n.dot(w);
  if (std::abs(proj) > 1e-15) {
    if (proj < 0) n = -n;
  } else {
    n = detail::canonical_sign(n);
  }
  return theta * n;
}

/// Closed-form eigenvalues of a symmetric 3x3 matrix, ascending.
inline std::array<double, 3> symmetric_eigenvalues(const Mat3& A) {
  const Mat3 S = 0.5 * (A + A.transpose());
  const double p1 = S(0, 1) * S(0, 1) + S(0, 2) * S(0, 2) + S(1, 2) * S(1, 2);
  const double q = S.trace() / 3.0;
  if (p1 == 0.0) {
    std::array<double, 3> e{S(0, 0), S(1, 1), S(2, 2)};
    std::sort(e.begin(), e.end());
    return e;
  }
  const double p2 = (S(0, 0) - q) * (S(0, 0) - q) + (S(1, 1) - q) * (S(1, 1) - q) +
                    (S(2, 2) - q) * (S(2, 2) - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  const Mat3 B = (S - q * Mat3::Identity()) / p;
  const double r = std::clamp(0.5 * B.determinant(), -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double e_max = q + 2.0 * p * std::cos(phi);
  const double e_min = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  const double e_mid = 3.0 * q - e_max - e_min;
  std::array<double, 3> e{e_min, e_mid, e_max};
  std::sort(e.begin(), e.end());
  return e;
}

/// Largest singular value, sqrt(lambda_max(M^T M)).
inline double spectral_norm(const Mat3& M) {
  const auto e = symmetric_eigenvalues(M.transpose() * M);
  return std::sqrt(std::max(e[2], 0.0));
}

/// Closest rotation in Frobenius norm (orthogonal polar factor).
inline Rotation project_to_so3(const Mat3& M) {
  if (!M.allFinite()) throw std::invalid_argument("project_to_so3: non-finite matrix");
  if (!(M.determinant() > 0.0)) {
    throw std::invalid_argument("project_to_so3: det(M) <= 0");
  }
  Eigen::JacobiSVD<Mat3> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return Rotation::unchecked(svd.matrixU() * svd.matrixV().transpose());
}

}  // namespace geoctl
