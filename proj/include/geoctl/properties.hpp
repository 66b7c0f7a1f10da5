// Seeded randomized checks of the hat-map identities, the error-function
// bounds and the robust-term inequality. Used by `geoctl properties`.
#pragma once

#include "geoctl/attitude_error.hpp"
#include "geoctl/controllers.hpp"
#include "geoctl/dynamics.hpp"
#include "geoctl/so3.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace geoctl {

struct PropertyResult {
  std::string name;
  long cases = 0;
  long failures = 0;
  double worst = 0.0;  // largest residual, or largest bound excess
  bool passed() const { return failures == 0; }
};

/// Deterministic sampler for vectors, matrices and rotations.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  Vec3 vec3(double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    return {n(rng_), n(rng_), n(rng_)};
  }
  Mat3 mat3(double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Mat3 m;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = n(rng_);
    return m;
  }
  /// Uniform (Haar) rotation.
  Rotation rotation() {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Quaterniond q(n(rng_), n(rng_), n(rng_), n(rng_));
    q.normalize();
    return project_to_so3(q.toRotationMatrix());
  }
  /// Rotation with angle in [0, max_angle] about a uniform axis.
  Rotation rotation_with_max_angle(double max_angle) {
    Vec3 axis = vec3();
    axis.normalize();
    return exp_so3(uniform(0.0, max_angle) * axis);
  }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

namespace detail {

inline void record(PropertyResult& r, double residual, double tol) {
  ++r.cases;
  r.worst = std::max(r.worst, residual);
  if (!(residual <= tol)) ++r.failures;
}

}  // namespace detail

inline std::vector<PropertyResult> run_property_suite(std::uint64_t seed, long cases) {
  Sampler s(seed);
  const GainMatrix G = GainMatrix::standard();
  const BoundConstants bc = bound_constants(G, default_psi_bar(G));
  std::vector<PropertyResult> out;

  PropertyResult anti{"hat(x) y = -hat(y) x"}, trace{"tr[A hat(x)] = -x.(A - A^T)^vee"},
      sym{"hat(x) A + A^T hat(x) = ((tr A I - A) x)^"}, conj{"R hat(x) R^T = (R x)^"},
      explog{"exp(log(R)) = R"};
  for (long i = 0; i < cases; ++i) {
    const Vec3 x = s.vec3(), y = s.vec3();
    const Mat3 A = s.mat3();
    const Rotation R = s.rotation();
    detail::record(anti, (hat(x) * y + hat(y) * x).cwiseAbs().maxCoeff(), 1e-12);
    // (A - A^T)^vee with the component convention of vee(): twice vee(A).
    detail::record(trace, std::abs((A * hat(x)).trace() + x.dot(2.0 * vee(A))), 1e-12);
    detail::record(sym, (hat(x) * A + A.transpose() * hat(x) -
                         hat(Vec3((A.trace() * Mat3::Identity() - A) * x)))
                            .cwiseAbs()
                            .maxCoeff(),
                   1e-12);
    detail::record(conj, (R.matrix() * hat(x) * R.matrix().transpose() - hat(Vec3(R * x)))
                             .cwiseAbs()
                             .maxCoeff(),
                   1e-12);
    const Rotation Q = s.rotation_with_max_angle(std::numbers::pi - 1e-3);
    detail::record(explog, (exp_so3(log_so3(Q)).matrix() - Q.matrix()).cwiseAbs().maxCoeff(), 1e-9);
  }
  out.insert(out.end(), {anti, trace, sym, conj, explog});

  PropertyResult lower{"b1 ||e_R||^2 <= Psi"}, upper{"Psi <= b2 ||e_R||^2 when Psi < psi_bar"},
      ebound{"||E|| <= tr(G)/sqrt(2)"}, trbound{"tr[R^T Rd G] <= tr(G)"};
  for (long i = 0; i < cases; ++i) {
    const Rotation R = s.rotation(), Rd = s.rotation();
    const double p = psi(R, Rd, G);
    const double e2 = attitude_error_vector(R, Rd, G).squaredNorm();
    detail::record(lower, bc.b1 * e2 - p, 1e-15);
    if (p < bc.psi_bar) detail::record(upper, p - bc.b2 * e2, 1e-15);
    detail::record(ebound, spectral_norm(transport_matrix(R, Rd, G)) - transport_bound(G), 1e-12);
    detail::record(trbound,
                   (R.matrix().transpose() * Rd.matrix() * G.matrix()).trace() - G.trace(), 1e-12);
  }
  out.insert(out.end(), {lower, upper, ebound, trbound});

  // Robust term against the worst admissible disturbance, and the leakage
  // inequality tr[J~ J_bar] <= -||J~||^2/2 + 3/2 lambda_M^2.
  PropertyResult robust{"e_A.(Delta + v) <= epsilon, ||v|| <= delta"},
      leak{"tr[J~ J_bar] <= -||J~||_F^2/2 + 3/2 lambda_M^2"};
  const RobustParams rp;
  const InertiaMatrix J = inertia_from_paper();
  for (long i = 0; i < cases; ++i) {
    const Vec3 eA = s.vec3(std::pow(10.0, s.uniform(-6.0, 1.0)));
    const Vec3 v = detail::robust_term(eA, rp);
    const Vec3 worst = eA.norm() > 0 ? Vec3(rp.delta_bound * eA.normalized()) : Vec3::Zero();
    const double excess = std::max(eA.dot(worst + v) - rp.epsilon, v.norm() - rp.delta_bound);
    detail::record(robust, excess, 1e-12);

    const Mat3 M = s.mat3(0.05);
    const Mat3 J_bar = 0.5 * (M + M.transpose());
    const Mat3 Jt = J.matrix() - J_bar;
    const double lhs = (Jt * J_bar).trace();
    const double rhs = -0.5 * Jt.squaredNorm() + 1.5 * J.lambda_max() * J.lambda_max();
    detail::record(leak, lhs - rhs, 1e-15);
  }
  out.insert(out.end(), {robust, leak});
  return out;
}

}  // namespace geoctl
