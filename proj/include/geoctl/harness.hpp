// Closed-loop simulation driver: scenarios, disturbance models, time-series
// recording, metrics and CSV / key-value export.
#pragma once

#include "geoctl/attitude_error.hpp"
#include "geoctl/controllers.hpp"
#include "geoctl/dynamics.hpp"
#include "geoctl/trajectory.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace geoctl {

enum class CaseId { adaptive_no_dist, adaptive_with_dist, robust_with_dist, custom };
enum class ControllerKind { adaptive, robust };

inline std::string to_string(CaseId c) {
  switch (c) {
    case CaseId::adaptive_no_dist: return "adaptive_no_dist";
    case CaseId::adaptive_with_dist: return "adaptive_with_dist";
    case CaseId::robust_with_dist: return "robust_with_dist";
    case CaseId::custom: return "custom";
  }
  return "custom";
}

inline std::string to_string(ControllerKind k) {
  return k == ControllerKind::adaptive ? "adaptive" : "robust";
}

/// 0.1 (sin 2 pi t, cos 5 pi t, R_11) N m, scaled by `amplitude / 0.1`.
inline Vec3 paper_disturbance(double t, const Rotation& R, double amplitude = 0.1) {
  if (t < 0.0) throw std::invalid_argument("paper_disturbance: t must be nonnegative");
  return amplitude * Vec3(std::sin(2.0 * std::numbers::pi * t),
                          std::cos(5.0 * std::numbers::pi * t), R(0, 0));
}

struct NoDisturbance {};
struct PaperDisturbance {
  double amplitude = 0.1;
};
struct ConstantDisturbance {
  Vec3 value = Vec3::Zero();
};
using DisturbanceSpec = std::variant<NoDisturbance, PaperDisturbance, ConstantDisturbance>;

inline Vec3 evaluate_disturbance(const DisturbanceSpec& d, double t, const Rotation& R) {
  if (std::holds_alternative<PaperDisturbance>(d)) {
    return paper_disturbance(t, R, std::get<PaperDisturbance>(d).amplitude);
  }
  if (std::holds_alternative<ConstantDisturbance>(d)) return std::get<ConstantDisturbance>(d).value;
  return Vec3::Zero();
}

struct ConstantCommand {
  Rotation R_d;
};
using CommandSpec = std::variant<EulerCommand, ConstantCommand>;

inline CommandSample evaluate_command(const CommandSpec& c, double t) {
  if (std::holds_alternative<EulerCommand>(c)) return std::get<EulerCommand>(c)(t);
  CommandSample s;
  s.t = t;
  s.R_d = std::get<ConstantCommand>(c).R_d;
  return s;
}

struct Scenario {
  CaseId case_id = CaseId::adaptive_no_dist;
  ControllerKind controller = ControllerKind::adaptive;
  double duration = 10.0;
  IntegratorConfig integrator;  // integrator.step_size is the integration step
  int output_every = 10;
  double settle = 5.0;
  Gains gains;
  std::optional<RobustParams> robust;
  std::optional<double> psi_bar;
  InertiaMatrix J_true = inertia_from_paper();
  Mat3 J_bar0 = 1e-3 * Mat3::Identity();
  Rotation R0;
  Vec3 Omega0 = Vec3::Zero();
  CommandSpec command = EulerCommand{};
  DisturbanceSpec disturbance = NoDisturbance{};
  std::uint64_t seed = 0;

  double step() const { return integrator.step_size; }
  long step_count() const { return std::lround(duration / step()); }

  void validate() const {
    if (!(duration > 0.0)) throw std::invalid_argument("Scenario: duration must be positive");
    integrator.validate();
    if (output_every < 1) throw std::invalid_argument("Scenario: output_every must be >= 1");
    const double n = duration / step();
    if (std::abs(n - std::round(n)) > 1e-9 * n) {
      throw std::invalid_argument("Scenario: step must divide duration");
    }
    if (step_count() % output_every != 0) {
      throw std::invalid_argument("Scenario: output cadence must divide the step count");
    }
    if (!(settle >= 0.0 && settle < duration)) {
      throw std::invalid_argument("Scenario: settle must lie in [0, duration)");
    }
    gains.validate();
    if (controller == ControllerKind::robust && !robust) {
      throw std::invalid_argument("Scenario: robust controller requires robust parameters");
    }
    if (robust) robust->validate();
    if ((J_bar0 - J_bar0.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw std::invalid_argument("Scenario: J_bar0 must be symmetric");
    }
    if (std::holds_alternative<EulerCommand>(command)) std::get<EulerCommand>(command).validate();
  }
};

/// One recorded output sample.
struct TimeSeriesRow {
  double t;
  Mat3 R;
  Vec3 Omega;
  Mat3 R_d;
  Vec3 Omega_d;
  Vec3 e_R;
  Vec3 e_Omega;
  double psi;
  Vec3 u;
  Vec3 delta;
  Mat3 J_bar;
  double V;
  double J_tilde_F;
};

struct TimeSeries {
  std::vector<TimeSeriesRow> rows;
};

/// Everything known at one integration step, handed to an optional observer.
struct StepRecord {
  long index;
  double t;
  BodyState state;
  Mat3 J_bar;
  CommandSample cmd;
  ErrorState errors;
  Vec3 u;
  Vec3 v;  // robust term, zero for the adaptive law
  Vec3 delta;
  double V;
};
using StepObserver = std::function<void(const StepRecord&)>;

struct Metrics {
  double final_eR = 0.0;
  double final_eOmega = 0.0;
  double max_eR_after_settle = 0.0;
  long V_violations = 0;
  std::optional<double> ultimate_bound_margin;  // bound - max ||z||^2 after first entry
};

/// Thrown by run_scenario when the gain conditions fail and no override is set.
class GainInfeasible : public std::runtime_error {
 public:
  explicit GainInfeasible(GainReport r)
      : std::runtime_error(violation_text(r)), report(std::move(r)) {}
  GainReport report;

 private:
  static std::string violation_text(const GainReport& r) {
    std::string s = "gain conditions violated:";
    for (const auto& v : r.violations) s += " " + v + ";";
    return s;
  }
};

inline GainReport scenario_gain_report(const Scenario& s) {
  return validate_gains(s.gains,
                        s.controller == ControllerKind::robust ? s.robust : std::nullopt,
                        s.J_true.lambda_min(), s.J_true.lambda_max(), s.psi_bar);
}

namespace detail {

class ClosedLoop {
 public:
  explicit ClosedLoop(const Scenario& s) : s_(s) {}

  struct Eval {
    CommandSample cmd;
    ErrorState e;
    Vec3 u;
    Vec3 v;
    Vec3 delta;
    Mat3 rate;
  };

  Eval evaluate(double t, const BodyState& x, const Mat3& J_bar) const {
    Eval ev;
    ev.cmd = evaluate_command(s_.command, t);
    ev.e = tracking_errors(x, ev.cmd, s_.gains);
    ev.u = adaptive_control(x, ev.e, s_.gains, J_bar);
    ev.v = Vec3::Zero();
    ev.rate = adaptive_update_rate(x, ev.e, s_.gains);
    if (s_.controller == ControllerKind::robust) {
      ev.v = robust_term(ev.e.e_A, *s_.robust);
      ev.u += ev.v;
      ev.rate -= s_.gains.k_J * s_.robust->sigma * J_bar;
    }
    ev.delta = evaluate_disturbance(s_.disturbance, t, x.R);
    return ev;
  }

  double lyapunov(const BodyState& x, const Eval& ev, const Mat3& J_bar) const {
    const Mat3& J = s_.J_true.matrix();
    const Vec3 JeW = J * ev.e.e_Omega;
    const double Jt = (J - J_bar).norm();
    return 0.5 * ev.e.e_Omega.dot(JeW) + s_.gains.k_R * ev.e.psi +
           s_.gains.c * JeW.dot(ev.e.e_R) + Jt * Jt / (2.0 * s_.gains.k_J);
  }

  // Second-order step: LGVI for the plant, trapezoidal rule for J_bar. The
  // end-of-step moment is evaluated once at the predicted state.
  void step_lgvi(double t, BodyState& x, Mat3& J_bar, const Eval& ev) const {
    const double h = s_.step();
    const InertiaMatrix& J = s_.J_true;
    const Vec3 M_k = ev.u + ev.delta;
    const LgviStage st = lgvi_rotation_stage(x, M_k, J, h, s_.integrator.newton_tol,
                                             s_.integrator.newton_max_iter);
    const BodyState pred = lgvi_finish(x, st, M_k, J, h);
    const Mat3 J_pred = J_bar + h * ev.rate;
    const Eval ev_next = evaluate(t + h, pred, J_pred);
    const BodyState next = lgvi_finish(x, st, ev_next.u + ev_next.delta, J, h);
    const Mat3 rate_next = evaluate(t + h, next, J_pred).rate;
    J_bar = J_bar + 0.5 * h * (ev.rate + rate_next);
    J_bar = 0.5 * (J_bar + J_bar.transpose());
    x = next;
  }

  // Classical RK4 on (R, Omega, J_bar) with continuous control, R projected.
  void step_rk4(double t, BodyState& x, Mat3& J_bar) const {
    const double h = s_.step();
    struct D {
      Mat3 R;
      Vec3 W;
      Mat3 Jb;
    };
    const auto f = [&](double tt, const Mat3& R, const Vec3& W, const Mat3& Jb) {
      const BodyState bs{Rotation::unchecked(R), W};
      const Eval ev = evaluate(tt, bs, Jb);
      const BodyRates r = body_dynamics_rhs(bs, ev.u, ev.delta, s_.J_true);
      return D{R * hat(W), r.Omega_dot, ev.rate};
    };
    const Mat3& R0 = x.R.matrix();
    const D k1 = f(t, R0, x.Omega, J_bar);
    const D k2 = f(t + 0.5 * h, R0 + 0.5 * h * k1.R, x.Omega + 0.5 * h * k1.W, J_bar + 0.5 * h * k1.Jb);
    const D k3 = f(t + 0.5 * h, R0 + 0.5 * h * k2.R, x.Omega + 0.5 * h * k2.W, J_bar + 0.5 * h * k2.Jb);
    const D k4 = f(t + h, R0 + h * k3.R, x.Omega + h * k3.W, J_bar + h * k3.Jb);
    const Mat3 R1 = R0 + (h / 6.0) * (k1.R + 2.0 * k2.R + 2.0 * k3.R + k4.R);
    const Vec3 W1 = x.Omega + (h / 6.0) * (k1.W + 2.0 * k2.W + 2.0 * k3.W + k4.W);
    Mat3 J1 = J_bar + (h / 6.0) * (k1.Jb + 2.0 * k2.Jb + 2.0 * k3.Jb + k4.Jb);
    if (!R1.allFinite() || !W1.allFinite() || !J1.allFinite()) {
      throw IntegrationError("RK4: non-finite state");
    }
    if (!(R1.determinant() > 0.0)) throw IntegrationError("RK4: projection failed, step too large");
    x = BodyState{project_to_so3(R1), W1};
    J_bar = 0.5 * (J1 + J1.transpose());
  }

 private:
  const Scenario& s_;
};

}  // namespace detail

/// Step-indexed integration failure.
class ScenarioIntegrationError : public IntegrationError {
 public:
  ScenarioIntegrationError(long step, const std::string& what)
      : IntegrationError("step " + std::to_string(step) + ": " + what), step_index(step) {}
  long step_index;
};

/// Propagates the closed loop and records every `output_every`-th step.
/// Deterministic: identical scenarios give bit-identical series.
inline TimeSeries run_scenario(const Scenario& s, const StepObserver& observer = {}) {
  s.validate();
  const GainReport report = scenario_gain_report(s);
  if (!report.feasible && !s.gains.override_c_condition) throw GainInfeasible(report);

  const detail::ClosedLoop loop(s);
  const long n = s.step_count();
  const double h = s.step();
  BodyState x{s.R0, s.Omega0};
  Mat3 J_bar = 0.5 * (s.J_bar0 + s.J_bar0.transpose());

  TimeSeries ts;
  ts.rows.reserve(static_cast<std::size_t>(n / s.output_every + 1));
  for (long k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * h;
    const detail::ClosedLoop::Eval ev = loop.evaluate(t, x, J_bar);
    const double V = loop.lyapunov(x, ev, J_bar);
    if (!std::isfinite(V) || !ev.u.allFinite()) {
      throw ScenarioIntegrationError(k, "non-finite state");
    }
    if (observer) observer(StepRecord{k, t, x, J_bar, ev.cmd, ev.e, ev.u, ev.v, ev.delta, V});
    if (k % s.output_every == 0) {
      ts.rows.push_back(TimeSeriesRow{t, x.R.matrix(), x.Omega, ev.cmd.R_d.matrix(),
                                      ev.cmd.Omega_d, ev.e.e_R, ev.e.e_Omega, ev.e.psi, ev.u,
                                      ev.delta, J_bar, V, (s.J_true.matrix() - J_bar).norm()});
    }
    if (k == n) break;
    try {
      if (s.integrator.method == IntegratorMethod::lgvi) {
        loop.step_lgvi(t, x, J_bar, ev);
      } else {
        loop.step_rk4(t, x, J_bar);
      }
    } catch (const IntegrationError& err) {
      throw ScenarioIntegrationError(k, err.what());
    }
  }
  return ts;
}

/// Summary metrics. A V increase counts as a violation when
/// V(t_{i+1}) > V(t_i) + v_tol.
inline Metrics compute_metrics(const TimeSeries& ts, double settle,
                               std::optional<double> ultimate_bound = std::nullopt,
                               double v_tol = 1e-12) {
  Metrics m;
  if (ts.rows.empty()) return m;
  if (!(settle < ts.rows.back().t) && ts.rows.size() > 1) {
    throw std::invalid_argument("compute_metrics: settle must be less than the duration");
  }
  m.final_eR = ts.rows.back().e_R.norm();
  m.final_eOmega = ts.rows.back().e_Omega.norm();
  for (std::size_t i = 0; i < ts.rows.size(); ++i) {
    const auto& r = ts.rows[i];
    if (r.t >= settle) m.max_eR_after_settle = std::max(m.max_eR_after_settle, r.e_R.norm());
    if (i > 0 && r.V > ts.rows[i - 1].V + v_tol) ++m.V_violations;
  }
  if (ultimate_bound) {
    bool entered = false;
    double worst = 0.0;
    for (const auto& r : ts.rows) {
      const double z2 = r.e_R.squaredNorm() + r.e_Omega.squaredNorm() + r.J_tilde_F * r.J_tilde_F;
      if (!entered && z2 <= *ultimate_bound) entered = true;
      if (entered) worst = std::max(worst, z2);
    }
    m.ultimate_bound_margin = entered ? *ultimate_bound - worst : -1.0;
  }
  return m;
}

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c{"t"};
    for (int i = 1; i <= 3; ++i)
      for (int j = 1; j <= 3; ++j) c.push_back("R" + std::to_string(i) + std::to_string(j));
    for (const char* n : {"Wx", "Wy", "Wz"}) c.emplace_back(n);
    for (int i = 1; i <= 3; ++i)
      for (int j = 1; j <= 3; ++j) c.push_back("Rd" + std::to_string(i) + std::to_string(j));
    for (const char* n : {"Wdx", "Wdy", "Wdz", "eRx", "eRy", "eRz", "eWx", "eWy", "eWz", "Psi",
                          "ux", "uy", "uz", "Dx", "Dy", "Dz", "Jb11", "Jb12", "Jb13", "Jb22",
                          "Jb23", "Jb33", "V", "Jtilde_F"}) {
      c.emplace_back(n);
    }
    return c;
  }();
  return cols;
}

/// CSV with a fixed header; every value printed with 17 significant digits.
inline void write_csv(std::ostream& os, const TimeSeries& ts) {
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << "\n";
  char buf[40];
  std::string line;
  for (const auto& r : ts.rows) {
    line.clear();
    const auto put = [&](double v) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      if (!line.empty()) line += ',';
      line += buf;
    };
    put(r.t);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) put(r.R(i, j));
    for (int i = 0; i < 3; ++i) put(r.Omega(i));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) put(r.R_d(i, j));
    for (int i = 0; i < 3; ++i) put(r.Omega_d(i));
    for (int i = 0; i < 3; ++i) put(r.e_R(i));
    for (int i = 0; i < 3; ++i) put(r.e_Omega(i));
    put(r.psi);
    for (int i = 0; i < 3; ++i) put(r.u(i));
    for (int i = 0; i < 3; ++i) put(r.delta(i));
    put(r.J_bar(0, 0));
    put(r.J_bar(0, 1));
    put(r.J_bar(0, 2));
    put(r.J_bar(1, 1));
    put(r.J_bar(1, 2));
    put(r.J_bar(2, 2));
    put(r.V);
    put(r.J_tilde_F);
    os << line << "\n";
  }
}

inline std::string metrics_kv(const Metrics& m) {
  std::ostringstream os;
  os.precision(17);
  os << "final_eR=" << m.final_eR << "\n";
  os << "final_eOmega=" << m.final_eOmega << "\n";
  os << "max_eR_after_settle=" << m.max_eR_after_settle << "\n";
  os << "V_violations=" << m.V_violations << "\n";
  if (m.ultimate_bound_margin) os << "ultimate_bound_margin=" << *m.ultimate_bound_margin << "\n";
  return os.str();
}

/// The three reference cases: reference inertia,
/// k_R = 0.0424, k_Omega = 0.0296, k_J = 0.1, c = 1, J_bar(0) = 0.001 I,
/// R(0) = I, Omega(0) = 0 and the Euler schedule. The robust case uses
/// sigma = 0.01, epsilon = 0.002, delta = 0.2; its d1 < d2 condition does
/// not hold for these values, so it runs with the gain override set.
inline Scenario paper_scenario(CaseId id) {
  Scenario s;
  s.case_id = id;
  s.gains.c = 1.0;
  switch (id) {
    case CaseId::adaptive_no_dist:
      break;
    case CaseId::adaptive_with_dist:
      s.disturbance = PaperDisturbance{};
      break;
    case CaseId::robust_with_dist:
      s.controller = ControllerKind::robust;
      s.robust = RobustParams{};
      s.disturbance = PaperDisturbance{};
      s.gains.override_c_condition = true;
      break;
    case CaseId::custom:
      throw std::invalid_argument("paper_scenario: custom has no reference parameters");
  }
  return s;
}

}  // namespace geoctl
