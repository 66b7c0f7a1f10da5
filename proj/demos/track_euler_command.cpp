// Closed-loop tracking of the Euler-angle command with the adaptive law,
// stepping the plant by hand instead of going through run_scenario().

#include "geoctl/controllers.hpp"
#include "geoctl/dynamics.hpp"
#include "geoctl/trajectory.hpp"

#include <cstdio>

int main() {
  using namespace geoctl;
  const InertiaMatrix J = inertia_from_paper();
  Gains gains;  // k_R = 0.0424, k_Omega = 0.0296, k_J = 0.1, c = 1
  const GainReport report = validate_gains(gains, std::nullopt, J.lambda_min(), J.lambda_max());
  std::printf("c = %.3f, c_max = %.3f, feasible: %s\n", gains.c, report.c_max,
              report.feasible ? "yes" : "no");

  BodyState x;
  EstimatorState est;
  const double h = 1e-3;
  for (int k = 0; k <= 10000; ++k) {
    const double t = k * h;
    const CommandSample cmd = paper_command(t);
    const Vec3 u = adaptive_control(x, cmd, gains, est);
    if (k % 1000 == 0) {
      const ErrorState e = tracking_errors(x, cmd, gains);
      std::printf("t = %4.1f  |e_R| = %.3e  |e_W| = %.3e  V = %.6e\n", t, e.e_R.norm(),
                  e.e_Omega.norm(), lyapunov_value(x, cmd, gains, est, J));
    }
    // Explicit Euler for the estimate, LGVI with a held moment for the plant.
    const Mat3 rate = adaptive_update_rate(x, cmd, gains, est);
    x = step_lgvi(x, u, Vec3::Zero(), J, h);
    est.J_bar += h * rate;
    est.resymmetrize();
  }
  return 0;
}
