#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "desitter/bulk_geometry.hpp"
#include "desitter/dynamics.hpp"

namespace desitter {

/// Componentwise angular-momentum drift over a trajectory.
struct LDrift {
  std::array<double, BulkBivector::kComponents> absolute{};
  /// absolute / max(1, |L^{AB}(s0)|)
  std::array<double, BulkBivector::kComponents> relative{};
  double max_absolute = 0.0;
  double max_relative = 0.0;
};

/// Requires at least two samples.
LDrift l_drift(const Trajectory& traj);

/// R^{kl} = x^k (Omega^2 (x.u) u^l / ell^2 + Omega a^l) - (k <-> l), the
/// constant-angular-momentum equation of motion restricted to the chart block.
using AntisymmetricMatrix4 = std::array<std::array<double, 4>, 4>;
AntisymmetricMatrix4 mac_residual(const ChartState& state, const ChartVector& acceleration);
/// Same with the acceleration from the geodesic equation.
AntisymmetricMatrix4 mac_residual(const ChartState& state);

/// R^b = -(2 Omega - 1)(a^b + Omega (x.u) u^b / ell^2)
///       + (Omega/2ell^2)(Omega (x.u)^2 / ell^2 + u.u + x.a) x^b,
/// the (mu, 4) block of the same equations.
ChartVector maca_residual(const ChartState& state, const ChartVector& acceleration);
ChartVector maca_residual(const ChartState& state);

/// Largest |entry| over samples that carry chart data and an acceleration;
/// nullopt if there are none.
std::optional<double> max_mac_residual(const Trajectory& traj);
std::optional<double> max_maca_residual(const Trajectory& traj);

/// Max over interior chart samples of the geodesic-equation residual, with
/// d^2x/ds^2 taken from three-point differences of the sampled velocities.
/// Throws InsufficientSamples with fewer than three usable samples.
double geodesic_residual(const Trajectory& traj);

/// Largest parameter spacing between consecutive samples.
double max_spacing(const Trajectory& traj);

/// Least-squares slope of log(err) against log(h). Requires at least three
/// points with strictly decreasing h; throws DegenerateFit if any err is 0.
double convergence_order(std::span<const std::pair<double, double>> errors);

/// Least-squares slope of log(y) against log(x) without ordering requirements.
double log_log_slope(std::span<const std::pair<double, double>> points);

/// Max over matching samples of |x_a - x_b| and |u_a - u_b| (max norm). The
/// trajectories must share their parameter grid.
double chart_agreement(const Trajectory& a, const Trajectory& b);

/// Max over samples of |x(s) - (x(s0) + u(s0)(s - s0))|.
double straight_line_deviation(const Trajectory& traj);

struct ConservationReport {
  LDrift l_drift;
  double norm_drift = 0.0;
  double max_constraint_residual = 0.0;
  std::optional<double> mac_residual;
  std::optional<double> maca_residual;
  std::optional<double> geodesic_residual;
  double s0 = 0.0;
  double s1 = 0.0;
  std::size_t samples = 0;
  IntegratorConfig config;
  Flow flow = Flow::Intrinsic;
};

ConservationReport conservation_report(const Trajectory& traj);

/// Geodesic residual of the analytic solution through the trajectory's initial
/// bulk state, sampled on the trajectory's own parameter grid. This is the
/// three-point finite-difference floor C ds^2 against which integrated
/// trajectories are judged.
double calibrated_fd_floor(const Trajectory& traj);

/// Pass thresholds for the conservation checks, pinned per integrator setting.
struct VerifyThresholds {
  double l_drift_relative = 1e-8;
  double norm_drift = 1e-8;
  double mac_residual = 1e-9;
  double maca_residual = 1e-9;
  /// Integrated residual may exceed the analytic floor by this factor.
  double fd_floor_slack = 1.05;
  double agreement = 1e-7;
};

/// Rk4 uses the fixed values above. DormandPrince45 scales with
/// tol = max(abs_tol, rel_tol): 100 tol for drifts and 1000 tol for agreement,
/// never tighter than the Rk4 values.
VerifyThresholds thresholds_for(const IntegratorConfig& cfg);

/// Parametric chart curve with its exact velocity and acceleration.
struct ChartCurve {
  std::function<ChartVector(double)> position;
  std::function<ChartVector(double)> velocity;
  std::function<ChartVector(double)> acceleration;
};

/// Samples a chart curve on [s0, s1] with spacing ds into a trajectory whose
/// samples carry the curve's own acceleration.
Trajectory trajectory_from_chart_curve(const ChartCurve& curve, double ell, double mass, double s0, double s1,
                                       double ds);

}  // namespace desitter
