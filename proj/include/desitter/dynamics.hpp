#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "desitter/bulk_geometry.hpp"
#include "desitter/chart.hpp"
#include "desitter/ode.hpp"
#include "desitter/vector.hpp"

namespace desitter {

/// Chart position and velocity dx^mu/ds.
struct ChartState {
  ChartPoint point;
  ChartVector velocity;
};

/// Bulk position X and velocity dX/ds.
struct BulkState {
  BulkVector position;
  BulkVector velocity;
};

struct ChartDerivative {
  ChartVector velocity;
  ChartVector acceleration;
};

struct BulkDerivative {
  BulkVector velocity;
  BulkVector acceleration;
};

/// d^2x^a/ds^2 = -(Omega/ell^2)(x_m u^m) u^a + (Omega/2ell^2)(u_m u^m) x^a.
ChartVector geodesic_acceleration(const ChartState& state);

/// (dx/ds, d^2x/ds^2) of the chart geodesic equation.
ChartDerivative geodesic_rhs(const ChartState& state);

/// Constant bulk angular momentum on the brane forces X'' = lambda X with
/// lambda = <V,V>/ell^2. Throws ConstraintViolated when the state is off the
/// brane or V is not tangent beyond `tol` (relative).
BulkDerivative bulk_constrained_rhs(const BulkState& state, double ell, double tol = 1e-6);

/// Relative violations of <X,X> = -ell^2 and <X,V> = 0.
struct ConstraintError {
  double position = 0.0;
  double tangency = 0.0;
};
ConstraintError constraint_error(const BulkState& state, double ell);

/// Rescales X onto the pseudo-sphere and removes the normal part of V.
BulkState project_onto_brane(const BulkState& state, double ell);

/// Closed-form solution of X'' = (<V0,V0>/ell^2) X through the initial state:
/// hyperbolic for timelike V0, trigonometric for spacelike V0, linear for null.
BulkState analytic_bulk_geodesic(const BulkState& init, double ell, double s);

BulkState chart_to_bulk(const ChartState& state);
ChartState bulk_to_chart(const BulkState& state, double ell);

enum class Flow { Intrinsic, Bulk };
const char* to_string(Flow f);

enum class TrajectoryStatus { Completed, SingularityReached, MaxStepsExceeded, NumericalFailure };
const char* to_string(TrajectoryStatus s);

/// One recorded point of a trajectory with its diagnostics.
struct Sample {
  double s = 0.0;
  /// Absent when the bulk point has no conformal coordinates.
  std::optional<ChartState> chart;
  /// Chart acceleration actually driving the motion at this sample.
  std::optional<ChartVector> chart_acceleration;
  BulkState bulk;
  BulkBivector angular_momentum;
  /// g(u,u) for the chart flow, <V,V> for the bulk flow.
  double norm = 0.0;
  double constraint_residual = 0.0;
  /// max_AB |L^{AB}(s') - L^{AB}(s0)| over s' <= s.
  double max_l_drift = 0.0;
};

struct Trajectory {
  Flow flow = Flow::Intrinsic;
  double ell = 1.0;
  double mass = 1.0;
  IntegratorConfig config;
  std::vector<Sample> samples;
  TrajectoryStatus status = TrajectoryStatus::Completed;
  std::string message;
  std::size_t steps = 0;

  bool completed() const { return status == TrajectoryStatus::Completed; }
};

/// Extra chart acceleration added to the geodesic equation (test fixtures and
/// negative controls).
using ExternalAcceleration = std::function<ChartVector(double s, const ChartState&)>;

/// Below this |Omega| an intrinsic run counts as escaping to coordinate
/// infinity (the cone X^4 = ell, where ell - X^4 = 2 ell Omega).
inline constexpr double kChartEscapeEps = 1e-6;

/// Integrates the chart geodesic equation. Stops with SingularityReached,
/// keeping the partial trajectory, when 1 - sigma^2/4ell^2 would reach zero or
/// change sign, or when |Omega| drops below kChartEscapeEps.
Trajectory integrate_intrinsic(const ChartState& init, double mass, const IntegratorConfig& cfg,
                               const ExternalAcceleration& forcing = {});

/// Integrates X'' = (<V,V>/ell^2) X in the bulk.
Trajectory integrate_bulk(const BulkState& init, double ell, double mass, const IntegratorConfig& cfg);

/// Samples analytic_bulk_geodesic at the given parameters.
Trajectory sample_analytic_geodesic(const BulkState& init, double ell, double mass,
                                    std::span<const double> s_values);

/// Builds a sample from a chart state (bulk state via chart_to_bulk).
Sample make_chart_sample(double s, const ChartState& state, const std::optional<ChartVector>& acceleration,
                         double mass);
/// Builds a sample from a bulk state; chart data filled in when the point is in
/// the chart.
Sample make_bulk_sample(double s, const BulkState& state, double ell, double mass);

}  // namespace desitter
