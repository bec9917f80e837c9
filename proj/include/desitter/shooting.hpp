#pragma once

#include <cstddef>
#include <optional>
#include <random>

#include "desitter/bulk_geometry.hpp"
#include "desitter/chart.hpp"
#include "desitter/vector.hpp"

namespace desitter {

/// How two brane points can be joined.
enum class Connectability { TimelikeGeodesic, NullGeodesic, SpacelikeGeodesic, NoGeodesic, Coincident };

const char* to_string(Connectability c);

/// Classifies a pair of brane points by c = <Xa,Xb>:
///   c < -ell^2            timelike geodesic
///   c = -ell^2            null geodesic (coincident if Xa = Xb)
///   -ell^2 < c <= ell^2   spacelike geodesic
///   c > ell^2             no geodesic; only non-geodesic spacelike curves join them
/// `tol` is relative to ell^2. Throws NotOnBrane for points off the pseudo-sphere.
Connectability connectability(const BulkVector& xa, const BulkVector& xb, double ell, double tol = 1e-12);

struct ShootConfig {
  /// RK4 steps per unit of bulk angle sqrt(|<W,W>|)/ell during Newton iterations.
  std::size_t steps_per_radian = 128;
  /// Same, for the final polish and acceptance check.
  std::size_t polish_steps_per_radian = 1024;
  std::size_t min_steps = 64;
  /// Trial velocities whose bulk angle sqrt(|<W,W>|)/ell exceeds this fail
  /// without propagation; diverging iterates otherwise cost unbounded steps.
  double max_bulk_angle = 40.0;
  std::size_t max_iterations = 60;
  /// Newton stops once the chart endpoint mismatch (max norm) is below tolerance * ell.
  double tolerance = 1e-11;
  /// A solution is reported only if the polished endpoint matches within acceptance * ell.
  double acceptance = 1e-8;
  /// Seed Newton with the closed-form bulk geodesic when one exists.
  bool analytic_seed = true;
  /// Also try the fallback grid of initial velocities.
  bool grid_search = true;
  /// |g(w,w)| <= null_tolerance * Omega^2 |w|^2 classifies the solution as null.
  double null_tolerance = 1e-6;
};

enum class ShootStatus { Converged, Coincident, NoGeodesic, NoConvergence };

const char* to_string(ShootStatus s);

struct ShootResult {
  ShootStatus status = ShootStatus::NoConvergence;
  /// Initial chart velocity: unit norm for timelike/spacelike, |u^0| = 1 for null.
  ChartVector velocity;
  /// Parameter length s* of the geodesic in the normalization above.
  double arc_parameter = 0.0;
  std::optional<CausalClass> causal_class;
  /// Chart endpoint mismatch of the polished solution (max norm).
  double endpoint_error = 0.0;
  std::size_t iterations = 0;
  std::size_t guesses_tried = 0;
};

/// Solves the two-point geodesic problem by Newton iteration on the shooting
/// residual r(w) = x(1; from, w) - to, where w = s* u and the geodesic is
/// propagated numerically by the constrained bulk flow and mapped back to the
/// chart. NoGeodesic is reported only when every initial guess fails and the
/// bulk invariant excludes a geodesic; otherwise failures are NoConvergence.
ShootResult shoot_geodesic(const ChartPoint& from, const ChartPoint& to, const ShootConfig& cfg = {});

/// Chart endpoint x(1; from, w) of the geodesic with initial chart velocity w,
/// integrated in the bulk with `steps` RK4 steps.
ChartPoint propagate_geodesic(const ChartPoint& from, const ChartVector& w, std::size_t steps);

/// Random brane point X = (ell sinh t, ell cosh t n) with t uniform in
/// [-max_rapidity, max_rapidity] and n uniform on S^3, rejecting points with
/// |ell - X^4| < cone_margin * ell so that every sample has well-conditioned
/// conformal coordinates.
BulkVector random_brane_point(std::mt19937_64& rng, double ell, double max_rapidity = 1.5,
                              double cone_margin = 0.1);

}  // namespace desitter
