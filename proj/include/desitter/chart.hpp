#pragma once

#include <array>

#include "desitter/vector.hpp"

namespace desitter {

/// |1 - sigma^2/4ell^2| below this is treated as the chart singularity.
inline constexpr double kChartSingularEps = 1e-12;
/// |ell - X^4| / ell below this has no conformal coordinates.
inline constexpr double kNorthPoleEps = 1e-12;
/// Relative tolerance on |<X,X> + ell^2| accepted by the inverse chart map.
inline constexpr double kBraneTolerance = 1e-9;

/// Conformal (stereographic) coordinates x^mu of a point on the pseudo-sphere
/// of radius ell. The chart covers everything except the north pole cone
/// X^4 = ell.
struct ChartPoint {
  ChartVector x;
  double ell = 1.0;
};

/// g_{mu nu}; symmetric 4x4.
struct PullbackMetric {
  std::array<std::array<double, 4>, 4> g{};
  double operator()(int mu, int nu) const { return g[mu][nu]; }
};

/// Gamma^alpha_{mu nu}, indexed [alpha][mu][nu].
struct ChristoffelTable {
  std::array<std::array<std::array<double, 4>, 4>, 4> gamma{};
  double operator()(int alpha, int mu, int nu) const { return gamma[alpha][mu][nu]; }
  double max_abs() const;
};

/// d X^A / d x^nu, indexed [A][nu].
using EmbeddingJacobian = std::array<std::array<double, 4>, 5>;

/// sigma^2 = eta_{mu nu} x^mu x^nu.
double sigma_squared(const ChartPoint& p);

/// Omega = (1 - sigma^2/4ell^2)^{-1}.
///
/// Throws ChartSingularity when |1 - sigma^2/4ell^2| < eps.
double conformal_factor(const ChartPoint& p, double eps = kChartSingularEps);

/// X^mu = Omega x^mu, X^4 = -ell Omega (1 + sigma^2/4ell^2).
BulkVector embed(const ChartPoint& p);

/// x^mu = 2 ell X^mu / (ell - X^4).
///
/// Throws NotOnBrane if the relative constraint residual exceeds brane_tol and
/// NorthPole if |ell - X^4| < pole_eps * ell.
ChartPoint unembed(const BulkVector& x, double ell, double brane_tol = kBraneTolerance,
                   double pole_eps = kNorthPoleEps);

/// Analytic Jacobian of embed:
///   dX^mu/dx^nu = Omega delta^mu_nu + (Omega^2/2ell^2) x^mu x_nu
///   dX^4/dx^nu  = -(Omega^2/ell) x_nu
EmbeddingJacobian embedding_jacobian(const ChartPoint& p);

/// Pushforward of a chart vector: V^A = (dX^A/dx^nu) u^nu.
BulkVector embed_differential(const ChartPoint& p, const ChartVector& u);

/// Chart velocity of a bulk curve through X with velocity V, i.e. the first
/// derivative of unembed along the curve. X must be in the chart.
ChartVector unembed_differential(const BulkVector& x, const BulkVector& v, double ell);

/// Chart acceleration of a bulk curve with position X, velocity V and
/// acceleration A (second derivative of unembed along the curve).
ChartVector unembed_second_differential(const BulkVector& x, const BulkVector& v,
                                        const BulkVector& a, double ell);

/// Omega^2 diag(1,-1,-1,-1).
PullbackMetric pullback_metric(const ChartPoint& p);

/// J^T eta_5 J built from the analytic Jacobian; equals pullback_metric.
PullbackMetric jacobian_pullback_metric(const ChartPoint& p);

/// g_p(u, v).
double metric_product(const ChartPoint& p, const ChartVector& u, const ChartVector& v);

/// Closed form of the conformally flat connection,
///   Gamma^a_{mn} = (Omega/2ell^2)(delta^a_m x_n + delta^a_n x_m - eta_{mn} x^a).
ChristoffelTable christoffel(const ChartPoint& p);

/// Christoffel symbols from central differences of pullback_metric with step h,
///   Gamma^a_{mn} = 1/2 g^{ab} (d_m g_{bn} + d_n g_{bm} - d_b g_{mn}).
/// Truncation error is O(h^2).
ChristoffelTable christoffel_fd(const ChartPoint& p, double h);

}  // namespace desitter
