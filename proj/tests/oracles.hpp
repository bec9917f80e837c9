#pragma once

// Reference values computed without the library's closed forms: finite
// differences of the embedding, explicit connection tables and exact solutions.

#include <array>
#include <cmath>
#include <random>

#include "desitter/bulk_geometry.hpp"
#include "desitter/chart.hpp"
#include "desitter/dynamics.hpp"

namespace oracle {

using desitter::BulkVector;
using desitter::ChartPoint;
using desitter::ChartVector;

/// Central-difference Jacobian of embed, indexed [A][nu].
inline desitter::EmbeddingJacobian numeric_jacobian(const ChartPoint& p, double h = 1e-6) {
  desitter::EmbeddingJacobian j{};
  for (int nu = 0; nu < 4; ++nu) {
    ChartPoint a = p, b = p;
    a.x[nu] += h;
    b.x[nu] -= h;
    const BulkVector d = (desitter::embed(a) - desitter::embed(b)) / (2.0 * h);
    for (int A = 0; A < 5; ++A) j[A][nu] = d[A];
  }
  return j;
}

/// Second derivative of embed along x(s) = x + u s + a s^2/2 at s = 0.
inline BulkVector numeric_bulk_acceleration(const ChartPoint& p, const ChartVector& u, const ChartVector& a,
                                            double h = 1e-4) {
  auto at = [&](double s) { return desitter::embed({p.x + s * u + 0.5 * s * s * a, p.ell}); };
  return (at(h) - 2.0 * at(0.0) + at(-h)) / (h * h);
}

/// One listed connection coefficient: Gamma^alpha_{mu nu} = sign (Omega/2ell^2) x^k.
struct ConnectionEntry {
  int alpha, mu, nu;
  double sign;
  int k;
};

/// The 28 non-null coefficients of the conformal chart connection with
/// mu <= nu; every other coefficient (up to mu <-> nu) vanishes.
inline constexpr std::array<ConnectionEntry, 28> kConnectionTable{{
    {0, 0, 0, +1, 0}, {0, 0, 1, -1, 1}, {0, 0, 2, -1, 2}, {0, 0, 3, -1, 3},
    {0, 1, 1, +1, 0}, {0, 2, 2, +1, 0}, {0, 3, 3, +1, 0},
    {1, 0, 0, -1, 1}, {1, 0, 1, +1, 0}, {1, 1, 1, -1, 1}, {1, 1, 2, -1, 2},
    {1, 1, 3, -1, 3}, {1, 2, 2, +1, 1}, {1, 3, 3, +1, 1},
    {2, 0, 0, -1, 2}, {2, 0, 2, +1, 0}, {2, 1, 1, +1, 2}, {2, 1, 2, -1, 1},
    {2, 2, 2, -1, 2}, {2, 2, 3, -1, 3}, {2, 3, 3, +1, 2},
    {3, 0, 0, -1, 3}, {3, 0, 3, +1, 0}, {3, 1, 1, +1, 3}, {3, 1, 3, -1, 1},
    {3, 2, 2, +1, 3}, {3, 2, 3, -1, 2}, {3, 3, 3, -1, 3},
}};

/// Chart point with sigma^2 uniform in (lo, hi) and random orientation.
inline ChartPoint random_chart_point(std::mt19937_64& rng, double ell, double lo, double hi) {
  std::uniform_real_distribution<double> sig(lo, hi);
  std::uniform_real_distribution<double> rap(-1.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  const double s2 = sig(rng) * ell * ell;
  double n[3];
  double norm = 0.0;
  for (double& c : n) {
    c = g(rng);
    norm += c * c;
  }
  norm = std::sqrt(norm);
  const double r = rap(rng);
  const double rho = std::sqrt(std::fabs(s2));
  const double t = s2 >= 0.0 ? rho * std::cosh(r) : rho * std::sinh(r);
  const double sp = s2 >= 0.0 ? rho * std::sinh(r) : rho * std::cosh(r);
  return ChartPoint{ChartVector{{t, sp * n[0] / norm, sp * n[1] / norm, sp * n[2] / norm}}, ell};
}

inline ChartVector random_chart_vector(std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  return ChartVector{{g(rng), g(rng), g(rng), g(rng)}};
}

inline BulkVector random_bulk_vector(std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  return BulkVector{{g(rng), g(rng), g(rng), g(rng), g(rng)}};
}

/// Uniformly random spatial rotation acting on components 1..3.
struct Rotation {
  double m[3][3];

  template <std::size_t N>
  desitter::Vector<N> apply(const desitter::Vector<N>& v) const {
    desitter::Vector<N> r = v;
    for (int i = 0; i < 3; ++i) {
      r[i + 1] = m[i][0] * v[1] + m[i][1] * v[2] + m[i][2] * v[3];
    }
    return r;
  }
};

inline Rotation random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  double q[4];
  double n = 0.0;
  for (double& c : q) {
    c = g(rng);
    n += c * c;
  }
  n = std::sqrt(n);
  const double w = q[0] / n, x = q[1] / n, y = q[2] / n, z = q[3] / n;
  return Rotation{{{1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)},
                   {2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)},
                   {2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)}}};
}

/// Bulk boost with rapidity r in the (0, axis) plane.
inline BulkVector boost(const BulkVector& v, int axis, double r) {
  BulkVector out = v;
  out[0] = std::cosh(r) * v[0] + std::sinh(r) * v[axis];
  out[axis] = std::sinh(r) * v[0] + std::cosh(r) * v[axis];
  return out;
}

/// Timelike geodesic through the chart origin with u = (1,0,0,0), ell = 1:
/// X(s) = (sinh s, 0, 0, 0, -cosh s), x^0(s) = 2 tanh(s/2).
inline double canonical_x0(double s) { return 2.0 * std::tanh(0.5 * s); }
inline double canonical_u0(double s) { return 1.0 / (std::cosh(0.5 * s) * std::cosh(0.5 * s)); }

inline desitter::ChartState canonical_state(double ell = 1.0) {
  return {{ChartVector{{0, 0, 0, 0}}, ell}, ChartVector{{1, 0, 0, 0}}};
}

inline double rel_err(double a, double b, double floor = 1.0) {
  return std::fabs(a - b) / std::fmax(floor, std::fmax(std::fabs(a), std::fabs(b)));
}

}  // namespace oracle
