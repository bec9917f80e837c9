#include "desitter/chart.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "desitter/bulk_geometry.hpp"
#include "desitter/errors.hpp"

namespace desitter {

namespace {

void require_ell(double ell) {
  if (!(ell > 0.0) || !std::isfinite(ell)) throw InvalidArgument("ell must be positive and finite");
}

}  // namespace

double ChristoffelTable::max_abs() const {
  double m = 0.0;
  for (const auto& a : gamma)
    for (const auto& row : a)
      for (double v : row) m = std::fmax(m, std::fabs(v));
  return m;
}

double sigma_squared(const ChartPoint& p) { return minkowski_dot(p.x, p.x); }

double conformal_factor(const ChartPoint& p, double eps) {
  require_ell(p.ell);
  if (!p.x.all_finite()) throw InvalidArgument("chart point has non-finite components");
  const double denom = 1.0 - sigma_squared(p) / (4.0 * p.ell * p.ell);
  if (std::fabs(denom) < eps) {
    throw ChartSingularity("chart singularity: sigma^2 = 4 ell^2 (|1 - sigma^2/4ell^2| = " +
                           std::to_string(std::fabs(denom)) + ")");
  }
  return 1.0 / denom;
}

BulkVector embed(const ChartPoint& p) {
  const double omega = conformal_factor(p);
  const double q = sigma_squared(p) / (4.0 * p.ell * p.ell);
  BulkVector X;
  for (int mu = 0; mu < 4; ++mu) X[mu] = omega * p.x[mu];
  X[4] = -p.ell * omega * (1.0 + q);
  return X;
}

ChartPoint unembed(const BulkVector& x, double ell, double brane_tol, double pole_eps) {
  require_ell(ell);
  if (!x.all_finite()) throw InvalidArgument("bulk point has non-finite components");
  const double scale = std::fmax(ell * ell, x.euclidean_norm() * x.euclidean_norm());
  const double residual = pseudo_sphere_residual(x, ell);
  if (std::fabs(residual) > brane_tol * scale) {
    throw NotOnBrane("point is off the pseudo-sphere (<X,X> + ell^2 = " + std::to_string(residual) +
                     ")");
  }
  const double denom = ell - x[4];
  if (std::fabs(denom) < pole_eps * ell) {
    throw NorthPole("point lies on the north pole cone X^4 = ell, outside the conformal chart");
  }
  ChartPoint p;
  p.ell = ell;
  for (int mu = 0; mu < 4; ++mu) p.x[mu] = 2.0 * ell * x[mu] / denom;
  return p;
}

EmbeddingJacobian embedding_jacobian(const ChartPoint& p) {
  const double omega = conformal_factor(p);
  const double ell2 = p.ell * p.ell;
  const ChartVector xl = lower(p.x);
  EmbeddingJacobian j{};
  for (int mu = 0; mu < 4; ++mu) {
    for (int nu = 0; nu < 4; ++nu) {
      j[mu][nu] = (mu == nu ? omega : 0.0) + omega * omega / (2.0 * ell2) * p.x[mu] * xl[nu];
    }
  }
  for (int nu = 0; nu < 4; ++nu) j[4][nu] = -omega * omega / p.ell * xl[nu];
  return j;
}

BulkVector embed_differential(const ChartPoint& p, const ChartVector& u) {
  const EmbeddingJacobian j = embedding_jacobian(p);
  BulkVector v;
  for (int a = 0; a < 5; ++a) {
    double s = 0.0;
    for (int nu = 0; nu < 4; ++nu) s += j[a][nu] * u[nu];
    v[a] = s;
  }
  return v;
}

ChartVector unembed_differential(const BulkVector& x, const BulkVector& v, double ell) {
  require_ell(ell);
  const double d = ell - x[4];
  if (std::fabs(d) < kNorthPoleEps * ell) throw NorthPole("velocity requested on the north pole cone");
  ChartVector u;
  for (int mu = 0; mu < 4; ++mu) u[mu] = 2.0 * ell * (v[mu] / d + x[mu] * v[4] / (d * d));
  return u;
}

ChartVector unembed_second_differential(const BulkVector& x, const BulkVector& v,
                                        const BulkVector& a, double ell) {
  require_ell(ell);
  const double d = ell - x[4];
  if (std::fabs(d) < kNorthPoleEps * ell) {
    throw NorthPole("acceleration requested on the north pole cone");
  }
  const double d2 = d * d;
  const double d3 = d2 * d;
  ChartVector acc;
  for (int mu = 0; mu < 4; ++mu) {
    acc[mu] = 2.0 * ell *
              (a[mu] / d + 2.0 * v[mu] * v[4] / d2 + x[mu] * a[4] / d2 +
               2.0 * x[mu] * v[4] * v[4] / d3);
  }
  return acc;
}

PullbackMetric pullback_metric(const ChartPoint& p) {
  const double omega = conformal_factor(p);
  PullbackMetric m;
  for (int mu = 0; mu < 4; ++mu) m.g[mu][mu] = omega * omega * kChartSignature[mu];
  return m;
}

PullbackMetric jacobian_pullback_metric(const ChartPoint& p) {
  const EmbeddingJacobian j = embedding_jacobian(p);
  PullbackMetric m;
  for (int mu = 0; mu < 4; ++mu) {
    for (int nu = 0; nu < 4; ++nu) {
      double s = 0.0;
      for (int a = 0; a < 5; ++a) s += kBulkSignature[a] * j[a][mu] * j[a][nu];
      m.g[mu][nu] = s;
    }
  }
  return m;
}

double metric_product(const ChartPoint& p, const ChartVector& u, const ChartVector& v) {
  const double omega = conformal_factor(p);
  return omega * omega * minkowski_dot(u, v);
}

ChristoffelTable christoffel(const ChartPoint& p) {
  const double omega = conformal_factor(p);
  const double k = omega / (2.0 * p.ell * p.ell);
  const ChartVector xl = lower(p.x);
  ChristoffelTable t;
  for (int a = 0; a < 4; ++a) {
    for (int m = 0; m < 4; ++m) {
      for (int n = 0; n < 4; ++n) {
        double v = 0.0;
        if (a == m) v += xl[n];
        if (a == n) v += xl[m];
        if (m == n) v -= kChartSignature[m] * p.x[a];
        t.gamma[a][m][n] = k * v;
      }
    }
  }
  return t;
}

ChristoffelTable christoffel_fd(const ChartPoint& p, double h) {
  if (!(h > 0.0)) throw InvalidArgument("finite-difference step must be positive");

  // dg[c][m][n] = d_c g_{mn}
  std::array<PullbackMetric, 4> dg{};
  for (int c = 0; c < 4; ++c) {
    ChartPoint fwd = p;
    ChartPoint bwd = p;
    fwd.x[c] += h;
    bwd.x[c] -= h;
    const PullbackMetric gp = pullback_metric(fwd);
    const PullbackMetric gm = pullback_metric(bwd);
    for (int m = 0; m < 4; ++m)
      for (int n = 0; n < 4; ++n) dg[c].g[m][n] = (gp.g[m][n] - gm.g[m][n]) / (2.0 * h);
  }

  const PullbackMetric g = pullback_metric(p);
  Eigen::Matrix4d gm;
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n) gm(m, n) = g.g[m][n];
  const Eigen::Matrix4d ginv = gm.inverse();

  ChristoffelTable t;
  for (int a = 0; a < 4; ++a) {
    for (int m = 0; m < 4; ++m) {
      for (int n = 0; n < 4; ++n) {
        double s = 0.0;
        for (int b = 0; b < 4; ++b) {
          s += ginv(a, b) * (dg[m].g[b][n] + dg[n].g[b][m] - dg[b].g[m][n]);
        }
        t.gamma[a][m][n] = 0.5 * s;
      }
    }
  }
  return t;
}

}  // namespace desitter
