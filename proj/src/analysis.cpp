#include "desitter/analysis.hpp"

#include <cmath>
#include <limits>

#include "desitter/errors.hpp"

namespace desitter {

LDrift l_drift(const Trajectory& traj) {
  if (traj.samples.size() < 2) throw InsufficientSamples("l_drift needs at least two samples");
  LDrift d;
  const BulkBivector& l0 = traj.samples.front().angular_momentum;
  for (const Sample& smp : traj.samples) {
    for (std::size_t k = 0; k < BulkBivector::kComponents; ++k) {
      d.absolute[k] = std::fmax(d.absolute[k], std::fabs(smp.angular_momentum.component(k) - l0.component(k)));
    }
  }
  for (std::size_t k = 0; k < BulkBivector::kComponents; ++k) {
    d.relative[k] = d.absolute[k] / std::fmax(1.0, std::fabs(l0.component(k)));
    d.max_absolute = std::fmax(d.max_absolute, d.absolute[k]);
    d.max_relative = std::fmax(d.max_relative, d.relative[k]);
  }
  return d;
}

AntisymmetricMatrix4 mac_residual(const ChartState& state, const ChartVector& a) {
  const ChartPoint& p = state.point;
  const ChartVector& u = state.velocity;
  const double omega = conformal_factor(p);
  const double ell2 = p.ell * p.ell;
  const double xu = minkowski_dot(p.x, u);
  ChartVector bracket;
  for (int l = 0; l < 4; ++l) bracket[l] = omega * omega * xu * u[l] / ell2 + omega * a[l];
  AntisymmetricMatrix4 r{};
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l) r[k][l] = p.x[k] * bracket[l] - bracket[k] * p.x[l];
  return r;
}

AntisymmetricMatrix4 mac_residual(const ChartState& state) {
  return mac_residual(state, geodesic_acceleration(state));
}

ChartVector maca_residual(const ChartState& state, const ChartVector& a) {
  const ChartPoint& p = state.point;
  const ChartVector& u = state.velocity;
  const double omega = conformal_factor(p);
  const double ell2 = p.ell * p.ell;
  const double xu = minkowski_dot(p.x, u);
  const double uu = minkowski_dot(u, u);
  const double xa = minkowski_dot(p.x, a);
  const double scalar = omega / (2.0 * ell2) * (omega * xu * xu / ell2 + uu + xa);
  ChartVector r;
  for (int b = 0; b < 4; ++b) {
    r[b] = -(2.0 * omega - 1.0) * (a[b] + omega * xu * u[b] / ell2) + scalar * p.x[b];
  }
  return r;
}

ChartVector maca_residual(const ChartState& state) {
  return maca_residual(state, geodesic_acceleration(state));
}

std::optional<double> max_mac_residual(const Trajectory& traj) {
  std::optional<double> worst;
  for (const Sample& smp : traj.samples) {
    if (!smp.chart || !smp.chart_acceleration) continue;
    const AntisymmetricMatrix4 r = mac_residual(*smp.chart, *smp.chart_acceleration);
    double m = 0.0;
    for (const auto& row : r)
      for (double v : row) m = std::fmax(m, std::fabs(v));
    worst = std::fmax(worst.value_or(0.0), m);
  }
  return worst;
}

std::optional<double> max_maca_residual(const Trajectory& traj) {
  std::optional<double> worst;
  for (const Sample& smp : traj.samples) {
    if (!smp.chart || !smp.chart_acceleration) continue;
    worst = std::fmax(worst.value_or(0.0), maca_residual(*smp.chart, *smp.chart_acceleration).max_abs());
  }
  return worst;
}

double geodesic_residual(const Trajectory& traj) {
  const auto& sm = traj.samples;
  double worst = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 1; i + 1 < sm.size(); ++i) {
    if (!sm[i - 1].chart || !sm[i].chart || !sm[i + 1].chart) continue;
    const double h1 = sm[i].s - sm[i - 1].s;
    const double h2 = sm[i + 1].s - sm[i].s;
    if (!(h1 > 0.0) || !(h2 > 0.0)) continue;
    // Three-point derivative on a possibly non-uniform grid.
    const double cm = -h2 / (h1 * (h1 + h2));
    const double c0 = (h2 - h1) / (h1 * h2);
    const double cp = h1 / (h2 * (h1 + h2));
    const ChartState& st = *sm[i].chart;
    const ChartVector a = cm * sm[i - 1].chart->velocity + c0 * st.velocity + cp * sm[i + 1].chart->velocity;
    const ChartVector r = a - geodesic_acceleration(st);
    worst = std::fmax(worst, r.max_abs());
    ++used;
  }
  if (used == 0) throw InsufficientSamples("geodesic_residual needs three consecutive chart samples");
  return worst;
}

double max_spacing(const Trajectory& traj) {
  double m = 0.0;
  for (std::size_t i = 1; i < traj.samples.size(); ++i) {
    m = std::fmax(m, traj.samples[i].s - traj.samples[i - 1].s);
  }
  return m;
}

double log_log_slope(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) throw InvalidArgument("slope fit needs at least two points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0)) throw InvalidArgument("slope fit needs positive abscissae");
    if (!(y > 0.0)) throw DegenerateFit("slope fit needs positive values");
    const double lx = std::log(x);
    const double ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(points.size());
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw DegenerateFit("slope fit needs distinct abscissae");
  return (n * sxy - sx * sy) / denom;
}

double convergence_order(std::span<const std::pair<double, double>> errors) {
  if (errors.size() < 3) throw InvalidArgument("convergence_order needs at least three points");
  for (std::size_t i = 1; i < errors.size(); ++i) {
    if (!(errors[i].first < errors[i - 1].first)) {
      throw InvalidArgument("convergence_order needs strictly decreasing h");
    }
  }
  for (const auto& e : errors) {
    if (e.second == 0.0) throw DegenerateFit("zero error in convergence series");
  }
  return log_log_slope(errors);
}

double chart_agreement(const Trajectory& a, const Trajectory& b) {
  if (a.samples.size() != b.samples.size()) {
    throw InvalidArgument("trajectories have different sample counts");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const Sample& sa = a.samples[i];
    const Sample& sb = b.samples[i];
    if (std::fabs(sa.s - sb.s) > 1e-12 * std::fmax(1.0, std::fabs(sa.s))) {
      throw InvalidArgument("trajectories are sampled on different grids");
    }
    if (!sa.chart || !sb.chart) return std::numeric_limits<double>::infinity();
    worst = std::fmax(worst, (sa.chart->point.x - sb.chart->point.x).max_abs());
    worst = std::fmax(worst, (sa.chart->velocity - sb.chart->velocity).max_abs());
  }
  return worst;
}

double straight_line_deviation(const Trajectory& traj) {
  if (traj.samples.empty() || !traj.samples.front().chart) {
    throw InsufficientSamples("straight_line_deviation needs a chart trajectory");
  }
  const Sample& first = traj.samples.front();
  double worst = 0.0;
  for (const Sample& smp : traj.samples) {
    if (!smp.chart) return std::numeric_limits<double>::infinity();
    const ChartVector line = first.chart->point.x + (smp.s - first.s) * first.chart->velocity;
    worst = std::fmax(worst, (smp.chart->point.x - line).max_abs());
  }
  return worst;
}

ConservationReport conservation_report(const Trajectory& traj) {
  ConservationReport rep;
  rep.flow = traj.flow;
  rep.config = traj.config;
  rep.samples = traj.samples.size();
  if (traj.samples.empty()) return rep;
  rep.s0 = traj.samples.front().s;
  rep.s1 = traj.samples.back().s;
  if (traj.samples.size() >= 2) rep.l_drift = l_drift(traj);
  const double n0 = traj.samples.front().norm;
  for (const Sample& smp : traj.samples) {
    rep.norm_drift = std::fmax(rep.norm_drift, std::fabs(smp.norm - n0));
    rep.max_constraint_residual = std::fmax(rep.max_constraint_residual, std::fabs(smp.constraint_residual));
  }
  rep.mac_residual = max_mac_residual(traj);
  rep.maca_residual = max_maca_residual(traj);
  try {
    rep.geodesic_residual = geodesic_residual(traj);
  } catch (const InsufficientSamples&) {
  }
  return rep;
}

double calibrated_fd_floor(const Trajectory& traj) {
  if (traj.samples.size() < 3) throw InsufficientSamples("floor calibration needs three samples");
  std::vector<double> grid;
  grid.reserve(traj.samples.size());
  for (const Sample& smp : traj.samples) grid.push_back(smp.s);
  const Trajectory oracle =
      sample_analytic_geodesic(traj.samples.front().bulk, traj.ell, traj.mass, grid);
  return geodesic_residual(oracle);
}

VerifyThresholds thresholds_for(const IntegratorConfig& cfg) {
  VerifyThresholds t;
  if (cfg.method == Method::DormandPrince45) {
    const double tol = std::fmax(cfg.abs_tol, cfg.rel_tol);
    t.l_drift_relative = std::fmax(t.l_drift_relative, 100.0 * tol);
    t.norm_drift = std::fmax(t.norm_drift, 100.0 * tol);
    t.agreement = std::fmax(t.agreement, 1000.0 * tol);
  }
  return t;
}

Trajectory trajectory_from_chart_curve(const ChartCurve& curve, double ell, double mass, double s0, double s1,
                                       double ds) {
  if (!(ds > 0.0) || !(s1 >= s0)) throw InvalidArgument("invalid sampling of chart curve");
  Trajectory traj;
  traj.flow = Flow::Intrinsic;
  traj.ell = ell;
  traj.mass = mass;
  traj.config.s0 = s0;
  traj.config.s1 = s1;
  traj.config.step = ds;
  const auto n = static_cast<std::size_t>(std::llround((s1 - s0) / ds));
  for (std::size_t i = 0; i <= n; ++i) {
    const double s = s0 + static_cast<double>(i) * ds;
    ChartState st{{curve.position(s), ell}, curve.velocity(s)};
    Sample smp = make_chart_sample(s, st, curve.acceleration(s), mass);
    if (!traj.samples.empty()) {
      const double d = (smp.angular_momentum - traj.samples.front().angular_momentum).max_abs();
      smp.max_l_drift = std::fmax(traj.samples.back().max_l_drift, d);
    }
    traj.samples.push_back(smp);
  }
  return traj;
}

}  // namespace desitter
