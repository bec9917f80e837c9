#include "desitter/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "desitter/dynamics.hpp"
#include "desitter/errors.hpp"
#include "desitter/ode.hpp"

namespace desitter {

const char* to_string(Connectability c) {
  switch (c) {
    case Connectability::TimelikeGeodesic: return "timelike_geodesic";
    case Connectability::NullGeodesic: return "null_geodesic";
    case Connectability::SpacelikeGeodesic: return "spacelike_geodesic";
    case Connectability::NoGeodesic: return "no_geodesic";
    case Connectability::Coincident: return "coincident";
  }
  return "unknown";
}

const char* to_string(ShootStatus s) {
  switch (s) {
    case ShootStatus::Converged: return "converged";
    case ShootStatus::Coincident: return "coincident";
    case ShootStatus::NoGeodesic: return "no_geodesic";
    case ShootStatus::NoConvergence: return "no_convergence";
  }
  return "unknown";
}

namespace {

void require_on_brane(const BulkVector& x, double ell) {
  const double scale = std::fmax(ell * ell, x.euclidean_norm() * x.euclidean_norm());
  if (std::fabs(pseudo_sphere_residual(x, ell)) > kBraneTolerance * scale) {
    throw NotOnBrane("point is not on the pseudo-sphere");
  }
}

}  // namespace

Connectability connectability(const BulkVector& xa, const BulkVector& xb, double ell, double tol) {
  if (!(ell > 0.0)) throw InvalidArgument("ell must be positive");
  require_on_brane(xa, ell);
  require_on_brane(xb, ell);
  const double ell2 = ell * ell;
  if ((xa - xb).max_abs() <= tol * ell) return Connectability::Coincident;
  const double c = bulk_inner(xa, xb);
  if (c < -ell2 * (1.0 + tol)) return Connectability::TimelikeGeodesic;
  if (c <= -ell2 * (1.0 - tol)) return Connectability::NullGeodesic;
  if (c <= ell2 * (1.0 + tol)) return Connectability::SpacelikeGeodesic;
  return Connectability::NoGeodesic;
}

namespace {

double bulk_angle(const ChartPoint& from, const ChartVector& w) {
  const BulkVector W = embed_differential(from, w);
  return std::sqrt(std::fabs(bulk_inner(W, W))) / from.ell;
}

std::size_t step_count(const ChartPoint& from, const ChartVector& w, std::size_t per_radian,
                       std::size_t min_steps) {
  const double n = std::ceil(bulk_angle(from, w) * static_cast<double>(per_radian));
  if (!std::isfinite(n)) return min_steps;
  return std::max(min_steps, static_cast<std::size_t>(std::min(n, 1e7)));
}

/// Residual of the shooting map in chart coordinates, or nullopt if the
/// propagated endpoint has no chart coordinates.
std::optional<Eigen::Vector4d> residual(const ChartPoint& from, const ChartPoint& to, const ChartVector& w,
                                        std::size_t steps) {
  try {
    const ChartPoint end = propagate_geodesic(from, w, steps);
    Eigen::Vector4d r;
    for (int i = 0; i < 4; ++i) r(i) = end.x[i] - to.x[i];
    if (!r.allFinite()) return std::nullopt;
    return r;
  } catch (const Error&) {
    return std::nullopt;
  }
}

constexpr std::size_t kStallIterations = 8;

struct NewtonOutcome {
  bool converged = false;
  ChartVector w;
  std::size_t iterations = 0;
};

/// Damped Newton on r(w) = 0 with a central-difference Jacobian. When
/// `fixed_steps` is nonzero the propagation resolution is held constant,
/// otherwise it is re-derived from w at every iteration.
NewtonOutcome newton(const ChartPoint& from, const ChartPoint& to, ChartVector w, double tol,
                     std::size_t max_iterations, std::size_t per_radian, std::size_t min_steps,
                     std::size_t fixed_steps, double max_angle) {
  NewtonOutcome out;
  double best = std::numeric_limits<double>::infinity();
  std::size_t last_progress = 0;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    out.iterations = it + 1;
    if (!(bulk_angle(from, w) <= max_angle)) return out;
    const std::size_t steps = fixed_steps ? fixed_steps : step_count(from, w, per_radian, min_steps);
    const auto r = residual(from, to, w, steps);
    if (!r) return out;
    const double r_max = r->cwiseAbs().maxCoeff();
    if (r_max <= tol * from.ell) {
      out.converged = true;
      out.w = w;
      return out;
    }
    // A guess that has not halved its residual within kStallIterations is abandoned.
    if (r_max < 0.5 * best) {
      best = r_max;
      last_progress = it;
    } else if (it - last_progress >= kStallIterations) {
      return out;
    }

    Eigen::Matrix4d jac;
    const double scale = std::max(1.0, w.max_abs());
    for (int j = 0; j < 4; ++j) {
      const double delta = 1e-7 * scale;
      ChartVector wp = w, wm = w;
      wp[j] += delta;
      wm[j] -= delta;
      const auto rp = residual(from, to, wp, steps);
      const auto rm = residual(from, to, wm, steps);
      if (!rp || !rm) return out;
      jac.col(j) = (*rp - *rm) / (2.0 * delta);
    }

    Eigen::FullPivLU<Eigen::Matrix4d> lu(jac);
    if (!lu.isInvertible()) return out;
    const Eigen::Vector4d delta = lu.solve(-*r);
    if (!delta.allFinite()) return out;

    const double r_norm = r->norm();
    bool accepted = false;
    for (double alpha = 1.0; alpha > 1e-4; alpha *= 0.5) {
      ChartVector trial = w;
      for (int i = 0; i < 4; ++i) trial[i] += alpha * delta(i);
      const auto rt = residual(from, to, trial, steps);
      if (rt && rt->norm() < r_norm * (1.0 - 1e-4 * alpha)) {
        w = trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Near the root the residual sits at the propagation noise floor.
      if (r->cwiseAbs().maxCoeff() <= 10.0 * tol * from.ell) {
        out.converged = true;
        out.w = w;
      }
      return out;
    }
  }
  return out;
}

/// Closed-form initial velocity from the bulk log map, when it exists.
std::optional<ChartVector> analytic_guess(const BulkVector& xa, const BulkVector& xb, double ell) {
  const double ell2 = ell * ell;
  const double ch = -bulk_inner(xa, xb) / ell2;  // cosh or cos of the bulk angle
  const BulkVector d = xb - ch * xa;              // tangent part of xb at xa
  double factor = 0.0;
  if (ch >= 1.0) {
    const double theta = std::acosh(ch);
    factor = theta == 0.0 ? 1.0 : theta / std::sinh(theta);
  } else if (ch > -1.0) {
    const double theta = std::acos(ch);
    const double sn = std::sin(theta);
    if (sn < 1e-8) return std::nullopt;
    factor = theta == 0.0 ? 1.0 : theta / sn;
  } else {
    return std::nullopt;
  }
  try {
    ChartVector w = unembed_differential(xa, factor * d, ell);
    if (!w.all_finite()) return std::nullopt;
    return w;
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::vector<ChartVector> grid_guesses(const ChartPoint& from, const ChartPoint& to, const BulkVector& xa,
                                      const BulkVector& xb) {
  std::vector<ChartVector> guesses;
  const double ell2 = from.ell * from.ell;
  const BulkVector d = xb + (bulk_inner(xa, xb) / ell2) * xa;
  std::vector<ChartVector> directions;
  try {
    const ChartVector dc = unembed_differential(xa, d, from.ell);
    if (dc.all_finite() && dc.max_abs() > 0.0) directions.push_back(dc);
  } catch (const Error&) {
  }
  const ChartVector delta = to.x - from.x;
  if (delta.max_abs() > 0.0) directions.push_back(delta);
  for (double m : {1.0, 0.5, 2.0, 0.25, 4.0}) {
    for (const ChartVector& dir : directions) guesses.push_back(m * dir);
  }
  return guesses;
}

}  // namespace

ChartPoint propagate_geodesic(const ChartPoint& from, const ChartVector& w, std::size_t steps) {
  if (steps == 0) throw InvalidArgument("propagation needs at least one step");
  const double ell = from.ell;
  const BulkState init = chart_to_bulk({from, w});
  OdeState<10> y{};
  for (int i = 0; i < 5; ++i) {
    y[i] = init.position[i];
    y[5 + i] = init.velocity[i];
  }
  const double inv_ell2 = 1.0 / (ell * ell);
  auto rhs = [inv_ell2](double, const OdeState<10>& z, OdeState<10>& dz) {
    double vv = z[5] * z[5];
    for (int i = 6; i < 10; ++i) vv -= z[i] * z[i];
    const double lambda = vv * inv_ell2;
    for (int i = 0; i < 5; ++i) {
      dz[i] = z[5 + i];
      dz[5 + i] = lambda * z[i];
    }
    return std::isfinite(lambda);
  };
  BulkState last;
  bool ok = true;
  auto observe = [&](double, OdeState<10>& z) {
    BulkState st;
    for (int i = 0; i < 5; ++i) {
      st.position[i] = z[i];
      st.velocity[i] = z[5 + i];
    }
    if (!st.position.all_finite() || !st.velocity.all_finite()) {
      ok = false;
      return false;
    }
    st = project_onto_brane(st, ell);
    for (int i = 0; i < 5; ++i) {
      z[i] = st.position[i];
      z[5 + i] = st.velocity[i];
    }
    last = st;
    return true;
  };
  IntegratorConfig cfg;
  cfg.method = Method::Rk4;
  cfg.s0 = 0.0;
  cfg.s1 = 1.0;
  cfg.step = 1.0 / static_cast<double>(steps);
  cfg.max_steps = steps + 1;
  const OdeRun run = integrate_rk4<10>(rhs, y, cfg, observe);
  if (!ok || run.outcome != OdeOutcome::Completed) throw Error("geodesic propagation failed");
  return unembed(last.position, ell);
}

ShootResult shoot_geodesic(const ChartPoint& from, const ChartPoint& to, const ShootConfig& cfg) {
  if (from.ell != to.ell) throw InvalidArgument("endpoints must share the same ell");
  const BulkVector xa = embed(from);
  const BulkVector xb = embed(to);
  const double ell = from.ell;

  ShootResult result;
  const double span = std::max(1.0, std::max(from.x.max_abs(), to.x.max_abs()));
  if ((to.x - from.x).max_abs() <= 1e-14 * span) {
    result.status = ShootStatus::Coincident;
    return result;
  }

  std::vector<ChartVector> guesses;
  if (cfg.analytic_seed) {
    if (auto g = analytic_guess(xa, xb, ell)) guesses.push_back(*g);
  }
  if (cfg.grid_search) {
    auto grid = grid_guesses(from, to, xa, xb);
    guesses.insert(guesses.end(), grid.begin(), grid.end());
  }

  for (const ChartVector& guess : guesses) {
    ++result.guesses_tried;
    const NewtonOutcome coarse =
        newton(from, to, guess, 1e-7, cfg.max_iterations, cfg.steps_per_radian, cfg.min_steps, 0,
               cfg.max_bulk_angle);
    result.iterations += coarse.iterations;
    if (!coarse.converged) continue;

    const std::size_t fine = step_count(from, coarse.w, cfg.polish_steps_per_radian, cfg.min_steps);
    const NewtonOutcome polished = newton(from, to, coarse.w, cfg.tolerance, 12, 0, 0, fine, cfg.max_bulk_angle);
    result.iterations += polished.iterations;
    if (!polished.converged) continue;

    const auto r = residual(from, to, polished.w, fine);
    if (!r) continue;
    const double err = r->cwiseAbs().maxCoeff();
    if (err > cfg.acceptance * ell) continue;

    const ChartVector& w = polished.w;
    const double gww = metric_product(from, w, w);
    const double omega = conformal_factor(from);
    const double scale = omega * omega * w.euclidean_norm() * w.euclidean_norm();
    result.status = ShootStatus::Converged;
    result.endpoint_error = err;
    if (std::fabs(gww) <= cfg.null_tolerance * scale) {
      result.causal_class = CausalClass::Null;
      result.arc_parameter = std::fabs(w[0]);
    } else {
      result.causal_class = gww > 0.0 ? CausalClass::Timelike : CausalClass::Spacelike;
      result.arc_parameter = std::sqrt(std::fabs(gww));
    }
    result.velocity = w / result.arc_parameter;
    return result;
  }

  result.status = bulk_inner(xa, xb) > ell * ell * (1.0 + 1e-12) ? ShootStatus::NoGeodesic
                                                                 : ShootStatus::NoConvergence;
  return result;
}

BulkVector random_brane_point(std::mt19937_64& rng, double ell, double max_rapidity, double cone_margin) {
  std::uniform_real_distribution<double> rapidity(-max_rapidity, max_rapidity);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (;;) {
    const double t = rapidity(rng);
    double n[4];
    double norm = 0.0;
    for (double& c : n) {
      c = gauss(rng);
      norm += c * c;
    }
    norm = std::sqrt(norm);
    if (norm < 1e-12) continue;
    BulkVector x;
    x[0] = ell * std::sinh(t);
    for (int i = 0; i < 4; ++i) x[i + 1] = ell * std::cosh(t) * n[i] / norm;
    if (std::fabs(ell - x[4]) >= cone_margin * ell) return x;
  }
}

}  // namespace desitter
