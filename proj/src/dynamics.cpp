#include "desitter/dynamics.hpp"

#include <cmath>
#include <string>

#include "desitter/errors.hpp"

namespace desitter {

const char* to_string(Method m) {
  switch (m) {
    case Method::Rk4: return "rk4";
    case Method::DormandPrince45: return "dopri45";
  }
  return "unknown";
}

void IntegratorConfig::validate() const {
  if (!std::isfinite(s0) || !std::isfinite(s1)) throw InvalidArgument("s-span must be finite");
  if (s1 < s0) throw InvalidArgument("s-span must satisfy s1 >= s0");
  if (max_steps == 0) throw InvalidArgument("max_steps must be positive");
  if (method == Method::Rk4) {
    if (!(step > 0.0)) throw InvalidArgument("rk4 requires a positive step");
  } else {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
      throw InvalidArgument("adaptive integration requires positive abs_tol and rel_tol");
    }
    if (step < 0.0) throw InvalidArgument("initial step must be non-negative");
  }
}

const char* to_string(Flow f) {
  switch (f) {
    case Flow::Intrinsic: return "intrinsic";
    case Flow::Bulk: return "bulk";
  }
  return "unknown";
}

const char* to_string(TrajectoryStatus s) {
  switch (s) {
    case TrajectoryStatus::Completed: return "completed";
    case TrajectoryStatus::SingularityReached: return "singularity_reached";
    case TrajectoryStatus::MaxStepsExceeded: return "max_steps_exceeded";
    case TrajectoryStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

ChartVector geodesic_acceleration(const ChartState& state) {
  const ChartPoint& p = state.point;
  const ChartVector& u = state.velocity;
  const double omega = conformal_factor(p);
  const double ell2 = p.ell * p.ell;
  const double xu = minkowski_dot(p.x, u);
  const double uu = minkowski_dot(u, u);
  ChartVector a;
  for (int i = 0; i < 4; ++i) {
    a[i] = -(omega / ell2) * xu * u[i] + (omega / (2.0 * ell2)) * uu * p.x[i];
  }
  return a;
}

ChartDerivative geodesic_rhs(const ChartState& state) {
  return {state.velocity, geodesic_acceleration(state)};
}

ConstraintError constraint_error(const BulkState& state, double ell) {
  ConstraintError e;
  e.position = std::fabs(pseudo_sphere_residual(state.position, ell)) / (ell * ell);
  e.tangency = std::fabs(bulk_inner(state.position, state.velocity)) /
               (ell * std::fmax(1.0, state.velocity.euclidean_norm()));
  return e;
}

BulkDerivative bulk_constrained_rhs(const BulkState& state, double ell, double tol) {
  if (!(ell > 0.0)) throw InvalidArgument("ell must be positive");
  const ConstraintError e = constraint_error(state, ell);
  if (!(e.position <= tol) || !(e.tangency <= tol)) {
    throw ConstraintViolated("bulk state violates the brane constraints (position " +
                             std::to_string(e.position) + ", tangency " + std::to_string(e.tangency) +
                             ")");
  }
  const double lambda = bulk_inner(state.velocity, state.velocity) / (ell * ell);
  return {state.velocity, lambda * state.position};
}

BulkState project_onto_brane(const BulkState& state, double ell) {
  const double n = bulk_inner(state.position, state.position);
  if (!(n < 0.0)) throw ConstraintViolated("cannot project a point with <X,X> >= 0 onto the brane");
  BulkState out;
  out.position = state.position * (ell / std::sqrt(-n));
  const double xv = bulk_inner(out.position, state.velocity);
  out.velocity = state.velocity + (xv / (ell * ell)) * out.position;
  return out;
}

BulkState analytic_bulk_geodesic(const BulkState& init, double ell, double s) {
  const BulkVector& x0 = init.position;
  const BulkVector& v0 = init.velocity;
  const double kappa = bulk_inner(v0, v0) / (ell * ell);
  BulkState out;
  if (kappa > 0.0) {
    const double w = std::sqrt(kappa);
    const double ch = std::cosh(w * s);
    const double sh = std::sinh(w * s);
    out.position = ch * x0 + (sh / w) * v0;
    out.velocity = (w * sh) * x0 + ch * v0;
  } else if (kappa < 0.0) {
    const double w = std::sqrt(-kappa);
    const double c = std::cos(w * s);
    const double sn = std::sin(w * s);
    out.position = c * x0 + (sn / w) * v0;
    out.velocity = (-w * sn) * x0 + c * v0;
  } else {
    out.position = x0 + s * v0;
    out.velocity = v0;
  }
  return out;
}

BulkState chart_to_bulk(const ChartState& state) {
  return {embed(state.point), embed_differential(state.point, state.velocity)};
}

ChartState bulk_to_chart(const BulkState& state, double ell) {
  ChartState out;
  out.point = unembed(state.position, ell);
  const ConstraintError e = constraint_error(state, ell);
  if (e.tangency > 1e-8) throw NotOnBrane("bulk velocity is not tangent to the brane");
  out.velocity = unembed_differential(state.position, state.velocity, ell);
  return out;
}

Sample make_chart_sample(double s, const ChartState& state, const std::optional<ChartVector>& acceleration,
                         double mass) {
  Sample smp;
  smp.s = s;
  smp.chart = state;
  smp.chart_acceleration = acceleration;
  smp.bulk = chart_to_bulk(state);
  smp.angular_momentum = angular_momentum(smp.bulk.position, smp.bulk.velocity, mass);
  smp.norm = metric_product(state.point, state.velocity, state.velocity);
  smp.constraint_residual = pseudo_sphere_residual(smp.bulk.position, state.point.ell);
  return smp;
}

Sample make_bulk_sample(double s, const BulkState& state, double ell, double mass) {
  Sample smp;
  smp.s = s;
  smp.bulk = state;
  smp.angular_momentum = angular_momentum(state.position, state.velocity, mass);
  smp.norm = bulk_inner(state.velocity, state.velocity);
  smp.constraint_residual = pseudo_sphere_residual(state.position, ell);
  try {
    ChartState cs = bulk_to_chart(state, ell);
    if (cs.point.x.all_finite() && cs.velocity.all_finite()) {
      const double lambda = smp.norm / (ell * ell);
      smp.chart = cs;
      smp.chart_acceleration =
          unembed_second_differential(state.position, state.velocity, lambda * state.position, ell);
    }
  } catch (const Error&) {
    // No conformal coordinates here; the bulk sample stands alone.
  }
  return smp;
}

namespace {

void track_drift(Trajectory& traj, Sample& smp) {
  if (traj.samples.empty()) {
    smp.max_l_drift = 0.0;
    return;
  }
  const double d = (smp.angular_momentum - traj.samples.front().angular_momentum).max_abs();
  smp.max_l_drift = std::fmax(traj.samples.back().max_l_drift, d);
}

ChartState unpack_chart(const OdeState<8>& y, double ell) {
  ChartState st;
  st.point.ell = ell;
  for (int i = 0; i < 4; ++i) {
    st.point.x[i] = y[i];
    st.velocity[i] = y[4 + i];
  }
  return st;
}

BulkState unpack_bulk(const OdeState<10>& y) {
  BulkState st;
  for (int i = 0; i < 5; ++i) {
    st.position[i] = y[i];
    st.velocity[i] = y[5 + i];
  }
  return st;
}

template <std::size_t N>
bool finite(const OdeState<N>& y) {
  for (double v : y) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double chart_gap(const ChartPoint& p) {
  return 1.0 - sigma_squared(p) / (4.0 * p.ell * p.ell);
}

}  // namespace

Trajectory integrate_intrinsic(const ChartState& init, double mass, const IntegratorConfig& cfg,
                               const ExternalAcceleration& forcing) {
  cfg.validate();
  if (!(mass > 0.0)) throw InvalidArgument("mass must be positive");
  if (!init.velocity.all_finite()) throw InvalidArgument("initial velocity must be finite");
  conformal_factor(init.point);  // rejects a singular starting point

  const double ell = init.point.ell;
  Trajectory traj;
  traj.flow = Flow::Intrinsic;
  traj.ell = ell;
  traj.mass = mass;
  traj.config = cfg;

  auto total_acceleration = [&](double s, const ChartState& st) {
    ChartVector a = geodesic_acceleration(st);
    if (forcing) a += forcing(s, st);
    return a;
  };

  Sample first = make_chart_sample(cfg.s0, init, total_acceleration(cfg.s0, init), mass);
  track_drift(traj, first);
  traj.samples.push_back(first);

  const bool positive_side = chart_gap(init.point) > 0.0;
  bool left_chart = false;
  bool non_finite = false;

  auto rhs = [&](double s, const OdeState<8>& y, OdeState<8>& dy) {
    if (!finite(y)) return false;
    const ChartState st = unpack_chart(y, ell);
    ChartVector a;
    try {
      a = total_acceleration(s, st);
    } catch (const ChartSingularity&) {
      return false;
    }
    if (!a.all_finite()) return false;
    for (int i = 0; i < 4; ++i) {
      dy[i] = y[4 + i];
      dy[4 + i] = a[i];
    }
    return true;
  };

  auto observe = [&](double s, OdeState<8>& y) {
    if (!finite(y)) {
      non_finite = true;
      return false;
    }
    const ChartState st = unpack_chart(y, ell);
    const double gap = chart_gap(st.point);
    // |Omega| = 1/|gap| -> 0 as the curve runs off to infinity towards the cone X^4 = ell.
    if (std::fabs(gap) < kChartSingularEps || (gap > 0.0) != positive_side || std::fabs(gap) > 1.0 / kChartEscapeEps) {
      left_chart = true;
      return false;
    }
    Sample smp;
    try {
      smp = make_chart_sample(s, st, total_acceleration(s, st), mass);
    } catch (const ChartSingularity&) {
      left_chart = true;
      return false;
    }
    track_drift(traj, smp);
    traj.samples.push_back(smp);
    return true;
  };

  OdeState<8> y0{};
  for (int i = 0; i < 4; ++i) {
    y0[i] = init.point.x[i];
    y0[4 + i] = init.velocity[i];
  }
  const OdeRun run = integrate_ode<8>(rhs, y0, cfg, observe);
  traj.steps = run.steps;

  switch (run.outcome) {
    case OdeOutcome::Completed: break;
    case OdeOutcome::DomainExit:
      traj.status = TrajectoryStatus::SingularityReached;
      traj.message = "chart singularity reached near s = " + std::to_string(run.s_reached);
      break;
    case OdeOutcome::Stopped:
      if (left_chart) {
        traj.status = TrajectoryStatus::SingularityReached;
        traj.message = "trajectory leaves the conformal chart near s = " + std::to_string(run.s_reached);
      } else {
        traj.status = TrajectoryStatus::NumericalFailure;
        traj.message = non_finite ? "non-finite state" : "integration stopped";
      }
      break;
    case OdeOutcome::MaxStepsExceeded:
      traj.status = TrajectoryStatus::MaxStepsExceeded;
      traj.message = "max_steps exceeded";
      break;
    case OdeOutcome::StepUnderflow:
      traj.status = TrajectoryStatus::NumericalFailure;
      traj.message = "adaptive step size underflow near s = " + std::to_string(run.s_reached);
      break;
  }
  return traj;
}

Trajectory integrate_bulk(const BulkState& init, double ell, double mass, const IntegratorConfig& cfg) {
  cfg.validate();
  if (!(mass > 0.0)) throw InvalidArgument("mass must be positive");
  bulk_constrained_rhs(init, ell);  // validates the initial state

  Trajectory traj;
  traj.flow = Flow::Bulk;
  traj.ell = ell;
  traj.mass = mass;
  traj.config = cfg;

  Sample first = make_bulk_sample(cfg.s0, init, ell, mass);
  track_drift(traj, first);
  traj.samples.push_back(first);

  const double inv_ell2 = 1.0 / (ell * ell);
  auto rhs = [&](double, const OdeState<10>& y, OdeState<10>& dy) {
    if (!finite(y)) return false;
    double vv = y[5] * y[5];
    for (int i = 6; i < 10; ++i) vv -= y[i] * y[i];
    const double lambda = vv * inv_ell2;
    for (int i = 0; i < 5; ++i) {
      dy[i] = y[5 + i];
      dy[5 + i] = lambda * y[i];
    }
    return true;
  };

  bool failed = false;
  auto observe = [&](double s, OdeState<10>& y) {
    if (!finite(y)) {
      failed = true;
      return false;
    }
    BulkState st = unpack_bulk(y);
    if (cfg.constraint_projection) {
      try {
        st = project_onto_brane(st, ell);
      } catch (const ConstraintViolated&) {
        failed = true;
        return false;
      }
      for (int i = 0; i < 5; ++i) {
        y[i] = st.position[i];
        y[5 + i] = st.velocity[i];
      }
    }
    Sample smp = make_bulk_sample(s, st, ell, mass);
    track_drift(traj, smp);
    traj.samples.push_back(smp);
    return true;
  };

  OdeState<10> y0{};
  for (int i = 0; i < 5; ++i) {
    y0[i] = init.position[i];
    y0[5 + i] = init.velocity[i];
  }
  const OdeRun run = integrate_ode<10>(rhs, y0, cfg, observe);
  traj.steps = run.steps;
  if (run.outcome == OdeOutcome::MaxStepsExceeded) {
    traj.status = TrajectoryStatus::MaxStepsExceeded;
    traj.message = "max_steps exceeded";
  } else if (run.outcome != OdeOutcome::Completed || failed) {
    traj.status = TrajectoryStatus::NumericalFailure;
    traj.message = "bulk integration failed near s = " + std::to_string(run.s_reached);
  }
  return traj;
}

Trajectory sample_analytic_geodesic(const BulkState& init, double ell, double mass,
                                    std::span<const double> s_values) {
  Trajectory traj;
  traj.flow = Flow::Bulk;
  traj.ell = ell;
  traj.mass = mass;
  if (!s_values.empty()) {
    traj.config.s0 = s_values.front();
    traj.config.s1 = s_values.back();
  }
  const double s0 = s_values.empty() ? 0.0 : s_values.front();
  for (double s : s_values) {
    Sample smp = make_bulk_sample(s, analytic_bulk_geodesic(init, ell, s - s0), ell, mass);
    track_drift(traj, smp);
    traj.samples.push_back(smp);
  }
  return traj;
}

}  // namespace desitter
