#pragma once

// Explicit Runge-Kutta steppers over fixed-size states.
//
// The right-hand side is any callable `bool(double s, const State& y, State& dy)`;
// returning false marks y as outside the domain of the equations (for the
// chart flow: the conformal factor is singular there). The observer is
// `bool(double s, State& y)`, called after every accepted step; it may modify
// y (constraint projection) and returns false to stop the run.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <string>
#include <utility>

namespace desitter {

enum class Method { Rk4, DormandPrince45 };

const char* to_string(Method m);

struct IntegratorConfig {
  Method method = Method::Rk4;
  /// Fixed step for Rk4; initial step guess for DormandPrince45 (0 = automatic).
  double step = 1e-3;
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double s0 = 0.0;
  double s1 = 1.0;
  std::size_t max_steps = 10'000'000;
  /// Bulk flow only: re-impose <X,X> = -ell^2 and <X,V> = 0 after every step.
  bool constraint_projection = false;

  /// Throws InvalidArgument on a bad configuration. A zero-length span is valid.
  void validate() const;
};

template <std::size_t N>
using OdeState = std::array<double, N>;

enum class OdeOutcome { Completed, Stopped, DomainExit, MaxStepsExceeded, StepUnderflow };

struct OdeRun {
  OdeOutcome outcome = OdeOutcome::Completed;
  std::size_t steps = 0;
  double s_reached = 0.0;
};

namespace detail {

template <std::size_t N>
void axpy(OdeState<N>& out, const OdeState<N>& y, double h,
          std::initializer_list<std::pair<double, const OdeState<N>*>> terms) {
  for (std::size_t i = 0; i < N; ++i) {
    double acc = 0.0;
    for (const auto& [coef, k] : terms) acc += coef * (*k)[i];
    out[i] = y[i] + h * acc;
  }
}

}  // namespace detail

/// Classical fourth-order Runge-Kutta with the span split into equal steps of
/// length at most cfg.step.
template <std::size_t N, class Rhs, class Observer>
OdeRun integrate_rk4(const Rhs& rhs, OdeState<N> y, const IntegratorConfig& cfg, Observer&& observe) {
  OdeRun run;
  run.s_reached = cfg.s0;
  const double span = cfg.s1 - cfg.s0;
  if (span <= 0.0) return run;
  const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(span / cfg.step - 1e-9)));
  if (n > cfg.max_steps) {
    run.outcome = OdeOutcome::MaxStepsExceeded;
    return run;
  }
  const double h = span / static_cast<double>(n);
  OdeState<N> k1, k2, k3, k4, tmp;
  // Kahan compensation of the state update; long fixed-step runs otherwise
  // accumulate roundoff comparable to the truncation error.
  OdeState<N> carry{};
  for (std::size_t i = 0; i < n; ++i) {
    const double s = cfg.s0 + static_cast<double>(i) * h;
    if (!rhs(s, y, k1)) { run.outcome = OdeOutcome::DomainExit; return run; }
    detail::axpy<N>(tmp, y, 0.5 * h, {{1.0, &k1}});
    if (!rhs(s + 0.5 * h, tmp, k2)) { run.outcome = OdeOutcome::DomainExit; return run; }
    detail::axpy<N>(tmp, y, 0.5 * h, {{1.0, &k2}});
    if (!rhs(s + 0.5 * h, tmp, k3)) { run.outcome = OdeOutcome::DomainExit; return run; }
    detail::axpy<N>(tmp, y, h, {{1.0, &k3}});
    if (!rhs(s + h, tmp, k4)) { run.outcome = OdeOutcome::DomainExit; return run; }
    for (std::size_t j = 0; j < N; ++j) {
      const double inc = h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) - carry[j];
      const double sum = y[j] + inc;
      carry[j] = (sum - y[j]) - inc;
      y[j] = sum;
    }
    const OdeState<N> before = y;
    // Land exactly on s1 at the final step.
    const double s_next = (i + 1 == n) ? cfg.s1 : cfg.s0 + static_cast<double>(i + 1) * h;
    run.steps = i + 1;
    run.s_reached = s_next;
    if (!observe(s_next, y)) { run.outcome = OdeOutcome::Stopped; return run; }
    if (y != before) carry = OdeState<N>{};  // projected by the observer
  }
  return run;
}

/// Dormand-Prince 5(4) with local error control on the mixed norm
/// sqrt(mean((e_i / (abs_tol + rel_tol * max(|y_i|, |y_new_i|)))^2)) <= 1.
template <std::size_t N, class Rhs, class Observer>
OdeRun integrate_dopri45(const Rhs& rhs, OdeState<N> y, const IntegratorConfig& cfg, Observer&& observe) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double kSafety = 0.9, kMinShrink = 0.2, kMaxGrow = 5.0;

  OdeRun run;
  run.s_reached = cfg.s0;
  const double span = cfg.s1 - cfg.s0;
  if (span <= 0.0) return run;
  const double h_min = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(cfg.s1));

  double s = cfg.s0;
  double h = cfg.step > 0.0 ? std::min(cfg.step, span) : span / 100.0;
  OdeState<N> k1, k2, k3, k4, k5, k6, k7, tmp, y_new;
  if (!rhs(s, y, k1)) { run.outcome = OdeOutcome::DomainExit; return run; }

  while (s < cfg.s1) {
    if (run.steps >= cfg.max_steps) { run.outcome = OdeOutcome::MaxStepsExceeded; return run; }
    bool last = false;
    if (s + h >= cfg.s1) {
      h = cfg.s1 - s;
      last = true;
    }

    bool ok = true;
    detail::axpy<N>(tmp, y, h, {{a21, &k1}});
    ok = ok && rhs(s + c2 * h, tmp, k2);
    if (ok) { detail::axpy<N>(tmp, y, h, {{a31, &k1}, {a32, &k2}}); ok = rhs(s + c3 * h, tmp, k3); }
    if (ok) { detail::axpy<N>(tmp, y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}); ok = rhs(s + c4 * h, tmp, k4); }
    if (ok) {
      detail::axpy<N>(tmp, y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}});
      ok = rhs(s + c5 * h, tmp, k5);
    }
    if (ok) {
      detail::axpy<N>(tmp, y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}});
      ok = rhs(s + h, tmp, k6);
    }
    if (ok) {
      detail::axpy<N>(y_new, y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
      ok = rhs(s + h, y_new, k7);
    }

    double err = 0.0;
    if (ok) {
      for (std::size_t i = 0; i < N; ++i) {
        const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::fabs(y[i]), std::fabs(y_new[i]));
        err += (e / sc) * (e / sc);
      }
      err = std::sqrt(err / static_cast<double>(N));
      ok = std::isfinite(err);
    }

    if (!ok || err > 1.0) {
      // Reject: either the trial left the domain or the error is too large.
      const double shrink = ok ? std::max(kMinShrink, kSafety * std::pow(err, -0.2)) : 0.25;
      h *= shrink;
      if (h < h_min) {
        run.outcome = ok ? OdeOutcome::StepUnderflow : OdeOutcome::DomainExit;
        return run;
      }
      continue;
    }

    s = last ? cfg.s1 : s + h;
    y = y_new;
    ++run.steps;
    run.s_reached = s;
    if (!observe(s, y)) { run.outcome = OdeOutcome::Stopped; return run; }
    // The observer may have projected y, so k1 is recomputed rather than reused.
    if (s < cfg.s1 && !rhs(s, y, k1)) { run.outcome = OdeOutcome::DomainExit; return run; }

    const double grow = err == 0.0 ? kMaxGrow : std::min(kMaxGrow, kSafety * std::pow(err, -0.2));
    h *= grow;
  }
  return run;
}

template <std::size_t N, class Rhs, class Observer>
OdeRun integrate_ode(const Rhs& rhs, const OdeState<N>& y0, const IntegratorConfig& cfg, Observer&& observe) {
  if (cfg.method == Method::Rk4) return integrate_rk4<N>(rhs, y0, cfg, observe);
  return integrate_dopri45<N>(rhs, y0, cfg, observe);
}

}  // namespace desitter
