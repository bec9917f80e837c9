#include <doctest.h>

#include <cstring>
#include <random>

#include "desitter/analysis.hpp"
#include "desitter/dynamics.hpp"
#include "desitter/errors.hpp"
#include "oracles.hpp"

using namespace desitter;

namespace {

IntegratorConfig rk4(double s1, double h = 1e-3) {
  IntegratorConfig cfg;
  cfg.step = h;
  cfg.s1 = s1;
  return cfg;
}

/// Random chart state well inside the chart, with unit speed of random class.
ChartState random_state(std::mt19937_64& rng, double ell) {
  ChartPoint p = oracle::random_chart_point(rng, ell, -1.0, 1.0);
  return {p, oracle::random_chart_vector(rng, 0.5)};
}

}  // namespace

TEST_SUITE("dynamics") {
  TEST_CASE("geodesic acceleration equals -Gamma u u") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 100; ++i) {
      const ChartState st{oracle::random_chart_point(rng, 1.4, -4.0, 6.0), oracle::random_chart_vector(rng)};
      if (std::fabs(1.0 - sigma_squared(st.point) / (4 * 1.4 * 1.4)) < 1e-2) continue;
      const ChristoffelTable g = christoffel(st.point);
      ChartVector expect;
      for (int a = 0; a < 4; ++a)
        for (int m = 0; m < 4; ++m)
          for (int n = 0; n < 4; ++n) expect[a] -= g(a, m, n) * st.velocity[m] * st.velocity[n];
      const ChartVector got = geodesic_acceleration(st);
      CHECK((got - expect).max_abs() <= 1e-12 * std::fmax(1.0, expect.max_abs()));
      const ChartDerivative d = geodesic_rhs(st);
      CHECK(d.velocity == st.velocity);
      CHECK(d.acceleration == got);
    }
  }

  TEST_CASE("canonical geodesic follows x0 = 2 tanh(s/2)") {
    const Trajectory t = integrate_intrinsic(oracle::canonical_state(), 1.0, rk4(2.0));
    REQUIRE(t.completed());
    REQUIRE(t.samples.size() == 2001);
    const Sample& last = t.samples.back();
    CHECK(last.s == 2.0);
    CHECK(std::fabs(last.chart->point.x[0] - oracle::canonical_x0(2.0)) < 1e-10);
    CHECK(std::fabs(last.chart->velocity[0] - oracle::canonical_u0(2.0)) < 1e-10);
    CHECK(last.chart->point.x[0] == doctest::Approx(1.5232).epsilon(1e-4));
    for (int i = 1; i < 4; ++i) CHECK(last.chart->point.x[i] == 0.0);
  }

  TEST_CASE("analytic bulk solution solves the constrained flow") {
    const double ell = 1.7;
    std::mt19937_64 rng(32);
    for (int i = 0; i < 30; ++i) {
      const BulkState b0 = chart_to_bulk(random_state(rng, ell));
      for (double s : {0.3, 1.1}) {
        const BulkState b = analytic_bulk_geodesic(b0, ell, s);
        const ConstraintError e = constraint_error(b, ell);
        CHECK(e.position < 1e-12);
        CHECK(e.tangency < 1e-11);
        // X'' by central differences of the closed form.
        const double h = 1e-4;
        const BulkVector xdd = (analytic_bulk_geodesic(b0, ell, s + h).position - 2.0 * b.position +
                                analytic_bulk_geodesic(b0, ell, s - h).position) /
                               (h * h);
        const BulkDerivative d = bulk_constrained_rhs(b, ell);
        CHECK((xdd - d.acceleration).max_abs() < 1e-5 * std::fmax(1.0, d.acceleration.max_abs()));
      }
    }
    // Null initial velocity: straight bulk line.
    const BulkState null0{BulkVector{{0, 0, 0, 0, -1}}, BulkVector{{1, 1, 0, 0, 0}}};
    const BulkState n1 = analytic_bulk_geodesic(null0, 1.0, 2.0);
    CHECK((n1.position - BulkVector{{2, 2, 0, 0, -1}}).max_abs() < 1e-15);
  }

  TEST_CASE("chart and bulk states round trip") {
    std::mt19937_64 rng(33);
    for (int i = 0; i < 100; ++i) {
      const ChartState st = random_state(rng, 0.8);
      const ChartState back = bulk_to_chart(chart_to_bulk(st), 0.8);
      CHECK((back.point.x - st.point.x).max_abs() < 1e-12);
      CHECK((back.velocity - st.velocity).max_abs() < 1e-11);
    }
    CHECK_THROWS_AS(bulk_to_chart({BulkVector{{0, 0, 0, 0, -1}}, BulkVector{{0, 0, 0, 0, 1}}}, 1.0), NotOnBrane);
  }

  TEST_CASE("constraint checks reject off-brane bulk states") {
    CHECK_THROWS_AS(bulk_constrained_rhs({BulkVector{{0, 0, 0, 0, -2}}, BulkVector{{1, 0, 0, 0, 0}}}, 1.0),
                    ConstraintViolated);
    CHECK_THROWS_AS(bulk_constrained_rhs({BulkVector{{0, 0, 0, 0, -1}}, BulkVector{{0, 0, 0, 0, 1}}}, 1.0),
                    ConstraintViolated);
    const BulkState projected = project_onto_brane({BulkVector{{0, 0, 0, 0, -1.1}}, BulkVector{{1, 0, 0, 0, 0.3}}}, 1.0);
    const ConstraintError e = constraint_error(projected, 1.0);
    CHECK(e.position < 1e-15);
    CHECK(e.tangency < 1e-15);
  }

  TEST_CASE("intrinsic and bulk flows agree with the analytic solution") {
    std::mt19937_64 rng(34);
    for (int i = 0; i < 10; ++i) {
      const ChartState st = random_state(rng, 1.0);
      const Trajectory a = integrate_intrinsic(st, 1.0, rk4(0.5));
      const Trajectory b = integrate_bulk(chart_to_bulk(st), 1.0, 1.0, rk4(0.5));
      if (!a.completed()) continue;
      REQUIRE(b.completed());
      const BulkState exact = analytic_bulk_geodesic(chart_to_bulk(st), 1.0, 0.5);
      CHECK((a.samples.back().bulk.position - exact.position).max_abs() < 1e-9);
      CHECK((b.samples.back().bulk.position - exact.position).max_abs() < 1e-9);
      CHECK(chart_agreement(a, b) < 1e-8);
    }
  }

  TEST_CASE("angular momentum is conserved along random geodesics") {
    std::mt19937_64 rng(35);
    for (int i = 0; i < 10; ++i) {
      const ChartState st = random_state(rng, 2.0);
      const Trajectory t = integrate_intrinsic(st, 1.5, rk4(1.0));
      if (!t.completed()) continue;
      CHECK(l_drift(t).max_relative < 1e-9);
      CHECK(t.samples.back().max_l_drift < 1e-9 * std::fmax(1.0, t.samples.front().angular_momentum.max_abs()));
    }
  }

  TEST_CASE("spatial rotations commute with the flow") {
    std::mt19937_64 rng(36);
    const ChartState st{{ChartVector{{0.2, 0.3, -0.1, 0.4}}, 1.0}, ChartVector{{1.2, 0.1, 0.5, -0.3}}};
    const oracle::Rotation r = oracle::random_rotation(rng);
    const ChartState rotated{{r.apply(st.point.x), 1.0}, r.apply(st.velocity)};
    const Trajectory a = integrate_intrinsic(st, 1.0, rk4(1.0));
    const Trajectory b = integrate_intrinsic(rotated, 1.0, rk4(1.0));
    REQUIRE(a.samples.size() == b.samples.size());
    const ChartVector ra = r.apply(a.samples.back().chart->point.x);
    CHECK((ra - b.samples.back().chart->point.x).max_abs() < 1e-12);
    CHECK(a.samples.back().angular_momentum.invariant_square() ==
          doctest::Approx(b.samples.back().angular_momentum.invariant_square()).epsilon(1e-12));
  }

  TEST_CASE("spacelike geodesic leaves the chart near s = pi") {
    const ChartState st{{ChartVector{{0, 0, 0, 0}}, 1.0}, ChartVector{{0, 1, 0, 0}}};
    const Trajectory t = integrate_intrinsic(st, 1.0, rk4(4.0));
    CHECK(t.status == TrajectoryStatus::SingularityReached);
    CHECK(t.samples.back().s < M_PI);
    CHECK(t.samples.back().s > M_PI - 0.01);
    for (const Sample& smp : t.samples) {
      // x^1 = 2 tan(s/2); fixed-step accuracy degrades only in the final approach to the pole.
      if (smp.s <= 3.0) CHECK(smp.chart->point.x[1] == doctest::Approx(2.0 * std::tan(0.5 * smp.s)).epsilon(1e-6));
      CHECK(std::isfinite(smp.chart->point.x[1]));
    }
    // The bulk flow covers the exit and reports no chart data there.
    const Trajectory b = integrate_bulk(chart_to_bulk(st), 1.0, 1.0, rk4(4.0));
    REQUIRE(b.completed());
    CHECK(b.samples.back().chart.has_value());
    std::size_t missing = 0;
    for (const Sample& smp : b.samples) missing += !smp.chart;
    CHECK(missing <= 2);
    CHECK(l_drift(b).max_relative < 1e-9);
  }

  TEST_CASE("timelike geodesic crossing the cone X^4 = ell stops before Omega changes sign") {
    // X(s) = cosh s A + sinh s B with A^4 = -cos 2.5 > 0: X^4 reaches ell at cosh s = 1/A^4.
    const double th = 2.5;
    const BulkState b0{BulkVector{{0, std::sin(th), 0, 0, -std::cos(th)}}, BulkVector{{1, 0, 0, 0, 0}}};
    const ChartState st = bulk_to_chart(b0, 1.0);
    const double crossing = std::acosh(-1.0 / std::cos(th));
    const Trajectory t = integrate_intrinsic(st, 1.0, rk4(2.0));
    CHECK(t.status == TrajectoryStatus::SingularityReached);
    // Near the cone the fixed-step solution lags the exact one, so the stop is bracketed.
    CHECK(std::fabs(t.samples.back().s - crossing) < 0.01);
    for (const Sample& smp : t.samples) CHECK(conformal_factor(smp.chart->point) > 0.0);
    // Bulk mode continues into the Omega < 0 part of the chart.
    const Trajectory b = integrate_bulk(b0, 1.0, 1.0, rk4(2.0));
    REQUIRE(b.completed());
    REQUIRE(b.samples.back().chart.has_value());
    CHECK(conformal_factor(b.samples.back().chart->point) < 0.0);
    CHECK(l_drift(b).max_relative < 1e-9);
  }

  TEST_CASE("starting on the coordinate sphere is rejected") {
    const ChartState st{{ChartVector{{2, 0, 0, 0}}, 1.0}, ChartVector{{1, 0, 0, 0}}};
    CHECK_THROWS_AS(integrate_intrinsic(st, 1.0, rk4(1.0)), ChartSingularity);
    CHECK_THROWS_AS(integrate_intrinsic(oracle::canonical_state(), 0.0, rk4(1.0)), InvalidArgument);
  }

  TEST_CASE("zero span yields a single sample") {
    const Trajectory t = integrate_intrinsic(oracle::canonical_state(), 1.0, rk4(0.0));
    CHECK(t.completed());
    CHECK(t.samples.size() == 1);
    const Trajectory b = integrate_bulk(chart_to_bulk(oracle::canonical_state()), 1.0, 1.0, rk4(0.0));
    CHECK(b.samples.size() == 1);
  }

  TEST_CASE("fixed-step runs are bitwise reproducible") {
    const ChartState st{{ChartVector{{0.1, 0.2, 0.3, -0.2}}, 1.0}, ChartVector{{1.1, 0.3, 0.0, 0.2}}};
    const Trajectory a = integrate_intrinsic(st, 1.0, rk4(1.0));
    const Trajectory b = integrate_intrinsic(st, 1.0, rk4(1.0));
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
      CHECK(std::memcmp(&a.samples[i].bulk, &b.samples[i].bulk, sizeof(BulkState)) == 0);
    }
  }

  TEST_CASE("constraint projection keeps the bulk run on the brane") {
    IntegratorConfig cfg = rk4(5.0, 1e-2);
    const BulkState b0 = chart_to_bulk(oracle::canonical_state());
    const Trajectory free_run = integrate_bulk(b0, 1.0, 1.0, cfg);
    cfg.constraint_projection = true;
    const Trajectory projected = integrate_bulk(b0, 1.0, 1.0, cfg);
    // Residuals relative to the squared Euclidean size of X.
    auto worst = [](const Trajectory& t) {
      double r = 0.0;
      for (const Sample& s : t.samples) {
        const double n = s.bulk.position.euclidean_norm();
        r = std::fmax(r, std::fabs(s.constraint_residual) / (n * n));
      }
      return r;
    };
    CHECK(worst(free_run) > 0.0);
    CHECK(worst(projected) < worst(free_run));
    CHECK(worst(projected) < 1e-15);
  }

  TEST_CASE("adaptive integration conserves within its tolerance") {
    IntegratorConfig cfg;
    cfg.method = Method::DormandPrince45;
    cfg.step = 0.0;
    cfg.abs_tol = cfg.rel_tol = 1e-11;
    cfg.s1 = 5.0;
    const Trajectory t = integrate_intrinsic(oracle::canonical_state(), 1.0, cfg);
    REQUIRE(t.completed());
    CHECK(t.samples.back().s == 5.0);
    CHECK(std::fabs(t.samples.back().chart->point.x[0] - oracle::canonical_x0(5.0)) < 1e-8);
    CHECK(l_drift(t).max_relative < 1e-8);
    const Trajectory b = integrate_bulk(chart_to_bulk(oracle::canonical_state()), 1.0, 1.0, cfg);
    REQUIRE(b.completed());
    CHECK(l_drift(b).max_relative < 1e-8);
  }

  TEST_CASE("external forcing drives non-geodesic motion") {
    const auto push = [](double, const ChartState&) { return ChartVector{{0, 0.5, 0, 0}}; };
    const Trajectory t = integrate_intrinsic(oracle::canonical_state(), 1.0, rk4(1.0), push);
    REQUIRE(t.completed());
    CHECK(t.samples.back().chart->point.x[1] > 0.1);
    CHECK(l_drift(t).max_relative > 0.1);
  }
}
