#include <doctest.h>

#include <random>

#include "desitter/dynamics.hpp"
#include "desitter/errors.hpp"
#include "desitter/shooting.hpp"
#include "oracles.hpp"

using namespace desitter;

TEST_SUITE("shooting") {
  TEST_CASE("connectability thresholds on reference pairs") {
    const BulkVector south{{0, 0, 0, 0, -1}};
    CHECK(connectability(south, south, 1.0) == Connectability::Coincident);
    const BulkVector timelike{{std::sinh(1.0), 0, 0, 0, -std::cosh(1.0)}};
    CHECK(connectability(south, timelike, 1.0) == Connectability::TimelikeGeodesic);
    const BulkVector spacelike{{0, std::sin(1.0), 0, 0, -std::cos(1.0)}};
    CHECK(connectability(south, spacelike, 1.0) == Connectability::SpacelikeGeodesic);
    const BulkVector null_partner{{0.5, 0.5, 0, 0, -1}};
    CHECK(connectability(south, null_partner, 1.0) == Connectability::NullGeodesic);
    const BulkVector beyond{{std::sinh(1.0), 0, 0, 0, std::cosh(1.0)}};
    CHECK(connectability(south, beyond, 1.0) == Connectability::NoGeodesic);
    // Antipodal pair sits on the c = ell^2 boundary and still counts as spacelike.
    CHECK(connectability(south, BulkVector{{0, 0, 0, 0, 1}}, 1.0) == Connectability::SpacelikeGeodesic);
    CHECK_THROWS_AS(connectability(south, BulkVector{{0, 0, 0, 0, -2}}, 1.0), NotOnBrane);
  }

  TEST_CASE("connectability scales with ell") {
    const double ell = 3.0;
    const BulkVector a{{0, 0, 0, 0, -ell}};
    const BulkVector b{{ell * std::sinh(0.5), 0, 0, 0, -ell * std::cosh(0.5)}};
    CHECK(connectability(a, b, ell) == Connectability::TimelikeGeodesic);
    CHECK(connectability(a, -1.0 * a, ell) == Connectability::SpacelikeGeodesic);
  }

  TEST_CASE("shooting inverts the canonical geodesic") {
    const ChartPoint from{ChartVector{{0, 0, 0, 0}}, 1.0};
    const ChartPoint to{ChartVector{{oracle::canonical_x0(2.0), 0, 0, 0}}, 1.0};
    const ShootResult r = shoot_geodesic(from, to);
    REQUIRE(r.status == ShootStatus::Converged);
    CHECK(r.causal_class == CausalClass::Timelike);
    CHECK(r.arc_parameter == doctest::Approx(2.0).epsilon(1e-9));
    CHECK((r.velocity - ChartVector{{1, 0, 0, 0}}).max_abs() < 1e-9);
    CHECK(r.endpoint_error < 1e-8);
  }

  TEST_CASE("coincident endpoints give the zero solution") {
    const ChartPoint p{ChartVector{{0.3, 0.1, 0, 0}}, 1.0};
    const ShootResult r = shoot_geodesic(p, p);
    CHECK(r.status == ShootStatus::Coincident);
    CHECK(r.arc_parameter == 0.0);
    CHECK(r.velocity.max_abs() == 0.0);
  }

  TEST_CASE("pairs beyond c = ell^2 have no geodesic") {
    const ChartPoint from{ChartVector{{0, 0, 0, 0}}, 1.0};
    const ChartPoint to = unembed(BulkVector{{std::sinh(1.0), 0, 0, 0, std::cosh(1.0)}}, 1.0);
    const ShootResult r = shoot_geodesic(from, to);
    CHECK(r.status == ShootStatus::NoGeodesic);
    CHECK(r.guesses_tried >= 2);
  }

  TEST_CASE("null geodesic through the origin is a straight chart line") {
    const ChartPoint from{ChartVector{{0, 0, 0, 0}}, 1.0};
    const ChartPoint to{ChartVector{{0.5, 0.5, 0, 0}}, 1.0};
    const ShootResult r = shoot_geodesic(from, to);
    REQUIRE(r.status == ShootStatus::Converged);
    CHECK(r.causal_class == CausalClass::Null);
    CHECK(std::fabs(r.velocity[0]) == doctest::Approx(1.0));
    CHECK(r.arc_parameter == doctest::Approx(0.5).epsilon(1e-9));
  }

  TEST_CASE("shooting solutions reproduce the target with the integrator") {
    std::mt19937_64 rng(41);
    int solved = 0;
    for (int i = 0; i < 20; ++i) {
      const BulkVector xa = random_brane_point(rng, 1.0), xb = random_brane_point(rng, 1.0);
      const Connectability k = connectability(xa, xb, 1.0);
      if (k == Connectability::NoGeodesic) continue;
      const ChartPoint pa = unembed(xa, 1.0), pb = unembed(xb, 1.0);
      const ShootResult r = shoot_geodesic(pa, pb);
      REQUIRE(r.status == ShootStatus::Converged);
      ++solved;
      // Re-integrate in the bulk from the returned velocity over the arc parameter.
      IntegratorConfig cfg;
      cfg.step = 1e-3;
      cfg.s1 = r.arc_parameter;
      const Trajectory t = integrate_bulk(chart_to_bulk({pa, r.velocity}), 1.0, 1.0, cfg);
      REQUIRE(t.completed());
      CHECK((t.samples.back().bulk.position - xb).max_abs() < 1e-7);
      const CausalClass expect = k == Connectability::TimelikeGeodesic ? CausalClass::Timelike : CausalClass::Spacelike;
      CHECK(r.causal_class == expect);
    }
    CHECK(solved > 5);
  }

  TEST_CASE("propagation matches the analytic geodesic") {
    const ChartPoint from{ChartVector{{0.1, -0.2, 0.3, 0.0}}, 1.0};
    const ChartVector w{{0.8, 0.4, -0.1, 0.2}};
    const ChartPoint end = propagate_geodesic(from, w, 2000);
    const BulkState exact = analytic_bulk_geodesic(chart_to_bulk({from, w}), 1.0, 1.0);
    CHECK((end.x - unembed(exact.position, 1.0).x).max_abs() < 1e-11);
    CHECK_THROWS_AS(propagate_geodesic(from, w, 0), InvalidArgument);
  }

  TEST_CASE("random brane points are on the pseudo-sphere and seed-deterministic") {
    std::mt19937_64 a(7), b(7);
    for (int i = 0; i < 100; ++i) {
      const BulkVector x = random_brane_point(a, 2.0);
      CHECK(x == random_brane_point(b, 2.0));
      CHECK(std::fabs(pseudo_sphere_residual(x, 2.0)) < 1e-12 * x.euclidean_norm() * x.euclidean_norm());
      CHECK(std::fabs(2.0 - x[4]) >= 0.2);
    }
  }
}
