#include <doctest.h>

#include <random>

#include "desitter/bulk_geometry.hpp"
#include "desitter/errors.hpp"
#include "oracles.hpp"

using namespace desitter;

TEST_SUITE("bulk_geometry") {
  TEST_CASE("inner product uses the (+,-,-,-,-) signature") {
    const BulkVector e0{{1, 0, 0, 0, 0}}, e4{{0, 0, 0, 0, 1}};
    CHECK(bulk_inner(e0, e0) == 1.0);
    CHECK(bulk_inner(e4, e4) == -1.0);
    CHECK(bulk_inner(e0, e4) == 0.0);
    CHECK(bulk_inner(BulkVector{{1, 2, 3, 4, 5}}, BulkVector{{1, 1, 1, 1, 1}}) == 1.0 - 14.0);
  }

  TEST_CASE("inner product is symmetric and bilinear") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
      const BulkVector u = oracle::random_bulk_vector(rng), v = oracle::random_bulk_vector(rng),
                       w = oracle::random_bulk_vector(rng);
      const double a = 1.7, b = -0.4;
      CHECK(bulk_inner(u, v) == doctest::Approx(bulk_inner(v, u)).epsilon(1e-15));
      CHECK(bulk_inner(a * u + b * w, v) ==
            doctest::Approx(a * bulk_inner(u, v) + b * bulk_inner(w, v)).epsilon(1e-12).scale(10));
    }
  }

  TEST_CASE("pseudo-sphere residual vanishes on the brane") {
    const double s = 0.7;
    CHECK(pseudo_sphere_residual(BulkVector{{std::sinh(s), 0, 0, 0, -std::cosh(s)}}, 1.0) ==
          doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
    CHECK(pseudo_sphere_residual(BulkVector{{0, 0, 0, 0, -2}}, 2.0) == 0.0);
    CHECK(pseudo_sphere_residual(BulkVector{{0, 0, 0, 0, 0}}, 1.0) == 1.0);
  }

  TEST_CASE("bivector storage order, labels and antisymmetry") {
    const char* labels[] = {"L01", "L02", "L03", "L04", "L12", "L13", "L14", "L23", "L24", "L34"};
    for (std::size_t k = 0; k < BulkBivector::kComponents; ++k) {
      CHECK(std::string(BulkBivector::label(k)) == labels[k]);
      const auto [a, b] = BulkBivector::indices(k);
      CHECK(a < b);
      CHECK(BulkBivector::label(k)[1] - '0' == static_cast<int>(a));
      CHECK(BulkBivector::label(k)[2] - '0' == static_cast<int>(b));
    }
    std::mt19937_64 rng(3);
    const BulkVector x = oracle::random_bulk_vector(rng), v = oracle::random_bulk_vector(rng);
    const BulkBivector l = angular_momentum(x, v, 2.0);
    for (std::size_t a = 0; a < 5; ++a) {
      CHECK(l(a, a) == 0.0);
      for (std::size_t b = 0; b < 5; ++b) {
        CHECK(l(a, b) == -l(b, a));
        if (a < b) CHECK(l(a, b) == doctest::Approx(2.0 * (x[a] * v[b] - x[b] * v[a])));
      }
    }
  }

  TEST_CASE("angular momentum is linear in the mass and rejects m <= 0") {
    const BulkVector x{{0.3, 0.1, -0.2, 0.5, -1.1}}, v{{1, 0.2, 0.3, -0.4, 0.1}};
    const BulkBivector l1 = angular_momentum(x, v, 1.0), l3 = angular_momentum(x, v, 3.0);
    for (std::size_t k = 0; k < BulkBivector::kComponents; ++k) {
      CHECK(l3.component(k) == doctest::Approx(3.0 * l1.component(k)));
    }
    CHECK_THROWS_AS(angular_momentum(x, v, 0.0), InvalidArgument);
    CHECK_THROWS_AS(angular_momentum(x, v, -1.0), InvalidArgument);
  }

  TEST_CASE("bivector invariant is preserved by rotations and boosts") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
      const BulkVector x = oracle::random_bulk_vector(rng), v = oracle::random_bulk_vector(rng);
      const double inv = angular_momentum(x, v, 1.0).invariant_square();
      const oracle::Rotation r = oracle::random_rotation(rng);
      const double rotated = angular_momentum(r.apply(x), r.apply(v), 1.0).invariant_square();
      CHECK(rotated == doctest::Approx(inv).epsilon(1e-12).scale(10));
      const double boosted =
          angular_momentum(oracle::boost(x, 4, 0.8), oracle::boost(v, 4, 0.8), 1.0).invariant_square();
      CHECK(boosted == doctest::Approx(inv).epsilon(1e-11).scale(10));
    }
  }

  TEST_CASE("bivector arithmetic is componentwise") {
    const BulkBivector a({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    const BulkBivector b({10, 9, 8, 7, 6, 5, 4, 3, 2, 1});
    CHECK((a + b).max_abs() == 11.0);
    CHECK((a - b).component(0) == -9.0);
    CHECK(a.max_abs() == 10.0);
    CHECK((a - a).max_abs() == 0.0);
  }

  TEST_CASE("causal classification with tolerance") {
    CHECK(classify(BulkVector{{1, 0, 0, 0, 0}}) == CausalClass::Timelike);
    CHECK(classify(BulkVector{{0, 1, 0, 0, 0}}) == CausalClass::Spacelike);
    CHECK(classify(BulkVector{{1, 1, 0, 0, 0}}) == CausalClass::Null);
    CHECK(classify(BulkVector{{1, 0, 0, 0, 1 - 1e-9}}) == CausalClass::Timelike);
    CHECK(classify(BulkVector{{1, 0, 0, 0, 1 - 1e-9}}, 1e-6) == CausalClass::Null);
    CHECK(std::string(to_string(CausalClass::Null)) == "null");
  }
}
