#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace desitter {

/// Fixed-size real vector with componentwise arithmetic.
///
/// `Vector<5>` holds bulk components X^A (A = 0..4) and `Vector<4>` holds
/// chart components x^mu (mu = 0..3). The sizes keep the two from mixing.
template <std::size_t N>
struct Vector {
  std::array<double, N> c{};

  static constexpr std::size_t size() { return N; }

  constexpr double& operator[](std::size_t i) { return c[i]; }
  constexpr double operator[](std::size_t i) const { return c[i]; }

  constexpr Vector& operator+=(const Vector& o) {
    for (std::size_t i = 0; i < N; ++i) c[i] += o.c[i];
    return *this;
  }
  constexpr Vector& operator-=(const Vector& o) {
    for (std::size_t i = 0; i < N; ++i) c[i] -= o.c[i];
    return *this;
  }
  constexpr Vector& operator*=(double s) {
    for (auto& v : c) v *= s;
    return *this;
  }

  friend constexpr Vector operator+(Vector a, const Vector& b) { return a += b; }
  friend constexpr Vector operator-(Vector a, const Vector& b) { return a -= b; }
  friend constexpr Vector operator-(Vector a) { return a *= -1.0; }
  friend constexpr Vector operator*(Vector a, double s) { return a *= s; }
  friend constexpr Vector operator*(double s, Vector a) { return a *= s; }
  friend constexpr Vector operator/(Vector a, double s) { return a *= (1.0 / s); }
  friend constexpr bool operator==(const Vector&, const Vector&) = default;

  bool all_finite() const {
    for (double v : c) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  /// Largest absolute component.
  double max_abs() const {
    double m = 0.0;
    for (double v : c) m = std::fmax(m, std::fabs(v));
    return m;
  }

  /// Euclidean length of the component tuple (no metric).
  double euclidean_norm() const {
    double s = 0.0;
    for (double v : c) s += v * v;
    return std::sqrt(s);
  }
};

using BulkVector = Vector<5>;
using ChartVector = Vector<4>;

/// Diagonal of eta_AB = diag(1,-1,-1,-1,-1).
inline constexpr std::array<double, 5> kBulkSignature{1.0, -1.0, -1.0, -1.0, -1.0};

/// Diagonal of eta_{mu nu} = diag(1,-1,-1,-1).
inline constexpr std::array<double, 4> kChartSignature{1.0, -1.0, -1.0, -1.0};

/// Flat Minkowski product on chart components, eta_{mu nu} a^mu b^nu.
constexpr double minkowski_dot(const ChartVector& a, const ChartVector& b) {
  return a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3];
}

/// Index lowering with eta_{mu nu}.
constexpr ChartVector lower(const ChartVector& a) {
  return ChartVector{{a[0], -a[1], -a[2], -a[3]}};
}

}  // namespace desitter
