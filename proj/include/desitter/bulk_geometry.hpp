#pragma once

#include <array>
#include <cstddef>
#include <utility>

#include "desitter/vector.hpp"

namespace desitter {

/// Default absolute tolerance for null classification.
inline constexpr double kDefaultNullTolerance = 1e-12;

/// <u,v> = u^0 v^0 - u^1 v^1 - u^2 v^2 - u^3 v^3 - u^4 v^4.
double bulk_inner(const BulkVector& u, const BulkVector& v);

/// <X,X> + ell^2; zero exactly on the pseudo-sphere of radius ell.
double pseudo_sphere_residual(const BulkVector& x, double ell);

/// Antisymmetric rank-2 bulk tensor stored as its ten upper-triangle entries.
///
/// Storage order is 01, 02, 03, 04, 12, 13, 14, 23, 24, 34, which is also the
/// column order used by the trajectory file formats.
class BulkBivector {
 public:
  static constexpr std::size_t kComponents = 10;

  BulkBivector() = default;
  explicit BulkBivector(const std::array<double, kComponents>& upper) : upper_(upper) {}

  /// L^{AB}; antisymmetric, zero on the diagonal.
  double operator()(std::size_t a, std::size_t b) const;

  /// Upper-triangle entry by storage slot.
  double component(std::size_t slot) const { return upper_[slot]; }
  const std::array<double, kComponents>& components() const { return upper_; }

  /// Index pair (A,B), A < B, for a storage slot.
  static std::pair<std::size_t, std::size_t> indices(std::size_t slot);
  /// Short label such as "L04".
  static const char* label(std::size_t slot);

  /// sum_{A<B} s_A s_B (L^{AB})^2 with s the signature signs; invariant under
  /// the bulk isometry group.
  double invariant_square() const;

  /// Largest absolute component.
  double max_abs() const;

  friend BulkBivector operator+(const BulkBivector& a, const BulkBivector& b);
  friend BulkBivector operator-(const BulkBivector& a, const BulkBivector& b);

 private:
  std::array<double, kComponents> upper_{};
};

/// L^{AB} = m (X^A V^B - X^B V^A).
BulkBivector angular_momentum(const BulkVector& x, const BulkVector& v, double mass);

enum class CausalClass { Timelike, Null, Spacelike };

const char* to_string(CausalClass c);

/// Timelike if <v,v> > tol, Null if |<v,v>| <= tol, Spacelike otherwise.
CausalClass classify(const BulkVector& v, double tol = kDefaultNullTolerance);

}  // namespace desitter
