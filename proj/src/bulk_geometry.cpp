#include "desitter/bulk_geometry.hpp"

#include <cmath>

#include "desitter/errors.hpp"

namespace desitter {

namespace {

constexpr std::array<std::pair<std::size_t, std::size_t>, BulkBivector::kComponents> kSlots{{
    {0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 4}}};

constexpr std::array<const char*, BulkBivector::kComponents> kLabels{
    "L01", "L02", "L03", "L04", "L12", "L13", "L14", "L23", "L24", "L34"};

std::size_t slot_of(std::size_t a, std::size_t b) {
  // a < b, both in 0..4
  static constexpr std::size_t offset[5] = {0, 4, 7, 9, 10};
  return offset[a] + (b - a - 1);
}

}  // namespace

double bulk_inner(const BulkVector& u, const BulkVector& v) {
  double sum = 0.0;
  for (std::size_t a = 0; a < 5; ++a) sum += kBulkSignature[a] * u[a] * v[a];
  return sum;
}

double pseudo_sphere_residual(const BulkVector& x, double ell) {
  return bulk_inner(x, x) + ell * ell;
}

double BulkBivector::operator()(std::size_t a, std::size_t b) const {
  if (a > 4 || b > 4) throw InvalidArgument("bivector index out of range");
  if (a == b) return 0.0;
  if (a < b) return upper_[slot_of(a, b)];
  return -upper_[slot_of(b, a)];
}

std::pair<std::size_t, std::size_t> BulkBivector::indices(std::size_t slot) {
  return kSlots.at(slot);
}

const char* BulkBivector::label(std::size_t slot) { return kLabels.at(slot); }

double BulkBivector::invariant_square() const {
  double sum = 0.0;
  for (std::size_t k = 0; k < kComponents; ++k) {
    auto [a, b] = kSlots[k];
    sum += kBulkSignature[a] * kBulkSignature[b] * upper_[k] * upper_[k];
  }
  return sum;
}

double BulkBivector::max_abs() const {
  double m = 0.0;
  for (double v : upper_) m = std::fmax(m, std::fabs(v));
  return m;
}

BulkBivector operator+(const BulkBivector& a, const BulkBivector& b) {
  BulkBivector r;
  for (std::size_t k = 0; k < BulkBivector::kComponents; ++k) r.upper_[k] = a.upper_[k] + b.upper_[k];
  return r;
}

BulkBivector operator-(const BulkBivector& a, const BulkBivector& b) {
  BulkBivector r;
  for (std::size_t k = 0; k < BulkBivector::kComponents; ++k) r.upper_[k] = a.upper_[k] - b.upper_[k];
  return r;
}

BulkBivector angular_momentum(const BulkVector& x, const BulkVector& v, double mass) {
  if (!(mass > 0.0)) throw InvalidArgument("mass must be positive");
  std::array<double, BulkBivector::kComponents> upper{};
  for (std::size_t k = 0; k < BulkBivector::kComponents; ++k) {
    auto [a, b] = kSlots[k];
    upper[k] = mass * (x[a] * v[b] - x[b] * v[a]);
  }
  return BulkBivector(upper);
}

const char* to_string(CausalClass c) {
  switch (c) {
    case CausalClass::Timelike: return "timelike";
    case CausalClass::Null: return "null";
    case CausalClass::Spacelike: return "spacelike";
  }
  return "unknown";
}

CausalClass classify(const BulkVector& v, double tol) {
  if (tol < 0.0) throw InvalidArgument("null tolerance must be non-negative");
  const double n = bulk_inner(v, v);
  if (n > tol) return CausalClass::Timelike;
  if (std::fabs(n) <= tol) return CausalClass::Null;
  return CausalClass::Spacelike;
}

}  // namespace desitter
