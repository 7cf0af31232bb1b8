#include "vcrit/field.hpp"

#include <cmath>
#include <string>

#include "vcrit/errors.hpp"

namespace vcrit {

GridSpec::GridSpec(std::size_t n, double box_length) : n_(n), box_length_(box_length) {
  if (n < 8 || (n & (n - 1)) != 0) {
    throw ParameterError("grid: n must be a power of two >= 8, got " + std::to_string(n));
  }
  if (!(box_length > 0.0) || !std::isfinite(box_length)) {
    throw ParameterError("grid: box_length must be positive");
  }
}

std::size_t GridSpec::wrapped_index(long i, long j, long k) const noexcept {
  const long n = static_cast<long>(n_);
  auto wrap = [n](long v) { return static_cast<std::size_t>(((v % n) + n) % n); };
  return index(wrap(i), wrap(j), wrap(k));
}

Vec3 periodic_displacement(const GridSpec& grid, const Vec3& a, const Vec3& b) {
  const double L = grid.box_length();
  Vec3 d = b - a;
  for (double& x : d) x -= L * std::nearbyint(x / L);
  return d;
}

ScalarField3D::ScalarField3D(const GridSpec& g, std::vector<double> values)
    : grid(g), data(std::move(values)) {
  if (data.size() != g.cells()) throw ParameterError("scalar field: size does not match grid");
}

VectorField3D::VectorField3D(const GridSpec& g) : grid_(g), data_(3 * g.cells(), 0.0) {}

VectorField3D::VectorField3D(const GridSpec& g, std::vector<double> values)
    : grid_(g), data_(std::move(values)) {
  if (data_.size() != 3 * g.cells()) {
    throw ParameterError("vector field: expected 3*n^3 values");
  }
}

bool VectorField3D::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

VectorField3D& VectorField3D::operator+=(const VectorField3D& other) {
  if (!(other.grid_ == grid_)) throw ParameterError("vector field: grid mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

VectorField3D& VectorField3D::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

VectorField3D operator*(double s, VectorField3D f) {
  f *= s;
  return f;
}

}  // namespace vcrit
