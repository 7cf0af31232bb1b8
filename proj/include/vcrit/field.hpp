#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "vcrit/vec3.hpp"

namespace vcrit {

/// Periodic cubic grid: n points per axis on [0, box_length), x-fastest ordering.
class GridSpec {
 public:
  GridSpec(std::size_t n, double box_length);

  std::size_t n() const noexcept { return n_; }
  double box_length() const noexcept { return box_length_; }
  double spacing() const noexcept { return box_length_ / static_cast<double>(n_); }
  double cell_volume() const noexcept { return spacing() * spacing() * spacing(); }
  std::size_t cells() const noexcept { return n_ * n_ * n_; }

  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return (k * n_ + j) * n_ + i;
  }
  /// Index of (i + di, j + dj, k + dk) with periodic wrap.
  std::size_t wrapped_index(long i, long j, long k) const noexcept;
  std::array<std::size_t, 3> coords(std::size_t idx) const noexcept {
    return {idx % n_, (idx / n_) % n_, idx / (n_ * n_)};
  }
  Vec3 position(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    const double h = spacing();
    return {h * static_cast<double>(i), h * static_cast<double>(j), h * static_cast<double>(k)};
  }

  bool operator==(const GridSpec&) const = default;

 private:
  std::size_t n_;
  double box_length_;
};

/// Minimal-image displacement b - a on the periodic box.
Vec3 periodic_displacement(const GridSpec& grid, const Vec3& a, const Vec3& b);

/// Real scalar samples on a GridSpec.
struct ScalarField3D {
  GridSpec grid;
  std::vector<double> data;

  explicit ScalarField3D(const GridSpec& g) : grid(g), data(g.cells(), 0.0) {}
  ScalarField3D(const GridSpec& g, std::vector<double> values);

  double& operator[](std::size_t idx) { return data[idx]; }
  double operator[](std::size_t idx) const { return data[idx]; }
};

/// Three-component field stored component-major (all x components, then y, then z).
class VectorField3D {
 public:
  explicit VectorField3D(const GridSpec& g);
  VectorField3D(const GridSpec& g, std::vector<double> values);

  const GridSpec& grid() const noexcept { return grid_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  std::span<const double> component(int c) const noexcept {
    return std::span<const double>(data_).subspan(c * grid_.cells(), grid_.cells());
  }
  std::span<double> component(int c) noexcept {
    return std::span<double>(data_).subspan(c * grid_.cells(), grid_.cells());
  }

  Vec3 at(std::size_t idx) const noexcept {
    const std::size_t m = grid_.cells();
    return {data_[idx], data_[m + idx], data_[2 * m + idx]};
  }
  void set(std::size_t idx, const Vec3& v) noexcept {
    const std::size_t m = grid_.cells();
    data_[idx] = v[0];
    data_[m + idx] = v[1];
    data_[2 * m + idx] = v[2];
  }

  bool all_finite() const noexcept;

  VectorField3D& operator+=(const VectorField3D& other);
  VectorField3D& operator*=(double s);

 private:
  GridSpec grid_;
  std::vector<double> data_;
};

VectorField3D operator*(double s, VectorField3D f);

}  // namespace vcrit
