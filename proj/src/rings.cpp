#include "vcrit/rings.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "vcrit/errors.hpp"
#include "vcrit/spectral.hpp"

namespace vcrit {

void RingConfig::validate(const GridSpec& grid) const {
  if (!(radius > 0.0)) throw ConfigError("ring: radius must be positive");
  if (!(core_radius > 0.0 && core_radius < radius / 2.0)) {
    throw ConfigError("ring: core_radius must lie in (0, radius/2)");
  }
  if (std::fabs(norm(unit_normal) - 1.0) > 1e-9) {
    throw ConfigError("ring: unit_normal must have unit length");
  }
  const double L = grid.box_length();
  const double margin = 4.0 * core_radius;
  for (int a = 0; a < 3; ++a) {
    // Extent of the centerline circle along axis a.
    const double half = radius * std::sqrt(std::fmax(0.0, 1.0 - unit_normal[a] * unit_normal[a]));
    if (center[a] - half < margin || center[a] + half > L - margin) {
      std::ostringstream msg;
      msg << "ring: does not fit in the box along axis " << a << " (needs margin " << margin
          << ")";
      throw ConfigError(msg.str());
    }
  }
}

double RingConfig::peak_vorticity() const {
  return std::fabs(circulation) / (std::numbers::pi * core_radius * core_radius);
}

void MKConfig::validate() const {
  if (!(inclination > 0.0 && inclination < std::numbers::pi / 2)) {
    // inclination = 0 (coaxial head-on pair) is accepted as a limiting case.
    if (inclination != 0.0) throw ConfigError("mk: inclination must lie in (0, pi/2)");
  }
  if (!(separation > 0.0)) throw ConfigError("mk: separation must be positive");
  if (!(viscosity >= 0.0)) throw ConfigError("mk: viscosity must be non-negative");
}

std::array<RingConfig, 2> mk_rings(const MKConfig& cfg, const GridSpec& grid) {
  cfg.validate();
  const RingConfig& t = cfg.ring;
  if (cfg.separation < t.core_radius) {
    throw ConfigError("mk: cores overlap by more than half (separation < core_radius)");
  }
  const double ca = std::cos(cfg.inclination);
  const double sa = std::sin(cfg.inclination);
  const double R = t.radius;
  const Vec3 c = t.center;

  // Closest point of ring one, and its in-plane direction from there to the ring center.
  const Vec3 top{c[0] - 0.5 * cfg.separation, c[1], c[2] + R * ca};
  const Vec3 down{-sa, 0.0, -ca};

  RingConfig one = t;
  one.center = top + R * down;
  one.unit_normal = {ca, 0.0, -sa};
  one.circulation = t.circulation;

  RingConfig two = t;
  two.center = {2.0 * c[0] - one.center[0], one.center[1], one.center[2]};
  two.unit_normal = {ca, 0.0, sa};
  two.circulation = -t.circulation;

  one.validate(grid);
  two.validate(grid);
  return {one, two};
}

VectorField3D sample_ring_vorticity(const RingConfig& ring, const GridSpec& grid) {
  ring.validate(grid);
  VectorField3D out(grid);
  if (ring.circulation == 0.0) return out;

  const double a2 = ring.core_radius * ring.core_radius;
  const double amp = ring.circulation / (std::numbers::pi * a2);
  const double cutoff2 = 64.0 * a2;  // exp(-64) is below double resolution relative to amp
  const Vec3& nrm = ring.unit_normal;
  const std::size_t n = grid.n();
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        const Vec3 d = periodic_displacement(grid, ring.center, grid.position(i, j, k));
        const double z = dot(d, nrm);
        const Vec3 perp = d - z * nrm;
        const double rho = norm(perp);
        const double s2 = (rho - ring.radius) * (rho - ring.radius) + z * z;
        if (s2 > cutoff2 || rho == 0.0) continue;
        const Vec3 tangent = (1.0 / rho) * cross(nrm, perp);
        out.set(grid.index(i, j, k), (amp * std::exp(-s2 / a2)) * tangent);
      }
    }
  }
  return out;
}

namespace {
VectorField3D project(const VectorField3D& raw) {
  SpectralOps ops(raw.grid());
  SpectralVector hat = ops.to_spectral(raw);
  ops.project_solenoidal(hat);
  return ops.to_physical(hat);
}
}  // namespace

VectorField3D gaussian_ring_vorticity(const RingConfig& ring, const GridSpec& grid) {
  return project(sample_ring_vorticity(ring, grid));
}

VectorField3D superpose_rings(std::span<const RingConfig> rings, const GridSpec& grid) {
  VectorField3D raw(grid);
  for (const auto& r : rings) raw += sample_ring_vorticity(r, grid);
  return project(raw);
}

VectorField3D mk_initial_configuration(const MKConfig& cfg, const GridSpec& grid) {
  const auto rings = mk_rings(cfg, grid);
  return superpose_rings(rings, grid);
}

}  // namespace vcrit
