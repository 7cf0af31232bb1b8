#pragma once

#include <array>
#include <span>

#include "vcrit/field.hpp"
#include "vcrit/vec3.hpp"

namespace vcrit {

/// A circular vortex ring with a Gaussian core.
///
/// Vorticity is Gamma / (pi a^2) exp(-s^2 / a^2) along the ring tangent, where s is the
/// distance to the core centerline and a = core_radius (the e^-1 radius). The tangent is
/// oriented counter-clockwise about unit_normal, so Gamma > 0 propagates along +unit_normal.
struct RingConfig {
  double radius = 1.0;
  double core_radius = 0.1;
  double circulation = 1.0;
  Vec3 center{0.0, 0.0, 0.0};
  Vec3 unit_normal{0.0, 0.0, 1.0};

  /// Throws ConfigError on degenerate geometry or if the ring leaves the box margin.
  void validate(const GridSpec& grid) const;
  double peak_vorticity() const;
};

/// Two counter-rotating rings colliding at an angle.
///
/// The configuration is mirror-symmetric about the plane x = ring.center.x. Each ring plane
/// makes the angle `inclination` with that plane; the rings' closest points lie on the line
/// through the center along y, `separation` apart (centerline to centerline), and the rings
/// hang in -z from there. Ring one carries +Gamma, ring two -Gamma.
struct MKConfig {
  RingConfig ring;  ///< radius, core radius, circulation and configuration center
  double inclination = 0.5235987755982988;
  double separation = 0.5;
  double viscosity = 0.01;

  void validate() const;
};

/// Places both rings of an MK configuration. Throws ConfigError if they do not fit or if
/// the cores overlap by more than half (separation < core_radius).
std::array<RingConfig, 2> mk_rings(const MKConfig& cfg, const GridSpec& grid);

/// Analytic ring vorticity sampled on the grid (no divergence cleanup).
VectorField3D sample_ring_vorticity(const RingConfig& ring, const GridSpec& grid);

/// Ring vorticity made exactly solenoidal by spectral projection.
VectorField3D gaussian_ring_vorticity(const RingConfig& ring, const GridSpec& grid);

/// Superposition of several rings followed by one spectral projection.
VectorField3D superpose_rings(std::span<const RingConfig> rings, const GridSpec& grid);

VectorField3D mk_initial_configuration(const MKConfig& cfg, const GridSpec& grid);

}  // namespace vcrit
