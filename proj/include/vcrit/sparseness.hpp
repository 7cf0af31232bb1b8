#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vcrit/field.hpp"
#include "vcrit/solver.hpp"
#include "vcrit/weights.hpp"

namespace vcrit {

/// Signed vorticity components w^{i,+} = w_i and w^{i,-} = -w_i are tagged 2*i + (sign < 0).
inline constexpr int kComponentTags = 6;
/// Tag of a mask that is not tied to a single signed component.
inline constexpr int kUnionTag = -1;

std::string component_tag_name(int tag);

/// Occupancy of {w^{i,+-} > lambda ||w||_inf}, or of a union of such sets.
struct LevelSetMask {
  GridSpec grid;
  std::vector<std::uint8_t> occupancy;
  double lambda = 0.5;
  double threshold = 0.0;  ///< lambda * ||w||_inf
  int component_tag = kUnionTag;

  std::size_t occupied() const;
  double volume() const { return static_cast<double>(occupied()) * grid.cell_volume(); }
};

/// The six signed-component masks, their union, and the component attaining the
/// pointwise max-norm at every cell.
struct SuperlevelMasks {
  std::array<LevelSetMask, kComponentTags> components;
  LevelSetMask union_mask;
  std::vector<std::int8_t> max_component;  ///< tag per cell (lowest tag on ties)
  double linf = 0.0;
  bool degenerate = false;  ///< zero field: every mask empty, no threshold defined
};

/// Throws ParameterError unless 0 < lambda < 1.
SuperlevelMasks superlevel_masks(const VectorField3D& omega, double lambda);

enum class SparsenessMode { Ball3D, Segment1D };

struct SparsenessReport {
  double delta = 0.0;
  double scale = 0.0;
  SparsenessMode mode = SparsenessMode::Ball3D;
  std::array<std::size_t, 3> worst_center{0, 0, 0};
  double worst_density = 0.0;
  bool sparse = true;  ///< worst_density <= delta, i.e. sparse around every grid point
  std::size_t ball_cells = 0;     ///< 3D: cells in the discrete ball
  std::size_t segment_samples = 0;  ///< 1D: samples per segment
};

/// Cell offsets whose centers lie within r of the origin (periodic metric, r <= L/4).
std::vector<std::array<long, 3>> ball_offsets(const GridSpec& grid, double r);

/// Occupied-cell counts of the discrete ball B_r(x) for every grid point x, by FFT
/// convolution of the mask with the ball indicator; rounded to exact integers.
std::vector<std::uint32_t> ball_counts(const GridSpec& grid,
                                       const std::vector<std::uint8_t>& occupancy, double r);

/// Same counts by direct summation (reference implementation).
std::vector<std::uint32_t> ball_counts_direct(const GridSpec& grid,
                                              const std::vector<std::uint8_t>& occupancy,
                                              double r);

/// 3D delta-sparseness of `mask` at scale r around every grid point.
/// Throws ParameterError unless 0 < r <= L/4 and 0 < delta < 1.
SparsenessReport sparse_3d(const LevelSetMask& mask, double r, double delta);

/// Pointwise-maximal-component variant: around each x the mask of the component attaining
/// the max-norm at x is used.
SparsenessReport sparse_3d(const SuperlevelMasks& masks, double r, double delta);

/// Unit directions: the 13 lattice directions (axes, face and body diagonals), plus
/// `fibonacci` points of a Fibonacci sphere (one per antipodal pair).
std::vector<Vec3> sample_directions(std::size_t fibonacci = 0);

/// Occupied fraction of the diameter segment (x - r nu, x + r nu) by trapezoidal sampling
/// at spacing <= h/2 with nearest-cell lookup.
class SegmentSampler {
 public:
  SegmentSampler(const GridSpec& grid, double r, const std::vector<Vec3>& directions);
  std::size_t directions() const noexcept { return offsets_.size(); }
  std::size_t samples() const noexcept { return weights_.size(); }
  double fraction(const std::vector<std::uint8_t>& occupancy,
                  const std::array<std::size_t, 3>& center, std::size_t direction) const;
  /// Minimum over directions.
  double min_fraction(const std::vector<std::uint8_t>& occupancy,
                      const std::array<std::size_t, 3>& center) const;

 private:
  GridSpec grid_;
  std::vector<std::vector<std::array<long, 3>>> offsets_;
  std::vector<double> weights_;
  double weight_sum_ = 0.0;
};

/// 1D delta-sparseness: around every x some sampled direction has fraction <= delta.
SparsenessReport sparse_1d(const LevelSetMask& mask, double r, double delta,
                           const std::vector<Vec3>& directions = sample_directions());
SparsenessReport sparse_1d(const SuperlevelMasks& masks, double r, double delta,
                           const std::vector<Vec3>& directions = sample_directions());

struct ScaleSearchOptions {
  SparsenessMode mode = SparsenessMode::Ball3D;
  double resolution_cells = 1.0;  ///< bisection stops below this bracket width (cells)
  std::vector<Vec3> directions = sample_directions();
};

struct ScaleSearchResult {
  /// Smallest r with sparseness at every scanned r' in [r, L/4]; empty when the mask is
  /// not sparse even at L/4.
  std::optional<double> scale;
  bool non_monotone = false;  ///< a sparse scale below a non-sparse one was seen
  std::vector<std::pair<double, double>> scanned;  ///< (r, worst density), scan order
};

/// Dyadic scan r = L/4, L/8, ... down to one cell, then bisection of the bracket below the
/// stable threshold. Throws ParameterError on an empty mask.
ScaleSearchResult sparseness_scale(const LevelSetMask& mask, double delta,
                                   const ScaleSearchOptions& options = {});
ScaleSearchResult sparseness_scale(const SuperlevelMasks& masks, double delta,
                                   const ScaleSearchOptions& options = {});

struct DistributionBound {
  double lhs = 0.0;  ///< h^3 * #{cells : |w| > M}, |w| the pointwise max-norm
  double rhs = 0.0;  ///< ||w||_1 / M with the Euclidean magnitude
  std::size_t count = 0;
};

/// Chebyshev bound on the distribution function; lhs <= rhs holds in floating point.
/// Throws ParameterError unless M > 0.
DistributionBound distribution_bound(const VectorField3D& omega, double level);

enum class PhiArgument { Reciprocal, Direct };

struct VolumeDecayRow {
  double time = 0.0;
  double volume = 0.0;  ///< |V_t|, union of the signed-component super-level sets
  double linf = 0.0;
  double product = 0.0;      ///< |V_t| * ||w||_inf
  double phi = 0.0;          ///< phi_k at the chosen argument (NaN outside its domain)
  /// |V_t| * ||w||_inf / phi_k: bounded in time when the weighted decay |V_t| <=
  /// c phi_k / ||w||_inf holds (NaN outside the domain).
  double compensated = 0.0;
  bool phi_in_domain = true;
};

/// Per-snapshot super-level volumes with the plain and weight-compensated products.
/// Reciprocal evaluates phi_k at 1/||w||_inf (must lie in (0, r_max]); Direct applies the
/// formula at ||w||_inf. Snapshots without a stored field are loaded from their file;
/// throws ParameterError listing the snapshots that have neither.
std::vector<VolumeDecayRow> volume_decay_series(const Timeline& timeline, double lambda,
                                                const WeightSpec& weight,
                                                PhiArgument argument = PhiArgument::Reciprocal);

void write_volume_decay_csv(const std::filesystem::path& path,
                            const std::vector<VolumeDecayRow>& rows, PhiArgument argument);

}  // namespace vcrit
