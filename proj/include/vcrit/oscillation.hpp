#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "vcrit/field.hpp"
#include "vcrit/weights.hpp"

namespace vcrit {

/// Unit vorticity direction w/|w| on cells where |w| >= floor_fraction * ||w||_inf.
struct DirectionField {
  GridSpec grid;
  VectorField3D xi;
  std::vector<std::uint8_t> valid;
  bool degenerate = false;  ///< the input field was identically zero

  std::size_t valid_count() const;
};

DirectionField direction_field(const VectorField3D& omega, double floor_fraction = 1e-3);

/// Scalar or vector samples with an optional validity mask, as consumed by the oscillation
/// routines. Views; the referenced data must outlive the OscillationField.
class OscillationField {
 public:
  explicit OscillationField(const ScalarField3D& f);
  explicit OscillationField(const VectorField3D& f);
  explicit OscillationField(const DirectionField& f);

  const GridSpec& grid() const noexcept { return grid_; }
  int components() const noexcept { return static_cast<int>(comps_.size()); }
  double value(int c, std::size_t idx) const noexcept { return comps_[c][idx]; }
  bool is_valid(std::size_t idx) const noexcept { return !valid_ || (*valid_)[idx] != 0; }
  bool has_mask() const noexcept { return valid_ != nullptr; }
  /// sum over cells of |f| dV (valid cells only)
  double l1_norm() const;

 private:
  GridSpec grid_;
  std::vector<const double*> comps_;
  const std::vector<std::uint8_t>* valid_ = nullptr;
};

/// Cells per side m = round(r/h) of the discrete cube of side r. Throws ParameterError
/// (scale too small) when m < 2, or when the cube would exceed the box.
std::size_t cube_cells_per_side(const GridSpec& grid, double r);

/// Mean oscillation of f over the cube of side r around grid point `center` (periodic):
/// cells center - m/2 ... center - m/2 + m - 1 per axis (integer division), so even cubes
/// are centred half a cell below `center`. For masked fields only valid cells enter;
/// returns nullopt when fewer than min_valid_fraction of the cube's cells are valid.
std::optional<double> mean_oscillation(const OscillationField& f,
                                       const std::array<std::size_t, 3>& center, double r,
                                       double min_valid_fraction = 0.9);

enum class CenterMode { All, ValidOnly };

struct BmoOptions {
  std::size_t stride = 1;
  CenterMode centers = CenterMode::All;
  double min_valid_fraction = 0.9;
};

struct BmoScaleRow {
  double requested = 0.0;
  double side = 0.0;  ///< actual cube side (cells * h)
  std::size_t cells_per_side = 0;
  double max_oscillation = 0.0;
  double phi = 0.0;
  double ratio = 0.0;
  std::size_t cubes = 0;
  std::size_t skipped = 0;
};

struct BmoReport {
  double l1_part = 0.0;
  double sup_part = 0.0;
  double total = 0.0;
  std::array<std::size_t, 3> argmax_center{0, 0, 0};
  double argmax_side = 0.0;
  std::vector<BmoScaleRow> per_scale;
  WeightSpec weight;
};

/// ||f||_1 + sup over cubes of Omega(f, I) / phi(side). Cube means come from periodic
/// summed-area tables. Scales above weight.r_max or below two cells are dropped; throws
/// DomainError when none remain.
BmoReport bmo_phi_norm(const OscillationField& f, const WeightSpec& weight,
                       const std::vector<double>& scales, const BmoOptions& options = {});

/// Dyadic scales r_max, r_max/2, ... down to two cells.
std::vector<double> dyadic_scales(const GridSpec& grid, double r_max);

/// Sum over cells of |w| g_k(|w|) dV with g_k(s) = log^k(tower(k) + s) (so g_k >= 1);
/// k = 1 is the L log L modular.
double orlicz_modular(const VectorField3D& omega, int k);

/// g_k(s) from orlicz_modular.
double orlicz_integrand_factor(double s, int k);

}  // namespace vcrit
