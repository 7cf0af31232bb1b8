#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vcrit/harmonic.hpp"
#include "vcrit/monitor.hpp"
#include "vcrit/oscillation.hpp"
#include "vcrit/rings.hpp"
#include "vcrit/solver.hpp"
#include "vcrit/sparseness.hpp"

namespace vcrit::app {

enum class FlowKind { MK, Ring };

struct GridSection {
  std::size_t n = 64;
  double box_length = 6.283185307179586;
};

struct FlowSection {
  FlowKind kind = FlowKind::MK;
  double viscosity = 0.01;
};

struct SolverSection {
  SolverOptions options;
  double t_start = 0.0;
  double t_final = 4.0;
  double snapshot_interval = 0.25;
  double stop_at_growth = 0.0;
  /// Resume: start from this SLF1 field instead of the generated one.
  std::optional<std::filesystem::path> initial_field;
};

struct AnalysisSection {
  std::optional<double> lambda;  ///< default 1/(2M)
  double delta = 0.75;
  int k = 1;
  PhiArgument phi_argument = PhiArgument::Reciprocal;
  SparsenessMode sparseness_mode = SparsenessMode::Ball3D;
  bool sparseness_1d = false;     ///< also report the 1D scale (slower)
  std::size_t fibonacci_directions = 0;
  std::size_t bmo_stride = 2;
  CenterMode bmo_centers = CenterMode::ValidOnly;
  double direction_floor = 1e-3;
  double window_start = -1e300;
  double window_end = 1e300;
};

struct HarmonicSection {
  std::vector<double> alphas{0.1, 0.25, 0.5, 0.75, 1.0};
  std::size_t grid_n = 512;
  HmOptions options;
  std::size_t random_sets = 0;  ///< random slit sets per alpha for the extremal check
  std::size_t random_grid_n = 256;
};

struct AppConfig {
  GridSection grid;
  FlowSection flow;
  RingConfig ring;
  double mk_inclination = 0.5235987755982988;
  double mk_separation = 0.5;
  SolverSection solver;
  AnalysisSection analysis;
  FrameworkConstants constants;
  HarmonicSection harmonic;
  bool has_harmonic = false;
  std::uint64_t seed = 0;

  GridSpec grid_spec() const { return GridSpec(grid.n, grid.box_length); }
  MKConfig mk() const;
  /// Echo of the effective configuration (manifests and report headers).
  nlohmann::json to_json() const;
};

/// Parses a YAML configuration. Unknown keys, wrong types and out-of-range values raise
/// ConfigError naming the line; an unreadable file raises IoError.
AppConfig load_config(const std::filesystem::path& path);
AppConfig parse_config(const std::string& text);

}  // namespace vcrit::app
