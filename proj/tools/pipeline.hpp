#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "app_config.hpp"
#include "vcrit/solver.hpp"

namespace vcrit::app {

struct CommandContext {
  AppConfig config;
  std::filesystem::path out_dir = ".";
  std::optional<std::filesystem::path> config_path;
  /// Directory holding timeline.json for analyze/verdict (defaults to out_dir).
  std::optional<std::filesystem::path> timeline_dir;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Circulation and viscosity of the configured flow.
double flow_circulation(const AppConfig& cfg);

VectorField3D initial_field(const AppConfig& cfg);

/// Timeline persistence: timeline.json next to the snapshot files. Loaded snapshots carry
/// their file path but no field.
void write_timeline_json(const std::filesystem::path& path, const Timeline& timeline,
                         const GridSpec& grid, double nu, double gamma);
struct LoadedTimeline {
  Timeline timeline;
  GridSpec grid{8, 1.0};
  double nu = 0.0;
  double gamma = 0.0;
};
LoadedTimeline load_timeline(const std::filesystem::path& dir);

/// Each command writes its artifacts into ctx.out_dir and appends a manifest entry.
std::filesystem::path cmd_generate(const CommandContext& ctx);
Timeline cmd_evolve(const CommandContext& ctx);
nlohmann::json cmd_analyze(const CommandContext& ctx);
std::filesystem::path cmd_harmonic(const CommandContext& ctx);
nlohmann::json cmd_verdict(const CommandContext& ctx);
/// generate -> evolve -> analyze -> verdict (and harmonic when configured).
nlohmann::json cmd_all(const CommandContext& ctx);

}  // namespace vcrit::app
