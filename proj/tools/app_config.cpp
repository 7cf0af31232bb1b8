#include "app_config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "vcrit/errors.hpp"

namespace vcrit::app {

namespace {

[[noreturn]] void fail(const YAML::Node& node, const std::string& what) {
  std::ostringstream msg;
  const YAML::Mark m = node.Mark();
  if (m.line >= 0) msg << "config line " << m.line + 1 << ": ";
  msg << what;
  throw ConfigError(msg.str());
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) fail(node, "'" + key + "' must be a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(node, "'" + key + "' has the wrong type (value '" + node.Scalar() + "')");
  }
}

double positive(const YAML::Node& node, const std::string& key) {
  const double v = scalar<double>(node, key);
  if (!(v > 0.0)) fail(node, "'" + key + "' must be positive");
  return v;
}

Vec3 vec3(const YAML::Node& node, const std::string& key) {
  if (!node.IsSequence() || node.size() != 3) fail(node, "'" + key + "' must be a list of 3 numbers");
  Vec3 v{};
  for (std::size_t i = 0; i < 3; ++i) v[i] = scalar<double>(node[i], key);
  return v;
}

using Handler = std::function<void(const YAML::Node&)>;

void walk(const YAML::Node& section, const std::string& name,
          const std::map<std::string, Handler>& handlers) {
  if (!section.IsMap()) fail(section, "section '" + name + "' must be a mapping");
  for (const auto& kv : section) {
    const std::string key = kv.first.as<std::string>();
    const auto it = handlers.find(key);
    if (it == handlers.end()) fail(kv.first, "unknown key '" + key + "' in section '" + name + "'");
    it->second(kv.second);
  }
}

template <typename E>
E choice(const YAML::Node& node, const std::string& key, const std::map<std::string, E>& options) {
  const std::string v = scalar<std::string>(node, key);
  const auto it = options.find(v);
  if (it == options.end()) {
    std::string allowed;
    for (const auto& [k, _] : options) allowed += (allowed.empty() ? "" : ", ") + k;
    fail(node, "'" + key + "' must be one of: " + allowed);
  }
  return it->second;
}

std::string lower_name(FlowKind k) { return k == FlowKind::MK ? "mk" : "ring"; }

}  // namespace

MKConfig AppConfig::mk() const {
  MKConfig m;
  m.ring = ring;
  m.inclination = mk_inclination;
  m.separation = mk_separation;
  m.viscosity = flow.viscosity;
  return m;
}

AppConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    std::ostringstream msg;
    msg << "config line " << e.mark.line + 1 << ": " << e.msg;
    throw ConfigError(msg.str());
  }
  AppConfig cfg;
  if (root.IsNull()) return cfg;
  if (!root.IsMap()) throw ConfigError("config: top level must be a mapping");

  bool center_given = false;
  const std::map<std::string, Handler> top = {
      {"grid",
       [&](const YAML::Node& s) {
         walk(s, "grid",
              {{"n",
                [&](const YAML::Node& v) {
                  const long n = scalar<long>(v, "n");
                  if (n < 8 || (n & (n - 1)) != 0) fail(v, "'n' must be a power of two >= 8");
                  cfg.grid.n = static_cast<std::size_t>(n);
                }},
               {"box_length", [&](const YAML::Node& v) { cfg.grid.box_length = positive(v, "box_length"); }}});
       }},
      {"flow",
       [&](const YAML::Node& s) {
         walk(s, "flow",
              {{"kind",
                [&](const YAML::Node& v) {
                  cfg.flow.kind = choice<FlowKind>(v, "kind", {{"mk", FlowKind::MK}, {"ring", FlowKind::Ring}});
                }},
               {"viscosity", [&](const YAML::Node& v) {
                  cfg.flow.viscosity = scalar<double>(v, "viscosity");
                  if (!(cfg.flow.viscosity >= 0.0)) fail(v, "'viscosity' must be >= 0");
                }}});
       }},
      {"ring",
       [&](const YAML::Node& s) {
         walk(s, "ring",
              {{"radius", [&](const YAML::Node& v) { cfg.ring.radius = positive(v, "radius"); }},
               {"core_radius", [&](const YAML::Node& v) { cfg.ring.core_radius = positive(v, "core_radius"); }},
               {"circulation", [&](const YAML::Node& v) { cfg.ring.circulation = scalar<double>(v, "circulation"); }},
               {"center",
                [&](const YAML::Node& v) {
                  cfg.ring.center = vec3(v, "center");
                  center_given = true;
                }},
               {"normal", [&](const YAML::Node& v) { cfg.ring.unit_normal = vec3(v, "normal"); }}});
       }},
      {"mk",
       [&](const YAML::Node& s) {
         walk(s, "mk",
              {{"inclination", [&](const YAML::Node& v) { cfg.mk_inclination = scalar<double>(v, "inclination"); }},
               {"separation", [&](const YAML::Node& v) { cfg.mk_separation = positive(v, "separation"); }}});
       }},
      {"solver",
       [&](const YAML::Node& s) {
         auto& so = cfg.solver;
         walk(s, "solver",
              {{"cfl", [&](const YAML::Node& v) { so.options.cfl = positive(v, "cfl"); }},
               {"dealias", [&](const YAML::Node& v) { so.options.dealias = scalar<bool>(v, "dealias"); }},
               {"viscous",
                [&](const YAML::Node& v) {
                  so.options.viscous = choice<ViscousTreatment>(
                      v, "viscous",
                      {{"integrating_factor", ViscousTreatment::IntegratingFactor},
                       {"explicit", ViscousTreatment::Explicit}});
                }},
               {"dt_max", [&](const YAML::Node& v) { so.options.dt_max = positive(v, "dt_max"); }},
               {"t_start",
                [&](const YAML::Node& v) {
                  so.t_start = scalar<double>(v, "t_start");
                  if (!(so.t_start >= 0.0)) fail(v, "'t_start' must be >= 0");
                }},
               {"t_final",
                [&](const YAML::Node& v) {
                  so.t_final = scalar<double>(v, "t_final");
                  if (!(so.t_final >= 0.0)) fail(v, "'t_final' must be >= 0");
                }},
               {"snapshot_interval",
                [&](const YAML::Node& v) { so.snapshot_interval = positive(v, "snapshot_interval"); }},
               {"stop_at_growth",
                [&](const YAML::Node& v) {
                  so.stop_at_growth = scalar<double>(v, "stop_at_growth");
                  if (so.stop_at_growth != 0.0 && !(so.stop_at_growth > 1.0)) {
                    fail(v, "'stop_at_growth' must be 0 (off) or > 1");
                  }
                }},
               {"initial_field",
                [&](const YAML::Node& v) { so.initial_field = scalar<std::string>(v, "initial_field"); }}});
       }},
      {"analysis",
       [&](const YAML::Node& s) {
         auto& an = cfg.analysis;
         walk(s, "analysis",
              {{"lambda",
                [&](const YAML::Node& v) {
                  if (v.IsScalar() && v.Scalar() == "auto") {
                    an.lambda.reset();
                    return;
                  }
                  const double l = scalar<double>(v, "lambda");
                  if (!(l > 0.0 && l < 1.0)) fail(v, "'lambda' must lie in (0, 1) or be 'auto'");
                  an.lambda = l;
                }},
               {"delta",
                [&](const YAML::Node& v) {
                  an.delta = scalar<double>(v, "delta");
                  if (!(an.delta > 0.0 && an.delta < 1.0)) fail(v, "'delta' must lie in (0, 1)");
                }},
               {"k",
                [&](const YAML::Node& v) {
                  an.k = scalar<int>(v, "k");
                  if (an.k < 0 || an.k > 3) fail(v, "'k' must lie in [0, 3]");
                }},
               {"phi_argument",
                [&](const YAML::Node& v) {
                  an.phi_argument = choice<PhiArgument>(
                      v, "phi_argument",
                      {{"reciprocal", PhiArgument::Reciprocal}, {"direct", PhiArgument::Direct}});
                }},
               {"sparseness_mode",
                [&](const YAML::Node& v) {
                  an.sparseness_mode = choice<SparsenessMode>(
                      v, "sparseness_mode",
                      {{"ball3d", SparsenessMode::Ball3D}, {"segment1d", SparsenessMode::Segment1D}});
                }},
               {"sparseness_1d", [&](const YAML::Node& v) { an.sparseness_1d = scalar<bool>(v, "sparseness_1d"); }},
               {"fibonacci_directions",
                [&](const YAML::Node& v) {
                  const long f = scalar<long>(v, "fibonacci_directions");
                  if (f < 0) fail(v, "'fibonacci_directions' must be >= 0");
                  an.fibonacci_directions = static_cast<std::size_t>(f);
                }},
               {"bmo_stride",
                [&](const YAML::Node& v) {
                  const long st = scalar<long>(v, "bmo_stride");
                  if (st < 0) fail(v, "'bmo_stride' must be >= 0 (0 disables)");
                  an.bmo_stride = static_cast<std::size_t>(st);
                }},
               {"bmo_centers",
                [&](const YAML::Node& v) {
                  an.bmo_centers = choice<CenterMode>(
                      v, "bmo_centers", {{"all", CenterMode::All}, {"valid_only", CenterMode::ValidOnly}});
                }},
               {"direction_floor",
                [&](const YAML::Node& v) {
                  an.direction_floor = scalar<double>(v, "direction_floor");
                  if (!(an.direction_floor > 0.0 && an.direction_floor < 1.0)) {
                    fail(v, "'direction_floor' must lie in (0, 1)");
                  }
                }},
               {"window", [&](const YAML::Node& v) {
                  if (!v.IsSequence() || v.size() != 2) fail(v, "'window' must be [start, end]");
                  an.window_start = scalar<double>(v[0], "window");
                  an.window_end = scalar<double>(v[1], "window");
                  if (!(an.window_start <= an.window_end)) fail(v, "'window' start exceeds end");
                }}});
       }},
      {"constants",
       [&](const YAML::Node& s) {
         auto& c = cfg.constants;
         walk(s, "constants",
              {{"c_star", [&](const YAML::Node& v) { c.c_star = positive(v, "c_star"); }},
               {"c1", [&](const YAML::Node& v) { c.c1 = positive(v, "c1"); }},
               {"c2", [&](const YAML::Node& v) { c.c2 = positive(v, "c2"); }},
               {"c3", [&](const YAML::Node& v) { c.c3 = positive(v, "c3"); }},
               {"c4", [&](const YAML::Node& v) { c.c4 = positive(v, "c4"); }}});
       }},
      {"harmonic",
       [&](const YAML::Node& s) {
         auto& h = cfg.harmonic;
         cfg.has_harmonic = true;
         walk(s, "harmonic",
              {{"alphas",
                [&](const YAML::Node& v) {
                  if (!v.IsSequence() || v.size() == 0) fail(v, "'alphas' must be a non-empty list");
                  h.alphas.clear();
                  for (const auto& a : v) {
                    const double x = scalar<double>(a, "alphas");
                    if (!(x > 0.0 && x <= 1.0)) fail(a, "'alphas' entries must lie in (0, 1]");
                    h.alphas.push_back(x);
                  }
                }},
               {"grid_n",
                [&](const YAML::Node& v) {
                  const long n = scalar<long>(v, "grid_n");
                  if (n < 128 || n % 2 != 0) fail(v, "'grid_n' must be even and >= 128");
                  h.grid_n = static_cast<std::size_t>(n);
                }},
               {"boundary",
                [&](const YAML::Node& v) {
                  h.options.boundary = choice<CircleBoundary>(
                      v, "boundary",
                      {{"staircase", CircleBoundary::Staircase},
                       {"shortley_weller", CircleBoundary::ShortleyWeller}});
                }},
               {"slit",
                [&](const YAML::Node& v) {
                  h.options.slit = choice<SlitTreatment>(
                      v, "slit", {{"half_cell_pin", SlitTreatment::HalfCellPin}, {"cut_arm", SlitTreatment::CutArm}});
                }},
               {"tolerance", [&](const YAML::Node& v) { h.options.tolerance = positive(v, "tolerance"); }},
               {"max_sweeps",
                [&](const YAML::Node& v) {
                  const long m = scalar<long>(v, "max_sweeps");
                  if (m < 1) fail(v, "'max_sweeps' must be >= 1");
                  h.options.max_sweeps = static_cast<std::size_t>(m);
                }},
               {"random_sets",
                [&](const YAML::Node& v) {
                  const long m = scalar<long>(v, "random_sets");
                  if (m < 0) fail(v, "'random_sets' must be >= 0");
                  h.random_sets = static_cast<std::size_t>(m);
                }},
               {"random_grid_n", [&](const YAML::Node& v) {
                  const long n = scalar<long>(v, "random_grid_n");
                  if (n < 128 || n % 2 != 0) fail(v, "'random_grid_n' must be even and >= 128");
                  h.random_grid_n = static_cast<std::size_t>(n);
                }}});
       }},
      {"seed", [&](const YAML::Node& v) {
         const long long sd = scalar<long long>(v, "seed");
         if (sd < 0) fail(v, "'seed' must be >= 0");
         cfg.seed = static_cast<std::uint64_t>(sd);
       }}};
  walk(root, "top level", top);

  if (!center_given) {
    const double c = 0.5 * cfg.grid.box_length;
    cfg.ring.center = {c, c, c};
  }
  if (cfg.solver.t_final < cfg.solver.t_start) {
    throw ConfigError("config: solver.t_final precedes solver.t_start");
  }
  // Geometry is validated here so that misfits are configuration errors.
  const GridSpec g = cfg.grid_spec();
  if (cfg.flow.kind == FlowKind::MK) {
    mk_rings(cfg.mk(), g);
  } else {
    cfg.ring.validate(g);
  }
  return cfg;
}

AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

nlohmann::json AppConfig::to_json() const {
  nlohmann::json j;
  j["grid"] = {{"n", grid.n}, {"box_length", grid.box_length}};
  j["flow"] = {{"kind", lower_name(flow.kind)}, {"viscosity", flow.viscosity}};
  j["ring"] = {{"radius", ring.radius},
               {"core_radius", ring.core_radius},
               {"circulation", ring.circulation},
               {"center", ring.center},
               {"normal", ring.unit_normal}};
  j["mk"] = {{"inclination", mk_inclination}, {"separation", mk_separation}};
  j["solver"] = {{"cfl", solver.options.cfl},
                 {"dealias", solver.options.dealias},
                 {"viscous", solver.options.viscous == ViscousTreatment::Explicit ? "explicit"
                                                                                   : "integrating_factor"},
                 {"dt_max", solver.options.dt_max},
                 {"t_start", solver.t_start},
                 {"t_final", solver.t_final},
                 {"snapshot_interval", solver.snapshot_interval},
                 {"stop_at_growth", solver.stop_at_growth}};
  if (solver.initial_field) j["solver"]["initial_field"] = solver.initial_field->string();
  j["analysis"] = {{"lambda", analysis.lambda ? nlohmann::json(*analysis.lambda) : nlohmann::json("auto")},
                   {"delta", analysis.delta},
                   {"k", analysis.k},
                   {"phi_argument", analysis.phi_argument == PhiArgument::Reciprocal ? "reciprocal" : "direct"},
                   {"sparseness_mode",
                    analysis.sparseness_mode == SparsenessMode::Ball3D ? "ball3d" : "segment1d"},
                   {"sparseness_1d", analysis.sparseness_1d},
                   {"fibonacci_directions", analysis.fibonacci_directions},
                   {"bmo_stride", analysis.bmo_stride},
                   {"bmo_centers", analysis.bmo_centers == CenterMode::All ? "all" : "valid_only"},
                   {"direction_floor", analysis.direction_floor}};
  if (analysis.window_start > -1e300 || analysis.window_end < 1e300) {
    j["analysis"]["window"] = {analysis.window_start, analysis.window_end};
  }
  j["constants"] = {{"c_star", constants.c_star},
                    {"c1", constants.c1},
                    {"c2", constants.c2},
                    {"c3", constants.c3},
                    {"c4", constants.c4}};
  if (has_harmonic) {
    j["harmonic"] = {{"alphas", harmonic.alphas},
                     {"grid_n", harmonic.grid_n},
                     {"boundary", to_string(harmonic.options.boundary)},
                     {"slit", to_string(harmonic.options.slit)},
                     {"tolerance", harmonic.options.tolerance},
                     {"max_sweeps", harmonic.options.max_sweeps},
                     {"random_sets", harmonic.random_sets},
                     {"random_grid_n", harmonic.random_grid_n}};
  }
  j["seed"] = seed;
  return j;
}

}  // namespace vcrit::app
