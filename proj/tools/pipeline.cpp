#include "pipeline.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "manifest.hpp"
#include "vcrit/errors.hpp"
#include "vcrit/harmonic.hpp"
#include "vcrit/monitor.hpp"
#include "vcrit/norms.hpp"
#include "vcrit/oscillation.hpp"
#include "vcrit/rings.hpp"
#include "vcrit/slf.hpp"
#include "vcrit/sparseness.hpp"

namespace vcrit::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_csv(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text << '\n';
  if (!out) throw IoError("write error on " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

RunManifest start_manifest(const std::string& command, const CommandContext& ctx) {
  RunManifest m(command, ctx.config.to_json(), ctx.seed, ctx.threads);
  if (ctx.config_path) m.add_input(*ctx.config_path);
  return m;
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string csv_num(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

WeightSpec analysis_weight(int k) {
  return k == 0 ? WeightSpec::constant() : WeightSpec::log_composite(k);
}

/// Runs f(i) for i in [0, count) on up to `threads` workers; rethrows the first failure.
template <typename F>
void parallel_for(std::size_t count, unsigned threads, F&& f) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex m;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(m);
          if (!first) first = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

struct SnapshotAnalysis {
  std::size_t index = 0;
  double time = 0.0;
  double linf = 0.0;
  double threshold = 0.0;
  std::size_t occupied = 0;
  double volume = 0.0;
  std::string status = "ok";
  std::optional<ScaleSearchResult> rs3d;
  std::optional<ScaleSearchResult> rs1d;
  std::optional<DistributionBound> distribution;
  std::optional<BmoReport> bmo;
  std::string bmo_status = "disabled";
  double orlicz = 0.0;
};

SnapshotAnalysis analyze_snapshot(const Snapshot& snap, std::size_t index, const GridSpec& grid,
                                  double lambda, const WeightSpec& weight,
                                  const AnalysisSection& an) {
  SnapshotAnalysis a;
  a.index = index;
  a.time = snap.time;
  if (!snap.file) throw IoError("snapshot at t = " + csv_num(snap.time) + " has no field file");
  const VectorField3D w = slf::read_field(*snap.file);
  if (!(w.grid() == grid)) throw ConfigError("snapshot " + snap.file->string() + " does not match the timeline grid");

  const SuperlevelMasks masks = superlevel_masks(w, lambda);
  a.linf = masks.linf;
  a.threshold = masks.union_mask.threshold;
  a.occupied = masks.union_mask.occupied();
  a.volume = masks.union_mask.volume();
  // Order 0 has no log factor: the modular is the plain L1 norm.
  a.orlicz = an.k >= 1 ? orlicz_modular(w, an.k) : l1_norm(w);

  if (masks.degenerate || a.occupied == 0) {
    a.status = "empty_mask";
  } else {
    ScaleSearchOptions so;
    so.mode = SparsenessMode::Ball3D;
    a.rs3d = sparseness_scale(masks, an.delta, so);
    if (!a.rs3d->scale) a.status = "not_sparse";
    if (an.sparseness_1d) {
      so.mode = SparsenessMode::Segment1D;
      so.directions = sample_directions(an.fibonacci_directions);
      a.rs1d = sparseness_scale(masks, an.delta, so);
    }
    a.distribution = distribution_bound(w, a.threshold);
  }

  if (an.bmo_stride > 0) {
    const DirectionField d = direction_field(w, an.direction_floor);
    if (d.degenerate || d.valid_count() == 0) {
      a.bmo_status = "no_direction";
    } else {
      const OscillationField f(d);
      BmoOptions bo;
      bo.stride = an.bmo_stride;
      bo.centers = an.bmo_centers;
      try {
        a.bmo = bmo_phi_norm(f, weight, dyadic_scales(grid, weight.r_max), bo);
        a.bmo_status = "ok";
      } catch (const DomainError& e) {
        a.bmo_status = std::string("no_admissible_scale: ") + e.what();
      }
    }
  }
  return a;
}

std::string describe(const SlitSet& k) {
  std::ostringstream s;
  s << std::setprecision(6);
  for (std::size_t i = 0; i < k.intervals().size(); ++i) {
    if (i) s << ' ';
    s << '[' << k.intervals()[i].first << ';' << k.intervals()[i].second << ']';
  }
  return s.str();
}

}  // namespace

double flow_circulation(const AppConfig& cfg) { return cfg.ring.circulation; }

VectorField3D initial_field(const AppConfig& cfg) {
  const GridSpec grid = cfg.grid_spec();
  if (cfg.flow.kind == FlowKind::MK) return mk_initial_configuration(cfg.mk(), grid);
  cfg.ring.validate(grid);
  return gaussian_ring_vorticity(cfg.ring, grid);
}

void write_timeline_json(const fs::path& path, const Timeline& timeline, const GridSpec& grid,
                         double nu, double gamma) {
  json j;
  j["grid"] = {{"n", grid.n()}, {"box_length", grid.box_length()}};
  j["viscosity"] = nu;
  j["circulation"] = gamma;
  json snaps = json::array();
  for (std::size_t i = 0; i < timeline.size(); ++i) {
    const Snapshot& s = timeline.snapshots()[i];
    const auto& d = s.diagnostics;
    snaps.push_back({{"time", s.time},
                     {"steps", s.steps},
                     {"file", s.file ? json(s.file->filename().string()) : json(nullptr)},
                     {"diagnostics",
                      {{"energy", d.energy},
                       {"enstrophy", d.enstrophy},
                       {"helicity", d.helicity},
                       {"omega_linf", d.omega_linf},
                       {"omega_l1", d.omega_l1}}}});
  }
  j["snapshots"] = snaps;
  j["failure"] = timeline.failure ? json(*timeline.failure) : json(nullptr);
  write_text(path, j.dump(2));
}

LoadedTimeline load_timeline(const fs::path& dir) {
  const fs::path path = dir / "timeline.json";
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
    LoadedTimeline lt;
    lt.grid = GridSpec(j.at("grid").at("n").get<std::size_t>(), j.at("grid").at("box_length").get<double>());
    lt.nu = j.at("viscosity").get<double>();
    lt.gamma = j.at("circulation").get<double>();
    for (const auto& s : j.at("snapshots")) {
      Snapshot snap;
      snap.time = s.at("time").get<double>();
      snap.steps = s.at("steps").get<std::size_t>();
      if (!s.at("file").is_null()) snap.file = dir / s.at("file").get<std::string>();
      const auto& d = s.at("diagnostics");
      snap.diagnostics.energy = d.at("energy").get<double>();
      snap.diagnostics.enstrophy = d.at("enstrophy").get<double>();
      snap.diagnostics.helicity = d.at("helicity").get<double>();
      snap.diagnostics.omega_linf = d.at("omega_linf").get<double>();
      snap.diagnostics.omega_l1 = d.at("omega_l1").get<double>();
      lt.timeline.append(std::move(snap));
    }
    if (!j.at("failure").is_null()) lt.timeline.failure = j.at("failure").get<std::string>();
    return lt;
  } catch (const json::exception& e) {
    throw IoError("malformed " + path.string() + ": " + e.what());
  }
}

fs::path cmd_generate(const CommandContext& ctx) {
  ensure_dir(ctx.out_dir);
  auto manifest = start_manifest("generate", ctx);
  const fs::path out = ctx.out_dir / "initial.slf";
  slf::write_field(out, initial_field(ctx.config));
  manifest.add_output(out);
  manifest.append_to(ctx.out_dir);
  return out;
}

Timeline cmd_evolve(const CommandContext& ctx) {
  const AppConfig& cfg = ctx.config;
  ensure_dir(ctx.out_dir);
  auto manifest = start_manifest("evolve", ctx);
  const GridSpec grid = cfg.grid_spec();

  std::optional<VectorField3D> start;
  if (cfg.solver.initial_field) {
    start = slf::read_field(*cfg.solver.initial_field);
    if (!(start->grid() == grid)) throw ConfigError("solver.initial_field does not match the configured grid");
    manifest.add_input(*cfg.solver.initial_field);
  } else {
    start = initial_field(cfg);
  }

  SpectralSolver solver(grid, cfg.flow.viscosity, cfg.solver.options);
  RunConfig rc;
  rc.t_start = cfg.solver.t_start;
  rc.t_final = cfg.solver.t_final;
  rc.snapshot_interval = cfg.solver.snapshot_interval;
  rc.store_fields = false;
  rc.output_dir = ctx.out_dir;
  rc.stop_at_growth = cfg.solver.stop_at_growth;
  Timeline timeline = evolve(solver, *start, rc);

  const fs::path csv = ctx.out_dir / "diagnostics.csv";
  const fs::path tj = ctx.out_dir / "timeline.json";
  write_diagnostics_csv(csv, timeline);
  write_timeline_json(tj, timeline, grid, cfg.flow.viscosity, flow_circulation(cfg));
  for (const auto& s : timeline.snapshots()) {
    if (s.file) manifest.add_output(*s.file);
  }
  manifest.add_output(csv);
  manifest.add_output(tj);
  if (timeline.failure) manifest.note("failure", *timeline.failure);
  manifest.append_to(ctx.out_dir);
  if (timeline.failure) throw NumericError("evolve: " + *timeline.failure);
  return timeline;
}

json cmd_analyze(const CommandContext& ctx) {
  const AppConfig& cfg = ctx.config;
  const AnalysisSection& an = cfg.analysis;
  const fs::path dir = ctx.timeline_dir.value_or(ctx.out_dir);
  ensure_dir(ctx.out_dir);
  auto manifest = start_manifest("analyze", ctx);
  manifest.add_input(dir / "timeline.json");

  const LoadedTimeline lt = load_timeline(dir);
  const MConstants mc = solve_M();
  const double lambda = an.lambda.value_or(mc.lambda);
  const WeightSpec weight = analysis_weight(an.k);
  const auto& snaps = lt.timeline.snapshots();
  for (const auto& s : snaps) {
    if (s.file) manifest.add_input(*s.file);
  }

  std::vector<SnapshotAnalysis> results(snaps.size());
  parallel_for(snaps.size(), ctx.threads, [&](std::size_t i) {
    results[i] = analyze_snapshot(snaps[i], i, lt.grid, lambda, weight, an);
  });

  const double h = lt.grid.spacing();
  const fs::path sp = ctx.out_dir / "sparseness.csv";
  {
    auto out = open_csv(sp);
    out << "index,t,omega_linf,lambda,threshold,occupied_cells,volume,rs_3d,rs_3d_cells,non_monotone_3d,"
           "rs_1d,non_monotone_1d,status\n";
    for (const auto& a : results) {
      const double rs3 = a.rs3d && a.rs3d->scale ? *a.rs3d->scale : std::nan("");
      const double rs1 = a.rs1d && a.rs1d->scale ? *a.rs1d->scale : std::nan("");
      out << a.index << ',' << a.time << ',' << a.linf << ',' << lambda << ',' << a.threshold << ','
          << a.occupied << ',' << a.volume << ',' << csv_num(rs3) << ',' << csv_num(rs3 / h) << ','
          << (a.rs3d && a.rs3d->non_monotone ? 1 : 0) << ',' << csv_num(rs1) << ','
          << (a.rs1d && a.rs1d->non_monotone ? 1 : 0) << ',' << a.status << '\n';
    }
  }

  const fs::path dp = ctx.out_dir / "distribution.csv";
  {
    auto out = open_csv(dp);
    out << "index,t,level,count,lhs,rhs,holds\n";
    for (const auto& a : results) {
      if (a.distribution) {
        const auto& d = *a.distribution;
        out << a.index << ',' << a.time << ',' << a.threshold << ',' << d.count << ',' << d.lhs << ','
            << d.rhs << ',' << (d.lhs <= d.rhs ? 1 : 0) << '\n';
      } else {
        out << a.index << ',' << a.time << ",nan,0,nan,nan,nan\n";
      }
    }
  }

  const fs::path bp = ctx.out_dir / "bmo.csv";
  json bmo_json = json::array();
  {
    auto out = open_csv(bp);
    out << "index,t,requested,side,cells_per_side,max_oscillation,phi,ratio,cubes,skipped\n";
    for (const auto& a : results) {
      json e = {{"index", a.index}, {"t", a.time}, {"status", a.bmo_status}};
      if (a.bmo) {
        for (const auto& r : a.bmo->per_scale) {
          out << a.index << ',' << a.time << ',' << r.requested << ',' << r.side << ',' << r.cells_per_side
              << ',' << r.max_oscillation << ',' << r.phi << ',' << r.ratio << ',' << r.cubes << ','
              << r.skipped << '\n';
        }
        e["l1_part"] = a.bmo->l1_part;
        e["sup_part"] = a.bmo->sup_part;
        e["total"] = a.bmo->total;
        e["argmax_center"] = a.bmo->argmax_center;
        e["argmax_side"] = a.bmo->argmax_side;
      }
      bmo_json.push_back(e);
    }
  }
  const fs::path bj = ctx.out_dir / "bmo.json";
  write_text(bj, json{{"weight", weight.describe()}, {"snapshots", bmo_json}}.dump(2));

  const fs::path vp = ctx.out_dir / "volume_decay.csv";
  write_volume_decay_csv(vp, volume_decay_series(lt.timeline, lambda, weight, an.phi_argument),
                         an.phi_argument);

  std::optional<fs::path> lp;
  if (lt.nu > 0.0) {
    lp = ctx.out_dir / "l1_envelope.csv";
    auto out = open_csv(*lp);
    out << "t,omega_l1,bound,within\n";
    for (const auto& r : l1_envelope(lt.timeline, lt.nu)) {
      out << r.time << ',' << r.l1 << ',' << r.bound << ',' << (r.within ? 1 : 0) << '\n';
    }
  }

  json summary;
  summary["lambda"] = lambda;
  summary["lambda_source"] = an.lambda ? "config" : "escape-time constants";
  summary["M"] = mc.M;
  summary["h_star"] = mc.h_star;
  summary["alpha_star"] = mc.alpha_star;
  summary["delta"] = an.delta;
  summary["k"] = an.k;
  summary["weight"] = weight.describe();
  summary["grid"] = {{"n", lt.grid.n()}, {"box_length", lt.grid.box_length()}};
  summary["viscosity"] = lt.nu;
  summary["circulation"] = lt.gamma;
  json rows = json::array();
  for (const auto& a : results) {
    json r = {{"index", a.index},
              {"t", a.time},
              {"omega_linf", a.linf},
              {"volume", a.volume},
              {"status", a.status},
              {"orlicz_modular", a.orlicz}};
    r["rs_3d"] = a.rs3d && a.rs3d->scale ? json(*a.rs3d->scale) : json(nullptr);
    if (a.rs1d) r["rs_1d"] = a.rs1d->scale ? json(*a.rs1d->scale) : json(nullptr);
    rows.push_back(r);
  }
  summary["snapshots"] = rows;
  const fs::path aj = ctx.out_dir / "analysis.json";
  write_text(aj, summary.dump(2));

  for (const auto& p : {sp, dp, bp, bj, vp, aj}) manifest.add_output(p);
  if (lp) manifest.add_output(*lp);
  manifest.append_to(ctx.out_dir);
  return summary;
}

fs::path cmd_harmonic(const CommandContext& ctx) {
  const HarmonicSection& hs = ctx.config.harmonic;
  ensure_dir(ctx.out_dir);
  auto manifest = start_manifest("harmonic", ctx);

  const fs::path table = ctx.out_dir / "harmonic.csv";
  {
    auto out = open_csv(table);
    out << "alpha,closed_form,numeric,abs_error,rel_error,method,grid_n,sweeps\n";
    for (double alpha : hs.alphas) {
      const double exact = solynin_h(alpha);
      const HmResult r = harmonic_measure_numeric(SlitSet::symmetric(alpha), hs.grid_n, hs.options);
      const double err = std::fabs(r.value - exact);
      out << alpha << ',' << exact << ',' << r.value << ',' << err << ',' << err / exact << ','
          << to_string(r.method) << ',' << r.grid_n << ',' << r.sweeps << '\n';
    }
  }
  manifest.add_output(table);

  if (hs.random_sets > 0) {
    const fs::path ext = ctx.out_dir / "harmonic_extremal.csv";
    auto out = open_csv(ext);
    out << "alpha,set,pieces,intervals,numeric,closed_form,margin\n";
    std::mt19937_64 rng(ctx.seed);
    const double min_piece = 4.0 * 2.0 / static_cast<double>(hs.random_grid_n);
    for (double alpha : hs.alphas) {
      if (alpha >= 1.0) continue;  // K is the whole diameter: nothing to randomize
      const double exact = solynin_h(alpha);
      for (std::size_t s = 0; s < hs.random_sets; ++s) {
        std::size_t pieces = 1 + static_cast<std::size_t>(rng() % 4);
        while (pieces > 1 && (pieces * min_piece > 2.0 * alpha ||
                              (pieces - 1) * min_piece > 2.0 - 2.0 * alpha)) {
          --pieces;
        }
        const SlitSet k = random_slit_set(alpha, pieces, min_piece, rng);
        const HmResult r = harmonic_measure_numeric(k, hs.random_grid_n, hs.options);
        out << alpha << ',' << s << ',' << k.intervals().size() << ',' << describe(k) << ',' << r.value
            << ',' << exact << ',' << r.value - exact << '\n';
      }
    }
    out.close();
    manifest.add_output(ext);
  }
  manifest.append_to(ctx.out_dir);
  return table;
}

json cmd_verdict(const CommandContext& ctx) {
  const AppConfig& cfg = ctx.config;
  const AnalysisSection& an = cfg.analysis;
  const fs::path dir = ctx.timeline_dir.value_or(ctx.out_dir);
  ensure_dir(ctx.out_dir);
  auto manifest = start_manifest("verdict", ctx);
  manifest.add_input(dir / "timeline.json");
  const LoadedTimeline lt = load_timeline(dir);
  if (!(lt.nu > 0.0)) throw ConfigError("verdict: the timeline is inviscid; the analyticity radius needs nu > 0");
  for (const auto& s : lt.timeline.snapshots()) {
    if (s.file) manifest.add_input(*s.file);
  }

  CriticalityOptions opt;
  opt.k = an.k;
  opt.delta = an.delta;
  opt.lambda = an.lambda;
  opt.mode = an.sparseness_mode;
  opt.window_start = an.window_start;
  opt.window_end = an.window_end;
  opt.gamma = lt.gamma;
  opt.bmo_stride = an.bmo_stride;
  opt.direction_floor = an.direction_floor;
  const CriticalityTimeline ct = criticality_verdict(lt.timeline, lt.nu, cfg.constants, opt);

  json j = json::parse(criticality_json(ct));
  const auto& snaps = lt.timeline.snapshots();
  const double w0 = snaps.front().diagnostics.omega_linf;
  double wmax = w0;
  for (const auto& s : snaps) wmax = std::max(wmax, s.diagnostics.omega_linf);
  j["growth"] = {{"omega_linf_initial", w0}, {"omega_linf_max", wmax}, {"ratio", w0 > 0 ? num(wmax / w0) : json(nullptr)}};

  const double gamma = std::fabs(lt.gamma);
  const ReynoldsThreshold rt = reynolds_threshold(gamma, lt.nu, cfg.constants);
  json formula = {{"reynolds_ratio", rt.ratio}, {"threshold", rt.bound}, {"threshold_satisfied", rt.satisfied}};
  if (w0 > 0.0 && gamma > 0.0) {
    const FormulaCriticality fc = formula_criticality(gamma, lt.nu, w0, cfg.constants);
    formula["rho"] = fc.rho;
    formula["core_scale"] = fc.delta;
    formula["rho_over_core_scale"] = fc.ratio;
    formula["rho_dominates"] = fc.rho_dominates;
    formula["consistent"] = fc.rho_dominates == rt.satisfied;
  }
  j["formula_layer"] = formula;

  const fs::path vj = ctx.out_dir / "verdict.json";
  const fs::path cc = ctx.out_dir / "criticality.csv";
  write_text(vj, j.dump(2));
  write_criticality_csv(cc, ct);
  manifest.add_output(vj);
  manifest.add_output(cc);
  manifest.note("verdict", to_string(ct.verdict));
  manifest.append_to(ctx.out_dir);
  return j;
}

json cmd_all(const CommandContext& ctx) {
  cmd_generate(ctx);
  cmd_evolve(ctx);
  CommandContext actx = ctx;
  actx.timeline_dir = ctx.out_dir;
  const json analysis = cmd_analyze(actx);
  const json verdict = cmd_verdict(actx);
  json summary = {{"verdict", verdict.at("verdict")},
                  {"reason", verdict.at("reason")},
                  {"escape_count", verdict.at("escape_count")},
                  {"lambda", analysis.at("lambda")}};
  if (ctx.config.has_harmonic) summary["harmonic"] = cmd_harmonic(ctx).filename().string();
  return summary;
}

}  // namespace vcrit::app
