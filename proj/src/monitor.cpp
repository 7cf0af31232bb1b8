#include "vcrit/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "vcrit/errors.hpp"
#include "vcrit/norms.hpp"
#include "vcrit/oscillation.hpp"
#include "vcrit/slf.hpp"

namespace vcrit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ParameterError(std::string(what) + " must be positive and finite");
  }
}

}  // namespace

void FrameworkConstants::validate() const {
  require_positive(c_star, "c_star");
  require_positive(c1, "c1");
  require_positive(c2, "c2");
  require_positive(c3, "c3");
  require_positive(c4, "c4");
}

double core_scale(double gamma, double omega_linf) {
  require_positive(gamma, "core_scale: circulation");
  require_positive(omega_linf, "core_scale: ||w||_inf");
  return std::sqrt(gamma / (4.0 * std::numbers::pi)) / std::sqrt(omega_linf);
}

double amplification(double delta0, double delta_t) {
  require_positive(delta0, "amplification: delta0");
  require_positive(delta_t, "amplification: delta_t");
  return (delta0 * delta0) / (delta_t * delta_t);
}

double axial_vorticity(double gamma, double delta0) {
  require_positive(gamma, "axial_vorticity: circulation");
  require_positive(delta0, "axial_vorticity: delta0");
  return gamma / (4.0 * std::numbers::pi * delta0 * delta0);
}

double analyticity_radius(double omega_linf, double nu, const FrameworkConstants& c,
                          RadiusConstant which) {
  require_positive(omega_linf, "analyticity_radius: ||w||_inf");
  require_positive(nu, "analyticity_radius: viscosity");
  c.validate();
  const double cc = which == RadiusConstant::CStar ? c.c_star : c.c3;
  return std::sqrt(nu) / (cc * std::sqrt(omega_linf));
}

double LocalExistence::radius_at(double t) const {
  if (!(t > 0.0 && t <= T)) {
    std::ostringstream msg;
    msg << "local_existence: t = " << t << " outside (0, T = " << T << "]";
    throw DomainError(msg.str());
  }
  return std::sqrt(t) / c2;
}

LocalExistence local_existence(double omega0_linf, double nu, const FrameworkConstants& c) {
  require_positive(omega0_linf, "local_existence: ||w0||_inf");
  require_positive(nu, "local_existence: viscosity");
  c.validate();
  return LocalExistence{nu / (c.c1 * omega0_linf), c.c2};
}

ReynoldsThreshold reynolds_threshold(double gamma, double nu, const FrameworkConstants& c) {
  require_positive(gamma, "reynolds_threshold: circulation");
  require_positive(nu, "reynolds_threshold: viscosity");
  c.validate();
  ReynoldsThreshold r;
  r.ratio = gamma / nu;
  r.bound = 4.0 * std::numbers::pi / (c.c_star * c.c_star);
  r.satisfied = r.ratio <= r.bound;
  return r;
}

FormulaCriticality formula_criticality(double gamma, double nu, double omega_linf,
                                       const FrameworkConstants& c) {
  FormulaCriticality f;
  f.rho = analyticity_radius(omega_linf, nu, c, RadiusConstant::CStar);
  f.delta = core_scale(gamma, omega_linf);
  f.ratio = f.rho / f.delta;
  f.rho_dominates = f.rho >= f.delta;
  return f;
}

std::vector<std::size_t> detect_escape_times(const std::vector<double>& times,
                                             const std::vector<double>& linf) {
  if (times.size() != linf.size()) throw ParameterError("escape times: size mismatch");
  for (std::size_t j = 1; j < times.size(); ++j) {
    if (!(times[j] > times[j - 1])) throw ParameterError("escape times: times must increase");
  }
  std::vector<std::size_t> out;
  if (linf.size() < 2) return out;
  // Scan backwards keeping the minimum over the strict future.
  std::vector<std::uint8_t> escape(linf.size(), 0);
  double future_min = linf.back();
  for (std::size_t j = linf.size() - 1; j-- > 0;) {
    if (future_min > linf[j]) escape[j] = 1;
    future_min = std::fmin(future_min, linf[j]);
  }
  for (std::size_t j = 0; j < escape.size(); ++j) {
    if (escape[j]) out.push_back(j);
  }
  return out;
}

std::vector<L1EnvelopeRow> l1_envelope(const Timeline& timeline, double nu) {
  require_positive(nu, "l1_envelope: viscosity");
  std::vector<L1EnvelopeRow> rows;
  if (timeline.empty()) return rows;
  const Diagnostics& d0 = timeline.snapshots().front().diagnostics;
  for (const Snapshot& s : timeline.snapshots()) {
    L1EnvelopeRow r;
    r.time = s.time;
    r.l1 = s.diagnostics.omega_l1;
    r.bound = d0.omega_l1 + (d0.energy - s.diagnostics.energy) / nu;
    r.within = r.l1 <= r.bound;
    rows.push_back(r);
  }
  return rows;
}

std::string TetrationValue::describe() const {
  std::ostringstream out;
  out << std::setprecision(10);
  if (value) {
    out << *value;
  } else {
    for (int i = 0; i < pending; ++i) out << "exp(";
    out << residual;
    for (int i = 0; i < pending; ++i) out << ')';
  }
  return out.str();
}

TetrationValue tetration_crossover(int k, double top) {
  if (k < 1) throw ParameterError("tetration: height must be >= 1");
  require_positive(top, "tetration: top value");
  TetrationValue t;
  t.height = k;
  double v = top;
  // exp overflows a double beyond log(DBL_MAX) ~ 709.78.
  const double limit = std::log(std::numeric_limits<double>::max());
  while (t.levels < k && v <= limit) {
    v = std::exp(v);
    ++t.levels;
  }
  t.pending = k - t.levels;
  t.residual = v;
  if (t.pending == 0) t.value = v;
  return t;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Subcritical:
      return "subcritical";
    case Verdict::Critical:
      return "critical";
    case Verdict::Supercritical:
      return "supercritical";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ParameterError("spearman: size mismatch");
  const std::size_t n = a.size();
  if (n < 2) return kNaN;
  auto ranks = [n](const std::vector<double>& v) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&v](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i;
      while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t q = i; q <= j; ++q) r[order[q]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / static_cast<double>(n);
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return kNaN;
  return sab / std::sqrt(saa * sbb);
}

namespace {

double predicted_scale(const FrameworkConstants& c, const std::optional<WeightSpec>& w,
                       double linf, PhiArgument arg) {
  if (!(linf > 0.0)) return kNaN;
  double phi = 1.0;
  if (w) {
    try {
      phi = arg == PhiArgument::Reciprocal ? phi_eval(*w, 1.0 / linf) : phi_formula(*w, linf);
    } catch (const DomainError&) {
      return kNaN;
    }
  }
  return c.c4 * std::sqrt(phi / linf);
}

}  // namespace

CriticalityTimeline criticality_verdict(const Timeline& timeline, double nu,
                                        const FrameworkConstants& constants,
                                        const CriticalityOptions& options) {
  require_positive(nu, "criticality_verdict: viscosity");
  constants.validate();
  if (options.k < 0) throw ParameterError("criticality_verdict: k must be >= 0");

  CriticalityTimeline ct;
  ct.m_constants = solve_M();
  ct.lambda = options.lambda.value_or(ct.m_constants.lambda);
  ct.delta = options.delta;
  ct.k = options.k;
  ct.nu = nu;
  ct.gamma = options.gamma;
  ct.constants = constants;

  std::optional<WeightSpec> weight;
  if (options.k >= 1) weight = WeightSpec::log_composite(options.k);

  std::vector<double> times, linf;
  for (const Snapshot& s : timeline.snapshots()) {
    times.push_back(s.time);
    linf.push_back(s.diagnostics.omega_linf);
  }
  const auto escapes = detect_escape_times(times, linf);
  std::vector<std::uint8_t> is_escape(times.size(), 0);
  for (std::size_t j : escapes) is_escape[j] = 1;

  for (std::size_t j = 0; j < timeline.size(); ++j) {
    const Snapshot& s = timeline.snapshots()[j];
    CriticalityRow row;
    row.time = s.time;
    row.omega_linf = s.diagnostics.omega_linf;
    row.omega_l1 = s.diagnostics.omega_l1;
    row.escape = is_escape[j] != 0;
    row.predicted_rs_k0 = predicted_scale(constants, std::nullopt, row.omega_linf,
                                          PhiArgument::Reciprocal);
    row.predicted_rs_reciprocal =
        weight ? predicted_scale(constants, weight, row.omega_linf, PhiArgument::Reciprocal)
               : row.predicted_rs_k0;
    row.predicted_rs_direct =
        weight ? predicted_scale(constants, weight, row.omega_linf, PhiArgument::Direct)
               : row.predicted_rs_k0;
    row.rho = row.omega_linf > 0.0
                  ? analyticity_radius(row.omega_linf, nu, constants, RadiusConstant::C3)
                  : kNaN;

    const bool in_window = s.time >= options.window_start && s.time <= options.window_end;
    if (row.escape && in_window) {
      if (!s.field && !s.file) {
        throw ParameterError("criticality_verdict: escape-time snapshot without stored field");
      }
      const VectorField3D w = s.field ? *s.field : slf::read_field(*s.file);
      const SuperlevelMasks masks = superlevel_masks(w, ct.lambda);
      row.superlevel_volume = masks.union_mask.volume();
      row.volume_times_linf = row.superlevel_volume * masks.linf;
      if (!masks.degenerate && masks.union_mask.occupied() > 0) {
        ScaleSearchOptions so;
        so.mode = options.mode;
        const ScaleSearchResult sr = sparseness_scale(masks, ct.delta, so);
        row.measured_rs = sr.scale;
        row.non_monotone = sr.non_monotone;
      }
      if (options.bmo_stride > 0) {
        const DirectionField dir = direction_field(w, options.direction_floor);
        if (!dir.degenerate) {
          BmoOptions bo;
          bo.stride = options.bmo_stride;
          bo.centers = CenterMode::ValidOnly;
          const OscillationField of(dir);
          try {
            row.bmo_sup = bmo_phi_norm(of, WeightSpec::constant(),
                                       dyadic_scales(w.grid(), 0.5), bo).sup_part;
            if (weight) {
              row.bmo_phi_sup =
                  bmo_phi_norm(of, *weight, dyadic_scales(w.grid(), weight->r_max), bo).sup_part;
            }
          } catch (const DomainError&) {
            // no admissible scale at this resolution: summary left empty
          }
        }
      }
    }
    ct.rows.push_back(row);
  }

  // Verdict over escape rows in the window.
  std::vector<double> rs, lv;
  bool all_below = true, all_within_two = true;
  for (const CriticalityRow& row : ct.rows) {
    if (!row.escape || row.time < options.window_start || row.time > options.window_end) continue;
    ++ct.escape_count;
    const double r = row.measured_rs.value_or(std::numeric_limits<double>::infinity());
    if (!(r <= row.rho)) all_below = false;
    const double q = r / row.rho;
    if (!(q >= 0.5 && q <= 2.0)) all_within_two = false;
    if (row.measured_rs) {
      rs.push_back(*row.measured_rs);
      lv.push_back(row.omega_linf);
    }
  }
  if (rs.size() >= 3) ct.spearman_rs_linf = spearman(rs, lv);

  if (ct.escape_count == 0) {
    ct.verdict = Verdict::Inconclusive;
    ct.reason = "no escape times in the analysis window (||w||_inf never exceeds an earlier value "
                "for the rest of the run)";
  } else if (all_below) {
    ct.verdict = Verdict::Subcritical;
    ct.reason = "measured sparseness scale <= analyticity radius at every escape time";
  } else if (all_within_two) {
    ct.verdict = Verdict::Critical;
    ct.reason = "measured sparseness scale within a factor 2 of the analyticity radius";
  } else {
    ct.verdict = Verdict::Supercritical;
    ct.reason = "measured sparseness scale exceeds the analyticity radius by more than a factor 2";
  }
  return ct;
}

namespace {

nlohmann::json num(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

nlohmann::json opt(const std::optional<double>& v) {
  return v ? num(*v) : nlohmann::json(nullptr);
}

}  // namespace

void write_criticality_csv(const std::filesystem::path& path, const CriticalityTimeline& ct) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "t,omega_linf,omega_l1,escape,measured_rs,rho,predicted_rs_reciprocal,"
         "predicted_rs_direct,predicted_rs_k0,superlevel_volume,volume_times_linf,bmo_sup,"
         "bmo_phi_sup,non_monotone\n";
  out << std::setprecision(17);
  auto o = [](const std::optional<double>& v) {
    std::ostringstream s;
    s << std::setprecision(17);
    if (v) s << *v;
    return s.str();
  };
  for (const auto& r : ct.rows) {
    out << r.time << ',' << r.omega_linf << ',' << r.omega_l1 << ',' << (r.escape ? 1 : 0) << ','
        << o(r.measured_rs) << ',' << r.rho << ',' << r.predicted_rs_reciprocal << ','
        << r.predicted_rs_direct << ',' << r.predicted_rs_k0 << ',' << r.superlevel_volume << ','
        << r.volume_times_linf << ',' << o(r.bmo_sup) << ',' << o(r.bmo_phi_sup) << ','
        << (r.non_monotone ? 1 : 0) << '\n';
  }
}

std::string criticality_json(const CriticalityTimeline& ct) {
  nlohmann::json j;
  j["verdict"] = to_string(ct.verdict);
  j["reason"] = ct.reason;
  j["parameters"] = {{"lambda", ct.lambda},
                     {"delta", ct.delta},
                     {"k", ct.k},
                     {"nu", ct.nu},
                     {"gamma", ct.gamma},
                     {"reynolds", ct.gamma / ct.nu},
                     {"h_star", ct.m_constants.h_star},
                     {"M", ct.m_constants.M},
                     {"alpha_star", ct.m_constants.alpha_star}};
  j["constants"] = {{"c_star", ct.constants.c_star},
                    {"c1", ct.constants.c1},
                    {"c2", ct.constants.c2},
                    {"c3", ct.constants.c3},
                    {"c4", ct.constants.c4}};
  j["escape_count"] = ct.escape_count;
  j["spearman_rs_linf"] = opt(ct.spearman_rs_linf);
  nlohmann::json series = nlohmann::json::array();
  for (const auto& r : ct.rows) {
    series.push_back({{"t", r.time},
                      {"omega_linf", num(r.omega_linf)},
                      {"omega_l1", num(r.omega_l1)},
                      {"escape", r.escape},
                      {"measured_rs", opt(r.measured_rs)},
                      {"rho", num(r.rho)},
                      {"predicted_rs_reciprocal", num(r.predicted_rs_reciprocal)},
                      {"predicted_rs_direct", num(r.predicted_rs_direct)},
                      {"predicted_rs_k0", num(r.predicted_rs_k0)},
                      {"superlevel_volume", num(r.superlevel_volume)},
                      {"volume_times_linf", num(r.volume_times_linf)},
                      {"bmo_sup", opt(r.bmo_sup)},
                      {"bmo_phi_sup", opt(r.bmo_phi_sup)},
                      {"non_monotone", r.non_monotone}});
  }
  j["series"] = series;
  return j.dump(2);
}

}  // namespace vcrit
