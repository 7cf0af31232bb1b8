#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vcrit/harmonic.hpp"
#include "vcrit/solver.hpp"
#include "vcrit/sparseness.hpp"
#include "vcrit/weights.hpp"

namespace vcrit {

/// Calibration constants of the criticality framework. Their values are not known; all
/// default to 1 and every report echoes them.
struct FrameworkConstants {
  double c_star = 1.0;  ///< analyticity radius, scale formulas
  double c1 = 1.0;      ///< local existence time T >= nu / (c1 ||w0||_inf)
  double c2 = 1.0;      ///< analyticity radius t^(1/2) / c2 during local existence
  double c3 = 1.0;      ///< analyticity radius at escape times
  double c4 = 1.0;      ///< prefactor of the predicted sparseness scale

  /// Throws ParameterError unless every constant is positive.
  void validate() const;
};

/// Vortex core size (Gamma / 4 pi)^(1/2) ||w||_inf^(-1/2).
double core_scale(double gamma, double omega_linf);
/// delta0^2 / delta_t^2.
double amplification(double delta0, double delta_t);
/// Gamma / (4 pi delta0^2).
double axial_vorticity(double gamma, double delta0);

enum class RadiusConstant { CStar, C3 };

/// (1/c) nu^(1/2) ||w||_inf^(-1/2), with c = c_star or c3.
double analyticity_radius(double omega_linf, double nu, const FrameworkConstants& c,
                          RadiusConstant which = RadiusConstant::CStar);

struct LocalExistence {
  double T = 0.0;  ///< nu / (c1 ||w0||_inf)
  double c2 = 1.0;
  /// t^(1/2) / c2 for t in (0, T]; DomainError otherwise.
  double radius_at(double t) const;
};

LocalExistence local_existence(double omega0_linf, double nu, const FrameworkConstants& c);

struct ReynoldsThreshold {
  bool satisfied = false;
  double ratio = 0.0;  ///< Gamma / nu
  double bound = 0.0;  ///< 4 pi / c_star^2
};

/// Gamma / nu <= 4 pi / c_star^2 (inclusive).
ReynoldsThreshold reynolds_threshold(double gamma, double nu, const FrameworkConstants& c);

/// Formula-layer closure: the analyticity radius dominates the core scale,
/// rho(w) >= delta(w), for a given ||w||_inf. The ratio rho/delta does not depend on w.
struct FormulaCriticality {
  double rho = 0.0;
  double delta = 0.0;
  double ratio = 0.0;  ///< rho / delta
  bool rho_dominates = false;
};
FormulaCriticality formula_criticality(double gamma, double nu, double omega_linf,
                                       const FrameworkConstants& c);

/// Indices j with linf[s] > linf[j] for every later sample s; the last index never
/// qualifies. Throws ParameterError if times are not strictly increasing or sizes differ.
std::vector<std::size_t> detect_escape_times(const std::vector<double>& times,
                                             const std::vector<double>& linf);

/// Rigorous L1 envelope ||w(t)||_1 <= ||w0||_1 + (E0 - E(t)) / nu, from
/// d/dt ||w||_1 <= ||w||_2^2 and dE/dt = -nu ||w||_2^2.
struct L1EnvelopeRow {
  double time = 0.0;
  double l1 = 0.0;
  double bound = 0.0;
  bool within = true;
};
std::vector<L1EnvelopeRow> l1_envelope(const Timeline& timeline, double nu);

/// e-tower exp^k(top) = e^e^...^top (k exponentials), represented without overflow:
/// `levels` exponentials are applied in double precision, giving `residual`; the remaining
/// `pending` exponentials are applied symbolically.
struct TetrationValue {
  int height = 0;
  int levels = 0;
  int pending = 0;
  double residual = 0.0;
  /// exp^k(top) when pending == 0.
  std::optional<double> value;
  std::string describe() const;
};
TetrationValue tetration_crossover(int k, double top);

enum class Verdict { Subcritical, Critical, Supercritical, Inconclusive };
std::string to_string(Verdict v);

struct CriticalityOptions {
  int k = 1;                 ///< log-composite order of the predicted scale (0: no log factor)
  double delta = 0.75;       ///< sparseness parameter
  std::optional<double> lambda;  ///< cut-off; defaults to 1/(2M)
  SparsenessMode mode = SparsenessMode::Ball3D;
  double window_start = -1e300;
  double window_end = 1e300;
  double gamma = 1.0;        ///< circulation (reported, used by the formula layer)
  /// bmo summary of the vorticity direction; stride 0 disables it.
  std::size_t bmo_stride = 2;
  double direction_floor = 1e-3;
};

struct CriticalityRow {
  double time = 0.0;
  double omega_linf = 0.0;
  double omega_l1 = 0.0;
  bool escape = false;
  std::optional<double> measured_rs;  ///< empty: not sparse even at L/4
  double rho = 0.0;                   ///< analyticity radius with c3
  double predicted_rs_reciprocal = 0.0;  ///< c4 (phi_k(1/||w||)/||w||)^(1/2), NaN off-domain
  double predicted_rs_direct = 0.0;      ///< c4 (phi_k(||w||)/||w||)^(1/2), NaN off-domain
  double predicted_rs_k0 = 0.0;          ///< c4 ||w||^(-1/2)
  double superlevel_volume = 0.0;
  double volume_times_linf = 0.0;
  std::optional<double> bmo_sup;  ///< sup part for the direction field (constant weight)
  std::optional<double> bmo_phi_sup;  ///< sup part with the log-composite weight of order k
  bool non_monotone = false;
};

struct CriticalityTimeline {
  std::vector<CriticalityRow> rows;
  Verdict verdict = Verdict::Inconclusive;
  std::string reason;
  double lambda = 0.0;
  double delta = 0.75;
  int k = 1;
  double nu = 0.0;
  double gamma = 1.0;
  FrameworkConstants constants;
  MConstants m_constants;
  /// Spearman rank correlation of (measured r_s, ||w||_inf) over escape rows; empty when
  /// fewer than three escape rows carry a measured scale.
  std::optional<double> spearman_rs_linf;
  std::size_t escape_count = 0;
};

/// Escape-time comparison of the measured sparseness scale with the analyticity radius:
/// subcritical when r_s <= rho at every escape time in the window, critical when the two
/// agree within a factor 2 throughout, supercritical otherwise; inconclusive without escape
/// times. Snapshot fields come from memory or their files.
CriticalityTimeline criticality_verdict(const Timeline& timeline, double nu,
                                        const FrameworkConstants& constants,
                                        const CriticalityOptions& options = {});

/// Spearman rank correlation with average ranks for ties; NaN for fewer than two points
/// or a constant input.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

void write_criticality_csv(const std::filesystem::path& path, const CriticalityTimeline& ct);
/// Summary JSON: parameters, constants, series and verdict.
std::string criticality_json(const CriticalityTimeline& ct);

}  // namespace vcrit
