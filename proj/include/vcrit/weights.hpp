#pragma once

#include <string>
#include <utility>
#include <vector>

namespace vcrit {

/// Scale weight phi(r) used by the weighted bmo norm.
///
///   constant        phi = 1
///   power(alpha)    phi = r^alpha, 0 < alpha <= 1
///   inverse_log     phi = 1 / (offset + |log r|)
///   log_composite   phi = 1 / log^k(offset + |log r|), log^k the k-fold composition
///
/// The default offset for a composition of depth d is tower(d) - log 2, with tower(0) = 1,
/// tower(d) = e^tower(d-1); this makes phi(1/2) = 1 and keeps phi positive on (0, 1/2].
/// offset = 0 gives the strict formula, whose positivity domain is r < exp(-tower(k-1)).
enum class WeightKind { Constant, Power, InverseLog, LogComposite };

struct WeightSpec {
  WeightKind kind = WeightKind::Constant;
  double alpha = 1.0;
  int k = 0;
  double offset = 0.0;
  double r_max = 0.5;

  static WeightSpec constant();
  static WeightSpec power(double alpha);
  static WeightSpec inverse_log();
  static WeightSpec inverse_log(double offset);
  static WeightSpec log_composite(int k);
  static WeightSpec log_composite(int k, double offset);

  /// Nesting depth of the logarithms (0 for inverse_log).
  int depth() const noexcept;
  std::string describe() const;
};

/// e-tower of height d: tower(0) = 1, tower(1) = e, tower(2) = e^e, tower(3) = e^e^e.
/// Throws ParameterError for d > 3 (not representable in double).
double e_tower(int d);

/// Default regularizing offset tower(d) - log 2.
double default_offset(int depth);

/// phi(r) on (0, r_max]; throws DomainError outside that range or where a nested log is
/// not positive.
double phi_eval(const WeightSpec& w, double r);

/// phi evaluated from s = |log r| directly, so arbitrarily small scales can be reached.
/// Checks positivity only (no r_max restriction). Throws DomainError.
double phi_of_log_scale(const WeightSpec& w, double s);

/// phi(r) for any r > 0 where the formula is positive (used where the argument is not a
/// length scale, e.g. phi_k(||w||_inf)).
double phi_formula(const WeightSpec& w, double r);

struct DiscontinuityReport {
  bool admits_discontinuous = false;  ///< numerical classification
  bool symbolic = false;              ///< closed-form answer for the weight kind
  bool agrees = false;
  /// (r0, integral of phi(r)/r over [r0, upper]) for r0 = 1e-2, 1e-4, ..., 1e-16
  std::vector<std::pair<double, double>> table;
  /// Integrals of phi(e^-s) over doubling windows [S, 2S] of s = |log r|.
  std::vector<std::pair<double, double>> windows;
  double upper = 0.5;
};

/// Decides whether the integral of phi(r)/r over (0, 1/2) diverges (the weighted space then
/// contains discontinuous functions).
DiscontinuityReport discontinuity_criterion(const WeightSpec& w);

/// Closed-form value of the integral of phi(r)/r over [r0, upper] for power, constant and
/// inverse_log weights. Throws ParameterError for other kinds.
double closed_form_log_integral(const WeightSpec& w, double r0, double upper);

}  // namespace vcrit
