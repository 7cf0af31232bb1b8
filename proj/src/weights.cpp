#include "vcrit/weights.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "vcrit/errors.hpp"

namespace vcrit {

double e_tower(int d) {
  if (d < 0 || d > 3) throw ParameterError("e_tower: height must be in [0, 3]");
  double v = 1.0;
  for (int i = 0; i < d; ++i) v = std::exp(v);
  return v;
}

double default_offset(int depth) { return e_tower(depth) - std::numbers::ln2; }

namespace {

WeightSpec log_weight(WeightKind kind, int k, double offset) {
  if (!(offset >= 0.0)) throw ParameterError("weight: offset must be >= 0");
  WeightSpec w;
  w.kind = kind;
  w.k = k;
  w.offset = offset;
  // Positivity needs offset + |log r| > tower(k - 1) when k >= 1.
  if (k >= 1) {
    const double need = e_tower(k - 1) - offset;
    w.r_max = std::fmin(0.5, std::exp(-need));
  }
  return w;
}

}  // namespace

WeightSpec WeightSpec::constant() { return WeightSpec{}; }

WeightSpec WeightSpec::power(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterError("weight: power exponent must lie in (0, 1]");
  WeightSpec w;
  w.kind = WeightKind::Power;
  w.alpha = alpha;
  return w;
}

WeightSpec WeightSpec::inverse_log() { return inverse_log(default_offset(0)); }
WeightSpec WeightSpec::inverse_log(double offset) {
  return log_weight(WeightKind::InverseLog, 0, offset);
}

WeightSpec WeightSpec::log_composite(int k) {
  if (k < 1 || k > 3) {
    throw ParameterError("weight: default offset needs log_composite order in [1, 3]");
  }
  return log_composite(k, default_offset(k));
}

WeightSpec WeightSpec::log_composite(int k, double offset) {
  if (k < 1 || k > 4) throw ParameterError("weight: log_composite order must be in [1, 4]");
  return log_weight(WeightKind::LogComposite, k, offset);
}

int WeightSpec::depth() const noexcept {
  switch (kind) {
    case WeightKind::InverseLog:
      return 0;
    case WeightKind::LogComposite:
      return k;
    default:
      return -1;
  }
}

std::string WeightSpec::describe() const {
  std::ostringstream out;
  switch (kind) {
    case WeightKind::Constant:
      out << "constant";
      break;
    case WeightKind::Power:
      out << "power(" << alpha << ")";
      break;
    case WeightKind::InverseLog:
      out << "inverse_log(offset=" << offset << ")";
      break;
    case WeightKind::LogComposite:
      out << "log_composite(k=" << k << ",offset=" << offset << ")";
      break;
  }
  return out.str();
}

double phi_of_log_scale(const WeightSpec& w, double s) {
  switch (w.kind) {
    case WeightKind::Constant:
      return 1.0;
    case WeightKind::Power:
      return std::exp(-w.alpha * s);
    case WeightKind::InverseLog:
    case WeightKind::LogComposite: {
      double v = w.offset + s;
      for (int i = 0; i < w.depth(); ++i) {
        if (!(v > 0.0)) break;
        v = std::log(v);
      }
      if (!(v > 0.0) || !std::isfinite(v)) {
        std::ostringstream msg;
        msg << "weight " << w.describe() << ": nested logarithm not positive at |log r| = " << s;
        throw DomainError(msg.str());
      }
      return 1.0 / v;
    }
  }
  return 1.0;
}

double phi_formula(const WeightSpec& w, double r) {
  if (!(r > 0.0)) throw DomainError("weight: scale must be positive");
  if (w.kind == WeightKind::Power) return std::pow(r, w.alpha);
  return phi_of_log_scale(w, std::fabs(std::log(r)));
}

double phi_eval(const WeightSpec& w, double r) {
  if (!(r > 0.0) || r > w.r_max) {
    std::ostringstream msg;
    msg << "weight " << w.describe() << ": scale " << r << " outside (0, " << w.r_max << "]";
    throw DomainError(msg.str());
  }
  return phi_formula(w, r);
}

double closed_form_log_integral(const WeightSpec& w, double r0, double upper) {
  const double s0 = -std::log(r0);
  const double s1 = -std::log(upper);
  switch (w.kind) {
    case WeightKind::Constant:
      return s0 - s1;
    case WeightKind::Power:
      return (std::pow(upper, w.alpha) - std::pow(r0, w.alpha)) / w.alpha;
    case WeightKind::InverseLog:
      return std::log((w.offset + s0) / (w.offset + s1));
    case WeightKind::LogComposite:
      break;
  }
  throw ParameterError("closed_form_log_integral: no closed form for log_composite weights");
}

namespace {

// Composite Simpson for g over [a, b] in the variable u = log s (s = e^u, ds = s du).
template <typename G>
double integrate_log_variable(G g, double s_lo, double s_hi, int panels) {
  const double u0 = std::log(s_lo);
  const double u1 = std::log(s_hi);
  const double du = (u1 - u0) / panels;
  double acc = 0.0;
  for (int i = 0; i <= panels; ++i) {
    const double u = u0 + i * du;
    const double s = std::exp(u);
    const double wgt = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += wgt * g(s) * s;
  }
  return acc * du / 3.0;
}

}  // namespace

DiscontinuityReport discontinuity_criterion(const WeightSpec& w) {
  DiscontinuityReport rep;
  // Any fixed upper limit decides the same question; strict-offset weights are singular
  // at r_max, so stay strictly inside.
  rep.upper = w.r_max < 0.5 ? 0.5 * w.r_max : 0.5;
  const double s_up = -std::log(rep.upper);
  auto g = [&w](double s) { return phi_of_log_scale(w, s); };

  // With r = e^-s, the integral of phi(r)/r dr equals the integral of phi(e^-s) ds.
  for (int e = 2; e <= 16; e += 2) {
    const double r0 = std::pow(10.0, -e);
    const double s0 = -std::log(r0);
    rep.table.emplace_back(r0, integrate_log_variable(g, s_up, s0, 4000));
  }

  // Tail behaviour on doubling windows in s, far beyond double-precision r.
  double S = -std::log(1e-16);
  for (int j = 0; j < 36; ++j, S *= 2.0) {
    rep.windows.emplace_back(S, integrate_log_variable(g, S, 2.0 * S, 400));
  }
  const double mid = rep.windows[rep.windows.size() / 2].second;
  const double last = rep.windows.back().second;
  // Non-decaying window integrals mean divergence; convergent tails decay geometrically.
  rep.admits_discontinuous = last > 0.0 && last >= 0.5 * mid;

  switch (w.kind) {
    case WeightKind::Power:
      rep.symbolic = false;
      break;
    case WeightKind::Constant:
    case WeightKind::InverseLog:
    case WeightKind::LogComposite:
      rep.symbolic = true;
      break;
  }
  rep.agrees = rep.symbolic == rep.admits_discontinuous;
  return rep;
}

}  // namespace vcrit
