#include "vcrit/harmonic.hpp"

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <numbers>
#include <sstream>

#include "vcrit/errors.hpp"

namespace vcrit {

SlitSet::SlitSet(std::vector<std::pair<double, double>> intervals) {
  if (intervals.empty()) throw ParameterError("slit set: no intervals");
  for (const auto& [a, b] : intervals) {
    if (!(a <= b)) throw ParameterError("slit set: interval with a > b");
    if (a < -1.0 || b > 1.0) throw ParameterError("slit set: interval outside [-1, 1]");
  }
  std::sort(intervals.begin(), intervals.end());
  for (const auto& iv : intervals) {
    if (!iv_.empty() && iv.first <= iv_.back().second) {
      if (iv.first < iv_.back().second) throw ParameterError("slit set: overlapping intervals");
      iv_.back().second = iv.second;  // touching: merge
      continue;
    }
    iv_.push_back(iv);
  }
  for (const auto& [a, b] : iv_) total_ += b - a;
  if (!(total_ > 0.0)) throw ParameterError("slit set: total length must be positive");
}

SlitSet SlitSet::symmetric(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterError("slit set: alpha must lie in (0, 1]");
  return SlitSet({{-1.0, -1.0 + alpha}, {1.0 - alpha, 1.0}});
}

SlitSet random_slit_set(double alpha, std::size_t pieces, double min_piece, std::mt19937_64& rng) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("random slit set: alpha must lie in (0, 1)");
  if (pieces == 0 || !(min_piece > 0.0)) throw ParameterError("random slit set: need pieces >= 1, min_piece > 0");
  const double p = static_cast<double>(pieces);
  const double spare_len = 2.0 * alpha - p * min_piece;
  const double spare_gap = 2.0 - 2.0 * alpha - (p - 1.0) * min_piece;
  if (spare_len < 0.0 || spare_gap < 0.0) throw ParameterError("random slit set: pieces do not fit");

  // Uniform partitions of the spare length via normalized exponentials.
  std::exponential_distribution<double> expo(1.0);
  auto partition = [&](std::size_t parts, double total) {
    std::vector<double> w(parts);
    double sum = 0.0;
    for (auto& x : w) sum += (x = expo(rng));
    for (auto& x : w) x *= total / sum;
    return w;
  };
  const auto lens = partition(pieces, spare_len);
  const auto gaps = partition(pieces + 1, spare_gap);

  std::vector<std::pair<double, double>> iv;
  double x = -1.0 + gaps[0];
  for (std::size_t i = 0; i < pieces; ++i) {
    const double len = min_piece + lens[i];
    const double b = (i + 1 == pieces) ? std::min(1.0, x + len) : x + len;
    iv.emplace_back(x, b);
    x = b + min_piece + gaps[i + 1];
  }
  return SlitSet(std::move(iv));
}

bool SlitSet::contains(double x) const noexcept {
  return std::any_of(iv_.begin(), iv_.end(),
                     [x](const auto& iv) { return iv.first <= x && x <= iv.second; });
}

double solynin_h(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterError("solynin_h: alpha must lie in (0, 1]");
  const double q = (1.0 - alpha) * (1.0 - alpha);
  return 2.0 / std::numbers::pi * std::asin((1.0 - q) / (1.0 + q));
}

MConstants solve_M(double h_star) {
  if (!(h_star >= 0.0 && h_star < 1.0)) throw ParameterError("solve_M: h* must lie in [0, 1)");
  MConstants c;
  c.alpha_star = 1.0 - std::cbrt(c.delta);
  c.h_star = h_star;
  c.M = (1.0 - 0.5 * h_star) / (1.0 - h_star);
  c.lambda = 1.0 / (2.0 * c.M);
  return c;
}

MConstants solve_M() {
  const double alpha_star = 1.0 - std::cbrt(0.75);
  return solve_M(solynin_h(alpha_star));
}

double hmmp_bound(double m, double M_big, double h) {
  if (!(h >= 0.0 && h <= 1.0)) throw ParameterError("hmmp_bound: h must lie in [0, 1]");
  if (!(m <= M_big)) throw ParameterError("hmmp_bound: requires m <= M");
  return m * h + M_big * (1.0 - h);
}

std::string to_string(HmMethod m) {
  return m == HmMethod::ClosedForm ? "closed_form" : "grid_laplace";
}

std::string to_string(CircleBoundary b) {
  return b == CircleBoundary::Staircase ? "staircase" : "shortley_weller";
}

std::string to_string(SlitTreatment s) {
  return s == SlitTreatment::HalfCellPin ? "half_cell_pin" : "cut_arm";
}

namespace {

enum NodeKind : std::uint8_t { kUnknown = 0, kZero = 1, kOne = 2 };

}  // namespace

HmResult harmonic_measure_numeric(const SlitSet& k, std::size_t grid_n, const HmOptions& options) {
  if (grid_n < 128 || grid_n % 2 != 0) {
    throw ParameterError("harmonic_measure_numeric: grid_n must be even and >= 128");
  }
  const std::size_t n = grid_n;
  const double h = 2.0 / static_cast<double>(n);
  for (const auto& [a, b] : k.intervals()) {
    if (b - a < 2.0 * h * (1.0 - 1e-12)) {
      std::ostringstream msg;
      msg << "harmonic_measure_numeric: interval [" << a << ", " << b
          << "] shorter than two cells at grid_n = " << n;
      throw ParameterError(msg.str());
    }
  }

  HmResult res;
  res.grid_n = n;
  if (k.contains(0.0)) {
    res.value = 1.0;
    res.method = HmMethod::ClosedForm;
    return res;
  }

  const std::size_t w = n + 1;  // nodes per side
  const std::size_t mid = n / 2;
  auto coord = [&](std::size_t i) { return -1.0 + h * static_cast<double>(i); };

  std::vector<std::uint8_t> kind(w * w, kUnknown);
  std::vector<double> u(w * w, 0.0);
  for (std::size_t j = 0; j < w; ++j) {
    for (std::size_t i = 0; i < w; ++i) {
      const double x = coord(i), y = coord(j);
      if (x * x + y * y >= 1.0) kind[j * w + i] = kZero;
    }
  }
  // Slit nodes on the diameter. Half-cell pinning holds every node within h/2 of K at 1;
  // cut arms hold only nodes inside K and end the stencil arm that crosses an endpoint
  // exactly at the endpoint, with value 1 there.
  const bool cut_slit = options.slit == SlitTreatment::CutArm;
  const double pin_margin = cut_slit ? 0.0 : 0.5 * h;
  for (std::size_t i = 0; i < w; ++i) {
    const double x = coord(i);
    bool near = false;
    for (const auto& [a, b] : k.intervals()) {
      if (x >= a - pin_margin && x <= b + pin_margin) near = true;
    }
    if (near && kind[mid * w + i] != kZero) {
      kind[mid * w + i] = kOne;
      u[mid * w + i] = 1.0;
    }
  }

  // Stencil of each unknown node: weights of the (E, W, N, S) neighbours plus a constant
  // from arms that end on the boundary before reaching a node (Shortley-Weller).
  struct Stencil {
    double cw[4];
    double rhs;
    double diag;
  };
  std::vector<Stencil> stencils;
  std::vector<std::size_t> stencil_index(w * w, 0);
  const bool sw = options.boundary == CircleBoundary::ShortleyWeller;
  const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
  for (std::size_t j = 1; j + 1 < w; ++j) {
    for (std::size_t i = 1; i + 1 < w; ++i) {
      const std::size_t p = j * w + i;
      if (kind[p] != kUnknown) continue;
      const double x = coord(i), y = coord(j);
      double len[4] = {1.0, 1.0, 1.0, 1.0};
      double val[4] = {0.0, 0.0, 0.0, 0.0};
      bool cut[4] = {false, false, false, false};
      for (int d = 0; d < 4; ++d) {
        const std::size_t q = (j + dj[d]) * w + (i + di[d]);
        if (sw && kind[q] == kZero) {
          // |(x, y) + t h e_d| = 1 for t in (0, 1]
          const double bq = 2.0 * (x * di[d] + y * dj[d]) * h;
          const double cq = x * x + y * y - 1.0;
          const double t = (-bq + std::sqrt(bq * bq - 4.0 * h * h * cq)) / (2.0 * h * h);
          len[d] = std::clamp(t, 1e-3, 1.0);
          cut[d] = true;
        }
        if (cut_slit && j == mid && di[d] != 0) {
          // Nearest endpoint of K strictly between this node and its horizontal neighbour.
          const double xn = coord(i + di[d]);
          for (const auto& [a, b] : k.intervals()) {
            for (double e : {a, b}) {
              const double t = (e - x) / (xn - x);
              if (t > 0.0 && t < 1.0 && t < len[d]) {
                len[d] = std::fmax(t, 1e-3);
                val[d] = 1.0;
                cut[d] = true;
              }
            }
          }
        }
      }
      // 1D Shortley-Weller: u'' ~ 2/(hE hW (hE + hW)) [hW (uE - u) + hE (uW - u)]
      const double ex = 2.0 / (len[0] * len[1] * (len[0] + len[1]));
      const double ey = 2.0 / (len[2] * len[3] * (len[2] + len[3]));
      const double wgt[4] = {ex * len[1], ex * len[0], ey * len[3], ey * len[2]};
      Stencil st{};
      for (int d = 0; d < 4; ++d) {
        st.diag += wgt[d];
        if (cut[d]) {
          st.rhs += wgt[d] * val[d];
        } else {
          st.cw[d] = wgt[d];
        }
      }
      stencil_index[p] = stencils.size();
      stencils.push_back(st);
    }
  }

  const double omega = options.relaxation > 0.0
                           ? options.relaxation
                           : 2.0 / (1.0 + std::sin(std::numbers::pi / static_cast<double>(n)));
  double max_update = 0.0;
  std::size_t sweep = 0;
  for (; sweep < options.max_sweeps; ++sweep) {
    max_update = 0.0;
    for (int colour = 0; colour < 2; ++colour) {
      for (std::size_t j = 1; j + 1 < w; ++j) {
        std::size_t i0 = 1 + ((j + 1 + colour) & 1);
        for (std::size_t i = i0; i + 1 < w; i += 2) {
          const std::size_t p = j * w + i;
          if (kind[p] != kUnknown) continue;
          const Stencil& st = stencils[stencil_index[p]];
          const double nb = st.rhs + st.cw[0] * u[p + 1] + st.cw[1] * u[p - 1] +
                            st.cw[2] * u[p + w] + st.cw[3] * u[p - w];
          const double delta = omega * (nb / st.diag - u[p]);
          u[p] += delta;
          max_update = std::fmax(max_update, std::fabs(delta));
        }
      }
    }
    if (max_update < options.tolerance) break;
  }
  res.sweeps = sweep + 1;
  res.residual = max_update;
  if (!(max_update < options.tolerance)) {
    std::ostringstream msg;
    msg << "harmonic_measure_numeric: no convergence after " << options.max_sweeps
        << " sweeps (max update " << max_update << ")";
    throw ConvergenceError(msg.str(), max_update);
  }
  res.value = std::clamp(u[mid * w + mid], 0.0, 1.0);
  return res;
}

}  // namespace vcrit
