#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace vcrit {

/// Finite union of disjoint closed intervals on the real diameter [-1, 1] of the unit disc.
class SlitSet {
 public:
  /// Sorts the intervals and merges touching ones. Throws ParameterError on empty or
  /// reversed intervals, intervals leaving [-1, 1], overlaps, or zero total length.
  explicit SlitSet(std::vector<std::pair<double, double>> intervals);

  /// [-1, -1 + alpha] and [1 - alpha, 1]: the extremal configuration of total length 2 alpha.
  static SlitSet symmetric(double alpha);

  const std::vector<std::pair<double, double>>& intervals() const noexcept { return iv_; }
  double total_length() const noexcept { return total_; }
  double alpha() const noexcept { return 0.5 * total_; }
  bool contains(double x) const noexcept;

 private:
  std::vector<std::pair<double, double>> iv_;
  double total_ = 0.0;
};

/// Random union of `pieces` disjoint intervals in [-1, 1] with total length 2 alpha. Piece
/// lengths and gaps are uniform random partitions of the available length; every piece and
/// every interior gap is at least `min_piece` long. Throws ParameterError if that is impossible.
SlitSet random_slit_set(double alpha, std::size_t pieces, double min_piece, std::mt19937_64& rng);

/// Closed-form extremal harmonic measure (2/pi) asin((1 - (1-a)^2) / (1 + (1-a)^2)) of the
/// symmetric slit pair at the centre of the disc. Throws ParameterError unless a in (0, 1].
double solynin_h(double alpha);

/// Constants of the escape-time argument: the sparseness complement alpha* = 1 - delta^(1/3)
/// with delta = 3/4, h* = solynin_h(alpha*), M solving h*/2 + (1 - h*) M = 1, lambda = 1/(2M).
struct MConstants {
  double delta = 0.75;
  double alpha_star = 0.0;
  double h_star = 0.0;
  double M = 0.0;
  double lambda = 0.0;
};

MConstants solve_M();
/// Same relations for an arbitrary h* in [0, 1). Throws ParameterError otherwise.
MConstants solve_M(double h_star);

/// Harmonic-measure maximum principle bound m h + M_big (1 - h).
/// Throws ParameterError when h is outside [0, 1] or m > M_big.
double hmmp_bound(double m, double M_big, double h);

enum class HmMethod { ClosedForm, GridLaplace };

/// How the Dirichlet condition on the unit circle enters the grid problem.
enum class CircleBoundary {
  Staircase,      ///< grid nodes outside the disc are fixed to 0 (first order)
  ShortleyWeller  ///< stencil arms cut at the circle (second order)
};

/// How the slit enters the grid problem.
enum class SlitTreatment {
  HalfCellPin,  ///< diameter nodes within half a cell of K are held at 1
  CutArm        ///< nodes inside K held at 1; arms crossing an endpoint end there
};

struct HmOptions {
  CircleBoundary boundary = CircleBoundary::ShortleyWeller;
  SlitTreatment slit = SlitTreatment::CutArm;
  double tolerance = 1e-8;            ///< max update of a sweep at convergence
  std::size_t max_sweeps = 200000;
  double relaxation = 0.0;            ///< 0 selects 2 / (1 + sin(pi / grid_n))
};

struct HmResult {
  double value = 0.0;
  HmMethod method = HmMethod::GridLaplace;
  std::size_t grid_n = 0;
  std::size_t sweeps = 0;
  double residual = 0.0;  ///< max update of the last sweep
};

/// h(0, D \ K, K) by a 5-point finite-difference Laplace solve on the square [-1, 1]^2
/// with grid_n cells per side, red-black SOR; the slit and circle treatments are set in
/// `options` (defaults are first-order accurate at slit tips, about 1% at grid_n = 512).
/// Returns exactly 1 (ClosedForm) when 0 lies in K.
/// Throws ParameterError for grid_n < 128 or odd, or an interval shorter than two cells;
/// ConvergenceError when max_sweeps is exhausted.
HmResult harmonic_measure_numeric(const SlitSet& k, std::size_t grid_n,
                                  const HmOptions& options = {});

std::string to_string(HmMethod m);
std::string to_string(CircleBoundary b);
std::string to_string(SlitTreatment s);

}  // namespace vcrit
