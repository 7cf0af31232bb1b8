#include "vcrit/sparseness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "vcrit/errors.hpp"
#include "vcrit/norms.hpp"
#include "vcrit/slf.hpp"
#include "vcrit/spectral.hpp"

namespace vcrit {

std::string component_tag_name(int tag) {
  if (tag == kUnionTag) return "union";
  if (tag < 0 || tag >= kComponentTags) throw ParameterError("unknown component tag");
  static const char* names[] = {"x+", "x-", "y+", "y-", "z+", "z-"};
  return names[tag];
}

std::size_t LevelSetMask::occupied() const {
  return static_cast<std::size_t>(std::count(occupancy.begin(), occupancy.end(), std::uint8_t{1}));
}

SuperlevelMasks superlevel_masks(const VectorField3D& omega, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw ParameterError("superlevel: lambda must lie in (0, 1)");
  const GridSpec& g = omega.grid();
  const std::size_t cells = g.cells();
  const double linf = linf_norm(omega);

  auto blank = [&](int tag) {
    return LevelSetMask{g, std::vector<std::uint8_t>(cells, 0), lambda, lambda * linf, tag};
  };
  SuperlevelMasks out{{blank(0), blank(1), blank(2), blank(3), blank(4), blank(5)},
                      blank(kUnionTag),
                      std::vector<std::int8_t>(cells, 0),
                      linf,
                      !(linf > 0.0)};
  if (out.degenerate) return out;

  const double thr = lambda * linf;
  for (std::size_t i = 0; i < cells; ++i) {
    const Vec3 w = omega.at(i);
    int best = 0;
    double best_val = -1.0;
    for (int c = 0; c < 3; ++c) {
      const double pos = w[c], neg = -w[c];
      if (pos > thr) out.components[2 * c].occupancy[i] = 1;
      if (neg > thr) out.components[2 * c + 1].occupancy[i] = 1;
      const int tag = pos >= neg ? 2 * c : 2 * c + 1;
      const double v = std::fabs(w[c]);
      if (v > best_val) {
        best_val = v;
        best = tag;
      }
    }
    out.max_component[i] = static_cast<std::int8_t>(best);
    if (best_val > thr) out.union_mask.occupancy[i] = 1;
  }
  return out;
}

namespace {

void check_scale(const GridSpec& g, double r, double delta) {
  if (!(r > 0.0) || r > 0.25 * g.box_length() * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "sparseness: scale " << r << " outside (0, L/4 = " << 0.25 * g.box_length() << "]";
    throw ParameterError(msg.str());
  }
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("sparseness: delta must lie in (0, 1)");
}

std::vector<double> fft_correlate(Fft3d& fft, const std::vector<std::uint8_t>& occupancy,
                                  const SpectralScalar& kernel_hat) {
  const GridSpec& g = fft.grid();
  std::vector<double> in(occupancy.begin(), occupancy.end());
  SpectralScalar hat(fft.spectral_size());
  fft.forward(in, hat);
  for (std::size_t s = 0; s < hat.size(); ++s) hat[s] *= kernel_hat[s];
  std::vector<double> out(g.cells());
  fft.inverse(hat, out);
  return out;
}

SpectralScalar ball_kernel(Fft3d& fft, const std::vector<std::array<long, 3>>& offsets) {
  const GridSpec& g = fft.grid();
  std::vector<double> ind(g.cells(), 0.0);
  for (const auto& d : offsets) ind[g.wrapped_index(d[0], d[1], d[2])] = 1.0;
  SpectralScalar hat(fft.spectral_size());
  fft.forward(ind, hat);
  return hat;
}

std::vector<std::uint32_t> round_counts(const std::vector<double>& v, std::size_t max_count) {
  std::vector<std::uint32_t> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double r = std::nearbyint(v[i]);
    if (std::fabs(v[i] - r) > 0.25 || r < 0.0 || r > static_cast<double>(max_count)) {
      throw NumericError("ball_counts: FFT convolution lost integer precision");
    }
    out[i] = static_cast<std::uint32_t>(r);
  }
  return out;
}

template <typename DensityAt>
SparsenessReport worst_over_centers(const GridSpec& g, double r, double delta,
                                    SparsenessMode mode, DensityAt density_at) {
  SparsenessReport rep;
  rep.delta = delta;
  rep.scale = r;
  rep.mode = mode;
  rep.worst_density = -1.0;
  std::size_t worst = 0;
  for (std::size_t i = 0; i < g.cells(); ++i) {
    const double d = density_at(i);
    if (d > rep.worst_density) {
      rep.worst_density = d;
      worst = i;
    }
  }
  rep.worst_center = g.coords(worst);
  rep.sparse = rep.worst_density <= delta;
  return rep;
}

}  // namespace

std::vector<std::array<long, 3>> ball_offsets(const GridSpec& grid, double r) {
  if (!(r > 0.0) || r > 0.25 * grid.box_length() * (1.0 + 1e-12)) {
    throw ParameterError("ball_offsets: radius must lie in (0, L/4]");
  }
  const double h = grid.spacing();
  const double rr = (r / h) * (r / h) * (1.0 + 1e-12);
  const long m = static_cast<long>(std::floor(r / h + 1e-9));
  std::vector<std::array<long, 3>> out;
  for (long k = -m; k <= m; ++k) {
    for (long j = -m; j <= m; ++j) {
      for (long i = -m; i <= m; ++i) {
        if (static_cast<double>(i * i + j * j + k * k) <= rr) out.push_back({i, j, k});
      }
    }
  }
  return out;
}

std::vector<std::uint32_t> ball_counts(const GridSpec& grid,
                                       const std::vector<std::uint8_t>& occupancy, double r) {
  if (occupancy.size() != grid.cells()) throw ParameterError("ball_counts: mask size mismatch");
  const auto offsets = ball_offsets(grid, r);
  Fft3d fft(grid);
  const SpectralScalar kernel = ball_kernel(fft, offsets);
  return round_counts(fft_correlate(fft, occupancy, kernel), offsets.size());
}

std::vector<std::uint32_t> ball_counts_direct(const GridSpec& grid,
                                              const std::vector<std::uint8_t>& occupancy,
                                              double r) {
  if (occupancy.size() != grid.cells()) throw ParameterError("ball_counts: mask size mismatch");
  const auto offsets = ball_offsets(grid, r);
  std::vector<std::uint32_t> out(grid.cells(), 0);
  for (std::size_t idx = 0; idx < grid.cells(); ++idx) {
    const auto c = grid.coords(idx);
    std::uint32_t n = 0;
    for (const auto& d : offsets) {
      n += occupancy[grid.wrapped_index(static_cast<long>(c[0]) + d[0],
                                        static_cast<long>(c[1]) + d[1],
                                        static_cast<long>(c[2]) + d[2])];
    }
    out[idx] = n;
  }
  return out;
}

SparsenessReport sparse_3d(const LevelSetMask& mask, double r, double delta) {
  const GridSpec& g = mask.grid;
  check_scale(g, r, delta);
  const auto counts = ball_counts(g, mask.occupancy, r);
  const double cells = static_cast<double>(ball_offsets(g, r).size());
  auto rep = worst_over_centers(g, r, delta, SparsenessMode::Ball3D,
                                [&](std::size_t i) { return counts[i] / cells; });
  rep.ball_cells = static_cast<std::size_t>(cells);
  return rep;
}

SparsenessReport sparse_3d(const SuperlevelMasks& masks, double r, double delta) {
  const GridSpec& g = masks.union_mask.grid;
  check_scale(g, r, delta);
  const auto offsets = ball_offsets(g, r);
  Fft3d fft(g);
  const SpectralScalar kernel = ball_kernel(fft, offsets);
  std::array<std::vector<std::uint32_t>, kComponentTags> counts;
  for (int t = 0; t < kComponentTags; ++t) {
    counts[t] = round_counts(fft_correlate(fft, masks.components[t].occupancy, kernel),
                             offsets.size());
  }
  const double cells = static_cast<double>(offsets.size());
  auto rep = worst_over_centers(g, r, delta, SparsenessMode::Ball3D, [&](std::size_t i) {
    return counts[masks.max_component[i]][i] / cells;
  });
  rep.ball_cells = offsets.size();
  return rep;
}

std::vector<Vec3> sample_directions(std::size_t fibonacci) {
  std::vector<Vec3> dirs;
  const int lattice[13][3] = {{1, 0, 0},  {0, 1, 0},  {0, 0, 1},  {1, 1, 0}, {1, -1, 0},
                              {1, 0, 1},  {1, 0, -1}, {0, 1, 1},  {0, 1, -1}, {1, 1, 1},
                              {1, 1, -1}, {1, -1, 1}, {-1, 1, 1}};
  for (const auto& d : lattice) {
    const Vec3 v{static_cast<double>(d[0]), static_cast<double>(d[1]), static_cast<double>(d[2])};
    dirs.push_back((1.0 / norm(v)) * v);
  }
  // Fibonacci points on the upper hemisphere; segments are symmetric under nu -> -nu.
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < fibonacci; ++i) {
    const double z = 1.0 - (static_cast<double>(i) + 0.5) / static_cast<double>(fibonacci);
    const double rho = std::sqrt(std::fmax(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(i);
    dirs.push_back({rho * std::cos(phi), rho * std::sin(phi), z});
  }
  return dirs;
}

SegmentSampler::SegmentSampler(const GridSpec& grid, double r, const std::vector<Vec3>& directions)
    : grid_(grid) {
  if (directions.empty()) throw ParameterError("sparse_1d: direction set is empty");
  if (!(r > 0.0)) throw ParameterError("sparse_1d: scale must be positive");
  const double h = grid.spacing();
  const auto intervals = static_cast<std::size_t>(std::ceil(2.0 * r / (0.5 * h) - 1e-9));
  const std::size_t q = std::max<std::size_t>(intervals, 2);
  weights_.assign(q + 1, 1.0);
  weights_.front() = weights_.back() = 0.5;
  weight_sum_ = static_cast<double>(q);
  for (const Vec3& nu_in : directions) {
    const double len = norm(nu_in);
    if (!(len > 0.0)) throw ParameterError("sparse_1d: zero direction");
    const Vec3 nu = (1.0 / len) * nu_in;
    std::vector<std::array<long, 3>> offs;
    offs.reserve(q + 1);
    for (std::size_t j = 0; j <= q; ++j) {
      const double t = -r + 2.0 * r * static_cast<double>(j) / static_cast<double>(q);
      offs.push_back({std::lround(t * nu[0] / h), std::lround(t * nu[1] / h),
                      std::lround(t * nu[2] / h)});
    }
    offsets_.push_back(std::move(offs));
  }
}

double SegmentSampler::fraction(const std::vector<std::uint8_t>& occupancy,
                                const std::array<std::size_t, 3>& center,
                                std::size_t direction) const {
  const auto& offs = offsets_[direction];
  double acc = 0.0;
  for (std::size_t j = 0; j < offs.size(); ++j) {
    const std::size_t idx = grid_.wrapped_index(static_cast<long>(center[0]) + offs[j][0],
                                                static_cast<long>(center[1]) + offs[j][1],
                                                static_cast<long>(center[2]) + offs[j][2]);
    if (occupancy[idx]) acc += weights_[j];
  }
  return acc / weight_sum_;
}

double SegmentSampler::min_fraction(const std::vector<std::uint8_t>& occupancy,
                                    const std::array<std::size_t, 3>& center) const {
  double best = 1.0;
  for (std::size_t d = 0; d < offsets_.size() && best > 0.0; ++d) {
    best = std::fmin(best, fraction(occupancy, center, d));
  }
  return best;
}

SparsenessReport sparse_1d(const LevelSetMask& mask, double r, double delta,
                           const std::vector<Vec3>& directions) {
  const GridSpec& g = mask.grid;
  check_scale(g, r, delta);
  const SegmentSampler sampler(g, r, directions);
  auto rep = worst_over_centers(g, r, delta, SparsenessMode::Segment1D, [&](std::size_t i) {
    return sampler.min_fraction(mask.occupancy, g.coords(i));
  });
  rep.segment_samples = sampler.samples();
  return rep;
}

SparsenessReport sparse_1d(const SuperlevelMasks& masks, double r, double delta,
                           const std::vector<Vec3>& directions) {
  const GridSpec& g = masks.union_mask.grid;
  check_scale(g, r, delta);
  const SegmentSampler sampler(g, r, directions);
  auto rep = worst_over_centers(g, r, delta, SparsenessMode::Segment1D, [&](std::size_t i) {
    return sampler.min_fraction(masks.components[masks.max_component[i]].occupancy, g.coords(i));
  });
  rep.segment_samples = sampler.samples();
  return rep;
}

namespace {

template <typename Eval>
ScaleSearchResult scale_search(const GridSpec& g, double delta, double resolution_cells,
                               Eval eval) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("sparseness: delta must lie in (0, 1)");
  if (!(resolution_cells > 0.0)) throw ParameterError("sparseness: resolution must be positive");
  ScaleSearchResult res;
  const double h = g.spacing();
  std::vector<double> scales;
  for (double r = 0.25 * g.box_length(); r >= h * (1.0 - 1e-12); r *= 0.5) scales.push_back(r);

  std::vector<bool> sparse;
  for (double r : scales) {
    const SparsenessReport rep = eval(r);
    res.scanned.emplace_back(r, rep.worst_density);
    sparse.push_back(rep.sparse);
  }
  std::size_t stable = 0;  // number of leading (largest) scales that are all sparse
  while (stable < sparse.size() && sparse[stable]) ++stable;
  for (std::size_t j = stable; j < sparse.size(); ++j) {
    if (sparse[j]) res.non_monotone = true;
  }
  if (stable == 0) return res;

  double hi = scales[stable - 1];
  if (stable < scales.size()) {
    double lo = scales[stable];
    while (hi - lo > resolution_cells * h) {
      const double mid = 0.5 * (lo + hi);
      const SparsenessReport rep = eval(mid);
      res.scanned.emplace_back(mid, rep.worst_density);
      if (rep.sparse) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
  }
  res.scale = hi;
  return res;
}

}  // namespace

ScaleSearchResult sparseness_scale(const LevelSetMask& mask, double delta,
                                   const ScaleSearchOptions& options) {
  if (mask.occupied() == 0) throw ParameterError("sparseness_scale: empty mask");
  return scale_search(mask.grid, delta, options.resolution_cells, [&](double r) {
    return options.mode == SparsenessMode::Ball3D ? sparse_3d(mask, r, delta)
                                                  : sparse_1d(mask, r, delta, options.directions);
  });
}

ScaleSearchResult sparseness_scale(const SuperlevelMasks& masks, double delta,
                                   const ScaleSearchOptions& options) {
  if (masks.degenerate || masks.union_mask.occupied() == 0) {
    throw ParameterError("sparseness_scale: empty mask");
  }
  return scale_search(masks.union_mask.grid, delta, options.resolution_cells, [&](double r) {
    return options.mode == SparsenessMode::Ball3D ? sparse_3d(masks, r, delta)
                                                  : sparse_1d(masks, r, delta, options.directions);
  });
}

DistributionBound distribution_bound(const VectorField3D& omega, double level) {
  if (!(level > 0.0)) throw ParameterError("distribution_bound: level must be positive");
  const GridSpec& g = omega.grid();
  // Every counted cell contributes fl(|w|/M) >= 1 and rounding is monotone, so the plain
  // running sum never falls below the count: lhs <= rhs holds exactly in floating point.
  DistributionBound out;
  double sum = 0.0;
  for (std::size_t i = 0; i < g.cells(); ++i) {
    const Vec3 w = omega.at(i);
    if (max_norm(w) > level) ++out.count;
    sum += norm(w) / level;
  }
  const double dv = g.cell_volume();
  out.lhs = static_cast<double>(out.count) * dv;
  out.rhs = sum * dv;
  return out;
}

std::vector<VolumeDecayRow> volume_decay_series(const Timeline& timeline, double lambda,
                                                const WeightSpec& weight, PhiArgument argument) {
  std::vector<std::size_t> missing;
  for (std::size_t j = 0; j < timeline.size(); ++j) {
    const Snapshot& s = timeline.snapshots()[j];
    if (!s.field && !s.file) missing.push_back(j);
  }
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << "volume_decay_series: no stored field for snapshot(s)";
    for (std::size_t j : missing) msg << ' ' << j << " (t=" << timeline.snapshots()[j].time << ')';
    throw ParameterError(msg.str());
  }

  std::vector<VolumeDecayRow> rows;
  for (const Snapshot& s : timeline.snapshots()) {
    const VectorField3D w = s.field ? *s.field : slf::read_field(*s.file);
    const SuperlevelMasks masks = superlevel_masks(w, lambda);
    VolumeDecayRow row;
    row.time = s.time;
    row.volume = masks.union_mask.volume();
    row.linf = masks.linf;
    row.product = row.volume * row.linf;
    try {
      row.phi = argument == PhiArgument::Reciprocal ? phi_eval(weight, 1.0 / row.linf)
                                                    : phi_formula(weight, row.linf);
      row.compensated = row.product / row.phi;
    } catch (const DomainError&) {
      row.phi = row.compensated = std::numeric_limits<double>::quiet_NaN();
      row.phi_in_domain = false;
    }
    rows.push_back(row);
  }
  return rows;
}

void write_volume_decay_csv(const std::filesystem::path& path,
                            const std::vector<VolumeDecayRow>& rows, PhiArgument argument) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  const char* phi_col = argument == PhiArgument::Reciprocal ? "phi_at_inverse_linf" : "phi_at_linf";
  out << "t,volume,omega_linf,volume_times_linf," << phi_col << ",compensated,phi_in_domain\n";
  out << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.time << ',' << r.volume << ',' << r.linf << ',' << r.product << ',' << r.phi << ','
        << r.compensated << ',' << (r.phi_in_domain ? 1 : 0) << '\n';
  }
}

}  // namespace vcrit
