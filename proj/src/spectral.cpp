#include "vcrit/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "vcrit/errors.hpp"

namespace vcrit {

namespace {
// The FFTW planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct Fft3d::Plans {
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
  std::size_t nreal = 0;
  std::size_t nspec = 0;

  ~Plans() {
    std::lock_guard lock(planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (inv) fftw_destroy_plan(inv);
    fftw_free(real);
    fftw_free(spec);
  }
};

Fft3d::Fft3d(const GridSpec& grid) : grid_(grid), plans_(std::make_unique<Plans>()) {
  const int n = static_cast<int>(grid.n());
  plans_->nreal = grid.cells();
  plans_->nspec = grid.n() * grid.n() * (grid.n() / 2 + 1);
  std::lock_guard lock(planner_mutex());
  plans_->real = fftw_alloc_real(plans_->nreal);
  plans_->spec = fftw_alloc_complex(plans_->nspec);
  if (!plans_->real || !plans_->spec) throw NumericError("fft: allocation failed");
  plans_->fwd = fftw_plan_dft_r2c_3d(n, n, n, plans_->real, plans_->spec, FFTW_ESTIMATE);
  plans_->inv = fftw_plan_dft_c2r_3d(n, n, n, plans_->spec, plans_->real, FFTW_ESTIMATE);
  if (!plans_->fwd || !plans_->inv) throw NumericError("fft: planning failed");
}

Fft3d::~Fft3d() = default;
Fft3d::Fft3d(Fft3d&&) noexcept = default;
Fft3d& Fft3d::operator=(Fft3d&&) noexcept = default;

std::size_t Fft3d::spectral_size() const noexcept { return plans_->nspec; }

void Fft3d::forward(std::span<const double> in, std::span<Complex> out) {
  std::copy(in.begin(), in.end(), plans_->real);
  fftw_execute(plans_->fwd);
  const auto* src = reinterpret_cast<const Complex*>(plans_->spec);
  std::copy(src, src + plans_->nspec, out.begin());
}

void Fft3d::inverse(std::span<const Complex> in, std::span<double> out) {
  // c2r destroys its input, so always go through the owned buffer.
  std::copy(in.begin(), in.end(), reinterpret_cast<Complex*>(plans_->spec));
  fftw_execute(plans_->inv);
  const double scale = 1.0 / static_cast<double>(plans_->nreal);
  for (std::size_t i = 0; i < plans_->nreal; ++i) out[i] = plans_->real[i] * scale;
}

SpectralOps::SpectralOps(const GridSpec& grid)
    : grid_(grid), nh_(grid.n() / 2 + 1), size_(grid.n() * grid.n() * nh_), fft_(grid) {
  const long n = static_cast<long>(grid.n());
  const double k0 = 2.0 * std::numbers::pi / grid.box_length();
  kvec_.resize(3 * size_);
  k2_.resize(size_);
  nyquist_.resize(size_);
  keep_.resize(size_);
  for (std::size_t s = 0; s < size_; ++s) {
    const auto m = integer_wavenumber(s);
    bool nyq = false;
    bool keep = true;
    double k2 = 0.0;
    for (int a = 0; a < 3; ++a) {
      const bool at_nyq = std::labs(m[a]) == n / 2;
      nyq = nyq || at_nyq;
      keep = keep && 3 * std::labs(m[a]) < n;
      const double k = k0 * m[a];
      kvec_[3 * s + a] = at_nyq ? 0.0 : k;
      k2 += k * k;
    }
    k2_[s] = k2;
    nyquist_[s] = nyq;
    keep_[s] = keep;
  }
}

std::array<int, 3> SpectralOps::integer_wavenumber(std::size_t s) const noexcept {
  const long n = static_cast<long>(grid_.n());
  const long kx = static_cast<long>(s % nh_);
  const long ky = static_cast<long>((s / nh_) % grid_.n());
  const long kz = static_cast<long>(s / (nh_ * grid_.n()));
  auto fold = [n](long m) { return static_cast<int>(m <= n / 2 ? m : m - n); };
  // kx never exceeds n/2 in the half-spectrum; keep it positive at Nyquist.
  return {static_cast<int>(kx), fold(ky), fold(kz)};
}

std::array<double, 3> SpectralOps::wavevector(std::size_t s) const noexcept {
  return {kvec_[3 * s], kvec_[3 * s + 1], kvec_[3 * s + 2]};
}

SpectralScalar SpectralOps::to_spectral(std::span<const double> f) {
  SpectralScalar out(size_);
  fft_.forward(f, out);
  return out;
}

std::vector<double> SpectralOps::to_physical(const SpectralScalar& f) {
  std::vector<double> out(grid_.cells());
  fft_.inverse(f, out);
  return out;
}

SpectralVector SpectralOps::to_spectral(const VectorField3D& v) {
  SpectralVector out;
  for (int c = 0; c < 3; ++c) {
    out[c].resize(size_);
    fft_.forward(v.component(c), out[c]);
  }
  return out;
}

VectorField3D SpectralOps::to_physical(const SpectralVector& v) {
  VectorField3D out(grid_);
  for (int c = 0; c < 3; ++c) fft_.inverse(v[c], out.component(c));
  return out;
}

void SpectralOps::project_solenoidal(SpectralVector& v) const {
  for (std::size_t s = 0; s < size_; ++s) {
    if (s == 0 || nyquist_[s]) {
      v[0][s] = v[1][s] = v[2][s] = 0.0;
      continue;
    }
    const auto k = wavevector(s);
    const Complex kv = k[0] * v[0][s] + k[1] * v[1][s] + k[2] * v[2][s];
    const Complex f = kv / k2_[s];
    for (int a = 0; a < 3; ++a) v[a][s] -= k[a] * f;
  }
}

SpectralVector SpectralOps::curl(const SpectralVector& v) const {
  SpectralVector out;
  for (auto& c : out) c.assign(size_, Complex{});
  const Complex I{0.0, 1.0};
  for (std::size_t s = 0; s < size_; ++s) {
    const auto k = wavevector(s);
    out[0][s] = I * (k[1] * v[2][s] - k[2] * v[1][s]);
    out[1][s] = I * (k[2] * v[0][s] - k[0] * v[2][s]);
    out[2][s] = I * (k[0] * v[1][s] - k[1] * v[0][s]);
  }
  return out;
}

SpectralVector SpectralOps::velocity_from_vorticity(const SpectralVector& w) const {
  SpectralVector out = curl(w);
  for (std::size_t s = 0; s < size_; ++s) {
    const double inv = (s == 0 || nyquist_[s]) ? 0.0 : 1.0 / k2_[s];
    for (int a = 0; a < 3; ++a) out[a][s] *= inv;
  }
  return out;
}

SpectralScalar SpectralOps::divergence(const SpectralVector& v) const {
  SpectralScalar out(size_);
  const Complex I{0.0, 1.0};
  for (std::size_t s = 0; s < size_; ++s) {
    const auto k = wavevector(s);
    out[s] = I * (k[0] * v[0][s] + k[1] * v[1][s] + k[2] * v[2][s]);
  }
  return out;
}

SpectralScalar SpectralOps::derivative(const SpectralScalar& f, int axis) const {
  SpectralScalar out(size_);
  const Complex I{0.0, 1.0};
  for (std::size_t s = 0; s < size_; ++s) out[s] = I * kvec_[3 * s + axis] * f[s];
  return out;
}

void SpectralOps::dealias(SpectralVector& v) const {
  for (std::size_t s = 0; s < size_; ++s) {
    if (!keep_[s]) v[0][s] = v[1][s] = v[2][s] = 0.0;
  }
}

}  // namespace vcrit
