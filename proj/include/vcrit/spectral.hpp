#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "vcrit/field.hpp"

namespace vcrit {

using Complex = std::complex<double>;
using SpectralScalar = std::vector<Complex>;
using SpectralVector = std::array<SpectralScalar, 3>;

/// Real-to-complex 3D FFT on a GridSpec (FFTW, estimate-mode plans so output is reproducible).
/// Owns its plans and aligned working buffers; one instance per thread.
class Fft3d {
 public:
  explicit Fft3d(const GridSpec& grid);
  ~Fft3d();
  Fft3d(const Fft3d&) = delete;
  Fft3d& operator=(const Fft3d&) = delete;
  Fft3d(Fft3d&&) noexcept;
  Fft3d& operator=(Fft3d&&) noexcept;

  const GridSpec& grid() const noexcept { return grid_; }
  /// Number of complex coefficients: n * n * (n/2 + 1).
  std::size_t spectral_size() const noexcept;

  /// Unnormalized forward transform.
  void forward(std::span<const double> in, std::span<Complex> out);
  /// Inverse transform including the 1/n^3 normalization.
  void inverse(std::span<const Complex> in, std::span<double> out);

 private:
  struct Plans;
  GridSpec grid_;
  std::unique_ptr<Plans> plans_;
};

/// Wavenumber tables, projections and derivative operators for periodic fields.
/// Spectral index layout: (kz * n + ky) * (n/2 + 1) + kx.
class SpectralOps {
 public:
  explicit SpectralOps(const GridSpec& grid);

  const GridSpec& grid() const noexcept { return grid_; }
  std::size_t spectral_size() const noexcept { return size_; }
  std::size_t half() const noexcept { return nh_; }

  /// Physical wavenumber vector of spectral index s (Nyquist entries are zero).
  std::array<double, 3> wavevector(std::size_t s) const noexcept;
  /// Squared magnitude of the wavevector, Nyquist included.
  double k2(std::size_t s) const noexcept { return k2_[s]; }
  /// True when any integer wavenumber sits at the Nyquist index.
  bool nyquist(std::size_t s) const noexcept { return nyquist_[s] != 0; }
  /// True when the mode survives the 2/3 truncation.
  bool dealias_keep(std::size_t s) const noexcept { return keep_[s] != 0; }
  /// Integer wavenumbers of spectral index s.
  std::array<int, 3> integer_wavenumber(std::size_t s) const noexcept;

  SpectralScalar to_spectral(std::span<const double> f);
  std::vector<double> to_physical(const SpectralScalar& f);
  SpectralVector to_spectral(const VectorField3D& v);
  VectorField3D to_physical(const SpectralVector& v);

  /// Removes the mean and Nyquist modes and the longitudinal part k(k.v)/|k|^2.
  void project_solenoidal(SpectralVector& v) const;
  /// i k x v.
  SpectralVector curl(const SpectralVector& v) const;
  /// Biot-Savart in Fourier space: i k x w / |k|^2, zero mean mode.
  SpectralVector velocity_from_vorticity(const SpectralVector& w) const;
  /// i k . v as a spectral scalar.
  SpectralScalar divergence(const SpectralVector& v) const;
  /// i k_axis f.
  SpectralScalar derivative(const SpectralScalar& f, int axis) const;
  /// Zeroes every mode outside the 2/3 band.
  void dealias(SpectralVector& v) const;

 private:
  GridSpec grid_;
  std::size_t nh_;
  std::size_t size_;
  std::vector<double> kvec_;  // 3 entries per mode, Nyquist zeroed
  std::vector<double> k2_;
  std::vector<unsigned char> nyquist_;
  std::vector<unsigned char> keep_;
  Fft3d fft_;
};

}  // namespace vcrit
