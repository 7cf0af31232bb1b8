#include "vcrit/norms.hpp"

#include <cmath>

#include "vcrit/errors.hpp"
#include "vcrit/spectral.hpp"

namespace vcrit {

VectorField3D velocity_from_vorticity(const VectorField3D& omega) {
  if (!omega.all_finite()) throw NumericError("velocity_from_vorticity: non-finite vorticity");
  SpectralOps ops(omega.grid());
  return ops.to_physical(ops.velocity_from_vorticity(ops.to_spectral(omega)));
}

double linf_norm(const VectorField3D& f) {
  double m = 0.0;
  for (double v : f.data()) m = std::fmax(m, std::fabs(v));
  return m;
}

double l1_norm(const VectorField3D& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.grid().cells(); ++i) s += norm(f.at(i));
  return s * f.grid().cell_volume();
}

double half_square_integral(const VectorField3D& f) {
  double s = 0.0;
  for (double v : f.data()) s += v * v;
  return 0.5 * s * f.grid().cell_volume();
}

FieldNorms field_norms(const VectorField3D& omega) {
  FieldNorms out;
  out.linf = linf_norm(omega);
  out.l1 = l1_norm(omega);
  out.enstrophy = half_square_integral(omega);
  out.l2 = std::sqrt(2.0 * out.enstrophy);
  const VectorField3D u = velocity_from_vorticity(omega);
  double h = 0.0;
  for (std::size_t i = 0; i < omega.data().size(); ++i) h += u.data()[i] * omega.data()[i];
  out.helicity = h * omega.grid().cell_volume();
  return out;
}

double max_spectral_divergence(const VectorField3D& f) {
  SpectralOps ops(f.grid());
  const auto div = ops.to_physical(ops.divergence(ops.to_spectral(f)));
  double m = 0.0;
  for (double v : div) m = std::fmax(m, std::fabs(v));
  return m;
}

}  // namespace vcrit
