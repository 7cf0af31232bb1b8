#pragma once

#include "vcrit/field.hpp"

namespace vcrit {

/// Integral diagnostics of a vorticity field. Enstrophy is (1/2) sum |w|^2 dV.
struct FieldNorms {
  double linf = 0.0;  ///< max over the grid of the pointwise max-norm
  double l1 = 0.0;    ///< sum |w| dV (Euclidean magnitude)
  double l2 = 0.0;
  double enstrophy = 0.0;
  double helicity = 0.0;  ///< sum u . w dV with u from the Biot-Savart inversion
};

/// Biot-Savart inversion on the periodic box. Throws NumericError on non-finite input.
/// The mean of each vorticity component is discarded.
VectorField3D velocity_from_vorticity(const VectorField3D& omega);

FieldNorms field_norms(const VectorField3D& omega);

/// Max over the grid of the pointwise max-norm.
double linf_norm(const VectorField3D& f);
/// Sum of Euclidean magnitudes times the cell volume.
double l1_norm(const VectorField3D& f);
/// (1/2) sum |f|^2 dV.
double half_square_integral(const VectorField3D& f);

/// Max over the grid of |div f| computed with spectral derivatives.
double max_spectral_divergence(const VectorField3D& f);

}  // namespace vcrit
