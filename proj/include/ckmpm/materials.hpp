#pragma once

#include <string_view>

#include "ckmpm/types.hpp"

namespace ckmpm {

enum class MaterialModel { FixedCorotated, NeoHookean, LinearElastic };

struct Material {
  MaterialModel model = MaterialModel::FixedCorotated;
  Real E = 0;       // Young's modulus (Pa)
  Real nu = 0;      // Poisson ratio
  Real rho = 0;     // density (kg/m^3)
  Real mu = 0;      // Lame parameters (Pa), derived
  Real lambda = 0;

  static Material make(MaterialModel model, Real E, Real nu, Real rho);
};

MaterialModel material_model_from_name(std::string_view name);
const char* material_model_name(MaterialModel model);

/// Strain energy density Psi(F) in Pa.
/// NeoHookean requires det(F) > 0 and throws NonPositiveJacobianError otherwise.
Real energy_density(const Material& mat, const Mat2& F);

/// First Piola-Kirchhoff stress P = dPsi/dF.
Mat2 first_pk_stress(const Material& mat, const Mat2& F);

/// Stress derivative dP/dF flattened to 4x4 with vec(F)[i+2j] = F(i,j).
/// Symmetric as a 4x4 matrix.
Mat4 stress_derivative(const Material& mat, const Mat2& F);

enum class SpdMode { Shift, Clamp };

/// Make a symmetric local tangent positive semi-definite: Shift adds eps*I,
/// Clamp zeroes negative eigenvalues.
Mat4 spd_project(const Mat4& tangent, SpdMode mode, Real eps = 0);

/// Rotation factor of the 2D polar decomposition F = R S.
Mat2 polar_rotation(const Mat2& F);

/// Cofactor matrix, i.e. dJ/dF in 2D.
Mat2 cofactor(const Mat2& F);

/// Cauchy stress for reporting: sigma = J^-1 P F^T.
Mat2 cauchy_stress(const Material& mat, const Mat2& F);

}  // namespace ckmpm
