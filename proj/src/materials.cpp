#include "ckmpm/materials.hpp"

#include <cmath>

namespace ckmpm {

Material Material::make(MaterialModel model, Real E, Real nu, Real rho) {
  if (!(E > 0)) throw ValidationError("material: E must be positive");
  if (!(nu > -1.0 && nu < 0.5)) throw ValidationError("material: nu must lie in (-1, 0.5)");
  if (!(rho > 0)) throw ValidationError("material: rho must be positive");
  Material m;
  m.model = model;
  m.E = E;
  m.nu = nu;
  m.rho = rho;
  m.mu = E / (2.0 * (1.0 + nu));
  m.lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  return m;
}

MaterialModel material_model_from_name(std::string_view name) {
  if (name == "fixed_corotated") return MaterialModel::FixedCorotated;
  if (name == "neo_hookean") return MaterialModel::NeoHookean;
  if (name == "linear_elastic") return MaterialModel::LinearElastic;
  throw ValidationError("unknown material model: " + std::string(name));
}

const char* material_model_name(MaterialModel model) {
  switch (model) {
    case MaterialModel::FixedCorotated: return "fixed_corotated";
    case MaterialModel::NeoHookean: return "neo_hookean";
    case MaterialModel::LinearElastic: return "linear_elastic";
  }
  return "?";
}

Mat2 cofactor(const Mat2& F) {
  Mat2 c;
  c << F(1, 1), -F(1, 0), -F(0, 1), F(0, 0);
  return c;
}

Mat2 polar_rotation(const Mat2& F) {
  // R = [[a, -b], [b, a]] / sqrt(a^2 + b^2) with a = F00 + F11, b = F10 - F01
  const Real a = F(0, 0) + F(1, 1);
  const Real b = F(1, 0) - F(0, 1);
  const Real r = std::sqrt(a * a + b * b);
  if (r == 0.0) return Mat2::Identity();  // degenerate (pure anti-symmetric stretch)
  Mat2 R;
  R << a / r, -b / r, b / r, a / r;
  return R;
}

namespace {

Real check_log_J(const Mat2& F) {
  const Real J = F.determinant();
  if (!(J > 0)) {
    throw NonPositiveJacobianError("neo_hookean: det(F) = " + std::to_string(J) + " <= 0");
  }
  return std::log(J);
}

}  // namespace

Real energy_density(const Material& mat, const Mat2& F) {
  switch (mat.model) {
    case MaterialModel::FixedCorotated: {
      // mu * sum (sigma_k - 1)^2 + lambda/2 (J-1)^2, using
      // sigma_1 + sigma_2 = tr(R^T F) and sigma_1 sigma_2 = J
      const Real a = F(0, 0) + F(1, 1);
      const Real b = F(1, 0) - F(0, 1);
      const Real s = std::sqrt(a * a + b * b);  // sigma_1 + sigma_2
      const Real J = F.determinant();
      const Real jm = J - 1.0;
      return mat.mu * (s * s - 2.0 * J - 2.0 * s + 2.0) + 0.5 * mat.lambda * jm * jm;
    }
    case MaterialModel::NeoHookean: {
      const Real lj = check_log_J(F);
      const Real I1 = (F.transpose() * F).trace();
      return 0.5 * mat.mu * (I1 - 2.0) - mat.mu * lj + 0.5 * mat.lambda * lj * lj;
    }
    case MaterialModel::LinearElastic: {
      const Mat2 eps = 0.5 * (F + F.transpose()) - Mat2::Identity();
      const Real tr = eps.trace();
      return mat.mu * eps.squaredNorm() + 0.5 * mat.lambda * tr * tr;
    }
  }
  return 0;
}

Mat2 first_pk_stress(const Material& mat, const Mat2& F) {
  switch (mat.model) {
    case MaterialModel::FixedCorotated: {
      const Mat2 R = polar_rotation(F);
      const Real J = F.determinant();
      return 2.0 * mat.mu * (F - R) + mat.lambda * (J - 1.0) * cofactor(F);
    }
    case MaterialModel::NeoHookean: {
      const Real lj = check_log_J(F);
      const Mat2 Fit = F.inverse().transpose();
      return mat.mu * (F - Fit) + mat.lambda * lj * Fit;
    }
    case MaterialModel::LinearElastic: {
      const Mat2 eps = 0.5 * (F + F.transpose()) - Mat2::Identity();
      return 2.0 * mat.mu * eps + mat.lambda * eps.trace() * Mat2::Identity();
    }
  }
  return Mat2::Zero();
}

Mat4 stress_derivative(const Material& mat, const Mat2& F) {
  Mat4 T = Mat4::Zero();
  auto set_column = [&T](int k, int l, const Mat2& dP) {
    const int col = flat_index(k, l);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) T(flat_index(i, j), col) = dP(i, j);
  };

  switch (mat.model) {
    case MaterialModel::FixedCorotated: {
      const Real a = F(0, 0) + F(1, 1);
      const Real b = F(1, 0) - F(0, 1);
      const Real r2 = a * a + b * b;
      const Real r = std::sqrt(r2);
      const Real J = F.determinant();
      const Mat2 cof = cofactor(F);
      Mat2 G;
      G << a, -b, b, a;
      for (int k = 0; k < 2; ++k) {
        for (int l = 0; l < 2; ++l) {
          Mat2 dF = Mat2::Zero();
          dF(k, l) = 1.0;
          const Real da = (k == 0 && l == 0) || (k == 1 && l == 1) ? 1.0 : 0.0;
          const Real db = (k == 1 && l == 0) ? 1.0 : (k == 0 && l == 1) ? -1.0 : 0.0;
          Mat2 dG;
          dG << da, -db, db, da;
          const Mat2 dR = dG / r - G * ((a * da + b * db) / (r2 * r));
          Mat2 dcof;
          dcof << dF(1, 1), -dF(1, 0), -dF(0, 1), dF(0, 0);
          const Real dJ = (cof.array() * dF.array()).sum();
          const Mat2 dP = 2.0 * mat.mu * (dF - dR) + mat.lambda * (dJ * cof + (J - 1.0) * dcof);
          set_column(k, l, dP);
        }
      }
      break;
    }
    case MaterialModel::NeoHookean: {
      const Real lj = check_log_J(F);
      const Mat2 Fi = F.inverse();
      const Mat2 Fit = Fi.transpose();
      for (int k = 0; k < 2; ++k) {
        for (int l = 0; l < 2; ++l) {
          Mat2 dF = Mat2::Zero();
          dF(k, l) = 1.0;
          const Real dlj = (Fit.array() * dF.array()).sum();  // tr(F^-1 dF)
          const Mat2 dP = mat.mu * dF + (mat.mu - mat.lambda * lj) * Fit * dF.transpose() * Fit +
                          mat.lambda * dlj * Fit;
          set_column(k, l, dP);
        }
      }
      break;
    }
    case MaterialModel::LinearElastic: {
      for (int k = 0; k < 2; ++k) {
        for (int l = 0; l < 2; ++l) {
          Mat2 dF = Mat2::Zero();
          dF(k, l) = 1.0;
          const Mat2 dP =
              mat.mu * (dF + dF.transpose()) + mat.lambda * dF.trace() * Mat2::Identity();
          set_column(k, l, dP);
        }
      }
      break;
    }
  }
  return T;
}

Mat4 spd_project(const Mat4& tangent, SpdMode mode, Real eps) {
  if (mode == SpdMode::Shift) return tangent + eps * Mat4::Identity();
  Eigen::SelfAdjointEigenSolver<Mat4> eig(tangent);
  Vec4 lam = eig.eigenvalues();
  for (int i = 0; i < 4; ++i) lam(i) = std::max(lam(i), 0.0);
  return eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
}

Mat2 cauchy_stress(const Material& mat, const Mat2& F) {
  const Real J = F.determinant();
  return first_pk_stress(mat, F) * F.transpose() / J;
}

}  // namespace ckmpm
