#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ckmpm/materials.hpp"
#include "test_util.hpp"

using namespace ckmpm;
using namespace ckmpm::testing;

namespace {

const MaterialModel kModels[] = {MaterialModel::FixedCorotated, MaterialModel::NeoHookean,
                                 MaterialModel::LinearElastic};

Mat2 fd_stress(const Material& mat, const Mat2& F, Real step) {
  Mat2 P;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      Mat2 Fp = F, Fm = F;
      Fp(i, j) += step;
      Fm(i, j) -= step;
      P(i, j) = (energy_density(mat, Fp) - energy_density(mat, Fm)) / (2 * step);
    }
  }
  return P;
}

Mat4 fd_tangent(const Material& mat, const Mat2& F, Real step) {
  Mat4 T;
  for (int k = 0; k < 2; ++k) {
    for (int l = 0; l < 2; ++l) {
      Mat2 Fp = F, Fm = F;
      Fp(k, l) += step;
      Fm(k, l) -= step;
      const Mat2 dP = (first_pk_stress(mat, Fp) - first_pk_stress(mat, Fm)) / (2 * step);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) T(flat_index(i, j), flat_index(k, l)) = dP(i, j);
    }
  }
  return T;
}

}  // namespace

TEST_CASE("lame parameter derivation and roundtrip") {
  const Material m = Material::make(MaterialModel::NeoHookean, 5.0e4, 0.3, 100.0);
  CHECK(m.mu == doctest::Approx(5.0e4 / 2.6).epsilon(1e-14));
  CHECK(m.lambda == doctest::Approx(5.0e4 * 0.3 / (1.3 * 0.4)).epsilon(1e-14));
  const Real E_round = m.mu * (3 * m.lambda + 2 * m.mu) / (m.lambda + m.mu);
  const Real nu_round = m.lambda / (2 * (m.lambda + m.mu));
  CHECK(E_round == doctest::Approx(m.E).epsilon(1e-12));
  CHECK(nu_round == doctest::Approx(m.nu).epsilon(1e-12));

  CHECK_THROWS_AS(Material::make(MaterialModel::NeoHookean, -1, 0.3, 100), ValidationError);
  CHECK_THROWS_AS(Material::make(MaterialModel::NeoHookean, 1e4, 0.5, 100), ValidationError);

  // nu = 0 gives lambda = 0 without special-casing
  const Material rings = Material::make(MaterialModel::NeoHookean, 5.0e4, 0.0, 100.0);
  CHECK(rings.lambda == 0.0);
  CHECK(std::isfinite(energy_density(rings, Mat2::Identity() * 1.1)));
}

TEST_CASE("rest state has zero energy and stress") {
  for (MaterialModel model : kModels) {
    const Material m = Material::make(model, 1.0e4, 0.2, 100.0);
    CHECK(energy_density(m, Mat2::Identity()) == 0.0);
    CHECK(first_pk_stress(m, Mat2::Identity()).norm() == 0.0);
  }
}

TEST_CASE("fixed corotated is zero on rotations") {
  const Material m = Material::make(MaterialModel::FixedCorotated, 1.0e4, 0.2, 100.0);
  for (int i = 0; i < 20; ++i) {
    const Mat2 R = rotation(uniform(-3.0, 3.0));
    CHECK(std::abs(energy_density(m, R)) < 1e-10 * m.mu);
    CHECK(first_pk_stress(m, R).norm() < 1e-10 * m.mu);
  }
}

TEST_CASE("fixed corotated closed form at diag(1.1, 1) with mu = lambda = 1") {
  // E = 2.5, nu = 0.25 gives mu = lambda = 1
  const Material m = Material::make(MaterialModel::FixedCorotated, 2.5, 0.25, 1.0);
  CHECK(m.mu == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m.lambda == doctest::Approx(1.0).epsilon(1e-14));
  Mat2 F = Mat2::Identity();
  F(0, 0) = 1.1;
  CHECK(energy_density(m, F) == doctest::Approx(0.015).epsilon(1e-12));
}

TEST_CASE("objectivity: psi(R F) = psi(F)") {
  for (MaterialModel model : {MaterialModel::FixedCorotated, MaterialModel::NeoHookean}) {
    const Material m = Material::make(model, 1.0e4, 0.2, 100.0);
    for (int i = 0; i < 50; ++i) {
      const Mat2 F = random_F_near_identity(0.3);
      if (F.determinant() <= 0.05) continue;
      const Mat2 R = rotation(uniform(-3.0, 3.0));
      const Real a = energy_density(m, F);
      const Real b = energy_density(m, R * F);
      CHECK(std::abs(a - b) <= 1e-10 * std::max<Real>(1.0, std::abs(a)));
    }
  }
}

TEST_CASE("first PK stress matches finite differences of the energy") {
  for (MaterialModel model : kModels) {
    const Material m = Material::make(model, 1.0e3, 0.3, 100.0);
    for (int i = 0; i < 100; ++i) {
      const Mat2 F = random_F_near_identity(0.2);
      if (F.determinant() < 0.3) continue;
      const Mat2 P = first_pk_stress(m, F);
      const Mat2 fd = fd_stress(m, F, 1e-6);
      CHECK((P - fd).norm() <= 1e-5 * std::max(P.norm(), 1e-3 * m.mu));
    }
  }
}

TEST_CASE("stress derivative matches finite differences of the stress") {
  for (MaterialModel model : kModels) {
    const Material m = Material::make(model, 1.0e3, 0.3, 100.0);
    for (int i = 0; i < 100; ++i) {
      const Mat2 F = random_F_near_identity(0.2);
      if (F.determinant() < 0.3) continue;
      const Mat4 T = stress_derivative(m, F);
      const Mat4 fd = fd_tangent(m, F, 1e-6);
      CHECK((T - fd).norm() <= 1e-4 * std::max(T.norm(), Real(1e-12)));
      CHECK((T - T.transpose()).norm() <= 1e-9 * T.norm());
    }
  }
}

TEST_CASE("linear elastic tangent is constant in F") {
  const Material m = Material::make(MaterialModel::LinearElastic, 1.0e3, 0.3, 100.0);
  const Mat4 a = stress_derivative(m, Mat2::Identity());
  const Mat4 b = stress_derivative(m, random_F_near_identity(0.4));
  CHECK((a - b).norm() == 0.0);
}

TEST_CASE("fixed corotated rest tangent is positive semidefinite") {
  const Material m = Material::make(MaterialModel::FixedCorotated, 1.0e4, 0.2, 100.0);
  const Mat4 T = stress_derivative(m, Mat2::Identity());
  Eigen::SelfAdjointEigenSolver<Mat4> eig(T);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-12 * T.norm());
}

TEST_CASE("neo-hookean rejects non-positive jacobians") {
  const Material m = Material::make(MaterialModel::NeoHookean, 1.0e4, 0.2, 100.0);
  Mat2 F = Mat2::Identity();
  F(1, 1) = -1.0;
  CHECK_THROWS_AS(energy_density(m, F), NonPositiveJacobianError);
  CHECK_THROWS_AS(first_pk_stress(m, F), NonPositiveJacobianError);
  CHECK_THROWS_AS(stress_derivative(m, F), NonPositiveJacobianError);
}

TEST_CASE("spd projection") {
  // PSD input is unchanged by clamping
  Mat4 A = Mat4::Zero();
  A.diagonal() << 1.0, 2.0, 0.5, 3.0;
  CHECK((spd_project(A, SpdMode::Clamp) - A).norm() < 1e-12);

  // negative eigenvalues are zeroed
  Mat4 B = Mat4::Zero();
  B.diagonal() << 1.0, -1.0, 2.0, 0.5;
  Mat4 Bp = spd_project(B, SpdMode::Clamp);
  CHECK(Bp(1, 1) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(Bp(0, 0) == doctest::Approx(1.0).epsilon(1e-14));

  // random symmetric input: clamp output is PSD within 1e-10
  for (int i = 0; i < 50; ++i) {
    Mat4 M;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) M(r, c) = uniform(-1, 1);
    M = ((M + M.transpose()) / 2).eval();
    const Mat4 Mp = spd_project(M, SpdMode::Clamp);
    Eigen::SelfAdjointEigenSolver<Mat4> eig(Mp);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);

    // shift mode raises the minimum eigenvalue by eps
    const Real eps = 1e-6;
    Eigen::SelfAdjointEigenSolver<Mat4> e0(M);
    Eigen::SelfAdjointEigenSolver<Mat4> e1(spd_project(M, SpdMode::Shift, eps));
    CHECK(e1.eigenvalues().minCoeff() >=
          e0.eigenvalues().minCoeff() + eps - 1e-12);
  }
}

TEST_CASE("cauchy stress matches linear elasticity near the identity") {
  for (MaterialModel model : {MaterialModel::FixedCorotated, MaterialModel::NeoHookean}) {
    const Material m = Material::make(model, 1.0e4, 0.2, 100.0);
    const Material lin = Material::make(MaterialModel::LinearElastic, 1.0e4, 0.2, 100.0);
    for (int i = 0; i < 50; ++i) {
      const Mat2 F = Mat2::Identity() + random_matrix(1e-4 / 2);
      const Mat2 s = cauchy_stress(m, F);
      const Mat2 s_lin = first_pk_stress(lin, F);  // linear stress at small strain
      CHECK((s - s_lin).norm() <= 1e-3 * std::max(s_lin.norm(), Real(1e-12)));
    }
  }
}
