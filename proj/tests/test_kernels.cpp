#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ckmpm/kernels.hpp"
#include "test_util.hpp"

using namespace ckmpm;
using namespace ckmpm::testing;

namespace {

const KernelFamily kFamilies[] = {KernelFamily::linear(), KernelFamily::quadratic(),
                                  KernelFamily::compact()};

GridConfig test_grid(const KernelFamily& family, Real h = 0.5) {
  GridConfig cfg;
  cfg.origin = Vec2(-2.0, -3.0);
  cfg.extent = Vec2i(24, 24);
  cfg.h = h;
  cfg.multiplicity = family.grid_multiplicity();
  return cfg;
}

// Brute-force sums over a whole lattice box, independent of stencil().
struct BruteSums {
  Real w_sum[2] = {0, 0};            // per grid
  Vec2 xw_sum[2] = {Vec2::Zero(), Vec2::Zero()};
  Vec2 grad_sum[2] = {Vec2::Zero(), Vec2::Zero()};
};

BruteSums brute_force_sums(const KernelFamily& family, const Vec2& x, const GridConfig& cfg) {
  BruteSums out;
  for (int gi = 0; gi < family.grid_multiplicity(); ++gi) {
    const int g = family.grid_multiplicity() == 2 ? (gi == 0 ? -1 : +1) : -1;
    const int ci = int(std::floor((x.x() - cfg.origin.x()) / cfg.h));
    const int cj = int(std::floor((x.y() - cfg.origin.y()) / cfg.h));
    for (int i = ci - 4; i <= ci + 4; ++i) {
      for (int j = cj - 4; j <= cj + 4; ++j) {
        const Vec2 xi = cfg.node_position(g, Vec2i(i, j));
        auto [w, grad] = shape_weight_and_grad(family, xi, x, cfg.h);
        out.w_sum[gi] += w;
        out.xw_sum[gi] += w * xi;
        out.grad_sum[gi] += grad;
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("kernel family metadata") {
  CHECK(KernelFamily::linear().support_radius() == 1.0);
  CHECK(KernelFamily::quadratic().support_radius() == 1.5);
  CHECK(KernelFamily::compact().support_radius() == 1.0);
  CHECK(KernelFamily::linear().grid_multiplicity() == 1);
  CHECK(KernelFamily::quadratic().grid_multiplicity() == 1);
  CHECK(KernelFamily::compact().grid_multiplicity() == 2);
}

TEST_CASE("kernel point values") {
  const Real pi = std::numbers::pi_v<Real>;
  CHECK(eval_kernel(KernelFamily::compact(), 0.0) == 1.0);
  CHECK(eval_kernel(KernelFamily::compact(), 0.25) ==
        doctest::Approx(0.75 + 1.0 / (2.0 * pi)).epsilon(1e-14));
  CHECK(eval_kernel(KernelFamily::quadratic(), 0.0) == 0.75);
  CHECK(eval_kernel(KernelFamily::linear(), 1.0) == 0.0);
  CHECK(eval_kernel(KernelFamily::compact(), 1.0) == 0.0);
  CHECK(eval_kernel(KernelFamily::quadratic(), 1.5) == 0.0);
  // outside support
  CHECK(eval_kernel(KernelFamily::linear(), -1.7) == 0.0);
  CHECK(eval_kernel(KernelFamily::compact(), 2.3) == 0.0);
  CHECK(eval_kernel(KernelFamily::quadratic(), -1.6) == 0.0);
}

TEST_CASE("kernel symmetry K(d) = K(-d)") {
  for (const KernelFamily& family : kFamilies) {
    for (int i = 0; i < 200; ++i) {
      const Real d = uniform(0, family.support_radius() * 1.2);
      CHECK(eval_kernel(family, d) == eval_kernel(family, -d));
    }
  }
}

TEST_CASE("kernel gradient point values") {
  CHECK(eval_kernel_grad(KernelFamily::compact(), 0.5) == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(eval_kernel_grad(KernelFamily::compact(), 1.0) == 0.0);
  CHECK(eval_kernel_grad(KernelFamily::compact(), 0.0) == 0.0);
  CHECK(eval_kernel_grad(KernelFamily::quadratic(), 1.0) == doctest::Approx(-0.5).epsilon(1e-14));
  // linear kink convention: left limits
  CHECK(eval_kernel_grad(KernelFamily::linear(), 0.0) == 1.0);
  CHECK(eval_kernel_grad(KernelFamily::linear(), 1.0) == -1.0);
  CHECK(eval_kernel_grad(KernelFamily::linear(), -1.0) == 0.0);
}

TEST_CASE("kernel gradient is odd") {
  for (const KernelFamily& family : kFamilies) {
    for (int i = 0; i < 100; ++i) {
      Real d = uniform(0.01, family.support_radius() - 0.01);
      CHECK(eval_kernel_grad(family, d) == doctest::Approx(-eval_kernel_grad(family, -d)));
    }
  }
}

TEST_CASE("derivative matches central finite differences") {
  const Real step = 1e-6;
  for (const KernelFamily& family : kFamilies) {
    for (int i = 0; i < 100; ++i) {
      Real d = uniform(-family.support_radius() + 0.02, family.support_radius() - 0.02);
      if (family.kind == KernelKind::Linear) {
        // stay away from the kinks at -1, 0, 1
        while (std::abs(d) < 0.02 || std::abs(std::abs(d) - 1.0) < 0.02) {
          d = uniform(-0.98, 0.98);
        }
      }
      const Real fd = (eval_kernel(family, d + step) - eval_kernel(family, d - step)) / (2 * step);
      const Real g = eval_kernel_grad(family, d);
      CHECK(std::abs(fd - g) <= 1e-6 * std::max<Real>(1.0, std::abs(g)));
    }
  }
}

TEST_CASE("compact kernel is numerically C2 at 0 and +-1; linear derivative jumps by 2 at 0") {
  const Real s = 1e-4;
  const KernelFamily ck = KernelFamily::compact();
  auto k = [&](const KernelFamily& f, Real d) { return eval_kernel(f, d); };

  // one-sided estimates: 2nd-order first derivative, 3rd-order second derivative
  auto d1_right = [&](const KernelFamily& f, Real d0) {
    return (-3 * k(f, d0) + 4 * k(f, d0 + s) - k(f, d0 + 2 * s)) / (2 * s);
  };
  auto d1_left = [&](const KernelFamily& f, Real d0) {
    return (3 * k(f, d0) - 4 * k(f, d0 - s) + k(f, d0 - 2 * s)) / (2 * s);
  };
  auto d2_right = [&](const KernelFamily& f, Real d0) {
    return (2 * k(f, d0) - 5 * k(f, d0 + s) + 4 * k(f, d0 + 2 * s) - k(f, d0 + 3 * s)) / (s * s);
  };
  auto d2_left = [&](const KernelFamily& f, Real d0) {
    return (2 * k(f, d0) - 5 * k(f, d0 - s) + 4 * k(f, d0 - 2 * s) - k(f, d0 - 3 * s)) / (s * s);
  };

  for (Real d0 : {-1.0, 0.0, 1.0}) {
    CHECK(std::abs(d1_right(ck, d0) - d1_left(ck, d0)) < 1e-6);
    CHECK(std::abs(d2_right(ck, d0) - d2_left(ck, d0)) < 1e-6);
  }
  const Real jump = d1_right(KernelFamily::linear(), 0.0) - d1_left(KernelFamily::linear(), 0.0);
  CHECK(jump == doctest::Approx(-2.0).epsilon(1e-10));
  CHECK(std::abs(jump) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("shape weights: particle exactly at a node") {
  const KernelFamily ck = KernelFamily::compact();
  const GridConfig cfg = test_grid(ck);
  const Vec2 node = cfg.node_position(-1, Vec2i(5, 7));
  auto [w, grad] = shape_weight_and_grad(ck, node, node, cfg.h);
  CHECK(w == 1.0);
  CHECK(grad.x() == 0.0);
  CHECK(grad.y() == 0.0);
}

TEST_CASE("shape weights: linear kernel at cell center gives 0.25 at 4 corners") {
  const KernelFamily lin = KernelFamily::linear();
  const GridConfig cfg = test_grid(lin);
  const Vec2 x = cfg.origin + Vec2(3.5, 4.5) * cfg.h;
  const Stencil st = stencil(lin, x, cfg);
  REQUIRE(st.size() == 4);
  for (const StencilEntry& e : st) CHECK(e.w == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("partition of unity per grid over 1000 random positions") {
  for (const KernelFamily& family : kFamilies) {
    const GridConfig cfg = test_grid(family);
    for (int i = 0; i < 1000; ++i) {
      const Vec2 x = cfg.origin + Vec2(uniform(2, 9), uniform(2, 9)) * cfg.h;
      const BruteSums sums = brute_force_sums(family, x, cfg);
      for (int gi = 0; gi < family.grid_multiplicity(); ++gi) {
        CHECK(std::abs(sums.w_sum[gi] - 1.0) < 1e-12);
        CHECK(sums.grad_sum[gi].norm() < 1e-12 / cfg.h);
      }
    }
  }
}

TEST_CASE("linear reproduction: quadratic on one grid, compact only on the dual average") {
  const GridConfig qcfg = test_grid(KernelFamily::quadratic());
  const GridConfig ccfg = test_grid(KernelFamily::compact());
  for (int i = 0; i < 1000; ++i) {
    const Vec2 xq = qcfg.origin + Vec2(uniform(2, 9), uniform(2, 9)) * qcfg.h;
    const BruteSums qs = brute_force_sums(KernelFamily::quadratic(), xq, qcfg);
    CHECK((qs.xw_sum[0] - xq).norm() < 1e-12);

    const Vec2 xc = ccfg.origin + Vec2(uniform(2, 9), uniform(2, 9)) * ccfg.h;
    const BruteSums cs = brute_force_sums(KernelFamily::compact(), xc, ccfg);
    const Vec2 dual_avg = 0.5 * (cs.xw_sum[0] + cs.xw_sum[1]);
    CHECK((dual_avg - xc).norm() < 1e-12);
  }
  // single-grid compact reproduction fails at a generic off-lattice point
  const Vec2 x = ccfg.origin + Vec2(3.37, 5.81) * ccfg.h;
  const BruteSums cs = brute_force_sums(KernelFamily::compact(), x, ccfg);
  CHECK((cs.xw_sum[0] - x).norm() > 1e-6);
}

TEST_CASE("stencil sizes and grid ids") {
  const KernelFamily ck = KernelFamily::compact();
  const GridConfig ccfg = test_grid(ck);
  const Vec2 x = ccfg.origin + Vec2(4.3, 6.7) * ccfg.h;
  const Stencil cst = stencil(ck, x, ccfg);
  CHECK(cst.size() == 8);
  int minus = 0, plus = 0;
  for (const StencilEntry& e : cst) (e.grid_id < 0 ? minus : plus)++;
  CHECK(minus == 4);
  CHECK(plus == 4);

  const KernelFamily q = KernelFamily::quadratic();
  const GridConfig qcfg = test_grid(q);
  CHECK(stencil(q, x, qcfg).size() == 9);

  const KernelFamily lin = KernelFamily::linear();
  const GridConfig lcfg = test_grid(lin);
  CHECK(stencil(lin, x, lcfg).size() == 4);
}

TEST_CASE("stencil entries reproduce shape_weight_and_grad and dual reproduction") {
  const KernelFamily ck = KernelFamily::compact();
  const GridConfig cfg = test_grid(ck);
  for (int i = 0; i < 100; ++i) {
    const Vec2 x = cfg.origin + Vec2(uniform(2, 9), uniform(2, 9)) * cfg.h;
    const Stencil st = stencil(ck, x, cfg);
    Vec2 recon = Vec2::Zero();
    for (const StencilEntry& e : st) {
      const Vec2 xi = cfg.node_position(e.grid_id, e.node);
      auto [w, grad] = shape_weight_and_grad(ck, xi, x, cfg.h);
      CHECK(e.w == doctest::Approx(w).epsilon(1e-14));
      CHECK((e.grad - grad).norm() < 1e-14 / cfg.h);
      CHECK((e.dpos - (xi - x)).norm() < 1e-15);
      CHECK(e.w > 0.0);
      recon += e.w * xi;
    }
    recon /= Real(ck.grid_multiplicity());
    CHECK((recon - x).norm() < 1e-12);
  }
}

TEST_CASE("stencil out of domain near the boundary") {
  const KernelFamily q = KernelFamily::quadratic();
  const GridConfig cfg = test_grid(q);
  CHECK_THROWS_AS(stencil(q, cfg.origin + Vec2(0.4, 5.0) * cfg.h, cfg), OutOfDomainError);
  CHECK_THROWS_AS(stencil(q, cfg.origin + Vec2(5.0, 23.4) * cfg.h, cfg), OutOfDomainError);
  CHECK(stencil_in_domain(q, cfg.origin + Vec2(5.0, 5.0) * cfg.h, cfg));
  CHECK_FALSE(stencil_in_domain(q, cfg.origin + Vec2(0.4, 5.0) * cfg.h, cfg));
}

TEST_CASE("hessian stencil counts match the block structure") {
  const auto q2 = count_hessian_stencil(KernelFamily::quadratic(), 2);
  CHECK(q2.same_grid == 25);
  CHECK(q2.cross_grid == 0);
  CHECK(q2.total == 25);

  const auto c2 = count_hessian_stencil(KernelFamily::compact(), 2);
  CHECK(c2.same_grid == 9);
  CHECK(c2.cross_grid == 16);
  CHECK(c2.total == 25);

  const auto c3 = count_hessian_stencil(KernelFamily::compact(), 3);
  CHECK(c3.same_grid == 27);
  CHECK(c3.cross_grid == 64);
  CHECK(c3.total == 91);

  const auto q3 = count_hessian_stencil(KernelFamily::quadratic(), 3);
  CHECK(q3.same_grid == 125);
  CHECK(q3.total == 125);

  const auto l2 = count_hessian_stencil(KernelFamily::linear(), 2);
  CHECK(l2.same_grid == 9);
  CHECK(l2.cross_grid == 0);
}
