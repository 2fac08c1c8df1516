#include "ckmpm/kernels.hpp"

#include <cmath>
#include <numbers>

namespace ckmpm {

namespace {

constexpr Real kTwoPi = 2.0 * std::numbers::pi_v<Real>;

// Base (lowest) stencil node along one axis. fx is the particle position in
// node units on the target grid, n the number of stencil nodes per axis.
// ceil-minus-one sends positions exactly on a node plane to the lower cell,
// consistent with the left-limit kink convention of the linear kernel.
inline int base_node(Real fx, int n) {
  const Real t = fx - Real(n - 2) * 0.5;
  return int(std::ceil(t)) - 1;
}

}  // namespace

KernelFamily kernel_from_name(std::string_view name) {
  if (name == "linear") return KernelFamily::linear();
  if (name == "quadratic") return KernelFamily::quadratic();
  if (name == "compact") return KernelFamily::compact();
  throw ValidationError("unknown kernel name: " + std::string(name));
}

Real eval_kernel(const KernelFamily& family, Real d) {
  const Real ad = std::abs(d);
  switch (family.kind) {
    case KernelKind::Linear:
      return ad < 1.0 ? 1.0 - ad : 0.0;
    case KernelKind::Quadratic:
      if (ad < 0.5) return 0.75 - d * d;
      if (ad < 1.5) {
        const Real t = 1.5 - ad;
        return 0.5 * t * t;
      }
      return 0.0;
    case KernelKind::Compact:
      if (ad < 1.0) {
        // 1 - |d| + sin(2 pi |d|) / (2 pi); vanishes cubically at the edges,
        // clamp the cancellation residue there.
        return std::max(0.0, 1.0 - ad + std::sin(kTwoPi * ad) / kTwoPi);
      }
      return 0.0;
  }
  return 0.0;
}

Real eval_kernel_grad(const KernelFamily& family, Real d) {
  switch (family.kind) {
    case KernelKind::Linear:
      // left-limit convention at the kinks d in {-1, 0, 1}
      if (d <= -1.0 || d > 1.0) return 0.0;
      return d <= 0.0 ? 1.0 : -1.0;
    case KernelKind::Quadratic: {
      const Real ad = std::abs(d);
      if (ad < 0.5) return -2.0 * d;
      if (ad < 1.5) return d > 0 ? d - 1.5 : d + 1.5;
      return 0.0;
    }
    case KernelKind::Compact: {
      const Real ad = std::abs(d);
      if (ad >= 1.0 || ad == 0.0) return 0.0;
      const Real g = -1.0 + std::cos(kTwoPi * ad);
      return d > 0 ? g : -g;
    }
  }
  return 0.0;
}

std::pair<Real, Vec2> shape_weight_and_grad(const KernelFamily& family, const Vec2& node_pos,
                                            const Vec2& particle_pos, Real h) {
  const Vec2 d = (node_pos - particle_pos) / h;
  const Real wx = eval_kernel(family, d.x());
  const Real wy = eval_kernel(family, d.y());
  const Real gx = eval_kernel_grad(family, d.x());
  const Real gy = eval_kernel_grad(family, d.y());
  // d/dx_p of K((x_i - x_p)/h) carries a -1/h chain factor per axis
  return {wx * wy, Vec2(-gx * wy / h, -wx * gy / h)};
}

Stencil stencil(const KernelFamily& family, const Vec2& particle_pos, const GridConfig& grid) {
  Stencil st;
  const int n = family.nodes_per_axis();
  const int G = family.grid_multiplicity();
  for (int gi = 0; gi < G; ++gi) {
    const int grid_id = G == 2 ? (gi == 0 ? -1 : +1) : -1;
    const Real stagger = grid_id < 0 ? 0.0 : 0.5;

    int base[2];
    Real fx[2];
    for (int a = 0; a < 2; ++a) {
      fx[a] = (particle_pos[a] - grid.origin[a]) / grid.h - stagger;
      base[a] = base_node(fx[a], n);
      if (base[a] < 0 || base[a] + n - 1 > grid.node_count(grid_id, a) - 1) {
        throw OutOfDomainError("particle stencil exceeds grid coverage at position (" +
                               std::to_string(particle_pos.x()) + ", " +
                               std::to_string(particle_pos.y()) + ")");
      }
    }

    Real w1d[2][3], g1d[2][3];
    for (int a = 0; a < 2; ++a) {
      for (int k = 0; k < n; ++k) {
        const Real d = Real(base[a] + k) - fx[a];  // (x_i - x_p)/h along this axis
        w1d[a][k] = eval_kernel(family, d);
        g1d[a][k] = eval_kernel_grad(family, d);
      }
    }

    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const Real w = w1d[0][i] * w1d[1][j];
        if (w == 0.0) continue;
        StencilEntry& ent = st.e[std::size_t(st.count++)];
        ent.grid_id = grid_id;
        ent.node = Vec2i(base[0] + i, base[1] + j);
        ent.w = w;
        ent.grad = Vec2(-g1d[0][i] * w1d[1][j] / grid.h, -w1d[0][i] * g1d[1][j] / grid.h);
        ent.dpos = grid.node_position(grid_id, ent.node) - particle_pos;
      }
    }
  }
  return st;
}

bool stencil_in_domain(const KernelFamily& family, const Vec2& particle_pos, const GridConfig& grid) {
  const int n = family.nodes_per_axis();
  const int G = family.grid_multiplicity();
  for (int gi = 0; gi < G; ++gi) {
    const int grid_id = G == 2 ? (gi == 0 ? -1 : +1) : -1;
    const Real stagger = grid_id < 0 ? 0.0 : 0.5;
    for (int a = 0; a < 2; ++a) {
      const Real fx = (particle_pos[a] - grid.origin[a]) / grid.h - stagger;
      const int base = base_node(fx, n);
      if (base < 0 || base + n - 1 > grid.node_count(grid_id, a) - 1) return false;
    }
  }
  return true;
}

HessianStencilCounts count_hessian_stencil(const KernelFamily& family, int dim) {
  if (dim != 2 && dim != 3) throw ValidationError("count_hessian_stencil: dim must be 2 or 3");
  const Real r = family.support_radius();

  // Two nodes share a particle iff per axis there is a point strictly inside
  // both supports: |offset| < 2r. Enumerate integer lattice offsets; the
  // staggered grid shifts offsets by 1/2 per axis.
  auto per_axis = [&](Real stagger) {
    int c = 0;
    const int lim = int(std::ceil(2 * r)) + 2;
    for (int k = -lim; k <= lim; ++k) {
      if (std::abs(Real(k) + stagger) < 2 * r) ++c;
    }
    return c;
  };

  auto powi = [](int b, int e) {
    int p = 1;
    for (int i = 0; i < e; ++i) p *= b;
    return p;
  };

  const int same = powi(per_axis(0.0), dim);
  const int cross = family.grid_multiplicity() == 2 ? powi(per_axis(0.5), dim) : 0;
  return {same, cross, same + cross};
}

}  // namespace ckmpm
