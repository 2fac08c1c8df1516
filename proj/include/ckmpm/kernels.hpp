#pragma once

#include <array>
#include <string_view>
#include <utility>

#include "ckmpm/grid.hpp"
#include "ckmpm/types.hpp"

namespace ckmpm {

enum class KernelKind { Linear, Quadratic, Compact };

/// Transfer kernel family. The compact kernel keeps a support half-width of 1
/// cell but needs two staggered grids to reproduce linear fields; linear and
/// quadratic B-spline kernels live on a single grid.
struct KernelFamily {
  KernelKind kind = KernelKind::Quadratic;

  static KernelFamily linear() { return {KernelKind::Linear}; }
  static KernelFamily quadratic() { return {KernelKind::Quadratic}; }
  static KernelFamily compact() { return {KernelKind::Compact}; }

  /// Support half-width in units of grid spacing.
  Real support_radius() const {
    return kind == KernelKind::Quadratic ? 1.5 : 1.0;
  }
  /// Number of staggered grids the kernel transfers through (G).
  int grid_multiplicity() const { return kind == KernelKind::Compact ? 2 : 1; }
  /// Stencil width per axis on each grid.
  int nodes_per_axis() const { return kind == KernelKind::Quadratic ? 3 : 2; }
  /// Stencil size in 2D across all grids.
  int stencil_size_2d() const {
    const int n = nodes_per_axis();
    return n * n * grid_multiplicity();
  }
  const char* name() const {
    switch (kind) {
      case KernelKind::Linear: return "linear";
      case KernelKind::Quadratic: return "quadratic";
      case KernelKind::Compact: return "compact";
    }
    return "?";
  }
};

/// Parse a kernel name ("linear", "quadratic", "compact").
KernelFamily kernel_from_name(std::string_view name);

/// 1D kernel value at dimensionless offset d. Even in d, zero outside the
/// support (exactly zero at the support boundary).
Real eval_kernel(const KernelFamily& family, Real d);

/// 1D kernel derivative. Odd in d. The linear kernel's kinks at d in
/// {-1, 0, 1} take the left-limit value; the other kernels are C1 and need no
/// convention.
Real eval_kernel_grad(const KernelFamily& family, Real d);

/// Tensor-product shape weight and its gradient with respect to the particle
/// position: w = prod_d K((x_i,d - x_d)/h), grad_d = -(1/h) K'(...) * (other
/// axes' weights). This is the gradient used in the force and velocity-
/// gradient sums.
std::pair<Real, Vec2> shape_weight_and_grad(const KernelFamily& family, const Vec2& node_pos,
                                            const Vec2& particle_pos, Real h);

struct StencilEntry {
  int grid_id;   // -1 or +1; always -1 for single-grid kernels
  Vec2i node;    // lattice coordinate on its grid
  Real w;        // weight, > 0 (zero-weight nodes are omitted)
  Vec2 grad;     // dw/dx_p
  Vec2 dpos;     // x_i - x_p
};

struct Stencil {
  std::array<StencilEntry, 18> e;
  int count = 0;

  const StencilEntry* begin() const { return e.data(); }
  const StencilEntry* end() const { return e.data() + count; }
  const StencilEntry& operator[](int i) const { return e[std::size_t(i)]; }
  int size() const { return count; }
};

/// Build the particle's stencil over the grid(s): weights, gradients and node
/// offsets for every support node with nonzero weight. Positions exactly on a
/// node plane resolve to the lower cell.
/// Throws OutOfDomainError if the particle is too close to the grid boundary
/// for a full stencil.
Stencil stencil(const KernelFamily& family, const Vec2& particle_pos, const GridConfig& grid);

/// True when `stencil` would succeed at this position.
bool stencil_in_domain(const KernelFamily& family, const Vec2& particle_pos, const GridConfig& grid);

struct HessianStencilCounts {
  int same_grid;   // neighbors on the same grid that can share a particle (incl. self)
  int cross_grid;  // neighbors on the other grid (0 for single-grid kernels)
  int total;       // nonzero blocks per Hessian row
};

/// Count, by direct enumeration of lattice offsets, the node pairs that can
/// share a particle given the kernel support. dim must be 2 or 3.
HessianStencilCounts count_hessian_stencil(const KernelFamily& family, int dim);

}  // namespace ckmpm
