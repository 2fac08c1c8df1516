#include "ckmpm/transfer.hpp"

#include <algorithm>
#include <cmath>

namespace ckmpm {

Mat2 compute_D(const Stencil& st, int grid_multiplicity) {
  Mat2 D = Mat2::Zero();
  for (const StencilEntry& e : st) D += e.w * e.dpos * e.dpos.transpose();
  return D / Real(grid_multiplicity);
}

Mat2 compute_D(const KernelFamily& family, const Vec2& particle_pos, const GridConfig& grid) {
  return compute_D(stencil(family, particle_pos, grid), family.grid_multiplicity());
}

namespace {

Mat2 inverse_D(const KernelFamily& family, Mat2 D, Real h) {
  if (family.kind == KernelKind::Linear) {
    // particles exactly on a node make D singular for the linear kernel
    D += 1e-12 * h * h * Mat2::Identity();
  }
  const Real det = D.determinant();
  if (!(std::abs(det) > 1e-30 * h * h * h * h)) {
    throw SingularDError("APIC moment matrix is singular (det = " + std::to_string(det) + ")");
  }
  Mat2 inv;
  inv << D(1, 1), -D(0, 1), -D(1, 0), D(0, 0);
  return inv / det;
}

}  // namespace

void p2g(std::span<const Particle> particles, const KernelFamily& family, DualGrid& grid) {
  const GridConfig& cfg = grid.config();
  const int G = family.grid_multiplicity();
  for (const Particle& p : particles) {
    const Stencil st = stencil(family, p.x, cfg);
    const Mat2 Dinv = inverse_D(family, compute_D(st, G), cfg.h);
    const Mat2 C = p.B * Dinv;
    for (const StencilEntry& e : st) {
      Node& n = grid.touch(e.grid_id, e.node);
      n.m += e.w * p.m;
      n.mom += e.w * p.m * (p.v + C * e.dpos);
    }
  }
  for (int s = 0; s < 2; ++s) {
    for (Node& n : grid.nodes(DualGrid::grid_id_of_slot(s))) {
      if (n.m > 0) n.v = n.mom / n.m;
    }
  }
}

void p2g_mass(std::span<const Particle> particles, const KernelFamily& family, DualGrid& grid) {
  const GridConfig& cfg = grid.config();
  for (const Particle& p : particles) {
    const Stencil st = stencil(family, p.x, cfg);
    for (const StencilEntry& e : st) grid.touch(e.grid_id, e.node).m += e.w * p.m;
  }
}

void g2p(const DualGrid& grid, const KernelFamily& family, std::span<Particle> particles,
         std::vector<Mat2>& grad_v_out) {
  const GridConfig& cfg = grid.config();
  const Real inv_G = 1.0 / Real(family.grid_multiplicity());
  grad_v_out.resize(particles.size());
  for (std::size_t i = 0; i < particles.size(); ++i) {
    Particle& p = particles[i];
    const Stencil st = stencil(family, p.x, cfg);
    Vec2 v = Vec2::Zero();
    Mat2 grad = Mat2::Zero();
    Mat2 B = Mat2::Zero();
    for (const StencilEntry& e : st) {
      const Node* n = grid.find(e.grid_id, e.node);
      const Vec2 vi = n ? n->v : Vec2::Zero();
      v += e.w * vi;
      grad += vi * e.grad.transpose();
      B += e.w * vi * e.dpos.transpose();
    }
    p.v = inv_G * v;
    p.B = inv_G * B;
    grad_v_out[i] = inv_G * grad;
  }
}

Mat2 update_deformation(const Mat2& F, const Mat2& grad_v, Real dt) {
  return (Mat2::Identity() + dt * grad_v) * F;
}

Vec2 advect(const Vec2& x, const Vec2& v, Real dt, const KernelFamily& family,
            const GridConfig& grid) {
  const Vec2 xn = x + dt * v;
  if (!stencil_in_domain(family, xn, grid)) {
    throw OutOfDomainError("particle advected outside grid coverage to (" +
                           std::to_string(xn.x()) + ", " + std::to_string(xn.y()) + ")");
  }
  return xn;
}

void transfer_cycle_scalar(std::span<Particle> particles, const KernelFamily& family,
                           DualGrid& grid) {
  const GridConfig& cfg = grid.config();
  const Real inv_G = 1.0 / Real(family.grid_multiplicity());
  grid.reset();
  for (const Particle& p : particles) {
    const Stencil st = stencil(family, p.x, cfg);
    for (const StencilEntry& e : st) {
      Node& n = grid.touch(e.grid_id, e.node);
      n.m += e.w * p.m;
      n.aux += e.w * p.m * p.phi;
    }
  }
  for (int s = 0; s < 2; ++s) {
    for (Node& n : grid.nodes(DualGrid::grid_id_of_slot(s))) {
      if (n.m > 0) n.aux /= n.m;
    }
  }
  for (Particle& p : particles) {
    const Stencil st = stencil(family, p.x, cfg);
    Real phi = 0;
    for (const StencilEntry& e : st) {
      const Node* n = grid.find(e.grid_id, e.node);
      phi += e.w * (n ? n->aux : 0.0);
    }
    p.phi = inv_G * phi;
  }
}

Real median_particle_mass(std::span<const Particle> particles) {
  if (particles.empty()) return 0;
  std::vector<Real> masses(particles.size());
  for (std::size_t i = 0; i < particles.size(); ++i) masses[i] = particles[i].m;
  auto mid = masses.begin() + std::ptrdiff_t(masses.size() / 2);
  std::nth_element(masses.begin(), mid, masses.end());
  return *mid;
}

void seed_particles(std::vector<Particle>& out, const GridConfig& grid, const SeedRegion& region,
                    int ppc, Real density, int material, const Vec2& velocity, Real phi) {
  int k = int(std::lround(std::sqrt(Real(ppc))));
  if (k * k != ppc || k < 1) throw ValidationError("ppc must be a perfect square (4, 9, ...)");
  const Real h = grid.h;
  const Real mass = density * h * h / Real(ppc);
  const Real vol = h * h / Real(ppc);

  const Vec2i lo_cell((int)std::floor((region.lo.x() - grid.origin.x()) / h),
                      (int)std::floor((region.lo.y() - grid.origin.y()) / h));
  const Vec2i hi_cell((int)std::floor((region.hi.x() - grid.origin.x()) / h),
                      (int)std::floor((region.hi.y() - grid.origin.y()) / h));

  for (int ci = lo_cell.x(); ci <= hi_cell.x(); ++ci) {
    for (int cj = lo_cell.y(); cj <= hi_cell.y(); ++cj) {
      for (int si = 0; si < k; ++si) {
        for (int sj = 0; sj < k; ++sj) {
          const Vec2 pos = grid.origin +
                           Vec2((Real(ci) + (Real(si) + 0.5) / Real(k)) * h,
                                (Real(cj) + (Real(sj) + 0.5) / Real(k)) * h);
          if (!region.inside(pos)) continue;
          Particle p;
          p.x = pos;
          p.v = velocity;
          p.m = mass;
          p.V0 = vol;
          p.material = material;
          p.phi = phi;
          out.push_back(p);
        }
      }
    }
  }
}

}  // namespace ckmpm
