#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ckmpm/grid.hpp"
#include "ckmpm/kernels.hpp"
#include "ckmpm/types.hpp"

namespace ckmpm {

struct Particle {
  Vec2 x = Vec2::Zero();       // position (m)
  Vec2 v = Vec2::Zero();       // velocity (m/s)
  Real m = 0;                  // mass (kg)
  Real V0 = 0;                 // initial volume (m^2)
  Mat2 F = Mat2::Identity();   // deformation gradient
  Mat2 B = Mat2::Zero();       // APIC affine matrix (m^2/s)
  Real phi = 0;                // scalar tracer
  int material = 0;
};

/// APIC moment matrix D_p = (1/G) sum_k sum_i w_ip (x_i - x_p)(x_i - x_p)^T.
Mat2 compute_D(const Stencil& st, int grid_multiplicity);
Mat2 compute_D(const KernelFamily& family, const Vec2& particle_pos, const GridConfig& grid);

/// Particle-to-grid transfer of mass and APIC momentum; nodal velocities are
/// normalized (v_i = momentum_i / m_i) on all touched nodes. Grids must be
/// reset beforehand. Throws SingularDError when an APIC moment matrix cannot
/// be inverted (the linear kernel is regularized with 1e-12 h^2 I first).
void p2g(std::span<const Particle> particles, const KernelFamily& family, DualGrid& grid);

/// Mass-only scatter (statics activation and external-force weighting).
void p2g_mass(std::span<const Particle> particles, const KernelFamily& family, DualGrid& grid);

/// Grid-to-particle transfer: updates particle velocity and B matrix from the
/// nodal velocities and returns the velocity gradient of each particle.
/// All sums carry the 1/G dual-grid prefactor.
void g2p(const DualGrid& grid, const KernelFamily& family, std::span<Particle> particles,
         std::vector<Mat2>& grad_v_out);

/// F' = (I + dt grad_v) F.
Mat2 update_deformation(const Mat2& F, const Mat2& grad_v, Real dt);

/// x' = x + dt v. Throws OutOfDomainError when x' leaves the grid coverage
/// needed for a full stencil.
Vec2 advect(const Vec2& x, const Vec2& v, Real dt, const KernelFamily& family,
            const GridConfig& grid);

/// One pure P2G/G2P round trip of the scalar tracer phi through mass-weighted
/// nodal averages. Positions, velocities and F are untouched. `grid` is used
/// as scratch storage.
void transfer_cycle_scalar(std::span<Particle> particles, const KernelFamily& family,
                           DualGrid& grid);

/// Median particle mass (activation-threshold scale).
Real median_particle_mass(std::span<const Particle> particles);

// Deterministic particle seeding: ppc particles per cell on a regular
// sub-lattice (2x2 for ppc=4, 3x3 for ppc=9), no jitter. A sub-lattice point
// becomes a particle iff `inside` holds there. m_p = rho h^2 / ppc,
// V0 = h^2 / ppc.
struct SeedRegion {
  std::function<bool(const Vec2&)> inside;
  Vec2 lo = Vec2::Zero();  // bounding box limiting the cell scan
  Vec2 hi = Vec2::Zero();
};

void seed_particles(std::vector<Particle>& out, const GridConfig& grid, const SeedRegion& region,
                    int ppc, Real density, int material, const Vec2& velocity = Vec2::Zero(),
                    Real phi = 0);

struct Energies {
  Real kinetic = 0;
  Real elastic = 0;
  Real total = 0;
};

}  // namespace ckmpm
