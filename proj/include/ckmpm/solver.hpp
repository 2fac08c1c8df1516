#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "ckmpm/grid.hpp"
#include "ckmpm/kernels.hpp"
#include "ckmpm/materials.hpp"
#include "ckmpm/transfer.hpp"
#include "ckmpm/types.hpp"

namespace ckmpm {

enum class LinearSolverKind { Auto, PCG, Direct };

struct SolverParams {
  Real beta = 0.9;                // line-search shrink
  Real c = 1e-4;                  // Armijo constant
  Real eps_residual = -1;         // convergence tol on ||grad E||_inf; < 0 selects the auto rule
  int max_newton_iters = 200;
  LinearSolverKind linear_solver = LinearSolverKind::Auto;
  Real pcg_tol = 1e-8;
  int pcg_max_iters = -1;         // < 0: 20 * ndof
  SpdMode spd_mode = SpdMode::Clamp;
  Real spd_shift_eps = 1e-6;      // initial global shift, relative to the mean |diagonal|
  Real zeta = 0;                  // per-step velocity damping v <- (1 - zeta) v
  Real theta = 1.0;               // time-integration weight; only backward Euler (1) is exercised
  int direct_dof_limit = 400000;  // Auto: sparse direct up to this many scalar DOFs
  Real activation_factor = 1e-12; // nodal mass threshold = factor * median particle mass
  Real alpha_min = 1e-12;         // line-search abort threshold
};

/// Symmetric matrix of 2x2 blocks indexed by (row DOF-node, col DOF-node).
/// Upper-triangular blocks are stored; block(j,i) = block(i,j)^T.
class BlockSparseMatrix {
public:
  void begin_pattern(int n_block_rows);
  void pattern_insert(int row, int col);  // row <= col
  void finalize_pattern();

  int slot(int row, int col) const;  // row <= col; -1 when absent

  void zero_values();
  void add_block(int s, const Mat2& b) { values_[std::size_t(s)] += b; }
  void add_diag_block(int row, const Mat2& b);
  void add_to_diagonal(Real eps);  // H += eps * I

  int rows() const { return n_; }
  /// Nonzero blocks in a full (not triangular) row.
  int row_nnz_full(int row) const;
  Mat2 block(int row, int col) const;  // zero matrix when absent
  void for_each_upper_block(const std::function<void(int, int, const Mat2&)>& fn) const;

  /// y = H x with x, y of size 2 * rows().
  void multiply(const VecX& x, VecX& y) const;

private:
  int n_ = 0;
  std::vector<std::int32_t> row_ptr_, col_;
  std::vector<Mat2> values_;
  std::vector<std::int32_t> full_count_;
  std::vector<std::vector<std::int32_t>> build_;
};

/// Solve H x = rhs. Direct: sparse LDLT factorization. PCG: block-Jacobi
/// preconditioned conjugate gradients to relative residual pcg_tol. Auto picks
/// Direct up to direct_dof_limit scalar DOFs. Both paths verify the final
/// relative residual; throws LinearSolveError on failure.
VecX linear_solve(const BlockSparseMatrix& H, const VecX& rhs, const SolverParams& params);

struct BoundaryRegion {
  std::function<bool(const Vec2&)> region;
  DirichletMode mode = DirichletMode::FixedZero;
  Vec2 value = Vec2::Zero();
};

struct ParticleLoad {
  std::int32_t particle = 0;
  Vec2 force = Vec2::Zero();
};

struct SimState {
  std::vector<Particle> particles;
  std::vector<Material> materials;
  DualGrid grid;
  KernelFamily kernel;
  Vec2 gravity = Vec2::Zero();
  std::vector<BoundaryRegion> boundaries;
  std::vector<ParticleLoad> loads;
  Real load_scale = 1.0;  // multiplies gravity and loads (quasi-static ramps)
};

/// Objective of the implicit grid update, assembled over the active free DOF
/// nodes of all grids. Dynamics minimizes the incremental potential over
/// nodal velocities v; statics drops the inertia term and minimizes the total
/// potential over nodal displacement increments.
class ImplicitSystem {
public:
  static ImplicitSystem dynamics(SimState& state, Real dt, const SolverParams& params);
  static ImplicitSystem statics(SimState& state, const SolverParams& params);

  int dof_nodes() const { return int(dof_.nodes.size()); }
  int ndof() const { return 2 * dof_nodes(); }
  const DofMap& dof_map() const { return dof_; }
  const VecX& v0() const { return v0_; }
  bool has_inertia() const { return has_inertia_; }
  Real dt() const { return dt_; }

  /// Objective value. Throws NonPositiveJacobianError at invalid states.
  Real energy(const VecX& u) const { return energy_impl(u, true); }
  /// Objective value for line-search trials: +inf at invalid states.
  Real trial_energy(const VecX& u) const { return energy_impl(u, false); }
  VecX gradient(const VecX& u) const;
  void hessian(const VecX& u, BlockSparseMatrix& H) const;
  /// Copy of the finalized (zero-valued) sparsity pattern.
  BlockSparseMatrix hessian_pattern() const { return pattern_; }

  /// Auto convergence tolerance (1e-7 x mean nodal mass x gravity scale,
  /// times dt for dynamics).
  Real auto_eps() const;

  int grid_multiplicity() const { return G_; }

private:
  struct Entry {
    std::int32_t dof;  // DOF-node index or -1 (pinned / inactive)
    Real w;
    Real sign;   // +1 on grid -1, -1 on grid +1 (inter-grid tie term)
    Vec2 grad;
    Vec2 pin_v;  // velocity value used when dof < 0
  };
  struct PairRef {
    std::int8_t a, b;   // entry-local indices, dof[a] <= dof[b]
    std::int32_t slot;  // block slot in the Hessian pattern
  };
  struct SysParticle {
    Mat2 Fn;
    Real V0;
    Real k_tie;           // inter-grid consistency stiffness (statics, G = 2)
    std::int32_t mat;
    std::int32_t e0, ne;  // entry range
    std::int32_t p0, np;  // pair range
  };

  ImplicitSystem(SimState& state, Real dt, bool inertia, const SolverParams& params);

  struct ParticleKinematics {
    Mat2 grad_v = Mat2::Zero();
    Vec2 tie = Vec2::Zero();  // per-grid interpolations' difference (statics tie term)
  };

  Real energy_impl(const VecX& u, bool throw_on_invalid) const;
  ParticleKinematics kinematics_of(const SysParticle& sp, const VecX& u) const;

  const std::vector<Material>* materials_;
  DofMap dof_;
  VecX v0_, mass_, fext_;
  std::vector<Entry> entries_;
  std::vector<PairRef> pairs_;
  std::vector<SysParticle> parts_;
  BlockSparseMatrix pattern_;  // prototype with finalized sparsity
  Real dt_ = 0;
  bool has_inertia_ = true;
  int G_ = 1;
  Real gravity_norm_ = 0;
  Real mean_nodal_mass_ = 0;
  SpdMode spd_mode_ = SpdMode::Clamp;
};

// Spec-named wrappers over the system ops.
Real incremental_potential(const ImplicitSystem& sys, const VecX& vhat);
VecX ip_gradient(const ImplicitSystem& sys, const VecX& vhat);
BlockSparseMatrix ip_hessian(const ImplicitSystem& sys, const VecX& vhat);

struct NewtonResult {
  VecX u;
  int iterations = 0;
  Real residual_inf = 0;
  Real energy = 0;
};

/// Newton's method with Armijo backtracking line search; converges when
/// ||grad E||_inf < eps. Throws MaxItersError, LineSearchStallError or
/// LinearSolveError.
NewtonResult newton_solve(const ImplicitSystem& sys, const SolverParams& params);

/// reset -> P2G -> Dirichlet regions -> external force scatter. The grid is
/// then ready for ImplicitSystem::dynamics.
void prepare_grid_dynamics(SimState& state);
/// Same with a mass-only P2G, ready for ImplicitSystem::statics.
void prepare_grid_statics(SimState& state);

struct StepStats {
  int newton_iterations = 0;
  Real residual_inf = 0;
  Real ip_initial = 0;
  Real ip_final = 0;
  Energies energies;
};

/// One implicit time step: reset -> P2G -> Dirichlet + external forces ->
/// Newton -> damping -> G2P -> F update -> advection.
StepStats step(SimState& state, Real dt, const SolverParams& params);

struct StaticStats {
  int newton_iterations = 0;
  Real residual_inf = 0;
  Real max_displacement = 0;
};

/// Quasi-static equilibrium solve: minimizes the total potential energy over
/// nodal displacement increments, then applies them to particle positions and
/// deformation gradients.
StaticStats static_solve(SimState& state, const SolverParams& params);

Energies compute_energies(const SimState& state);
Energies compute_energies(std::span<const Particle> particles, std::span<const Material> materials);

}  // namespace ckmpm
