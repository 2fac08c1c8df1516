#include "ckmpm/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <array>
#include <cmath>

namespace ckmpm {

// ---------------------------------------------------------------------------
// BlockSparseMatrix

void BlockSparseMatrix::begin_pattern(int n_block_rows) {
  n_ = n_block_rows;
  build_.assign(std::size_t(n_), {});
  row_ptr_.clear();
  col_.clear();
  values_.clear();
  full_count_.clear();
}

void BlockSparseMatrix::pattern_insert(int row, int col) {
  build_[std::size_t(row)].push_back(col);
}

void BlockSparseMatrix::finalize_pattern() {
  row_ptr_.assign(std::size_t(n_) + 1, 0);
  full_count_.assign(std::size_t(n_), 0);
  for (int r = 0; r < n_; ++r) {
    auto& cols = build_[std::size_t(r)];
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    row_ptr_[std::size_t(r) + 1] = row_ptr_[std::size_t(r)] + std::int32_t(cols.size());
  }
  col_.resize(std::size_t(row_ptr_[std::size_t(n_)]));
  for (int r = 0; r < n_; ++r) {
    auto& cols = build_[std::size_t(r)];
    std::copy(cols.begin(), cols.end(), col_.begin() + row_ptr_[std::size_t(r)]);
    for (std::int32_t c : cols) {
      ++full_count_[std::size_t(r)];
      if (c != r) ++full_count_[std::size_t(c)];
    }
  }
  build_.clear();
  build_.shrink_to_fit();
  values_.assign(col_.size(), Mat2::Zero());
}

int BlockSparseMatrix::slot(int row, int col) const {
  const auto lo = col_.begin() + row_ptr_[std::size_t(row)];
  const auto hi = col_.begin() + row_ptr_[std::size_t(row) + 1];
  const auto it = std::lower_bound(lo, hi, col);
  if (it == hi || *it != col) return -1;
  return int(it - col_.begin());
}

void BlockSparseMatrix::zero_values() {
  std::fill(values_.begin(), values_.end(), Mat2::Zero());
}

void BlockSparseMatrix::add_diag_block(int row, const Mat2& b) {
  const int s = slot(row, row);
  values_[std::size_t(s)] += b;
}

void BlockSparseMatrix::add_to_diagonal(Real eps) {
  for (int r = 0; r < n_; ++r) {
    const int s = slot(r, r);
    if (s >= 0) values_[std::size_t(s)] += eps * Mat2::Identity();
  }
}

int BlockSparseMatrix::row_nnz_full(int row) const { return full_count_[std::size_t(row)]; }

Mat2 BlockSparseMatrix::block(int row, int col) const {
  if (row <= col) {
    const int s = slot(row, col);
    return s < 0 ? Mat2::Zero() : values_[std::size_t(s)];
  }
  const int s = slot(col, row);
  return s < 0 ? Mat2::Zero() : values_[std::size_t(s)].transpose().eval();
}

void BlockSparseMatrix::for_each_upper_block(
    const std::function<void(int, int, const Mat2&)>& fn) const {
  for (int r = 0; r < n_; ++r) {
    for (std::int32_t s = row_ptr_[std::size_t(r)]; s < row_ptr_[std::size_t(r) + 1]; ++s) {
      fn(r, col_[std::size_t(s)], values_[std::size_t(s)]);
    }
  }
}

void BlockSparseMatrix::multiply(const VecX& x, VecX& y) const {
  y.setZero(2 * n_);
  for (int r = 0; r < n_; ++r) {
    const Vec2 xr = x.segment<2>(2 * r);
    Vec2 acc = Vec2::Zero();
    for (std::int32_t s = row_ptr_[std::size_t(r)]; s < row_ptr_[std::size_t(r) + 1]; ++s) {
      const int c = col_[std::size_t(s)];
      const Mat2& B = values_[std::size_t(s)];
      acc += B * x.segment<2>(2 * c);
      if (c != r) y.segment<2>(2 * c) += B.transpose() * xr;
    }
    y.segment<2>(2 * r) += acc;
  }
}

// ---------------------------------------------------------------------------
// Linear solves

namespace {

VecX solve_direct(const BlockSparseMatrix& H, const VecX& rhs, Real tol,
                  bool* positive_definite = nullptr) {
  const int n = int(rhs.size());
  Eigen::SparseMatrix<Real> A(n, n);
  std::vector<Eigen::Triplet<Real>> trips;
  trips.reserve(std::size_t(n) * 16);
  H.for_each_upper_block([&](int r, int c, const Mat2& B) {
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        trips.emplace_back(2 * r + i, 2 * c + j, B(i, j));
        if (c != r) trips.emplace_back(2 * c + j, 2 * r + i, B(i, j));
      }
    }
  });
  A.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<Real>> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw LinearSolveError("sparse LDLT factorization failed");
  if (positive_definite) {
    const auto& D = ldlt.vectorD();
    *positive_definite = D.size() > 0 && D.minCoeff() > 0;
  }
  const VecX x = ldlt.solve(rhs);
  const Real bn = rhs.norm();
  if (bn > 0) {
    const Real rel = (A * x - rhs).norm() / bn;
    if (!(rel <= tol)) {
      throw LinearSolveError("direct solve residual " + std::to_string(rel) + " exceeds tolerance " +
                             std::to_string(tol));
    }
  }
  return x;
}

VecX solve_pcg(const BlockSparseMatrix& H, const VecX& rhs, const SolverParams& params) {
  const int nb = H.rows();
  const int n = 2 * nb;
  const Real bn = rhs.norm();
  if (bn == 0) return VecX::Zero(n);

  // block-Jacobi preconditioner
  std::vector<Mat2> pre(static_cast<std::size_t>(nb));
  for (int r = 0; r < nb; ++r) {
    const Mat2 d = H.block(r, r);
    const Real det = d.determinant();
    if (std::abs(det) > 0) {
      Mat2 inv;
      inv << d(1, 1), -d(0, 1), -d(1, 0), d(0, 0);
      pre[std::size_t(r)] = inv / det;
    } else {
      pre[std::size_t(r)] = Mat2::Identity();
    }
  }
  auto apply_pre = [&](const VecX& r, VecX& z) {
    z.resize(n);
    for (int k = 0; k < nb; ++k) z.segment<2>(2 * k) = pre[std::size_t(k)] * r.segment<2>(2 * k);
  };

  VecX x = VecX::Zero(n), r = rhs, z, q(n);
  apply_pre(r, z);
  VecX p = z;
  Real rz = r.dot(z);
  const int max_it = params.pcg_max_iters > 0 ? params.pcg_max_iters : 20 * n;
  for (int it = 0; it < max_it; ++it) {
    H.multiply(p, q);
    const Real pq = p.dot(q);
    if (!(pq > 0)) throw LinearSolveError("PCG: matrix not positive definite (p'Hp <= 0)");
    const Real alpha = rz / pq;
    x += alpha * p;
    r -= alpha * q;
    if (r.norm() / bn <= params.pcg_tol) return x;
    apply_pre(r, z);
    const Real rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  throw LinearSolveError("PCG did not converge within " + std::to_string(max_it) + " iterations");
}

}  // namespace

VecX linear_solve(const BlockSparseMatrix& H, const VecX& rhs, const SolverParams& params) {
  LinearSolverKind kind = params.linear_solver;
  if (kind == LinearSolverKind::Auto) {
    kind = rhs.size() <= params.direct_dof_limit ? LinearSolverKind::Direct : LinearSolverKind::PCG;
  }
  return kind == LinearSolverKind::Direct ? solve_direct(H, rhs, params.pcg_tol)
                                          : solve_pcg(H, rhs, params);
}

// ---------------------------------------------------------------------------
// ImplicitSystem

ImplicitSystem ImplicitSystem::dynamics(SimState& state, Real dt, const SolverParams& params) {
  return ImplicitSystem(state, dt, true, params);
}

ImplicitSystem ImplicitSystem::statics(SimState& state, const SolverParams& params) {
  return ImplicitSystem(state, 1.0, false, params);
}

ImplicitSystem::ImplicitSystem(SimState& state, Real dt, bool inertia, const SolverParams& params)
    : materials_(&state.materials), dt_(dt), has_inertia_(inertia),
      G_(state.kernel.grid_multiplicity()), gravity_norm_(state.gravity.norm()),
      spd_mode_(params.spd_mode) {
  DualGrid& grid = state.grid;
  const Real threshold = params.activation_factor * median_particle_mass(state.particles);
  dof_ = build_dof_map(grid, threshold);

  const int nd = dof_nodes();
  v0_ = VecX::Zero(2 * nd);
  mass_ = VecX::Zero(2 * nd);
  fext_ = VecX::Zero(2 * nd);
  for (int k = 0; k < nd; ++k) {
    const DofRef& ref = dof_.nodes[std::size_t(k)];
    const Node& node = grid.nodes(ref.grid_id)[std::size_t(ref.node_slot)];
    if (has_inertia_) v0_.segment<2>(2 * k) = node.v;
    mass_.segment<2>(2 * k) = Vec2::Constant(node.m);
    fext_.segment<2>(2 * k) = node.f_ext;
    mean_nodal_mass_ += node.m;
  }
  mean_nodal_mass_ /= Real(nd);

  // cache stencils, DOF resolution and Hessian pair slots
  const GridConfig& cfg = grid.config();
  parts_.reserve(state.particles.size());
  pattern_.begin_pattern(nd);
  for (int k = 0; k < nd; ++k) pattern_.pattern_insert(k, k);

  std::vector<std::pair<std::int8_t, std::int8_t>> pair_scratch;
  std::vector<std::int32_t> pair_offsets;  // per particle start into pair_scratch
  pair_offsets.reserve(state.particles.size() + 1);
  pair_offsets.push_back(0);

  // The dual-grid statics objective is blind to modes where the two grids
  // carry opposite displacement fields (the averaged grad(dx) cancels); a
  // small consistency penalty k_tie |d_-(p) - d_+(p)|^2 ties the grids to one
  // continuum field. It vanishes to interpolation error on physical states.
  // Dynamics needs no tie: the lumped mass term controls the relative mode.
  const Real tie_kappa = 1.0;
  for (const Particle& p : state.particles) {
    SysParticle sp;
    sp.Fn = p.F;
    sp.V0 = p.V0;
    sp.mat = p.material;
    sp.k_tie = (!inertia && G_ == 2)
                   ? tie_kappa * p.V0 * state.materials[std::size_t(p.material)].E / (cfg.h * cfg.h)
                   : 0.0;
    sp.e0 = std::int32_t(entries_.size());
    const Stencil st = stencil(state.kernel, p.x, cfg);
    for (const StencilEntry& e : st) {
      const Node* node = grid.find(e.grid_id, e.node);
      Entry ent;
      ent.dof = node->dof;
      ent.w = e.w;
      ent.sign = e.grid_id < 0 ? 1.0 : -1.0;
      ent.grad = e.grad;
      ent.pin_v = Vec2::Zero();
      if (ent.dof < 0 && node->bc != DirichletMode::Free) ent.pin_v = node->bc_value;
      entries_.push_back(ent);
    }
    sp.ne = std::int32_t(entries_.size()) - sp.e0;

    for (std::int8_t a = 0; a < sp.ne; ++a) {
      const std::int32_t da = entries_[std::size_t(sp.e0 + a)].dof;
      if (da < 0) continue;
      for (std::int8_t b = a; b < sp.ne; ++b) {
        const std::int32_t db = entries_[std::size_t(sp.e0 + b)].dof;
        if (db < 0) continue;
        const auto pr = da <= db ? std::pair<std::int8_t, std::int8_t>(a, b)
                                 : std::pair<std::int8_t, std::int8_t>(b, a);
        pattern_.pattern_insert(entries_[std::size_t(sp.e0 + pr.first)].dof,
                                entries_[std::size_t(sp.e0 + pr.second)].dof);
        pair_scratch.push_back(pr);
      }
    }
    pair_offsets.push_back(std::int32_t(pair_scratch.size()));
    parts_.push_back(sp);
  }
  pattern_.finalize_pattern();

  pairs_.reserve(pair_scratch.size());
  for (std::size_t pi = 0; pi < parts_.size(); ++pi) {
    SysParticle& sp = parts_[pi];
    sp.p0 = std::int32_t(pairs_.size());
    for (std::int32_t s = pair_offsets[pi]; s < pair_offsets[pi + 1]; ++s) {
      const auto [a, b] = pair_scratch[std::size_t(s)];
      PairRef ref;
      ref.a = a;
      ref.b = b;
      ref.slot = std::int32_t(pattern_.slot(entries_[std::size_t(sp.e0 + a)].dof,
                                            entries_[std::size_t(sp.e0 + b)].dof));
      pairs_.push_back(ref);
    }
    sp.np = std::int32_t(pairs_.size()) - sp.p0;
  }
}

ImplicitSystem::ParticleKinematics ImplicitSystem::kinematics_of(const SysParticle& sp,
                                                                 const VecX& u) const {
  ParticleKinematics kin;
  for (std::int32_t e = sp.e0; e < sp.e0 + sp.ne; ++e) {
    const Entry& ent = entries_[std::size_t(e)];
    const Vec2 ve = ent.dof >= 0 ? Vec2(u.segment<2>(2 * ent.dof)) : ent.pin_v;
    kin.grad_v += ve * ent.grad.transpose();
    if (sp.k_tie != 0) kin.tie += (ent.sign * ent.w) * ve;
  }
  kin.grad_v /= Real(G_);
  return kin;
}

Real ImplicitSystem::energy_impl(const VecX& u, bool throw_on_invalid) const {
  Real E = 0;
  if (has_inertia_) {
    const VecX dv = u - v0_;
    E += 0.5 * dv.dot(mass_.cwiseProduct(dv));
  }
  E -= dt_ * fext_.dot(u);
  Real elastic = 0;
  for (const SysParticle& sp : parts_) {
    const ParticleKinematics kin = kinematics_of(sp, u);
    const Mat2 Ftr = (Mat2::Identity() + dt_ * kin.grad_v) * sp.Fn;
    if (throw_on_invalid) {
      elastic += sp.V0 * energy_density((*materials_)[std::size_t(sp.mat)], Ftr);
    } else {
      try {
        elastic += sp.V0 * energy_density((*materials_)[std::size_t(sp.mat)], Ftr);
      } catch (const NonPositiveJacobianError&) {
        return std::numeric_limits<Real>::infinity();
      }
    }
    if (sp.k_tie != 0) E += 0.5 * sp.k_tie * kin.tie.squaredNorm();
  }
  return E + Real(G_) * elastic;
}

VecX ImplicitSystem::gradient(const VecX& u) const {
  VecX g = -dt_ * fext_;
  if (has_inertia_) g += mass_.cwiseProduct(u - v0_);
  for (const SysParticle& sp : parts_) {
    const ParticleKinematics kin = kinematics_of(sp, u);
    const Mat2 Ftr = (Mat2::Identity() + dt_ * kin.grad_v) * sp.Fn;
    const Mat2 P = first_pk_stress((*materials_)[std::size_t(sp.mat)], Ftr);
    const Mat2 A = dt_ * sp.V0 * P * sp.Fn.transpose();
    for (std::int32_t e = sp.e0; e < sp.e0 + sp.ne; ++e) {
      const Entry& ent = entries_[std::size_t(e)];
      if (ent.dof < 0) continue;
      g.segment<2>(2 * ent.dof) += A * ent.grad;
      if (sp.k_tie != 0) g.segment<2>(2 * ent.dof) += (sp.k_tie * ent.sign * ent.w) * kin.tie;
    }
  }
  return g;
}

void ImplicitSystem::hessian(const VecX& u, BlockSparseMatrix& H) const {
  H.zero_values();
  if (has_inertia_) {
    for (int k = 0; k < dof_nodes(); ++k) {
      H.add_diag_block(k, mass_(2 * k) * Mat2::Identity());
    }
  }
  const Real scale = dt_ * dt_ / Real(G_);
  std::array<Eigen::Matrix<Real, 4, 2>, 18> K;
  std::array<Vec2, 18> q;
  std::array<Real, 18> sw;
  for (const SysParticle& sp : parts_) {
    const ParticleKinematics kin = kinematics_of(sp, u);
    const Mat2 Ftr = (Mat2::Identity() + dt_ * kin.grad_v) * sp.Fn;
    Mat4 C = stress_derivative((*materials_)[std::size_t(sp.mat)], Ftr);
    if (spd_mode_ == SpdMode::Clamp) C = spd_project(C, SpdMode::Clamp);
    C *= scale * sp.V0;
    for (std::int32_t e = 0; e < sp.ne; ++e) {
      const Entry& ent = entries_[std::size_t(sp.e0 + e)];
      const Vec2 qe = sp.Fn.transpose() * ent.grad;
      q[std::size_t(e)] = qe;
      sw[std::size_t(e)] = ent.sign * ent.w;
      Eigen::Matrix<Real, 4, 2> S;
      S << qe(0), 0, 0, qe(0), qe(1), 0, 0, qe(1);
      K[std::size_t(e)] = C * S;
    }
    for (std::int32_t pi = sp.p0; pi < sp.p0 + sp.np; ++pi) {
      const PairRef& pr = pairs_[std::size_t(pi)];
      const Vec2& qa = q[std::size_t(pr.a)];
      const auto& Kb = K[std::size_t(pr.b)];
      Mat2 blk;
      blk(0, 0) = qa(0) * Kb(0, 0) + qa(1) * Kb(2, 0);
      blk(0, 1) = qa(0) * Kb(0, 1) + qa(1) * Kb(2, 1);
      blk(1, 0) = qa(0) * Kb(1, 0) + qa(1) * Kb(3, 0);
      blk(1, 1) = qa(0) * Kb(1, 1) + qa(1) * Kb(3, 1);
      if (sp.k_tie != 0) {
        const Real t = sp.k_tie * sw[std::size_t(pr.a)] * sw[std::size_t(pr.b)];
        blk(0, 0) += t;
        blk(1, 1) += t;
      }
      H.add_block(pr.slot, blk);
    }
  }
}

Real ImplicitSystem::auto_eps() const {
  const Real g_scale = gravity_norm_ > 0 ? gravity_norm_ : 1.0;
  Real eps = 1e-7 * mean_nodal_mass_ * g_scale;
  if (has_inertia_) eps *= dt_;
  return eps;
}

Real incremental_potential(const ImplicitSystem& sys, const VecX& vhat) { return sys.energy(vhat); }

VecX ip_gradient(const ImplicitSystem& sys, const VecX& vhat) { return sys.gradient(vhat); }

BlockSparseMatrix ip_hessian(const ImplicitSystem& sys, const VecX& vhat) {
  BlockSparseMatrix H = sys.hessian_pattern();
  sys.hessian(vhat, H);
  return H;
}

// ---------------------------------------------------------------------------
// Newton with Armijo backtracking (optionally with an adaptive identity shift
// when spd_mode is Shift, cf. modified Newton in Nocedal & Wright)

namespace {

Real mean_abs_diagonal(const BlockSparseMatrix& H) {
  Real s = 0;
  for (int r = 0; r < H.rows(); ++r) {
    const Mat2 d = H.block(r, r);
    s += std::abs(d(0, 0)) + std::abs(d(1, 1));
  }
  return s / Real(2 * H.rows());
}

}  // namespace

NewtonResult newton_solve(const ImplicitSystem& sys, const SolverParams& params) {
  const Real eps = params.eps_residual > 0 ? params.eps_residual : sys.auto_eps();
  VecX u = sys.v0();
  VecX r = sys.gradient(u);
  Real rn = r.lpNorm<Eigen::Infinity>();

  BlockSparseMatrix H = sys.hessian_pattern();
  NewtonResult result;
  for (int k = 0; k < params.max_newton_iters; ++k) {
    if (rn < eps) {
      result.u = u;
      result.iterations = k;
      result.residual_inf = rn;
      result.energy = sys.trial_energy(u);
      return result;
    }
    sys.hessian(u, H);

    VecX d;
    Real gtd = 0;
    if (params.spd_mode == SpdMode::Shift) {
      // modified Newton: grow the identity shift until the factorization is
      // positive definite and the direction descends
      Real shift = params.spd_shift_eps * mean_abs_diagonal(H);
      Real added = 0;
      bool ok = false;
      for (int attempt = 0; attempt < 30 && !ok; ++attempt) {
        H.add_to_diagonal(shift - added);
        added = shift;
        try {
          const bool use_pcg = params.linear_solver == LinearSolverKind::PCG ||
                               (params.linear_solver == LinearSolverKind::Auto &&
                                r.size() > params.direct_dof_limit);
          bool pd = true;
          if (use_pcg) {
            d = solve_pcg(H, -r, params);  // throws when not positive definite
          } else {
            d = solve_direct(H, -r, params.pcg_tol, &pd);
          }
          gtd = r.dot(d);
          ok = pd && gtd < 0;
        } catch (const LinearSolveError&) {
          ok = false;
        }
        if (!ok) shift *= 10.0;
      }
      if (!ok) throw LinearSolveError("shifted Hessian never produced a descent direction");
    } else {
      d = linear_solve(H, -r, params);
      gtd = r.dot(d);
      if (!(gtd < 0)) throw LinearSolveError("Newton direction is not a descent direction");
    }

    const Real E0 = sys.trial_energy(u);
    Real alpha = 1.0;
    VecX u_new = u + d;
    Real E_new = sys.trial_energy(u_new);
    while (!(E_new <= E0 + params.c * alpha * gtd)) {
      alpha *= params.beta;
      if (alpha < params.alpha_min) {
        throw LineSearchStallError("line search step below " + std::to_string(params.alpha_min) +
                                   " (residual " + std::to_string(rn) + ")");
      }
      u_new = u + alpha * d;
      E_new = sys.trial_energy(u_new);
    }
    u = u_new;
    r = sys.gradient(u);
    rn = r.lpNorm<Eigen::Infinity>();
  }
  if (rn < eps) {
    result.u = u;
    result.iterations = params.max_newton_iters;
    result.residual_inf = rn;
    result.energy = sys.trial_energy(u);
    return result;
  }
  throw MaxItersError("Newton did not converge in " + std::to_string(params.max_newton_iters) +
                      " iterations (residual " + std::to_string(rn) + ", tol " +
                      std::to_string(eps) + ")");
}

// ---------------------------------------------------------------------------
// Time stepping and statics

namespace {

void apply_boundaries(SimState& state) {
  for (const BoundaryRegion& bc : state.boundaries) {
    state.grid.apply_dirichlet(bc.region, bc.mode, bc.value);
  }
}

void scatter_external_forces(SimState& state) {
  DualGrid& grid = state.grid;
  const Real s = state.load_scale;
  for (int gs = 0; gs < 2; ++gs) {
    for (Node& n : grid.nodes(DualGrid::grid_id_of_slot(gs))) {
      n.f_ext = n.m * state.gravity * s;
    }
  }
  const GridConfig& cfg = grid.config();
  for (const ParticleLoad& pl : state.loads) {
    const Stencil st = stencil(state.kernel, state.particles[std::size_t(pl.particle)].x, cfg);
    for (const StencilEntry& e : st) {
      grid.touch(e.grid_id, e.node).f_ext += e.w * pl.force * s;
    }
  }
}

void write_back_nodal(DualGrid& grid, const VecX& u) {
  for (int gs = 0; gs < 2; ++gs) {
    for (Node& n : grid.nodes(DualGrid::grid_id_of_slot(gs))) {
      if (n.dof >= 0) {
        n.v = u.segment<2>(2 * n.dof);
      } else if (n.bc != DirichletMode::Free) {
        n.v = n.bc_value;
      } else {
        n.v = Vec2::Zero();  // below activation threshold: excluded from the solve
      }
    }
  }
}

}  // namespace

void prepare_grid_dynamics(SimState& state) {
  state.grid.reset();
  p2g(state.particles, state.kernel, state.grid);
  apply_boundaries(state);
  scatter_external_forces(state);
}

void prepare_grid_statics(SimState& state) {
  state.grid.reset();
  p2g_mass(state.particles, state.kernel, state.grid);
  apply_boundaries(state);
  scatter_external_forces(state);
}

StepStats step(SimState& state, Real dt, const SolverParams& params) {
  DualGrid& grid = state.grid;
  prepare_grid_dynamics(state);

  ImplicitSystem sys = ImplicitSystem::dynamics(state, dt, params);
  StepStats stats;
  stats.ip_initial = sys.trial_energy(sys.v0());
  NewtonResult res = newton_solve(sys, params);
  stats.newton_iterations = res.iterations;
  stats.residual_inf = res.residual_inf;
  stats.ip_final = res.energy;

  if (params.zeta != 0) res.u *= (1.0 - params.zeta);
  write_back_nodal(grid, res.u);

  std::vector<Mat2> grads;
  g2p(grid, state.kernel, state.particles, grads);
  const GridConfig& cfg = grid.config();
  for (std::size_t i = 0; i < state.particles.size(); ++i) {
    Particle& p = state.particles[i];
    p.F = update_deformation(p.F, grads[i], dt);
    p.x = advect(p.x, p.v, dt, state.kernel, cfg);
  }
  stats.energies = compute_energies(state);
  return stats;
}

StaticStats static_solve(SimState& state, const SolverParams& params_in) {
  SolverParams params = params_in;
  params.spd_mode = SpdMode::Shift;  // statics stabilizes the Hessian by identity shift

  DualGrid& grid = state.grid;
  prepare_grid_statics(state);

  ImplicitSystem sys = ImplicitSystem::statics(state, params);
  NewtonResult res = newton_solve(sys, params);
  write_back_nodal(grid, res.u);

  // x_p += (1/G) sum w dx_i;  F_p <- (I + grad(dx_p)) F_p
  const GridConfig& cfg = grid.config();
  const Real inv_G = 1.0 / Real(state.kernel.grid_multiplicity());
  StaticStats stats;
  stats.newton_iterations = res.iterations;
  stats.residual_inf = res.residual_inf;
  for (Particle& p : state.particles) {
    const Stencil st = stencil(state.kernel, p.x, cfg);
    Vec2 disp = Vec2::Zero();
    Mat2 grad = Mat2::Zero();
    for (const StencilEntry& e : st) {
      const Node* n = grid.find(e.grid_id, e.node);
      disp += e.w * n->v;
      grad += n->v * e.grad.transpose();
    }
    disp *= inv_G;
    grad *= inv_G;
    p.F = (Mat2::Identity() + grad) * p.F;
    const Vec2 xn = p.x + disp;
    if (!stencil_in_domain(state.kernel, xn, cfg)) {
      throw OutOfDomainError("static displacement moves particle outside grid coverage");
    }
    p.x = xn;
    stats.max_displacement = std::max(stats.max_displacement, disp.norm());
  }
  return stats;
}

Energies compute_energies(std::span<const Particle> particles,
                          std::span<const Material> materials) {
  Energies e;
  for (const Particle& p : particles) {
    e.kinetic += 0.5 * p.m * p.v.squaredNorm();
    e.elastic += p.V0 * energy_density(materials[std::size_t(p.material)], p.F);
  }
  e.total = e.kinetic + e.elastic;
  return e;
}

Energies compute_energies(const SimState& state) {
  return compute_energies(state.particles, state.materials);
}

}  // namespace ckmpm
