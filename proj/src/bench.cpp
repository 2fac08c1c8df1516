#include "ckmpm/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

namespace ckmpm::bench {

namespace {

void write_table(const Table& t, const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw Error(ErrorCode::Generic, "cannot write " + path);
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    std::fprintf(f, "%s%s", i ? "," : "", t.columns[i].c_str());
  }
  std::fprintf(f, "\n");
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::fprintf(f, "%s%.17g", i ? "," : "", row[i]);
    }
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

}  // namespace

void write_report(const BenchmarkReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  if (!report.series.columns.empty()) write_table(report.series, dir + "/series.csv");
  if (!report.profile.columns.empty()) write_table(report.profile, dir + "/profile.csv");
  for (const Snapshot& snap : report.snapshots) {
    FILE* f = std::fopen((dir + "/snapshot_" + snap.label + ".csv").c_str(), "w");
    if (!f) throw Error(ErrorCode::Generic, "cannot write snapshot in " + dir);
    std::fprintf(f, "x,y,vx,vy,von_mises,phi\n");
    for (const auto& row : snap.particles) {
      std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", row[0], row[1], row[2], row[3],
                   row[4], row[5]);
    }
    std::fclose(f);
  }
  nlohmann::json j;
  j["name"] = report.name;
  for (const auto& [k, v] : report.parameters) j["parameters"][k] = v;
  for (const auto& [k, v] : report.string_parameters) j["parameters"][k] = v;
  for (const auto& [k, v] : report.metrics) j["metrics"][k] = v;
  j["checks"] = nlohmann::json::array();
  for (const auto& [rule, ok] : report.checks) {
    j["checks"].push_back({{"rule", rule}, {"pass", ok}});
  }
  j["pass"] = report.all_passed();
  std::ofstream out(dir + "/report.json");
  out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Analytic oracles and metrics

Real gamma(Real E, Real nu, Real rho, Real g, Real L, Real h_thickness) {
  return 12.0 * (1.0 - nu * nu) * rho * g * L * L * L / (E * h_thickness * h_thickness);
}

Real HertzAnalytic::p(Real x) const {
  const Real t = 1.0 - (x / a) * (x / a);
  return t > 0 ? sigma_max * std::sqrt(t) : 0.0;
}

HertzAnalytic hertz_analytic(Real F, Real R, Real E, Real nu) {
  HertzAnalytic h;
  h.a = 2.0 * std::sqrt(F * R * (1.0 - nu * nu) / (std::numbers::pi * E));
  h.sigma_max = 2.0 * F / (std::numbers::pi * h.a);
  return h;
}

Real relative_rmse(std::span<const Real> p, std::span<const Real> p_analytic) {
  if (p.size() != p_analytic.size() || p.empty()) {
    throw ValidationError("relative_rmse: sample arrays must be equal-length and non-empty");
  }
  Real sum = 0, max_pa = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p_analytic[i] == 0) {
      throw ValidationError("relative_rmse: zero analytic sample included (division by zero)");
    }
    const Real rel = (p[i] - p_analytic[i]) / p_analytic[i];
    sum += rel * rel;
    max_pa = std::max(max_pa, std::abs(p_analytic[i]));
  }
  return std::sqrt(sum / Real(p.size())) / max_pa;
}

Real von_mises(const Mat2& sigma, Real nu) {
  const Real szz = nu * (sigma(0, 0) + sigma(1, 1));
  const Real tr = (sigma(0, 0) + sigma(1, 1) + szz) / 3.0;
  const Real dxx = sigma(0, 0) - tr;
  const Real dyy = sigma(1, 1) - tr;
  const Real dzz = szz - tr;
  const Real sxy = 0.5 * (sigma(0, 1) + sigma(1, 0));
  const Real frob2 = dxx * dxx + dyy * dyy + dzz * dzz + 2.0 * sxy * sxy;
  return std::sqrt(1.5 * frob2);
}

// ---------------------------------------------------------------------------
// Benchmark helpers

namespace {

Real particle_von_mises(const Particle& p, const Material& mat) {
  return von_mises(cauchy_stress(mat, p.F), mat.nu);
}

Snapshot take_snapshot(const SimState& st, const std::string& label) {
  Snapshot snap;
  snap.label = label;
  snap.particles.reserve(st.particles.size());
  for (const Particle& p : st.particles) {
    const Real vm = particle_von_mises(p, st.materials[std::size_t(p.material)]);
    snap.particles.push_back({p.x.x(), p.x.y(), p.v.x(), p.v.y(), vm, p.phi});
  }
  return snap;
}

std::string format_time_label(Real t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", t);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Cantilever (gravity-driven bending, static solves over a stiffness sweep)

BenchmarkReport run_cantilever(const CantileverParams& prm) {
  BenchmarkReport rep;
  rep.name = "cantilever";
  rep.string_parameters["kernel"] = prm.kernel.name();
  rep.parameters["dx"] = prm.dx;
  rep.parameters["nu"] = prm.nu;
  rep.parameters["rho"] = prm.rho;
  rep.parameters["g"] = prm.g;
  rep.parameters["cells_long"] = prm.cells_long;
  rep.parameters["cells_thick"] = prm.cells_thick;
  rep.series.columns = {"E",          "gamma", "H",        "W",
                        "H_over_W",   "ref_small_gamma_over_8", "ref_large_sqrt",
                        "converged"};

  const Real dx = prm.dx;
  const Real L = prm.cells_long * dx;
  const Real T = prm.cells_thick * dx;

  for (Real E : prm.E_sweep) {
    const Real gam = gamma(E, prm.nu, prm.rho, prm.g, L, T);

    SimState st;
    st.kernel = prm.kernel;
    st.materials = {Material::make(MaterialModel::FixedCorotated, E, prm.nu, prm.rho)};
    GridConfig cfg;
    cfg.h = dx;
    cfg.origin = Vec2(-8 * dx, -(L + 12 * dx));
    cfg.extent = Vec2i(prm.cells_long + 17, int(std::ceil(L / dx + prm.cells_thick + 21)) + 1);
    cfg.multiplicity = prm.kernel.grid_multiplicity();
    st.grid = DualGrid(cfg);

    SeedRegion beam;
    beam.inside = [L, T](const Vec2& x) {
      return x.x() >= 0 && x.x() < L && x.y() >= 0 && x.y() < T;
    };
    beam.lo = Vec2(0, 0);
    beam.hi = Vec2(L, T);
    seed_particles(st.particles, cfg, beam, prm.ppc, prm.rho, 0);

    const Vec2 clamp_lo(-8 * dx, -4 * dx);
    const Vec2 clamp_hi(0, T + 4 * dx);
    st.boundaries.push_back({[clamp_lo, clamp_hi](const Vec2& x) {
                               return x.x() >= clamp_lo.x() && x.x() <= clamp_hi.x() &&
                                      x.y() >= clamp_lo.y() && x.y() <= clamp_hi.y();
                             },
                             DirichletMode::FixedZero,
                             Vec2::Zero()});
    st.gravity = Vec2(0, -prm.g);

    // tip particle: initially rightmost on the mid-height row
    const Real spacing = dx / std::sqrt(Real(prm.ppc));
    std::size_t tip = 0;
    Real best_x = -1;
    for (std::size_t i = 0; i < st.particles.size(); ++i) {
      const Particle& p = st.particles[i];
      if (std::abs(p.x.y() - T / 2) < 0.3 * spacing && p.x.x() > best_x) {
        best_x = p.x.x();
        tip = i;
      }
    }
    const Vec2 tip0 = st.particles[tip].x;

    SolverParams sp;
    sp.spd_mode = SpdMode::Shift;
    const int n_inc = std::min(36, std::max(1, int(std::ceil(2.2 * std::cbrt(gam)))));
    bool converged = true;
    try {
      for (int i = 1; i <= n_inc; ++i) {
        st.load_scale = Real(i) / Real(n_inc);
        static_solve(st, sp);
      }
      st.load_scale = 1.0;
      static_solve(st, sp);
      static_solve(st, sp);
    } catch (const Error&) {
      converged = false;
    }

    const Real H = tip0.y() - st.particles[tip].x.y();
    const Real W = st.particles[tip].x.x();
    const Real hw = H / W;
    rep.series.add_row({E, gam, H, W, hw, gam / 8, std::sqrt(gam / 2), converged ? 1.0 : 0.0});
  }

  // per-kernel acceptance rules: the three stiffest points track gamma/8, all
  // points stay below the large-deformation asymptote
  const auto& rows = rep.series.rows;
  bool small_ok = true;
  for (std::size_t i = 0; i < std::min<std::size_t>(3, rows.size()); ++i) {
    const Real rel = std::abs(rows[i][4] - rows[i][1] / 8) / (rows[i][1] / 8);
    small_ok = small_ok && rows[i][7] > 0 && rel <= 0.15;
    rep.metrics["small_gamma_rel_err_" + std::to_string(i)] = rel;
  }
  bool bound_ok = true;
  for (const auto& row : rows) {
    bound_ok = bound_ok && row[7] > 0 && row[4] <= 1.05 * std::sqrt(row[1] / 2);
  }
  rep.checks.emplace_back("three stiffest points within 15% of gamma/8", small_ok);
  rep.checks.emplace_back("all points below 1.05 sqrt(gamma/2)", bound_ok);
  return rep;
}

// ---------------------------------------------------------------------------
// Hertz contact (quasi-static incremental load on a half-cylinder)

namespace {

struct HertzOutcome {
  Real rmse = 0;
  Real a_est = 0;
  Real reaction_rel_err = 0;
};

HertzOutcome hertz_extract(SimState& st, const HertzParams& prm, BenchmarkReport& rep) {
  const Material& mat = st.materials[0];
  const HertzAnalytic ana = hertz_analytic(prm.F, prm.R, prm.E, prm.nu);
  const Real spacing = prm.dx / std::sqrt(Real(prm.ppc));

  // first particle layer above the plane, in the deformed configuration
  Real ymin = std::numeric_limits<Real>::infinity();
  for (const Particle& p : st.particles) ymin = std::min(ymin, p.x.y());
  std::vector<std::pair<Real, Real>> layer;  // (x, pressure)
  for (const Particle& p : st.particles) {
    if (p.x.y() < ymin + 0.6 * spacing) {
      const Mat2 sigma = cauchy_stress(mat, p.F);
      layer.emplace_back(p.x.x(), -sigma(1, 1));
    }
  }
  std::sort(layer.begin(), layer.end());

  rep.profile.columns = {"x", "p", "p_analytic"};
  Real max_p = 0;
  for (const auto& [x, p] : layer) {
    rep.profile.add_row({x, p, ana.p(x)});
    max_p = std::max(max_p, p);
  }

  // relative RMSE over the contact region, excluding |x| within 2% of a
  std::vector<Real> p_num, p_ana;
  for (const auto& [x, p] : layer) {
    if (std::abs(x) <= 0.98 * ana.a) {
      p_num.push_back(p);
      p_ana.push_back(ana.p(x));
    }
  }
  HertzOutcome out;
  out.rmse = relative_rmse(p_num, p_ana);

  // estimated contact half-width: extent of significant compression
  for (const auto& [x, p] : layer) {
    if (p > 0.05 * max_p) out.a_est = std::max(out.a_est, std::abs(x));
  }

  // reaction on the Dirichlet plane vs applied load, per grid
  prepare_grid_statics(st);
  const GridConfig& cfg = st.grid.config();
  Real reaction[2] = {0, 0};
  for (const Particle& p : st.particles) {
    const Stencil stc = stencil(st.kernel, p.x, cfg);
    const Mat2 A = p.V0 * first_pk_stress(mat, p.F) * p.F.transpose();
    for (const StencilEntry& e : stc) {
      const Node* n = st.grid.find(e.grid_id, e.node);
      if (n->bc != DirichletMode::Free) reaction[DualGrid::slot(e.grid_id)] += (A * e.grad).y();
    }
  }
  for (int s = 0; s < 2; ++s) {
    for (const Node& n : st.grid.nodes(DualGrid::grid_id_of_slot(s))) {
      if (n.bc != DirichletMode::Free) reaction[s] -= n.f_ext.y();
    }
  }
  const int G = st.kernel.grid_multiplicity();
  Real worst = 0;
  for (int s = 0; s < G; ++s) {
    worst = std::max(worst, std::abs(reaction[s] - prm.F) / prm.F);
  }
  out.reaction_rel_err = worst;

  rep.metrics["rmse"] = out.rmse;
  rep.metrics["a_analytic"] = ana.a;
  rep.metrics["a_estimated"] = out.a_est;
  rep.metrics["sigma_max_analytic"] = ana.sigma_max;
  rep.metrics["max_pressure"] = max_p;
  rep.metrics["reaction_rel_err"] = out.reaction_rel_err;
  rep.metrics["reaction_minus_grid"] = reaction[0];
  if (G == 2) rep.metrics["reaction_plus_grid"] = reaction[1];
  return out;
}

}  // namespace

BenchmarkReport run_hertz(const HertzParams& prm) {
  BenchmarkReport rep;
  rep.name = "hertz";
  rep.string_parameters["kernel"] = prm.kernel.name();
  rep.parameters["R"] = prm.R;
  rep.parameters["E"] = prm.E;
  rep.parameters["nu"] = prm.nu;
  rep.parameters["F"] = prm.F;
  rep.parameters["dx"] = prm.dx;
  rep.parameters["ppc"] = prm.ppc;

  const Real dx = prm.dx;
  const Real R = prm.R;

  SimState st;
  st.kernel = prm.kernel;
  st.materials = {Material::make(MaterialModel::FixedCorotated, prm.E, prm.nu, prm.rho)};
  GridConfig cfg;
  cfg.h = dx;
  cfg.origin = Vec2(-R - 6 * dx, -6 * dx);
  cfg.extent = Vec2i(int(std::lround(2 * R / dx)) + 13, int(std::lround(R / dx)) + 13);
  cfg.multiplicity = prm.kernel.grid_multiplicity();
  st.grid = DualGrid(cfg);

  const Vec2 center(0, R);
  SeedRegion half_disc;
  half_disc.inside = [center, R](const Vec2& x) {
    return (x - center).norm() <= R && x.y() <= center.y();
  };
  half_disc.lo = center - Vec2::Constant(R);
  half_disc.hi = Vec2(center.x() + R, center.y());
  seed_particles(st.particles, cfg, half_disc, prm.ppc, prm.rho, 0);

  st.boundaries.push_back(
      {[](const Vec2& x) { return x.y() <= 1e-12; }, DirichletMode::FixedZero, Vec2::Zero()});

  const Real spacing = dx / std::sqrt(Real(prm.ppc));
  const std::vector<std::int32_t> top =
      top_layer_particles(st, 0, st.particles.size(), spacing);
  for (std::int32_t idx : top) {
    st.loads.push_back(ParticleLoad{idx, Vec2(0, -prm.F / Real(top.size()))});
  }

  rep.series.columns = {"increment", "load_scale", "newton_iterations", "residual", "max_displacement"};
  SolverParams sp;
  sp.spd_mode = SpdMode::Shift;
  int inc = 0;
  for (int i = 1; i <= prm.ramp_increments; ++i) {
    st.load_scale = Real(i) / Real(prm.ramp_increments);
    const StaticStats stats = static_solve(st, sp);
    rep.series.add_row({Real(++inc), st.load_scale, Real(stats.newton_iterations),
                        stats.residual_inf, stats.max_displacement});
  }
  st.load_scale = 1.0;
  for (int i = 0; i < prm.hold_increments; ++i) {
    const StaticStats stats = static_solve(st, sp);
    rep.series.add_row({Real(++inc), st.load_scale, Real(stats.newton_iterations),
                        stats.residual_inf, stats.max_displacement});
  }

  const HertzOutcome out = hertz_extract(st, prm, rep);
  rep.checks.emplace_back("plane reaction balances applied load within 2%",
                          out.reaction_rel_err <= 0.02);
  return rep;
}

BenchmarkReport run_hertz_comparison(std::vector<Real> resolutions) {
  BenchmarkReport rep;
  rep.name = "hertz_comparison";
  rep.series.columns = {"dx", "kernel_is_compact", "rmse", "a_estimated", "reaction_rel_err"};

  std::map<std::pair<int, int>, Real> rmse;   // (kernel, res index) -> rmse
  std::map<std::pair<int, int>, Real> a_est;
  bool reactions_ok = true;
  const HertzAnalytic ana0 = hertz_analytic(HertzParams{}.F, HertzParams{}.R, HertzParams{}.E,
                                            HertzParams{}.nu);

  for (int ki = 0; ki < 2; ++ki) {
    for (std::size_t ri = 0; ri < resolutions.size(); ++ri) {
      HertzParams prm;
      prm.kernel = ki == 0 ? KernelFamily::compact() : KernelFamily::quadratic();
      prm.dx = resolutions[ri];
      BenchmarkReport sub = run_hertz(prm);
      rmse[{ki, int(ri)}] = sub.metrics["rmse"];
      a_est[{ki, int(ri)}] = sub.metrics["a_estimated"];
      reactions_ok = reactions_ok && sub.metrics["reaction_rel_err"] <= 0.02;
      rep.series.add_row({prm.dx, ki == 0 ? 1.0 : 0.0, sub.metrics["rmse"],
                          sub.metrics["a_estimated"], sub.metrics["reaction_rel_err"]});
    }
  }

  bool refine_ok = true;
  for (int ki = 0; ki < 2; ++ki) {
    for (std::size_t ri = 1; ri < resolutions.size(); ++ri) {
      refine_ok = refine_ok && rmse[{ki, int(ri)}] < rmse[{ki, int(ri - 1)}];
    }
  }
  bool compact_better = true;
  for (std::size_t ri = 0; ri < resolutions.size(); ++ri) {
    compact_better = compact_better && rmse[{0, int(ri)}] < rmse[{1, int(ri)}];
  }
  const bool width_ok = std::abs(a_est[{0, 0}] - ana0.a) <= std::abs(a_est[{1, 0}] - ana0.a);

  rep.metrics["a_analytic"] = ana0.a;
  rep.checks.emplace_back("relative RMSE decreases under refinement for both kernels", refine_ok);
  rep.checks.emplace_back("compact RMSE below quadratic RMSE at each resolution", compact_better);
  rep.checks.emplace_back("compact contact half-width at least as close to analytic (coarsest)",
                          width_ok);
  rep.checks.emplace_back("plane reaction balances applied load within 2% in all runs",
                          reactions_ok);
  return rep;
}

// ---------------------------------------------------------------------------
// Transfer-induced numerical diffusion (pure P2G/G2P cycling of a tracer)

BenchmarkReport run_diffusion(const DiffusionParams& prm) {
  BenchmarkReport rep;
  rep.name = "diffusion";
  rep.string_parameters["kernel"] = prm.kernel.name();
  rep.parameters["dx"] = prm.dx;
  rep.parameters["ppc"] = prm.ppc;
  rep.parameters["cycles"] = prm.cycles;
  rep.parameters["band_threshold"] = prm.band_threshold;

  const Real dx = prm.dx;
  GridConfig cfg;
  cfg.h = dx;
  cfg.origin = Vec2(-3 * dx, -3 * dx);
  cfg.extent = Vec2i(int(std::lround(1.0 / dx)) + 7, int(std::lround(1.0 / dx)) + 7);
  cfg.multiplicity = prm.kernel.grid_multiplicity();

  SimState st;
  st.kernel = prm.kernel;
  st.materials = {Material::make(MaterialModel::LinearElastic, 1e4, 0.0, 1000.0)};
  st.grid = DualGrid(cfg);
  SeedRegion square;
  square.inside = [](const Vec2& x) {
    return x.x() >= 0 && x.x() < 1 && x.y() >= 0 && x.y() < 1;
  };
  square.lo = Vec2(0, 0);
  square.hi = Vec2(1, 1);
  seed_particles(st.particles, cfg, square, prm.ppc, 1000.0, 0);

  // sharp interface y = 0.5 + 0.2 sin(2 pi x)
  for (Particle& p : st.particles) {
    p.phi = p.x.y() > 0.5 + 0.2 * std::sin(2 * std::numbers::pi * p.x.x()) ? 1.0 : -1.0;
  }

  const Real spacing = dx / std::sqrt(Real(prm.ppc));
  auto band_width = [&](Real threshold) {
    Real lo = std::numeric_limits<Real>::infinity();
    Real hi = -std::numeric_limits<Real>::infinity();
    for (const Particle& p : st.particles) {
      if (std::abs(p.x.x() - 0.5) <= 0.6 * spacing && std::abs(p.phi) < threshold) {
        lo = std::min(lo, p.x.y());
        hi = std::max(hi, p.x.y());
      }
    }
    return hi >= lo ? hi - lo : 0.0;
  };

  rep.series.columns = {"cycle", "delta"};
  rep.series.add_row({0.0, band_width(prm.band_threshold)});
  bool monotone = true;
  Real prev = band_width(prm.band_threshold);
  for (int c = 1; c <= prm.cycles; ++c) {
    transfer_cycle_scalar(st.particles, st.kernel, st.grid);
    const Real delta = band_width(prm.band_threshold);
    rep.series.add_row({Real(c), delta});
    monotone = monotone && delta >= prev - 1e-14;
    prev = delta;
  }

  rep.profile.columns = {"y", "phi"};
  std::vector<std::pair<Real, Real>> slice;
  for (const Particle& p : st.particles) {
    if (std::abs(p.x.x() - 0.5) <= 0.6 * spacing) slice.emplace_back(p.x.y(), p.phi);
  }
  std::sort(slice.begin(), slice.end());
  for (const auto& [y, phi] : slice) rep.profile.add_row({y, phi});

  rep.metrics["delta_final"] = prev;
  for (Real threshold : {0.55, 0.7, 0.9}) {
    rep.metrics["delta_final_t" + format_time_label(threshold)] = band_width(threshold);
  }
  rep.checks.emplace_back("initial band width within one inter-particle spacing",
                          rep.series.rows[0][1] <= spacing);
  rep.checks.emplace_back("band width is non-decreasing per cycle", monotone);
  return rep;
}

// ---------------------------------------------------------------------------
// Narrow-clearance fall (2D disc through a slot)

BenchmarkReport run_clearance_fall(const ClearanceParams& prm) {
  BenchmarkReport rep;
  rep.name = "clearance_fall";
  rep.string_parameters["kernel"] = prm.kernel.name();
  rep.parameters["dx"] = prm.dx;
  rep.parameters["disc_radius"] = prm.disc_radius;
  rep.parameters["E"] = prm.E;
  rep.parameters["dt"] = prm.dt;

  const Real dx = prm.dx;
  const Real r = prm.disc_radius;
  const Real slot_half = r + prm.extra_clearance_cells * dx;
  const Real wall_t = 6 * dx;
  const Real wall_lo = 0.3, wall_hi = 0.5;
  const Vec2 disc0(0, 0.6);

  SimState st;
  st.kernel = prm.kernel;
  st.materials = {Material::make(MaterialModel::FixedCorotated, prm.E, prm.nu, prm.rho)};
  GridConfig cfg;
  cfg.h = dx;
  cfg.origin = Vec2(-0.25, 0.05);
  cfg.extent = Vec2i(65, 97);
  cfg.multiplicity = prm.kernel.grid_multiplicity();
  st.grid = DualGrid(cfg);

  SeedRegion disc;
  disc.inside = [disc0, r](const Vec2& x) { return (x - disc0).norm() <= r; };
  disc.lo = disc0 - Vec2::Constant(r);
  disc.hi = disc0 + Vec2::Constant(r);
  seed_particles(st.particles, cfg, disc, prm.ppc, prm.rho, 0);
  const std::size_t disc_n = st.particles.size();

  for (Real side : {-1.0, 1.0}) {
    SeedRegion wall;
    const Real x0 = slot_half, x1 = slot_half + wall_t;
    wall.inside = [side, x0, x1, wall_lo, wall_hi](const Vec2& x) {
      const Real xs = side * x.x();
      return xs >= x0 && xs < x1 && x.y() >= wall_lo && x.y() < wall_hi;
    };
    wall.lo = Vec2(side < 0 ? -x1 : x0, wall_lo);
    wall.hi = Vec2(side < 0 ? -x0 : x1, wall_hi);
    seed_particles(st.particles, cfg, wall, prm.ppc, prm.rho, 0);

    // hold the outer part of each wall
    const Real cx0 = slot_half + 2 * dx, cx1 = slot_half + 8 * dx;
    const Real cy0 = wall_lo - 2 * dx, cy1 = wall_hi + 2 * dx;
    st.boundaries.push_back({[side, cx0, cx1, cy0, cy1](const Vec2& x) {
                               const Real xs = side * x.x();
                               return xs >= cx0 && xs <= cx1 && x.y() >= cy0 && x.y() <= cy1;
                             },
                             DirichletMode::FixedZero,
                             Vec2::Zero()});
  }
  st.gravity = Vec2(0, -prm.g);

  const Real disc_mass = [&] {
    Real m = 0;
    for (std::size_t i = 0; i < disc_n; ++i) m += st.particles[i].m;
    return m;
  }();

  rep.series.columns = {"t", "y_center", "y_free_fall", "max_von_mises", "kinetic", "elastic", "total"};
  SolverParams sp;
  const int steps = int(std::lround(prm.duration / prm.dt));
  Real max_dev = 0, peak_vm = 0;
  for (int s = 1; s <= steps; ++s) {
    const StepStats stats = step(st, prm.dt, sp);
    const Real t = s * prm.dt;
    Real y = 0;
    for (std::size_t i = 0; i < disc_n; ++i) y += st.particles[i].m * st.particles[i].x.y();
    y /= disc_mass;
    const Real y_ff = disc0.y() - 0.5 * prm.g * t * t;
    Real vm = 0;
    for (std::size_t i = 0; i < disc_n; ++i) {
      vm = std::max(vm, particle_von_mises(st.particles[i], st.materials[0]));
    }
    max_dev = std::max(max_dev, std::abs(y - y_ff));
    peak_vm = std::max(peak_vm, vm);
    rep.series.add_row({t, y, y_ff, vm, stats.energies.kinetic, stats.energies.elastic,
                        stats.energies.total});
  }

  const Real fall_distance = 0.5 * prm.g * prm.duration * prm.duration;
  rep.metrics["max_trajectory_deviation"] = max_dev;
  rep.metrics["fall_distance"] = fall_distance;
  rep.metrics["deviation_fraction"] = max_dev / fall_distance;
  rep.metrics["peak_von_mises"] = peak_vm;
  rep.snapshots.push_back(take_snapshot(st, format_time_label(prm.duration)));
  return rep;
}

// ---------------------------------------------------------------------------
// Colliding hyperelastic rings (energy-exchange benchmark)

BenchmarkReport run_ring_collision(const RingParams& prm) {
  BenchmarkReport rep;
  rep.name = "rings";
  rep.string_parameters["kernel"] = prm.kernel.name();
  rep.parameters["dx"] = prm.dx;
  rep.parameters["E"] = prm.E;
  rep.parameters["gap"] = prm.gap;
  rep.parameters["dt"] = prm.dt;
  rep.parameters["speed"] = prm.speed;

  SimState st;
  st.kernel = prm.kernel;
  st.materials = {Material::make(MaterialModel::NeoHookean, prm.E, prm.nu, prm.rho)};
  GridConfig cfg;
  cfg.h = prm.dx;
  cfg.origin = Vec2(-7, -2.0625);
  cfg.extent = Vec2i(113, 34);
  cfg.multiplicity = prm.kernel.grid_multiplicity();
  st.grid = DualGrid(cfg);

  const Real cx = prm.gap / 2 + prm.r_outer;
  for (Real side : {-1.0, 1.0}) {
    const Vec2 center(side * cx, 0);
    SeedRegion ring;
    const Real ro = prm.r_outer, ri = prm.r_outer - prm.thickness;
    ring.inside = [center, ro, ri](const Vec2& x) {
      const Real d = (x - center).norm();
      return d <= ro && d >= ri;
    };
    ring.lo = center - Vec2::Constant(ro);
    ring.hi = center + Vec2::Constant(ro);
    seed_particles(st.particles, cfg, ring, prm.ppc, prm.rho, 0, Vec2(-side * prm.speed, 0));
  }

  rep.series.columns = {"t", "kinetic", "elastic", "total"};
  const Energies e0 = compute_energies(st);
  rep.series.add_row({0.0, e0.kinetic, e0.elastic, e0.total});
  rep.metrics["initial_kinetic"] = e0.kinetic;

  SolverParams sp;
  const int steps = int(std::lround(prm.duration / prm.dt));
  std::vector<int> snap_steps;
  for (Real ts : prm.snapshot_times) snap_steps.push_back(int(std::lround(ts / prm.dt)));

  bool non_increasing = true;
  Real prev_total = e0.total;
  Real elastic_at_095 = 0, max_elastic_pre_contact = 0;
  for (int s = 1; s <= steps; ++s) {
    const StepStats stats = step(st, prm.dt, sp);
    const Real t = s * prm.dt;
    rep.series.add_row({t, stats.energies.kinetic, stats.energies.elastic, stats.energies.total});
    non_increasing = non_increasing && stats.energies.total <= prev_total + 1e-9 * e0.total;
    prev_total = stats.energies.total;
    if (t <= 0.95 + 1e-9) elastic_at_095 = stats.energies.elastic;
    if (t < prm.gap / (2 * prm.speed)) {
      max_elastic_pre_contact = std::max(max_elastic_pre_contact, stats.energies.elastic);
    }
    for (std::size_t k = 0; k < snap_steps.size(); ++k) {
      if (s == snap_steps[k]) {
        rep.snapshots.push_back(take_snapshot(st, format_time_label(prm.snapshot_times[k])));
      }
    }
  }

  rep.metrics["elastic_at_t095"] = elastic_at_095;
  rep.metrics["max_elastic_pre_contact"] = max_elastic_pre_contact;
  rep.metrics["total_final"] = prev_total;
  rep.checks.emplace_back("total energy non-increasing", non_increasing);
  return rep;
}

}  // namespace ckmpm::bench
