#pragma once

#include <array>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ckmpm/scene.hpp"
#include "ckmpm/solver.hpp"

namespace ckmpm::bench {

/// Time-stamped or parameter-stamped tabular series.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Real>> rows;

  void add_row(std::initializer_list<Real> vals) { rows.emplace_back(vals); }
};

struct Snapshot {
  std::string label;  // e.g. "0.9" (time in seconds)
  // columns: x, y, vx, vy, von_mises, phi
  std::vector<std::array<Real, 6>> particles;
};

struct BenchmarkReport {
  std::string name;
  std::map<std::string, Real> parameters;
  std::map<std::string, std::string> string_parameters;
  Table series;   // series.csv
  Table profile;  // profile.csv
  std::vector<Snapshot> snapshots;
  std::map<std::string, Real> metrics;
  std::vector<std::pair<std::string, bool>> checks;  // acceptance rule -> pass

  bool all_passed() const {
    for (const auto& [_, ok] : checks)
      if (!ok) return false;
    return true;
  }
};

/// Write series.csv / profile.csv / snapshot_<label>.csv / report.json under `dir`.
void write_report(const BenchmarkReport& report, const std::string& dir);

// ---------------------------------------------------------------------------
// Analytic oracles and metrics

/// Dimensionless gravito-bending parameter gamma = 12 (1 - nu^2) rho g L^3 / (E h^2).
Real gamma(Real E, Real nu, Real rho, Real g, Real L, Real h_thickness);

struct HertzAnalytic {
  Real a;          // contact half-width (m)
  Real sigma_max;  // peak |sigma_yy| (Pa)
  Real p(Real x) const;  // pressure magnitude profile, 0 outside |x| <= a
};

/// Plane contact of an elastic cylinder on a rigid plane:
/// a = 2 sqrt(F R (1 - nu^2) / (pi E)), sigma_max = 2F / (pi a).
HertzAnalytic hertz_analytic(Real F, Real R, Real E, Real nu);

/// sqrt( sum_i ((p_i - pa_i)/pa_i)^2 / N ) / max|pa|. Throws ValidationError
/// when a zero analytic sample is included.
Real relative_rmse(std::span<const Real> p, std::span<const Real> p_analytic);

/// Von Mises stress of a plane-strain Cauchy stress (sigma_zz = nu (sxx + syy)).
Real von_mises(const Mat2& sigma, Real nu);

// ---------------------------------------------------------------------------
// Benchmarks (Sections 4-5 validation suite, desk scale)

struct CantileverParams {
  std::vector<Real> E_sweep = {2.0e6, 1.5e6, 1.0e6, 3.0e5, 1.0e5, 3.0e4, 1.0e4, 3.0e3, 1.0e3};
  Real nu = 0.1;
  Real rho = 1000;
  Real g = 10;
  Real dx = 3.906e-6;   // m
  int cells_long = 250; // beam length L = cells_long * dx
  Real cells_thick = 2.5;
  int ppc = 4;
  KernelFamily kernel = KernelFamily::compact();
};

BenchmarkReport run_cantilever(const CantileverParams& params);

struct HertzParams {
  Real R = 5e-3;        // cylinder radius (m)
  Real E = 1.0e7;       // Pa
  Real nu = 0.07;
  Real rho = 1000;
  Real F = 1279;        // total line load (N/m); a/R ~ 0.18
  Real dx = 1e-4;       // m
  int ppc = 4;
  int ramp_increments = 8;
  int hold_increments = 2;
  KernelFamily kernel = KernelFamily::compact();
};

BenchmarkReport run_hertz(const HertzParams& params);

/// Runs Hertz at the given resolutions for compact and quadratic kernels and
/// evaluates the refinement / kernel-ordering acceptance rules.
BenchmarkReport run_hertz_comparison(std::vector<Real> resolutions = {1e-4, 5e-5});

struct DiffusionParams {
  Real dx = 0.01;
  int ppc = 4;
  int cycles = 50;
  KernelFamily kernel = KernelFamily::compact();
  Real band_threshold = 0.9;  // |phi| < threshold counts as mixed
};

BenchmarkReport run_diffusion(const DiffusionParams& params);

struct ClearanceParams {
  Real disc_radius = 0.07;
  Real dx = 7.8125e-3;
  Real extra_clearance_cells = 2;  // slot half-width = radius + this * dx
  Real E = 1.0e8;                  // Pa
  Real nu = 0.1;
  Real rho = 1000;
  Real g = 10;
  Real dt = 1e-3;
  Real duration = 0.30;
  int ppc = 4;
  KernelFamily kernel = KernelFamily::compact();
};

BenchmarkReport run_clearance_fall(const ClearanceParams& params);

struct RingParams {
  Real r_outer = 1.0;
  Real thickness = 0.3;
  Real gap = 2.02;       // facing-surface gap (m)
  Real speed = 1.0;      // each ring, toward the other (m/s)
  Real E = 5.0e4;        // Pa
  Real nu = 0.0;
  Real rho = 100;
  Real dx = 0.125;
  int ppc = 9;
  Real dt = 2e-3;
  Real duration = 3.6;
  std::vector<Real> snapshot_times = {0.9, 1.8, 2.7, 3.6};
  KernelFamily kernel = KernelFamily::compact();
};

BenchmarkReport run_ring_collision(const RingParams& params);

}  // namespace ckmpm::bench
