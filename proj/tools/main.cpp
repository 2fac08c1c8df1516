#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ckmpm/bench.hpp"
#include "ckmpm/scene.hpp"
#include "ckmpm/solver.hpp"

using namespace ckmpm;

namespace {

struct CommonFlags {
  std::string kernel;
  double dx = 0;
  int ppc = 0;
  double dt = 0;
  int frames = 0;
  std::string out = "out";
  bool deterministic = false;
  int seed = 0;  // reserved; default runs are seedless and deterministic
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_kernel_all) {
  cmd->add_option("--kernel", f.kernel,
                  with_kernel_all ? "kernel: linear | quadratic | compact | all"
                                  : "kernel: linear | quadratic | compact");
  cmd->add_option("--dx", f.dx, "override grid spacing (m)");
  cmd->add_option("--ppc", f.ppc, "override particles per cell");
  cmd->add_option("--dt", f.dt, "override time step (s)");
  cmd->add_option("--frames", f.frames, "override frame count");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_flag("--deterministic", f.deterministic,
                "deterministic mode (the engine is serial, so this is always in effect)");
  cmd->add_option("--seed", f.seed, "reserved; runs are seedless and deterministic");
}

void check_thread_env() {
  if (const char* env = std::getenv("CKMPM_THREADS")) {
    const int n = std::atoi(env);
    if (n < 1) {
      std::fprintf(stderr, "warning: ignoring invalid CKMPM_THREADS='%s'\n", env);
    }
    // the engine is single-threaded; any cap >= 1 is honored as worker count 1
  }
}

void apply_scene_overrides(Scene& scene, const CommonFlags& f) {
  if (!f.kernel.empty() && f.kernel != "all") scene.kernel = kernel_from_name(f.kernel);
  if (f.dx > 0) {
    const Real scale = scene.grid.h / f.dx;
    scene.grid.extent =
        Vec2i(int(std::lround((scene.grid.extent.x() - 1) * scale)) + 1,
              int(std::lround((scene.grid.extent.y() - 1) * scale)) + 1);
    scene.grid.h = f.dx;
  }
  if (f.ppc > 0) {
    for (BodySpec& b : scene.bodies) b.ppc = f.ppc;
  }
  if (f.dt > 0) scene.dt = f.dt;
  if (f.frames > 0) scene.frames = f.frames;
}

std::vector<KernelFamily> kernels_for(const std::string& bench_name, const std::string& flag) {
  if (flag.empty()) {
    return {bench_name == "diffusion" || bench_name == "rings" ? KernelFamily::compact()
                                                               : KernelFamily::compact()};
  }
  if (flag != "all") return {kernel_from_name(flag)};
  if (bench_name == "diffusion" || bench_name == "rings") {
    return {KernelFamily::linear(), KernelFamily::quadratic(), KernelFamily::compact()};
  }
  return {KernelFamily::quadratic(), KernelFamily::compact()};
}

bench::BenchmarkReport dispatch_bench(const std::string& name, const KernelFamily& kernel,
                                      const CommonFlags& f) {
  if (name == "cantilever") {
    bench::CantileverParams prm;
    prm.kernel = kernel;
    if (f.dx > 0) prm.dx = f.dx;
    if (f.ppc > 0) prm.ppc = f.ppc;
    return bench::run_cantilever(prm);
  }
  if (name == "hertz") {
    bench::HertzParams prm;
    prm.kernel = kernel;
    if (f.dx > 0) prm.dx = f.dx;
    if (f.ppc > 0) prm.ppc = f.ppc;
    return bench::run_hertz(prm);
  }
  if (name == "diffusion") {
    bench::DiffusionParams prm;
    prm.kernel = kernel;
    if (f.dx > 0) prm.dx = f.dx;
    if (f.ppc > 0) prm.ppc = f.ppc;
    if (f.frames > 0) prm.cycles = f.frames;
    return bench::run_diffusion(prm);
  }
  if (name == "clearance") {
    bench::ClearanceParams prm;
    prm.kernel = kernel;
    if (f.dx > 0) prm.dx = f.dx;
    if (f.ppc > 0) prm.ppc = f.ppc;
    if (f.dt > 0) prm.dt = f.dt;
    if (f.frames > 0) prm.duration = f.frames * prm.dt;
    return bench::run_clearance_fall(prm);
  }
  if (name == "rings") {
    bench::RingParams prm;
    prm.kernel = kernel;
    if (f.dx > 0) prm.dx = f.dx;
    if (f.ppc > 0) prm.ppc = f.ppc;
    if (f.dt > 0) prm.dt = f.dt;
    if (f.frames > 0) prm.duration = f.frames * prm.dt;
    return bench::run_ring_collision(prm);
  }
  throw ValidationError("unknown benchmark '" + name +
                        "' (expected cantilever, hertz, diffusion, clearance or rings)");
}

int run_benchmarks(const std::string& name, const CommonFlags& f) {
  const std::vector<KernelFamily> kernels = kernels_for(name, f.kernel);
  for (const KernelFamily& k : kernels) {
    bench::BenchmarkReport rep = dispatch_bench(name, k, f);
    const std::string dir = kernels.size() > 1 ? f.out + "/" + k.name() : f.out;
    bench::write_report(rep, dir);
    std::printf("%s [%s]: %s -> %s\n", rep.name.c_str(), k.name(),
                rep.checks.empty() ? "done" : (rep.all_passed() ? "pass" : "FAIL"), dir.c_str());
  }
  return 0;
}

int run_simulation(Scene scene, const CommonFlags& f) {
  if (!scene.benchmark.empty()) {
    CommonFlags bf = f;
    if (bf.kernel.empty()) bf.kernel = scene.kernel.name();
    return run_benchmarks(scene.benchmark, bf);
  }

  SimState state = build_sim_state(scene);
  bench::BenchmarkReport rep;
  rep.name = scene.name;
  rep.string_parameters["kernel"] = scene.kernel.name();
  rep.parameters["dt"] = scene.dt;
  rep.parameters["frames"] = scene.frames;
  rep.series.columns = {"t",       "com_x",   "com_y", "kinetic",
                        "elastic", "total",   "newton_iterations", "residual"};

  Real ramp_fraction = 1.0;
  for (const LoadSpec& l : scene.loads) ramp_fraction = std::min(ramp_fraction, l.ramp_fraction);

  Real mass = 0;
  for (const Particle& p : state.particles) mass += p.m;

  for (int frame = 1; frame <= scene.frames; ++frame) {
    if (!scene.loads.empty()) {
      const Real ramp_end = std::max(1.0, ramp_fraction * scene.frames);
      state.load_scale = std::min(1.0, Real(frame) / ramp_end);
    }
    const StepStats stats = step(state, scene.dt, scene.solver);
    if (frame % scene.output_every == 0 || frame == scene.frames) {
      Vec2 com = Vec2::Zero();
      for (const Particle& p : state.particles) com += p.m * p.x;
      com /= mass;
      rep.series.add_row({frame * scene.dt, com.x(), com.y(), stats.energies.kinetic,
                          stats.energies.elastic, stats.energies.total,
                          Real(stats.newton_iterations), stats.residual_inf});
    }
  }

  bench::Snapshot snap;
  snap.label = "final";
  for (const Particle& p : state.particles) {
    const Real vm =
        bench::von_mises(cauchy_stress(state.materials[std::size_t(p.material)], p.F),
                         state.materials[std::size_t(p.material)].nu);
    snap.particles.push_back({p.x.x(), p.x.y(), p.v.x(), p.v.y(), vm, p.phi});
  }
  rep.snapshots.push_back(snap);
  bench::write_report(rep, f.out);
  std::printf("%s: %d frames -> %s\n", scene.name.c_str(), scene.frames, f.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ckmpm - implicit compact-kernel material point method"};
  app.require_subcommand(1);
  check_thread_env();

  std::string scene_path;
  std::string bench_name;
  CommonFlags run_flags, bench_flags;

  CLI::App* run_cmd = app.add_subcommand("run", "run a scene file");
  run_cmd->add_option("--scene", scene_path, "scene JSON file")->required();
  add_common(run_cmd, run_flags, false);

  CLI::App* bench_cmd = app.add_subcommand("bench", "run a named benchmark");
  bench_cmd->add_option("name", bench_name, "cantilever | hertz | diffusion | clearance | rings")
      ->required();
  add_common(bench_cmd, bench_flags, true);

  std::string validate_path;
  CLI::App* validate_cmd = app.add_subcommand("validate", "validate a scene file");
  validate_cmd->add_option("--scene", validate_path, "scene JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      Scene scene = parse_scene(scene_path);
      apply_scene_overrides(scene, run_flags);
      return run_simulation(std::move(scene), run_flags);
    }
    if (bench_cmd->parsed()) {
      return run_benchmarks(bench_name, bench_flags);
    }
    if (validate_cmd->parsed()) {
      parse_scene(validate_path);
      std::printf("%s: valid\n", validate_path.c_str());
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return int(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
