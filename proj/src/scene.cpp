#include "ckmpm/scene.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace ckmpm {

using nlohmann::json;

namespace {

struct UnitScales {
  Real length = 1, mass = 1, time = 1;
  Real density() const { return mass / (length * length * length); }
  Real stress() const { return mass / (length * time * time); }
  Real velocity() const { return length / time; }
  Real accel() const { return length / (time * time); }
  Real line_force() const { return mass / (time * time); }  // 2D: N/m
};

UnitScales unit_scales(const std::string& units, std::vector<std::string>& errors) {
  if (units == "m-kg-s") return {};
  if (units == "mm-g-ms") return {1e-3, 1e-3, 1e-3};
  errors.push_back("unknown unit system '" + units + "' (expected m-kg-s or mm-g-ms)");
  return {};
}

Vec2 get_vec2(const json& j, const char* key, std::vector<std::string>& errors,
              const std::string& ctx) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != 2) {
    errors.push_back(ctx + ": missing or malformed vector field '" + key + "'");
    return Vec2::Zero();
  }
  return Vec2(j[key][0].get<Real>(), j[key][1].get<Real>());
}

}  // namespace

Scene parse_scene_json(const json& j) {
  std::vector<std::string> errors;
  Scene s;

  s.name = j.value("name", "scene");
  s.units = j.value("units", "m-kg-s");
  const UnitScales u = unit_scales(s.units, errors);

  if (j.contains("kernel")) {
    try {
      s.kernel = kernel_from_name(j["kernel"].get<std::string>());
    } catch (const Error& e) {
      errors.push_back(e.what());
    }
  }

  if (j.contains("grid")) {
    const json& g = j["grid"];
    s.grid.origin = get_vec2(g, "origin", errors, "grid") * u.length;
    if (g.contains("extent") && g["extent"].is_array() && g["extent"].size() == 2) {
      s.grid.extent = Vec2i(g["extent"][0].get<int>(), g["extent"][1].get<int>());
    } else {
      errors.push_back("grid: missing or malformed 'extent'");
    }
    s.grid.h = g.value("h", 0.0) * u.length;
  } else {
    errors.push_back("missing 'grid' section");
  }
  s.grid.multiplicity = s.kernel.grid_multiplicity();

  if (j.contains("materials") && j["materials"].is_array()) {
    for (const json& m : j["materials"]) {
      const std::string name = m.value("name", "material" + std::to_string(s.materials.size()));
      try {
        s.materials.push_back(Material::make(material_model_from_name(m.value("model", "")),
                                             m.value("E", 0.0) * u.stress(), m.value("nu", 0.0),
                                             m.value("rho", 0.0) * u.density()));
        s.material_names.push_back(name);
      } catch (const Error& e) {
        errors.push_back("material '" + name + "': " + e.what());
      }
    }
  } else {
    errors.push_back("missing 'materials' list");
  }

  auto material_index = [&](const json& b, const std::string& ctx) -> int {
    const std::string ref = b.value("material", "");
    for (std::size_t i = 0; i < s.material_names.size(); ++i) {
      if (s.material_names[i] == ref) return int(i);
    }
    errors.push_back(ctx + ": references undefined material '" + ref + "'");
    return 0;
  };

  if (j.contains("bodies") && j["bodies"].is_array()) {
    int bi = 0;
    for (const json& b : j["bodies"]) {
      const std::string ctx = "body[" + std::to_string(bi++) + "]";
      BodySpec spec;
      const std::string type = b.value("type", "");
      if (type == "box") {
        spec.shape = BodySpec::Shape::Box;
        spec.lo = get_vec2(b, "lo", errors, ctx) * u.length;
        spec.hi = get_vec2(b, "hi", errors, ctx) * u.length;
      } else if (type == "disc" || type == "ring" || type == "half_disc") {
        spec.shape = type == "disc"      ? BodySpec::Shape::Disc
                     : type == "ring"    ? BodySpec::Shape::Ring
                                         : BodySpec::Shape::HalfDisc;
        spec.center = get_vec2(b, "center", errors, ctx) * u.length;
        spec.r_outer = b.value("r_outer", 0.0) * u.length;
        spec.r_inner = b.value("r_inner", 0.0) * u.length;
      } else {
        errors.push_back(ctx + ": unknown body type '" + type + "'");
      }
      spec.material = material_index(b, ctx);
      if (b.contains("velocity")) spec.velocity = get_vec2(b, "velocity", errors, ctx) * u.velocity();
      spec.ppc = b.value("ppc", 4);
      spec.phi = b.value("phi", 0.0);
      const int k = int(std::lround(std::sqrt(Real(spec.ppc))));
      if (k * k != spec.ppc || k < 1) errors.push_back(ctx + ": ppc must be a perfect square");
      s.bodies.push_back(spec);
    }
  }

  if (j.contains("boundaries") && j["boundaries"].is_array()) {
    int bi = 0;
    for (const json& b : j["boundaries"]) {
      const std::string ctx = "boundary[" + std::to_string(bi++) + "]";
      BoundarySpec spec;
      const std::string kind = b.value("kind", "halfspace");
      if (kind == "halfspace") {
        spec.kind = BoundarySpec::Kind::HalfSpace;
        spec.point = get_vec2(b, "point", errors, ctx) * u.length;
        spec.normal = get_vec2(b, "normal", errors, ctx);
      } else if (kind == "box") {
        spec.kind = BoundarySpec::Kind::Box;
        spec.lo = get_vec2(b, "lo", errors, ctx) * u.length;
        spec.hi = get_vec2(b, "hi", errors, ctx) * u.length;
      } else {
        errors.push_back(ctx + ": unknown boundary kind '" + kind + "'");
      }
      const std::string mode = b.value("mode", "fixed_zero");
      if (mode == "fixed_zero") {
        spec.mode = DirichletMode::FixedZero;
      } else if (mode == "prescribed") {
        spec.mode = DirichletMode::Prescribed;
        spec.value = get_vec2(b, "value", errors, ctx) * u.velocity();
      } else {
        errors.push_back(ctx + ": unknown mode '" + mode + "'");
      }
      s.boundaries.push_back(spec);
    }
  }

  if (j.contains("gravity")) s.gravity = get_vec2(j, "gravity", errors, "scene") * u.accel();

  if (j.contains("loads") && j["loads"].is_array()) {
    int li = 0;
    for (const json& l : j["loads"]) {
      const std::string ctx = "load[" + std::to_string(li++) + "]";
      LoadSpec spec;
      spec.body = l.value("body", 0);
      spec.total_force = get_vec2(l, "total_force", errors, ctx) * u.line_force();
      spec.ramp_fraction = l.value("ramp_fraction", 0.5);
      if (spec.body < 0 || spec.body >= int(s.bodies.size())) {
        errors.push_back(ctx + ": body index out of range");
      }
      s.loads.push_back(spec);
    }
  }

  if (j.contains("solver")) {
    const json& sv = j["solver"];
    s.solver.beta = sv.value("beta", s.solver.beta);
    s.solver.c = sv.value("c", s.solver.c);
    s.solver.eps_residual = sv.value("eps_residual", s.solver.eps_residual);
    s.solver.max_newton_iters = sv.value("max_newton_iters", s.solver.max_newton_iters);
    s.solver.pcg_tol = sv.value("pcg_tol", s.solver.pcg_tol);
    s.solver.zeta = sv.value("zeta", s.solver.zeta);
    s.solver.theta = sv.value("theta", s.solver.theta);
    const std::string ls = sv.value("linear_solver", "auto");
    if (ls == "auto") {
      s.solver.linear_solver = LinearSolverKind::Auto;
    } else if (ls == "pcg") {
      s.solver.linear_solver = LinearSolverKind::PCG;
    } else if (ls == "direct") {
      s.solver.linear_solver = LinearSolverKind::Direct;
    } else {
      errors.push_back("solver: unknown linear_solver '" + ls + "'");
    }
    const std::string spd = sv.value("spd_mode", "clamp");
    if (spd == "clamp") {
      s.solver.spd_mode = SpdMode::Clamp;
    } else if (spd == "shift") {
      s.solver.spd_mode = SpdMode::Shift;
    } else {
      errors.push_back("solver: unknown spd_mode '" + spd + "'");
    }
    if (s.solver.theta != 1.0) {
      errors.push_back("solver: only backward Euler (theta = 1) is supported");
    }
    if (!(s.solver.beta > 0 && s.solver.beta < 1)) errors.push_back("solver: beta must be in (0,1)");
    if (!(s.solver.c > 0)) errors.push_back("solver: c must be positive");
  }

  s.dt = j.value("dt", 0.0) * u.time;
  s.frames = j.value("frames", 0);
  s.output_every = j.value("output_every", 1);
  s.benchmark = j.value("benchmark", "");

  // cross-field validation
  if (!(s.dt > 0)) errors.push_back("dt must be positive");
  if (s.frames < 0) errors.push_back("frames must be non-negative");
  if (!(s.grid.h > 0)) errors.push_back("grid: h must be positive");
  const int needed = int(std::ceil(2 * s.kernel.support_radius())) + 2;
  if (s.grid.extent.x() < needed || s.grid.extent.y() < needed) {
    errors.push_back("grid: extent must be at least support diameter + 2 nodes per axis");
  }
  if (s.grid.h > 0) {
    const Real margin = s.kernel.support_radius() * s.grid.h;
    const Vec2 dom_lo = s.grid.origin + Vec2::Constant(margin);
    const Vec2 dom_hi =
        s.grid.origin + Vec2((s.grid.extent.x() - 1) * s.grid.h, (s.grid.extent.y() - 1) * s.grid.h) -
        Vec2::Constant(margin);
    int bi = 0;
    for (const BodySpec& b : s.bodies) {
      Vec2 lo, hi;
      if (b.shape == BodySpec::Shape::Box) {
        lo = b.lo;
        hi = b.hi;
      } else {
        lo = b.center - Vec2::Constant(b.r_outer);
        hi = b.center + Vec2::Constant(b.r_outer);
      }
      if (lo.x() < dom_lo.x() || lo.y() < dom_lo.y() || hi.x() > dom_hi.x() ||
          hi.y() > dom_hi.y()) {
        errors.push_back("body[" + std::to_string(bi) +
                         "]: outside grid coverage minus one support radius");
      }
      ++bi;
    }
  }

  if (!errors.empty()) {
    std::string msg = "scene validation failed:";
    for (const std::string& e : errors) msg += "\n  - " + e;
    throw ValidationError(msg);
  }
  return s;
}

Scene parse_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scene file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("malformed JSON in " + path + ": " + e.what());
  }
  return parse_scene_json(j);
}

json scene_to_json(const Scene& s) {
  // serialized in SI (m-kg-s)
  json j;
  j["name"] = s.name;
  j["units"] = "m-kg-s";
  j["kernel"] = s.kernel.name();
  j["grid"] = {{"origin", {s.grid.origin.x(), s.grid.origin.y()}},
               {"extent", {s.grid.extent.x(), s.grid.extent.y()}},
               {"h", s.grid.h}};
  j["materials"] = json::array();
  for (std::size_t i = 0; i < s.materials.size(); ++i) {
    const Material& m = s.materials[i];
    j["materials"].push_back({{"name", s.material_names[i]},
                              {"model", material_model_name(m.model)},
                              {"E", m.E},
                              {"nu", m.nu},
                              {"rho", m.rho}});
  }
  j["bodies"] = json::array();
  for (const BodySpec& b : s.bodies) {
    json jb;
    switch (b.shape) {
      case BodySpec::Shape::Box:
        jb["type"] = "box";
        jb["lo"] = {b.lo.x(), b.lo.y()};
        jb["hi"] = {b.hi.x(), b.hi.y()};
        break;
      case BodySpec::Shape::Disc:
      case BodySpec::Shape::Ring:
      case BodySpec::Shape::HalfDisc:
        jb["type"] = b.shape == BodySpec::Shape::Disc   ? "disc"
                     : b.shape == BodySpec::Shape::Ring ? "ring"
                                                        : "half_disc";
        jb["center"] = {b.center.x(), b.center.y()};
        jb["r_outer"] = b.r_outer;
        jb["r_inner"] = b.r_inner;
        break;
    }
    jb["material"] = s.material_names[std::size_t(b.material)];
    jb["velocity"] = {b.velocity.x(), b.velocity.y()};
    jb["ppc"] = b.ppc;
    jb["phi"] = b.phi;
    j["bodies"].push_back(jb);
  }
  j["boundaries"] = json::array();
  for (const BoundarySpec& b : s.boundaries) {
    json jb;
    if (b.kind == BoundarySpec::Kind::HalfSpace) {
      jb["kind"] = "halfspace";
      jb["point"] = {b.point.x(), b.point.y()};
      jb["normal"] = {b.normal.x(), b.normal.y()};
    } else {
      jb["kind"] = "box";
      jb["lo"] = {b.lo.x(), b.lo.y()};
      jb["hi"] = {b.hi.x(), b.hi.y()};
    }
    jb["mode"] = b.mode == DirichletMode::Prescribed ? "prescribed" : "fixed_zero";
    if (b.mode == DirichletMode::Prescribed) jb["value"] = {b.value.x(), b.value.y()};
    j["boundaries"].push_back(jb);
  }
  j["gravity"] = {s.gravity.x(), s.gravity.y()};
  j["loads"] = json::array();
  for (const LoadSpec& l : s.loads) {
    j["loads"].push_back({{"body", l.body},
                          {"total_force", {l.total_force.x(), l.total_force.y()}},
                          {"ramp_fraction", l.ramp_fraction}});
  }
  j["solver"] = {{"beta", s.solver.beta},
                 {"c", s.solver.c},
                 {"eps_residual", s.solver.eps_residual},
                 {"max_newton_iters", s.solver.max_newton_iters},
                 {"pcg_tol", s.solver.pcg_tol},
                 {"zeta", s.solver.zeta},
                 {"theta", s.solver.theta},
                 {"linear_solver", s.solver.linear_solver == LinearSolverKind::PCG      ? "pcg"
                                   : s.solver.linear_solver == LinearSolverKind::Direct ? "direct"
                                                                                        : "auto"},
                 {"spd_mode", s.solver.spd_mode == SpdMode::Shift ? "shift" : "clamp"}};
  j["dt"] = s.dt;
  j["frames"] = s.frames;
  j["output_every"] = s.output_every;
  if (!s.benchmark.empty()) j["benchmark"] = s.benchmark;
  return j;
}

SimState build_sim_state(const Scene& scene) {
  SimState state;
  state.materials = scene.materials;
  state.kernel = scene.kernel;
  state.gravity = scene.gravity;
  GridConfig cfg = scene.grid;
  cfg.multiplicity = scene.kernel.grid_multiplicity();
  state.grid = DualGrid(cfg);

  std::vector<std::pair<std::size_t, std::size_t>> body_ranges;
  for (const BodySpec& b : scene.bodies) {
    const std::size_t begin = state.particles.size();
    SeedRegion region;
    switch (b.shape) {
      case BodySpec::Shape::Box:
        region.inside = [b](const Vec2& x) {
          return x.x() >= b.lo.x() && x.x() < b.hi.x() && x.y() >= b.lo.y() && x.y() < b.hi.y();
        };
        region.lo = b.lo;
        region.hi = b.hi;
        break;
      case BodySpec::Shape::Disc:
        region.inside = [b](const Vec2& x) { return (x - b.center).norm() <= b.r_outer; };
        region.lo = b.center - Vec2::Constant(b.r_outer);
        region.hi = b.center + Vec2::Constant(b.r_outer);
        break;
      case BodySpec::Shape::Ring:
        region.inside = [b](const Vec2& x) {
          const Real r = (x - b.center).norm();
          return r <= b.r_outer && r >= b.r_inner;
        };
        region.lo = b.center - Vec2::Constant(b.r_outer);
        region.hi = b.center + Vec2::Constant(b.r_outer);
        break;
      case BodySpec::Shape::HalfDisc:
        // lower half: curved side down, cut plane through the center
        region.inside = [b](const Vec2& x) {
          return (x - b.center).norm() <= b.r_outer && x.y() <= b.center.y();
        };
        region.lo = b.center - Vec2::Constant(b.r_outer);
        region.hi = Vec2(b.center.x() + b.r_outer, b.center.y());
        break;
    }
    seed_particles(state.particles, cfg, region, b.ppc,
                   scene.materials[std::size_t(b.material)].rho, b.material, b.velocity, b.phi);
    body_ranges.emplace_back(begin, state.particles.size());
  }

  for (const BoundarySpec& b : scene.boundaries) {
    BoundaryRegion region;
    if (b.kind == BoundarySpec::Kind::HalfSpace) {
      const Vec2 pt = b.point;
      const Vec2 nrm = b.normal;
      region.region = [pt, nrm](const Vec2& x) { return (x - pt).dot(nrm) <= 0; };
    } else {
      const Vec2 lo = b.lo, hi = b.hi;
      region.region = [lo, hi](const Vec2& x) {
        return x.x() >= lo.x() && x.x() <= hi.x() && x.y() >= lo.y() && x.y() <= hi.y();
      };
    }
    region.mode = b.mode;
    region.value = b.value;
    state.boundaries.push_back(std::move(region));
  }

  for (const LoadSpec& l : scene.loads) {
    const auto [begin, end] = body_ranges[std::size_t(l.body)];
    const BodySpec& b = scene.bodies[std::size_t(l.body)];
    const Real spacing = scene.grid.h / std::sqrt(Real(b.ppc));
    const std::vector<std::int32_t> top = top_layer_particles(state, begin, end, spacing);
    for (std::int32_t idx : top) {
      state.loads.push_back(ParticleLoad{idx, l.total_force / Real(top.size())});
    }
  }
  return state;
}

std::vector<std::int32_t> top_layer_particles(const SimState& state, std::size_t body_begin,
                                              std::size_t body_end, Real spacing) {
  Real y_max = -std::numeric_limits<Real>::infinity();
  for (std::size_t i = body_begin; i < body_end; ++i) {
    y_max = std::max(y_max, state.particles[i].x.y());
  }
  std::vector<std::int32_t> out;
  for (std::size_t i = body_begin; i < body_end; ++i) {
    if (state.particles[i].x.y() > y_max - 0.5 * spacing) out.push_back(std::int32_t(i));
  }
  return out;
}

}  // namespace ckmpm
