#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ckmpm/solver.hpp"

namespace ckmpm {

struct BodySpec {
  enum class Shape { Box, Disc, Ring, HalfDisc };
  Shape shape = Shape::Box;
  Vec2 lo = Vec2::Zero();      // Box corners
  Vec2 hi = Vec2::Zero();
  Vec2 center = Vec2::Zero();  // Disc / Ring / HalfDisc
  Real r_outer = 0;
  Real r_inner = 0;            // Ring only
  int material = 0;
  Vec2 velocity = Vec2::Zero();
  int ppc = 4;
  Real phi = 0;
};

struct BoundarySpec {
  enum class Kind { HalfSpace, Box };
  Kind kind = Kind::HalfSpace;
  Vec2 point = Vec2::Zero();   // HalfSpace: fixes x with (x - point).dot(normal) <= 0
  Vec2 normal = Vec2::UnitY();
  Vec2 lo = Vec2::Zero();      // Box
  Vec2 hi = Vec2::Zero();
  DirichletMode mode = DirichletMode::FixedZero;
  Vec2 value = Vec2::Zero();
};

/// Distributed surface load: total force spread uniformly over the top
/// particle layer of a body, ramped linearly over the first `ramp_fraction`
/// of the run and held afterwards.
struct LoadSpec {
  int body = 0;
  Vec2 total_force = Vec2::Zero();
  Real ramp_fraction = 0.5;
};

struct Scene {
  std::string name;
  std::string units = "m-kg-s";  // or "mm-g-ms"
  GridConfig grid;
  KernelFamily kernel;
  std::vector<std::string> material_names;
  std::vector<Material> materials;
  std::vector<BodySpec> bodies;
  std::vector<BoundarySpec> boundaries;
  Vec2 gravity = Vec2::Zero();
  std::vector<LoadSpec> loads;
  SolverParams solver;
  Real dt = 0;
  int frames = 0;
  int output_every = 1;
  std::string benchmark;  // empty, or a benchmark name dispatched by the CLI
};

/// Parse and validate a scene file. All quantities are converted to SI at
/// parse time according to the declared unit system. Throws ParseError for
/// malformed JSON and ValidationError listing every validation failure.
Scene parse_scene(const std::string& path);
Scene parse_scene_json(const nlohmann::json& j);

nlohmann::json scene_to_json(const Scene& scene);

/// Instantiate particles, grid and solver state from a scene.
SimState build_sim_state(const Scene& scene);

/// Indices of the particles forming the top layer of a body (used to spread
/// surface loads); `spacing` is the sub-lattice spacing of the body.
std::vector<std::int32_t> top_layer_particles(const SimState& state, std::size_t body_begin,
                                              std::size_t body_end, Real spacing);

}  // namespace ckmpm
