#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include "ckmpm/scene.hpp"

using namespace ckmpm;
using nlohmann::json;

namespace {

json minimal_scene() {
  return json::parse(R"({
    "name": "mini",
    "kernel": "compact",
    "grid": {"origin": [0, 0], "extent": [16, 16], "h": 0.25},
    "materials": [{"name": "soft", "model": "fixed_corotated", "E": 1e4, "nu": 0.2, "rho": 1000}],
    "bodies": [{"type": "box", "lo": [1, 1], "hi": [2, 2], "material": "soft", "ppc": 4}],
    "gravity": [0, -10],
    "dt": 0.001,
    "frames": 10
  })");
}

}  // namespace

TEST_CASE("minimal scene parses and builds") {
  const Scene s = parse_scene_json(minimal_scene());
  CHECK(s.kernel.kind == KernelKind::Compact);
  CHECK(s.grid.h == 0.25);
  CHECK(s.materials.size() == 1);
  CHECK(s.dt == 0.001);

  SimState st = build_sim_state(s);
  CHECK(st.particles.size() == 64);
  CHECK(st.kernel.grid_multiplicity() == 2);
  CHECK(st.particles[0].m == doctest::Approx(1000.0 * 0.25 * 0.25 / 4));
}

TEST_CASE("validation reports every error, not just the first") {
  json j = minimal_scene();
  j["dt"] = 0.0;
  j["bodies"][0]["material"] = "missing";
  j["bodies"].push_back(
      {{"type", "disc"}, {"center", {20.0, 20.0}}, {"r_outer", 1.0}, {"material", "soft"}});
  try {
    parse_scene_json(j);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("dt must be positive") != std::string::npos);
    CHECK(msg.find("undefined material 'missing'") != std::string::npos);
    CHECK(msg.find("outside grid coverage") != std::string::npos);
  }
}

TEST_CASE("malformed json raises ParseError") {
  CHECK_THROWS_AS(parse_scene("/nonexistent/path.json"), ParseError);
}

TEST_CASE("theta != 1 is rejected") {
  json j = minimal_scene();
  j["solver"] = {{"theta", 0.5}};
  CHECK_THROWS_AS(parse_scene_json(j), ValidationError);
}

TEST_CASE("scene round-trip through serialization") {
  json j = minimal_scene();
  j["boundaries"] = json::array({{{"kind", "halfspace"},
                                  {"point", {0.0, 1.0}},
                                  {"normal", {0.0, -1.0}},
                                  {"mode", "fixed_zero"}}});
  j["loads"] = json::array({{{"body", 0}, {"total_force", {0.0, -100.0}}, {"ramp_fraction", 0.5}}});
  const Scene a = parse_scene_json(j);
  const Scene b = parse_scene_json(scene_to_json(a));
  CHECK(a.grid.h == b.grid.h);
  CHECK((a.grid.origin - b.grid.origin).norm() == 0.0);
  CHECK(a.kernel.kind == b.kernel.kind);
  CHECK(a.materials.size() == b.materials.size());
  CHECK(a.materials[0].E == b.materials[0].E);
  CHECK(a.bodies.size() == b.bodies.size());
  CHECK((a.bodies[0].lo - b.bodies[0].lo).norm() == 0.0);
  CHECK(a.boundaries.size() == b.boundaries.size());
  CHECK(a.loads.size() == b.loads.size());
  CHECK(a.loads[0].total_force.y() == b.loads[0].total_force.y());
  CHECK(a.dt == b.dt);
  CHECK(a.frames == b.frames);

  // equivalent states
  SimState sa = build_sim_state(a);
  SimState sb = build_sim_state(b);
  REQUIRE(sa.particles.size() == sb.particles.size());
  for (std::size_t i = 0; i < sa.particles.size(); ++i) {
    CHECK((sa.particles[i].x - sb.particles[i].x).norm() == 0.0);
  }
}

TEST_CASE("mm-g-ms unit conversion") {
  json j = json::parse(R"({
    "name": "units",
    "units": "mm-g-ms",
    "kernel": "quadratic",
    "grid": {"origin": [0, 0], "extent": [16, 16], "h": 1.0},
    "materials": [{"name": "m", "model": "fixed_corotated", "E": 2.0, "nu": 0.1, "rho": 1e-3}],
    "bodies": [{"type": "box", "lo": [4, 4], "hi": [8, 8], "material": "m", "velocity": [1, 0]}],
    "gravity": [0, -1e-2],
    "dt": 0.5,
    "frames": 1
  })");
  const Scene s = parse_scene_json(j);
  CHECK(s.grid.h == doctest::Approx(1e-3));                 // mm -> m
  CHECK(s.materials[0].E == doctest::Approx(2.0e6));        // MPa -> Pa
  CHECK(s.materials[0].rho == doctest::Approx(1000.0));     // 1e-3 g/mm^3 -> 1000 kg/m^3
  CHECK(s.gravity.y() == doctest::Approx(-10.0));           // 1e-2 mm/ms^2 -> 10 m/s^2
  CHECK(s.bodies[0].velocity.x() == doctest::Approx(1.0));  // mm/ms == m/s
  CHECK(s.dt == doctest::Approx(5e-4));                     // ms -> s
}

TEST_CASE("bundled scenes parse") {
  for (const char* name :
       {"cantilever.json", "hertz.json", "diffusion.json", "clearance.json", "rings.json"}) {
    const Scene s = parse_scene(std::string(SCENES_DIR) + "/" + name);
    CHECK(!s.benchmark.empty());
  }
  // cantilever.json carries the validation parameters in mm-g-ms units
  const Scene c = parse_scene(std::string(SCENES_DIR) + "/cantilever.json");
  CHECK(c.grid.h == doctest::Approx(3.906e-6));
  CHECK(c.materials[0].E == doctest::Approx(2.0e6));
  CHECK(c.materials[0].nu == doctest::Approx(0.1));
  CHECK(c.materials[0].rho == doctest::Approx(1000.0));
  CHECK(c.gravity.y() == doctest::Approx(-10.0));
}
