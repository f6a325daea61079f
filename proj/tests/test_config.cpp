#include <doctest.h>

#include "proxgal/config.hpp"

using namespace proxgal;

TEST_SUITE("config") {

TEST_CASE("defaults and a full round trip") {
  const RunConfig cfg = parse_config_json(R"({
    "problem": {
      "kind": "obstacle",
      "pair": "p1_p1",
      "data": {"preset": "radial2d", "b": 0.2}
    },
    "discretization": {"mesh": "square_crisscross", "levels": [8, 16], "quadrature_degree": 6},
    "solver": {
      "schedule": "geometric", "alpha0": 2.0, "ratio": 3.0,
      "max_outer": 25, "outer_tol": 1e-7,
      "newton": {"max_iters": 40, "abs_tol": 1e-12}
    },
    "outputs": {"directory": "somewhere", "formats": ["csv"]}
  })");
  CHECK(cfg.problem_kind == "obstacle");
  CHECK(cfg.pair == ObstaclePair::P1P1);
  CHECK(cfg.data_preset == "radial2d");
  CHECK(cfg.radial.b == 0.2);
  CHECK(cfg.dim == 2);
  CHECK(cfg.levels == std::vector<int>{8, 16});
  CHECK(cfg.quad_degree == 6);
  CHECK(cfg.pg.alpha0 == 2.0);
  CHECK(cfg.pg.ratio == 3.0);
  CHECK(cfg.pg.max_outer == 25);
  CHECK(cfg.pg.newton.max_iters == 40);
  CHECK(cfg.out_dir == "somewhere");
  CHECK(cfg.has_reference());
  CHECK_FALSE(cfg.config_hash.empty());
}

TEST_CASE("unknown keys are rejected by name") {
  try {
    parse_config_json(R"({"problem": {"kind": "obstacle", "frobnicate": 1}})");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("frobnicate") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_json(R"({"solvers": {}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_json(R"({"solver": {"newton": {"max_its": 3}}})"), ConfigError);
}

TEST_CASE("invalid values are rejected") {
  CHECK_THROWS_AS(parse_config_json(R"({"problem": {"kind": "heat"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_json(R"({"problem": {"pair": "p2_p2"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_json(R"({"solver": {"schedule": "sometimes"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_json(R"({"solver": {"ratio": 0.5}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_json(R"({"discretization": {"levels": [0]}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_json("not json at all"), ConfigError);
  // preset/mesh consistency
  CHECK_THROWS_AS(parse_config_json(R"({
    "problem": {"data": {"preset": "radial2d"}},
    "discretization": {"mesh": "interval"}
  })"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_json(R"({
    "problem": {"kind": "signorini"},
    "discretization": {"mesh": "interval"}
  })"),
                  ConfigError);
}

TEST_CASE("data functions: constants and polynomial coefficients") {
  const RunConfig cfg = parse_config_json(R"({
    "problem": {
      "kind": "obstacle",
      "data": {
        "preset": "custom",
        "f": {"const": -3.0},
        "obstacle": {"poly1d": [-0.5, 0.25]}
      }
    },
    "discretization": {"mesh": "interval", "levels": [8]}
  })");
  const auto f = cfg.load_scalar();
  const auto phi = cfg.obstacle_fn();
  CHECK(f({0.3, 0}) == -3.0);
  CHECK(phi({0.0, 0}) == doctest::Approx(-0.5));
  CHECK(phi({1.0, 0}) == doctest::Approx(-0.25));
  CHECK_FALSE(cfg.has_reference());
  CHECK_THROWS_AS(cfg.reference(), ConfigError);
  // the materialized problem is usable
  const ProblemSpec p = cfg.make_problem(8);
  CHECK(p.W->n_dofs() == 8);
}

TEST_CASE("signorini setup materialization") {
  const RunConfig cfg = parse_config_json(R"({
    "problem": {
      "kind": "signorini",
      "lame": {"lambda": 2.0, "mu": 0.5},
      "load": {"x": 0.0, "y": -1.0},
      "gap": {"a0": 0.1, "a1": 0.0}
    },
    "discretization": {"mesh": "square_crisscross", "levels": [4]}
  })");
  const auto setup = cfg.signorini_setup();
  CHECK(setup.lame.lambda == 2.0);
  CHECK(setup.gap({0.2, 0.0}) == doctest::Approx(0.1));
  const ProblemSpec p = cfg.make_problem(4);
  CHECK(p.kind == ProblemSpec::Kind::Signorini);
  CHECK(p.W->n_dofs() == 3);
}

}  // TEST_SUITE
