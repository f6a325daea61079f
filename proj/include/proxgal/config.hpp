#pragma once
// Run configuration: one JSON file, schema-validated (unknown keys rejected);
// data functions are named presets or coefficient lists, never code.

#include <memory>
#include <string>
#include <vector>

#include "proxgal/pg.hpp"
#include "proxgal/problems.hpp"
#include "proxgal/study.hpp"

namespace proxgal {

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(what) {}
};

struct DataFn {
  std::string preset;              // "const" | "poly1d"
  double value = 0.0;              // const
  std::vector<double> coeffs;      // poly1d in x
  SpatialFn make() const;
};

struct RunConfig {
  // problem block
  std::string problem_kind = "obstacle";  // obstacle | signorini
  int dim = 1;
  ObstaclePair pair = ObstaclePair::BubbleP0;
  std::string data_preset = "analytic1d";  // analytic1d | radial2d | trivial | custom
  double f0 = -2.0;
  double phi0 = -0.125;
  RadialParams radial;
  DataFn custom_f, custom_phi;
  LameParameters lame;
  double load_x = 0.0, load_y = -1.5;
  double gap_a0 = 0.05, gap_a1 = 0.2;  // g = a0 + a1 (x - 1/2)^2

  // discretization block
  std::string mesh_kind = "interval";  // interval | square_crisscross | square_diagonal | lshape
  std::vector<int> levels{32, 64};
  int quad_degree = 0;  // 0 selects the dimension default

  // solver block
  PGConfig pg;

  // outputs block
  std::string out_dir = "out";
  std::vector<std::string> formats{"csv", "json"};

  unsigned seed = 0;
  std::string config_hash;

  bool has_reference() const {
    return problem_kind == "obstacle" &&
           (data_preset == "analytic1d" || data_preset == "radial2d");
  }
  ReferenceSolution reference() const;
  SpatialFn load_scalar() const;      // obstacle f
  SpatialFn obstacle_fn() const;
  SignoriniSetup signorini_setup() const;
  std::shared_ptr<Mesh> make_mesh(int n) const;
  ProblemSpec make_problem(int n) const;
};

RunConfig parse_config_json(const std::string& text);
RunConfig parse_config_file(const std::string& path);

}  // namespace proxgal
