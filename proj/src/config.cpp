#include "proxgal/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace proxgal {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError("config: '" + path + "' must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items())
    if (!ok.count(key))
      throw ConfigError("config: unknown key '" + (path.empty() ? key : path + "." + key) + "'");
}

double num(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ConfigError(std::string("config: '") + key + "' must be a number");
  return obj[key].get<double>();
}

DataFn parse_data_fn(const json& obj, const std::string& path) {
  check_keys(obj, path, {"const", "poly1d"});
  DataFn fn;
  if (obj.contains("const")) {
    fn.preset = "const";
    fn.value = obj["const"].get<double>();
  } else if (obj.contains("poly1d")) {
    fn.preset = "poly1d";
    fn.coeffs = obj["poly1d"].get<std::vector<double>>();
  } else {
    throw ConfigError("config: '" + path + "' needs 'const' or 'poly1d'");
  }
  return fn;
}

}  // namespace

SpatialFn DataFn::make() const {
  if (preset == "const") {
    const double v = value;
    return [v](const Pt&) { return v; };
  }
  if (preset == "poly1d") {
    const std::vector<double> c = coeffs;
    return [c](const Pt& p) {
      double acc = 0.0;
      for (size_t k = c.size(); k-- > 0;) acc = acc * p[0] + c[k];
      return acc;
    };
  }
  throw ConfigError("config: data function not specified");
}

RunConfig parse_config_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
  }
  check_keys(root, "", {"problem", "discretization", "solver", "outputs"});
  RunConfig cfg;
  cfg.config_hash = hex64(fnv1a(text));

  if (root.contains("problem")) {
    const auto& p = root["problem"];
    check_keys(p, "problem",
               {"kind", "pair", "data", "lame", "load", "gap"});
    if (p.contains("kind")) cfg.problem_kind = p["kind"].get<std::string>();
    if (cfg.problem_kind != "obstacle" && cfg.problem_kind != "signorini")
      throw ConfigError("config: problem.kind must be 'obstacle' or 'signorini'");
    if (p.contains("pair")) {
      const auto s = p["pair"].get<std::string>();
      if (s == "bubble_p0")
        cfg.pair = ObstaclePair::BubbleP0;
      else if (s == "p1_p1")
        cfg.pair = ObstaclePair::P1P1;
      else
        throw ConfigError("config: problem.pair must be 'bubble_p0' or 'p1_p1'");
    }
    if (p.contains("data")) {
      const auto& d = p["data"];
      check_keys(d, "problem.data",
                 {"preset", "f0", "phi0", "b", "d", "support_radius", "blend_start",
                  "blend_end", "delta0", "f", "obstacle"});
      if (d.contains("preset")) cfg.data_preset = d["preset"].get<std::string>();
      if (cfg.data_preset != "analytic1d" && cfg.data_preset != "radial2d" &&
          cfg.data_preset != "trivial" && cfg.data_preset != "custom")
        throw ConfigError("config: problem.data.preset must be one of "
                          "analytic1d|radial2d|trivial|custom");
      cfg.f0 = num(d, "f0", cfg.f0);
      cfg.phi0 = num(d, "phi0", cfg.phi0);
      cfg.radial.b = num(d, "b", cfg.radial.b);
      cfg.radial.d = num(d, "d", cfg.radial.d);
      cfg.radial.support_radius = num(d, "support_radius", cfg.radial.support_radius);
      cfg.radial.blend_start = num(d, "blend_start", cfg.radial.blend_start);
      cfg.radial.blend_end = num(d, "blend_end", cfg.radial.blend_end);
      cfg.radial.delta0 = num(d, "delta0", cfg.radial.delta0);
      if (d.contains("f")) cfg.custom_f = parse_data_fn(d["f"], "problem.data.f");
      if (d.contains("obstacle"))
        cfg.custom_phi = parse_data_fn(d["obstacle"], "problem.data.obstacle");
    }
    if (p.contains("lame")) {
      check_keys(p["lame"], "problem.lame", {"lambda", "mu"});
      cfg.lame.lambda = num(p["lame"], "lambda", cfg.lame.lambda);
      cfg.lame.mu = num(p["lame"], "mu", cfg.lame.mu);
    }
    if (p.contains("load")) {
      check_keys(p["load"], "problem.load", {"x", "y"});
      cfg.load_x = num(p["load"], "x", cfg.load_x);
      cfg.load_y = num(p["load"], "y", cfg.load_y);
    }
    if (p.contains("gap")) {
      check_keys(p["gap"], "problem.gap", {"a0", "a1"});
      cfg.gap_a0 = num(p["gap"], "a0", cfg.gap_a0);
      cfg.gap_a1 = num(p["gap"], "a1", cfg.gap_a1);
    }
  }

  if (root.contains("discretization")) {
    const auto& d = root["discretization"];
    check_keys(d, "discretization", {"mesh", "levels", "quadrature_degree"});
    if (d.contains("mesh")) cfg.mesh_kind = d["mesh"].get<std::string>();
    if (cfg.mesh_kind != "interval" && cfg.mesh_kind != "square_crisscross" &&
        cfg.mesh_kind != "square_diagonal" && cfg.mesh_kind != "lshape")
      throw ConfigError("config: discretization.mesh must be one of "
                        "interval|square_crisscross|square_diagonal|lshape");
    if (d.contains("levels")) {
      cfg.levels = d["levels"].get<std::vector<int>>();
      for (int n : cfg.levels)
        if (n < 1) throw ConfigError("config: discretization.levels must be positive");
    }
    cfg.quad_degree = static_cast<int>(num(d, "quadrature_degree", cfg.quad_degree));
  }
  cfg.dim = cfg.mesh_kind == "interval" ? 1 : 2;

  if (root.contains("solver")) {
    const auto& s = root["solver"];
    check_keys(s, "solver",
               {"schedule", "alpha0", "ratio", "max_outer", "outer_tol", "newton"});
    if (s.contains("schedule")) {
      const auto sched = s["schedule"].get<std::string>();
      if (sched == "constant")
        cfg.pg.schedule = AlphaSchedule::Constant;
      else if (sched == "geometric")
        cfg.pg.schedule = AlphaSchedule::Geometric;
      else if (sched == "doubling")
        cfg.pg.schedule = AlphaSchedule::Doubling;
      else
        throw ConfigError("config: solver.schedule must be constant|geometric|doubling");
    }
    cfg.pg.alpha0 = num(s, "alpha0", cfg.pg.alpha0);
    cfg.pg.ratio = num(s, "ratio", cfg.pg.ratio);
    cfg.pg.max_outer = static_cast<int>(num(s, "max_outer", cfg.pg.max_outer));
    cfg.pg.outer_tol = num(s, "outer_tol", cfg.pg.outer_tol);
    if (s.contains("newton")) {
      const auto& n = s["newton"];
      check_keys(n, "solver.newton",
                 {"max_iters", "abs_tol", "rel_tol", "max_backtracks", "max_step"});
      cfg.pg.newton.max_iters = static_cast<int>(num(n, "max_iters", cfg.pg.newton.max_iters));
      cfg.pg.newton.abs_tol = num(n, "abs_tol", cfg.pg.newton.abs_tol);
      cfg.pg.newton.rel_tol = num(n, "rel_tol", cfg.pg.newton.rel_tol);
      cfg.pg.newton.max_backtracks =
          static_cast<int>(num(n, "max_backtracks", cfg.pg.newton.max_backtracks));
      cfg.pg.newton.max_step_inf = num(n, "max_step", cfg.pg.newton.max_step_inf);
    }
  }

  if (root.contains("outputs")) {
    const auto& o = root["outputs"];
    check_keys(o, "outputs", {"directory", "formats"});
    if (o.contains("directory")) cfg.out_dir = o["directory"].get<std::string>();
    if (o.contains("formats")) cfg.formats = o["formats"].get<std::vector<std::string>>();
  }

  try {
    cfg.pg.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("config: solver block invalid: ") + e.what());
  }

  // preset/mesh consistency
  if (cfg.problem_kind == "obstacle") {
    if (cfg.data_preset == "analytic1d" && cfg.dim != 1)
      throw ConfigError("config: preset analytic1d requires the interval mesh");
    if (cfg.data_preset == "radial2d" && cfg.dim != 2)
      throw ConfigError("config: preset radial2d requires a square mesh");
  }
  if (cfg.problem_kind == "signorini" && cfg.dim != 2)
    throw ConfigError("config: signorini requires a square mesh");
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw ConfigError("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_json(ss.str());
}

ReferenceSolution RunConfig::reference() const {
  if (data_preset == "analytic1d") return analytic_obstacle_1d(f0, phi0);
  if (data_preset == "radial2d") return radial_obstacle_2d(radial);
  throw ConfigError("config: preset '" + data_preset + "' has no reference solution");
}

SpatialFn RunConfig::load_scalar() const {
  if (data_preset == "analytic1d") return reference().f;
  if (data_preset == "radial2d") return reference().f;
  if (data_preset == "trivial") return [](const Pt&) { return 0.0; };
  return custom_f.make();
}

SpatialFn RunConfig::obstacle_fn() const {
  if (data_preset == "analytic1d") return reference().obstacle;
  if (data_preset == "radial2d") return reference().obstacle;
  if (data_preset == "trivial") return [](const Pt&) { return -1.0; };
  return custom_phi.make();
}

SignoriniSetup RunConfig::signorini_setup() const {
  SignoriniSetup setup;
  setup.lame = lame;
  const double lx = load_x, ly = load_y;
  setup.load = [lx, ly](const Pt&) { return Eigen::Vector2d(lx, ly); };
  const double a0 = gap_a0, a1 = gap_a1;
  setup.gap = [a0, a1](const Pt& p) { return a0 + a1 * (p[0] - 0.5) * (p[0] - 0.5); };
  return setup;
}

std::shared_ptr<Mesh> RunConfig::make_mesh(int n) const {
  if (problem_kind == "signorini") {
    const SquarePattern pat =
        mesh_kind == "square_diagonal" ? SquarePattern::Diagonal : SquarePattern::Crisscross;
    return contact_square_mesh(n, pat);
  }
  if (mesh_kind == "interval") return std::make_shared<Mesh>(unit_interval_mesh(n));
  if (mesh_kind == "square_crisscross")
    return std::make_shared<Mesh>(unit_square_mesh(n, SquarePattern::Crisscross));
  if (mesh_kind == "square_diagonal")
    return std::make_shared<Mesh>(unit_square_mesh(n, SquarePattern::Diagonal));
  return std::make_shared<Mesh>(l_shape_mesh(n));
}

ProblemSpec RunConfig::make_problem(int n) const {
  if (problem_kind == "signorini") {
    const auto setup = signorini_setup();
    return build_signorini(make_mesh(n), setup.lame, setup.load, setup.gap, "dirichlet",
                           "contact", quad_degree > 0 ? quad_degree : 4);
  }
  return build_obstacle(make_mesh(n), load_scalar(), obstacle_fn(), pair, quad_degree);
}

}  // namespace proxgal
