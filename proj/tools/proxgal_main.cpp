// proxgal: batch front-end for the constrained variational solvers.
//
// Subcommands:
//   solve            one proximal solve, trajectory + solution files
//   study            mesh-sequence error/EOC study with plot data
//   verify-operators entropy calculus and interpolation-operator checks
//   mesh-info        structural report for the configured mesh
//
// Exit codes: 0 ok, 2 configuration error, 3 solver failure, 4 verification
// failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "proxgal/config.hpp"
#include "proxgal/operators.hpp"
#include "proxgal/study.hpp"

namespace fs = std::filesystem;
using namespace proxgal;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12e", v);
  return buf;
}

struct Emitter {
  fs::path dir;
  Manifest manifest{};
  void emit(const std::string& name, const std::string& content) {
    write_text_file((dir / name).string(), content);
    manifest.add(name, content);
  }
};

int count_dissipation_violations(const PGTrajectory& traj) {
  if (traj.states.empty()) return 0;
  const double scale = 1e-9 * (1.0 + std::abs(traj.states.front().energy));
  int n = 0;
  for (const auto& st : traj.states)
    if (st.k >= 2 && st.dissipation_gap > scale) ++n;
  return n;
}

int cmd_solve(const RunConfig& cfg) {
  Emitter em{fs::path(cfg.out_dir)};
  fs::create_directories(em.dir);
  const int n = cfg.levels.front();
  ProblemSpec p = cfg.make_problem(n);
  for (const auto& w : p.warnings) std::cerr << "warning: " << w << "\n";
  const PGTrajectory traj = pg_solve(p, cfg.pg);

  em.emit("trajectory.csv", trajectory_csv(traj));
  {
    std::ostringstream mesh_txt;
    write_mesh(*p.mesh, mesh_txt);
    em.emit("mesh.txt", mesh_txt.str());
  }
  if (!traj.states.empty()) {
    const auto& last = traj.back();
    FeFunction u(*p.V), psi(*p.W), lambda(*p.W);
    u.coeffs = last.u;
    psi.coeffs = last.psi;
    lambda.coeffs = last.lambda;
    write_fefunction(u, (em.dir / "u.csv").string(), (em.dir / "u.json").string(), "mesh.txt");
    write_fefunction(psi, (em.dir / "psi.csv").string(), (em.dir / "psi.json").string(),
                     "mesh.txt");
    write_fefunction(lambda, (em.dir / "lambda.csv").string(),
                     (em.dir / "lambda.json").string(), "mesh.txt");
  }

  const bool ok = traj.reason == PGTermination::Converged;
  std::ostringstream summary;
  summary << "{\n  \"config_hash\": \"" << cfg.config_hash << "\",\n  \"level\": " << n
          << ",\n  \"converged\": " << (ok ? "true" : "false") << ",\n  \"iterations\": "
          << traj.iterations();
  if (!traj.states.empty()) {
    const auto& last = traj.back();
    summary << ",\n  \"final_energy\": " << fmt(last.energy)
            << ",\n  \"final_margin\": " << fmt(last.feasibility_margin)
            << ",\n  \"lambda_l2\": " << fmt(last.lambda_l2)
            << ",\n  \"dissipation_violations\": " << count_dissipation_violations(traj);
  }
  if (!traj.failure_message.empty())
    summary << ",\n  \"failure\": \"" << traj.failure_message << "\"";
  summary << ",\n  \"files\": " << em.manifest.to_json() << "\n}\n";
  write_text_file((em.dir / "summary.json").string(), summary.str());

  if (!ok) {
    std::cerr << "solver failure: "
              << (traj.failure_message.empty() ? "no convergence within max_outer"
                                               : traj.failure_message)
              << "\n";
    return 3;
  }
  std::cout << "converged in " << traj.iterations() << " outer iterations, energy "
            << fmt(traj.back().energy) << "\n";
  return 0;
}

int cmd_study(const RunConfig& cfg) {
  Emitter em{fs::path(cfg.out_dir)};
  fs::create_directories(em.dir);
  if (cfg.levels.size() < 2) throw ConfigError("study: need at least two mesh levels");
  if (cfg.problem_kind == "obstacle" && !cfg.has_reference())
    throw ConfigError("study: obstacle studies need preset analytic1d or radial2d");

  StudyReport report;
  std::ostringstream meta;
  meta << "{\"config_hash\": \"" << cfg.config_hash << "\", \"kind\": \"" << cfg.problem_kind
       << "\"";
  if (cfg.problem_kind == "obstacle")
    meta << ", \"preset\": \"" << cfg.data_preset << "\", \"pair\": \""
         << (cfg.pair == ObstaclePair::BubbleP0 ? "bubble_p0" : "p1_p1") << "\"";
  meta << ", \"outer_tol\": " << fmt(cfg.pg.outer_tol) << "}";

  if (cfg.problem_kind == "signorini") {
    const auto setup = cfg.signorini_setup();
    const int ref_level = 4 * cfg.levels.back();
    auto result = run_signorini_study(setup, cfg.levels, ref_level, cfg.pg,
                                      cfg.quad_degree > 0 ? cfg.quad_degree : 4);
    report = std::move(result.report);
  } else {
    const auto ref = cfg.reference();
    const SquarePattern pattern = cfg.mesh_kind == "square_diagonal" ? SquarePattern::Diagonal
                                                                     : SquarePattern::Crisscross;
    auto result =
        run_obstacle_study(ref, cfg.dim, cfg.levels, cfg.pair, cfg.pg, cfg.quad_degree, pattern);
    report = std::move(result.report);

    // optimization-decay series on the finest mesh, constant steps
    ProblemSpec p = cfg.make_problem(cfg.levels.back());
    const std::vector<int> ells{4, 8, 16, 32, 64};
    const DecaySeries decay = optimization_decay(p, 1.0, ells, 200, cfg.pg.newton);
    std::ostringstream dcsv;
    dcsv << "# meta: {\"loglog_slope\": " << fmt(decay.loglog_slope) << "}\n";
    dcsv << "ell,sum_alpha,err_a\n";
    for (size_t i = 0; i < decay.ell.size(); ++i)
      dcsv << decay.ell[i] << ',' << fmt(decay.sum_alpha[i]) << ',' << fmt(decay.err_a[i])
           << '\n';
    em.emit("decay.csv", dcsv.str());
  }
  report.meta_json = meta.str();
  em.emit("report.csv", report.to_csv());

  // per-curve plot data
  for (const auto& [name, get] :
       std::vector<std::pair<std::string, double StudyRow::*>>{{"h1", &StudyRow::err_h1},
                                                               {"l2", &StudyRow::err_l2},
                                                               {"dual", &StudyRow::err_dual},
                                                               {"obs", &StudyRow::err_obs}}) {
    std::ostringstream pcsv;
    pcsv << "h,error\n";
    for (const auto& r : report.rows) pcsv << fmt(r.h) << ',' << fmt(r.*get) << '\n';
    em.emit("plot_" + name + ".csv", pcsv.str());
  }

  std::ostringstream summary;
  summary << "{\n  \"config_hash\": \"" << cfg.config_hash << "\",\n  \"levels\": [";
  for (size_t i = 0; i < cfg.levels.size(); ++i)
    summary << (i ? ", " : "") << cfg.levels[i];
  summary << "],\n  \"iterations\": [";
  for (size_t i = 0; i < report.rows.size(); ++i)
    summary << (i ? ", " : "") << report.rows[i].iterations;
  summary << "],\n  \"eoc_h1\": [";
  for (size_t i = 0; i < report.eoc_h1.size(); ++i)
    summary << (i ? ", " : "") << fmt(report.eoc_h1[i]);
  summary << "],\n  \"files\": " << em.manifest.to_json() << "\n}\n";
  write_text_file((em.dir / "summary.json").string(), summary.str());
  std::cout << report.to_csv();
  return 0;
}

struct VerifyRow {
  std::string section, name;
  double value, threshold;
  bool pass;
};

int cmd_verify(const RunConfig& cfg, unsigned seed) {
  Emitter em{fs::path(cfg.out_dir)};
  fs::create_directories(em.dir);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0), latent(-5.0, 5.0);
  std::vector<VerifyRow> rows;
  auto push = [&](const std::string& sec, const std::string& name, double value,
                  double threshold, bool below_is_pass = true) {
    rows.push_back({sec, name, value, threshold, below_is_pass ? value <= threshold
                                                               : value >= threshold});
  };

  // entropy calculus: finite-difference consistency and inverse round trips
  const std::vector<std::pair<std::string, LegendreEntropy>> entropies = {
      {"shannon", LegendreEntropy::shannon([](const Pt& x) { return -0.3 - 0.1 * x[0] * x[0]; })},
      {"fermi_dirac", LegendreEntropy::fermi_dirac([](const Pt&) { return -1.0; },
                                                   [](const Pt& x) { return 1.0 + 0.5 * x[1]; })},
      {"hellinger", LegendreEntropy::hellinger(2.0)},
      {"signorini_log",
       LegendreEntropy::signorini_log([](const Pt& x) { return 0.1 + x[0] * x[0]; })}};
  for (const auto& [name, e] : entropies) {
    double grad_err = 0.0, hess_err = 0.0, inv_err = 0.0;
    int failures = 0;
    for (int i = 0; i < 100; ++i) {
      const Pt x{unit(rng), unit(rng)};
      const double psi = latent(rng);
      const double h = 1e-5 * (1.0 + std::abs(psi));
      const double fd_g = (e.rstar(x, psi + h) - e.rstar(x, psi - h)) / (2.0 * h);
      const double g = e.grad_rstar(x, psi);
      grad_err = std::max(grad_err, std::abs(fd_g - g) / (1.0 + std::abs(g)));
      const double fd_h = (e.grad_rstar(x, psi + h) - e.grad_rstar(x, psi - h)) / (2.0 * h);
      const double hess = e.hess_rstar(x, psi);
      hess_err = std::max(hess_err, std::abs(fd_h - hess) / (1.0 + std::abs(hess)));
      const double back = e.grad_r(x, g);
      inv_err = std::max(inv_err, std::abs(back - psi));
      if (e.margin(x, g) <= 0.0) ++failures;
    }
    push("entropy", name + "_grad_fd", grad_err, 1e-6);
    push("entropy", name + "_hess_fd", hess_err, 1e-6);
    push("entropy", name + "_inverse_roundtrip", inv_err, 1e-10);
    push("entropy", name + "_interior_failures", failures, 0.0);
  }

  // Gauss-Radau reference rule moments
  {
    const auto gr = gauss_radau_reference();
    const double m0 = gr.weights[0] + gr.weights[1];
    const double m1 = gr.weights[0] * gr.points[0] + gr.weights[1] * gr.points[1];
    const double m2 = gr.weights[0] * gr.points[0] * gr.points[0] +
                      gr.weights[1] * gr.points[1] * gr.points[1];
    push("gauss_radau", "moment0", std::abs(m0 - 2.0), 1e-15);
    push("gauss_radau", "moment1", std::abs(m1), 1e-15);
    push("gauss_radau", "moment2", std::abs(m2 - 2.0 / 3.0), 1e-15);
    push("gauss_radau", "weights_positive", std::min(gr.weights[0], gr.weights[1]), 0.0, false);
  }

  // Fortin moment residual on a fixed cubic with exact quadrature
  {
    auto mesh = std::make_shared<Mesh>(unit_square_mesh(8, SquarePattern::Crisscross));
    OperatorToolbox tb(mesh, 8);
    auto cubic = [](const Pt& p) {
      return p[0] * p[0] * p[1] - 0.5 * p[1] * p[1] * p[1] + 0.25 * p[0];
    };
    const FeFunction pv = fortin_bubble(tb, pointwise_field(*mesh, cubic));
    double resid = 0.0;
    const QuadratureRule quad = quadrature_rule(2, 8);
    for (int c = 0; c < mesh->n_cells(); ++c) {
      double cell_int = 0.0;
      for (size_t q = 0; q < quad.points.size(); ++q) {
        const Pt x = tb.p1().physical_point(c, quad.points[q]);
        cell_int += quad.weights[q] * mesh->cell_measure(c) / 0.5 *
                    (cubic(x) - pv.value_in_cell(c, quad.points[q]));
      }
      resid = std::max(resid, std::abs(cell_int));
    }
    push("fortin", "moment_residual", resid, 1e-12);
  }

  // quasi-interpolant rates on a smooth field, plus the per-level operator
  // table (operator, level, L2, H1, EOC, enriched feasibility margin)
  std::ostringstream opcsv;
  opcsv << "operator,level,l2_error,h1_error,eoc_l2,eoc_h1,feasibility_margin\n";
  {
    auto smooth = [](const Pt& p) { return std::sin(M_PI * p[0]) * std::sin(M_PI * p[1]); };
    auto gsmooth = [](const Pt& p) {
      return Pt{M_PI * std::cos(M_PI * p[0]) * std::sin(M_PI * p[1]),
                M_PI * std::sin(M_PI * p[0]) * std::cos(M_PI * p[1])};
    };
    const SpatialFn phi = [](const Pt&) { return -0.25; };
    for (const auto& which :
         {std::string("clement_weighted"), std::string("clement_mass"),
          std::string("scott_zhang"), std::string("fortin_bubble")}) {
      std::vector<double> hs, l2s, h1s;
      std::vector<int> ns{8, 16, 32};
      std::vector<double> margins;
      for (int n : ns) {
        auto mesh = std::make_shared<Mesh>(unit_square_mesh(n, SquarePattern::Crisscross));
        OperatorToolbox tb(mesh, 6);
        const FieldView fv = pointwise_field(*mesh, smooth);
        FeFunction ih = which == "clement_weighted"  ? clement_weighted(tb, fv)
                        : which == "clement_mass"    ? clement_mass(tb, fv)
                        : which == "scott_zhang"     ? scott_zhang(tb, fv)
                                                     : fortin_bubble(tb, fv);
        const auto err = error_norms(ih, smooth, gsmooth, 8);
        hs.push_back(mesh->max_diameter());
        l2s.push_back(err.l2);
        h1s.push_back(err.h1);
        // feasibility margin of the matching enrichment applied to a feasible field
        double margin = 0.0;
        if (which == "clement_weighted" || which == "clement_mass") {
          const FieldView feasible =
              pointwise_field(*mesh, [&phi](const Pt& x) { return phi(x) + 0.1; });
          margin = enrich_obstacle(tb, feasible, phi,
                                   which == "clement_weighted" ? ObstaclePair::BubbleP0
                                                               : ObstaclePair::P1P1)
                       .min_margin;
        }
        margins.push_back(margin);
      }
      const auto el2 = eoc(hs, l2s);
      const auto eh1 = eoc(hs, h1s);
      for (size_t i = 0; i < ns.size(); ++i) {
        opcsv << which << ',' << ns[i] << ',' << fmt(l2s[i]) << ',' << fmt(h1s[i]) << ',';
        if (i == 0)
          opcsv << ",";
        else
          opcsv << fmt(el2[i - 1]) << ',' << fmt(eh1[i - 1]);
        opcsv << ',' << fmt(margins[i]) << '\n';
      }
      push("rates", which + "_l2_eoc_defect", std::abs(el2.back() - 2.0), 0.2);
      push("rates", which + "_h1_eoc_defect", std::abs(eh1.back() - 1.0), 0.2);
    }
  }

  std::ostringstream csv;
  csv << "section,name,value,threshold,pass\n";
  bool all_pass = true;
  for (const auto& r : rows) {
    csv << r.section << ',' << r.name << ',' << fmt(r.value) << ',' << fmt(r.threshold) << ','
        << (r.pass ? "1" : "0") << '\n';
    all_pass = all_pass && r.pass;
  }
  em.emit("verification.csv", csv.str());
  em.emit("operators.csv", opcsv.str());
  std::ostringstream summary;
  summary << "{\n  \"seed\": " << seed << ",\n  \"all_pass\": " << (all_pass ? "true" : "false")
          << ",\n  \"files\": " << em.manifest.to_json() << "\n}\n";
  write_text_file((em.dir / "summary.json").string(), summary.str());
  std::cout << csv.str();
  return all_pass ? 0 : 4;
}

int cmd_mesh_info(const RunConfig& cfg) {
  auto mesh = cfg.make_mesh(cfg.levels.front());
  mesh->validate();
  std::cout << "dim               " << mesh->dim() << "\n"
            << "vertices          " << mesh->n_vertices() << "\n"
            << "cells             " << mesh->n_cells() << "\n"
            << "boundary facets   " << mesh->n_boundary_facets() << "\n"
            << "max h             " << fmt(mesh->max_diameter()) << "\n"
            << "total measure     " << fmt(mesh->total_measure()) << "\n";
  std::cout << "tags             ";
  for (const auto& t : mesh->tags()) std::cout << ' ' << t;
  std::cout << "\n";
  if (mesh->dim() == 2) {
    std::cout << "shape regularity  " << fmt(shape_regularity(*mesh)) << "\n";
    const auto sym = check_local_symmetry(*mesh);
    std::cout << "local symmetry    " << (sym.pass ? "pass" : "fail") << " (max deviation "
              << fmt(sym.max_deviation) << ")\n";
    for (const auto& t : mesh->tags())
      if (t == "contact") {
        const auto chk = check_signorini_facets(*mesh, "contact");
        std::cout << "contact facets    " << (chk.pass ? "pass" : ("fail: " + chk.reason))
                  << "\n";
      }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"proximal Galerkin study driver"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path, out_override, levels_override;
  unsigned seed = 0;
  bool strict = false;
  app.add_option("--config", config_path, "configuration file (JSON)");
  app.add_option("--out", out_override, "output directory override");
  app.add_option("--levels", levels_override, "level range a..b (powers of two)");
  app.add_option("--seed", seed, "random seed for verification sampling");
  app.add_flag("--strict", strict, "abort when the energy-decay inequality is violated");

  auto* solve = app.add_subcommand("solve", "single proximal solve");
  auto* study = app.add_subcommand("study", "mesh-sequence study");
  auto* verify = app.add_subcommand("verify-operators", "operator and entropy verification");
  verify->alias("verify");
  auto* info = app.add_subcommand("mesh-info", "mesh structure report");

  CLI11_PARSE(app, argc, argv);

  RunConfig cfg;
  try {
    if (!config_path.empty()) {
      cfg = parse_config_file(config_path);
    } else if (!verify->parsed()) {
      std::cerr << "config error: --config is required\n";
      return 2;
    }
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (!levels_override.empty()) {
      const auto sep = levels_override.find("..");
      PROXGAL_REQUIRE(sep != std::string::npos, "--levels must look like a..b");
      const int a = std::stoi(levels_override.substr(0, sep));
      const int b = std::stoi(levels_override.substr(sep + 2));
      PROXGAL_REQUIRE(a >= 0 && b >= a && b <= 14, "--levels out of range");
      cfg.levels.clear();
      for (int k = a; k <= b; ++k) cfg.levels.push_back(1 << k);
    }
    cfg.seed = seed;
    cfg.pg.strict_dissipation = strict;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (solve->parsed()) return cmd_solve(cfg);
    if (study->parsed()) return cmd_study(cfg);
    if (verify->parsed()) return cmd_verify(cfg, seed);
    if (info->parsed()) return cmd_mesh_info(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
