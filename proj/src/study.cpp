#include "proxgal/study.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

namespace proxgal {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12e", v);
  return buf;
}

}  // namespace

void StudyReport::compute_eoc() {
  std::vector<double> h, e1, e2, ed, eo;
  for (const auto& r : rows) {
    h.push_back(r.h);
    e1.push_back(r.err_h1);
    e2.push_back(r.err_l2);
    ed.push_back(r.err_dual);
    eo.push_back(r.err_obs);
  }
  if (rows.size() < 2) return;
  eoc_h1 = eoc(h, e1);
  eoc_l2 = eoc(h, e2);
  eoc_dual = ed.front() > 0.0 ? eoc(h, ed) : std::vector<double>(rows.size() - 1, 0.0);
  eoc_obs = eo.front() > 0.0 ? eoc(h, eo) : std::vector<double>(rows.size() - 1, 0.0);
}

std::string StudyReport::to_csv() const {
  std::ostringstream out;
  if (!meta_json.empty()) out << "# meta: " << meta_json << "\n";
  out << "n,h,n_dofs,err_h1,err_l2,err_dual,err_obs,iterations,final_energy,min_margin,"
         "max_dissipation_gap,u_h1_norm,lambda_dual_norm,eoc_h1,eoc_l2,eoc_dual,eoc_obs\n";
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out << r.level_n << ',' << fmt(r.h) << ',' << r.n_dofs << ',' << fmt(r.err_h1) << ','
        << fmt(r.err_l2) << ',' << fmt(r.err_dual) << ',' << fmt(r.err_obs) << ','
        << r.iterations << ',' << fmt(r.final_energy) << ',' << fmt(r.min_margin) << ','
        << fmt(r.max_dissipation_gap) << ',' << fmt(r.u_h1_norm) << ','
        << fmt(r.lambda_dual_norm);
    if (i == 0) {
      out << ",,,,";
    } else {
      out << ',' << fmt(eoc_h1[i - 1]) << ',' << fmt(eoc_l2[i - 1]) << ','
          << fmt(eoc_dual[i - 1]) << ',' << fmt(eoc_obs[i - 1]);
    }
    out << '\n';
  }
  return out.str();
}

int worker_count() {
  const char* env = std::getenv("PROXGAL_THREADS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n >= 1 ? n : 1;
}

namespace {

template <typename Job>
void run_jobs(int count, Job&& job) {
  const int workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) job(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) job(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace

ObstacleStudyResult run_obstacle_study(const ReferenceSolution& ref, int dim,
                                       const std::vector<int>& levels, ObstaclePair pair,
                                       const PGConfig& cfg, int quad_degree,
                                       SquarePattern pattern) {
  ObstacleStudyResult result;
  const int n_levels = static_cast<int>(levels.size());
  result.problems.resize(n_levels);
  result.trajectories.resize(n_levels);
  result.report.rows.resize(n_levels);

  run_jobs(n_levels, [&](int i) {
    const int n = levels[i];
    auto mesh = std::make_shared<Mesh>(dim == 1 ? unit_interval_mesh(n)
                                                : unit_square_mesh(n, pattern));
    ProblemSpec p = build_obstacle(mesh, ref.f, ref.obstacle, pair, quad_degree);
    PGTrajectory traj = pg_solve(p, cfg);
    PROXGAL_REQUIRE(traj.reason != PGTermination::NewtonFailure,
                    "obstacle study: " + traj.failure_message);
    StudyRow row;
    row.level_n = n;
    row.h = mesh->max_diameter();
    row.n_dofs = p.V->n_dofs() + p.W->n_dofs();
    row.iterations = traj.iterations();
    const auto& last = traj.back();
    FeFunction u_h(*p.V);
    u_h.coeffs = last.u;
    const auto err = error_norms(u_h, ref.u, ref.grad_u, 6);
    row.err_h1 = err.h1;
    row.err_l2 = err.l2;
    row.err_dual = dual_norm_error(p, last.lambda, ref.lambda, 6);
    row.err_obs = observable_l2_error(p, last.psi, ref.u, 6);
    row.final_energy = last.energy;
    row.min_margin = std::numeric_limits<double>::infinity();
    row.max_dissipation_gap = -std::numeric_limits<double>::infinity();
    for (const auto& st : traj.states) {
      row.min_margin = std::min(row.min_margin, st.feasibility_margin);
      if (st.k >= 2) row.max_dissipation_gap = std::max(row.max_dissipation_gap, st.dissipation_gap);
    }
    row.u_h1_norm = a_norm(p, last.u);
    row.lambda_dual_norm = dual_norm_error(p, last.lambda, nullptr, 6);
    result.report.rows[i] = row;
    result.problems[i] = std::move(p);
    result.trajectories[i] = std::move(traj);
  });
  result.report.compute_eoc();
  return result;
}

std::shared_ptr<Mesh> contact_square_mesh(int n, SquarePattern pattern) {
  auto mesh = std::make_shared<Mesh>(unit_square_mesh(n, pattern));
  mesh->retag_boundary(
      [](const Pt& mid) { return mid[1] < 1e-12 ? std::string("contact") : std::string("dirichlet"); });
  return mesh;
}

SignoriniStudyResult run_signorini_study(const SignoriniSetup& setup,
                                         const std::vector<int>& levels, int reference_level,
                                         const PGConfig& cfg, int quad_degree) {
  SignoriniStudyResult result;

  result.reference_problem = build_signorini(contact_square_mesh(reference_level), setup.lame,
                                             setup.load, setup.gap, "dirichlet", "contact",
                                             quad_degree);
  result.reference_trajectory = pg_solve(result.reference_problem, cfg);
  PROXGAL_REQUIRE(result.reference_trajectory.reason != PGTermination::NewtonFailure,
                  "signorini study: " + result.reference_trajectory.failure_message);
  FeFunction u_ref(*result.reference_problem.V);
  u_ref.coeffs = result.reference_trajectory.back().u;

  const int n_levels = static_cast<int>(levels.size());
  result.problems.resize(n_levels);
  result.trajectories.resize(n_levels);
  result.report.rows.resize(n_levels);
  run_jobs(n_levels, [&](int i) {
    const int n = levels[i];
    ProblemSpec p = build_signorini(contact_square_mesh(n), setup.lame, setup.load, setup.gap,
                                    "dirichlet", "contact", quad_degree);
    PGTrajectory traj = pg_solve(p, cfg);
    PROXGAL_REQUIRE(traj.reason != PGTermination::NewtonFailure,
                    "signorini study: " + traj.failure_message);
    StudyRow row;
    row.level_n = n;
    row.h = p.mesh->max_diameter();
    row.n_dofs = p.V->n_dofs() + p.W->n_dofs();
    row.iterations = traj.iterations();
    const auto& last = traj.back();
    FeFunction u_h(*p.V);
    u_h.coeffs = last.u;
    const auto err = error_norms_vector(u_h, u_ref, 4);
    row.err_h1 = err.h1;
    row.err_l2 = err.l2;
    row.final_energy = last.energy;
    row.min_margin = std::numeric_limits<double>::infinity();
    row.max_dissipation_gap = -std::numeric_limits<double>::infinity();
    for (const auto& st : traj.states) {
      row.min_margin = std::min(row.min_margin, st.feasibility_margin);
      if (st.k >= 2) row.max_dissipation_gap = std::max(row.max_dissipation_gap, st.dissipation_gap);
    }
    row.u_h1_norm = a_norm(p, last.u);
    row.lambda_dual_norm = dual_norm_error(p, last.lambda, nullptr, 6);
    result.report.rows[i] = row;
    result.problems[i] = std::move(p);
    result.trajectories[i] = std::move(traj);
  });
  result.report.compute_eoc();
  return result;
}

DecaySeries optimization_decay(const ProblemSpec& p, double alpha, const std::vector<int>& ells,
                               int extra_iterations, const NewtonOptions& newton) {
  PROXGAL_REQUIRE(!ells.empty(), "optimization_decay: empty index list");
  const int ell_max = *std::max_element(ells.begin(), ells.end());
  PGConfig cfg;
  cfg.schedule = AlphaSchedule::Constant;
  cfg.alpha0 = alpha;
  cfg.max_outer = ell_max + extra_iterations;
  cfg.min_outer = cfg.max_outer;
  cfg.outer_tol = 1e-300;
  cfg.newton = newton;
  const PGTrajectory traj = pg_solve(p, cfg);
  PROXGAL_REQUIRE(traj.reason != PGTermination::NewtonFailure,
                  "optimization_decay: " + traj.failure_message);
  const Vec& u_inf = traj.back().u;
  DecaySeries out;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int ell : ells) {
    const Vec diff = traj.states[ell - 1].u - u_inf;
    const double err = a_norm(p, diff);
    out.ell.push_back(ell);
    out.err_a.push_back(err);
    double sum_alpha = 0.0;
    for (int k = 1; k <= ell; ++k) sum_alpha += cfg.alpha_at(k);
    out.sum_alpha.push_back(sum_alpha);
    const double x = std::log(static_cast<double>(ell));
    const double y = std::log(std::max(err, 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(ells.size());
  out.loglog_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return out;
}

std::string trajectory_csv(const PGTrajectory& traj) {
  std::ostringstream out;
  out << "k,alpha,energy,dissipation_gap,newton_iters,lambda_l2,feasibility_margin,"
         "psi_increment_l2,u_increment_a\n";
  for (const auto& st : traj.states)
    out << st.k << ',' << fmt(st.alpha) << ',' << fmt(st.energy) << ','
        << fmt(st.dissipation_gap) << ',' << st.newton_iters << ',' << fmt(st.lambda_l2) << ','
        << fmt(st.feasibility_margin) << ',' << fmt(st.psi_increment_l2) << ','
        << fmt(st.u_increment_a) << '\n';
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  PROXGAL_REQUIRE(out.good(), "write_text_file: cannot open " + path);
  out << content;
}

void Manifest::add(const std::string& path, const std::string& content) {
  entries.push_back({path, hex64(fnv1a(content))});
}

std::string Manifest::to_json() const {
  std::ostringstream out;
  out << "[";
  for (size_t i = 0; i < entries.size(); ++i) {
    if (i) out << ",";
    out << "\n    {\"file\": \"" << entries[i].first << "\", \"fnv64\": \""
        << entries[i].second << "\"}";
  }
  out << "\n  ]";
  return out.str();
}

}  // namespace proxgal
