#pragma once
// Mesh-sequence studies: error tables with estimated orders of convergence,
// optimization-decay series, and the CSV/manifest emission shared by the CLI
// and the acceptance harness.

#include <string>
#include <vector>

#include "proxgal/pg.hpp"
#include "proxgal/problems.hpp"

namespace proxgal {

struct StudyRow {
  int level_n = 0;  // structured resolution parameter
  double h = 0.0;
  int n_dofs = 0;
  double err_h1 = 0.0;
  double err_l2 = 0.0;
  double err_dual = 0.0;
  double err_obs = 0.0;
  int iterations = 0;
  double final_energy = 0.0;
  double min_margin = 0.0;          // over all quadrature points, all iterations
  double max_dissipation_gap = 0.0; // most positive decay-inequality defect
  double u_h1_norm = 0.0;
  double lambda_dual_norm = 0.0;
};

struct StudyReport {
  std::vector<StudyRow> rows;
  std::vector<double> eoc_h1, eoc_l2, eoc_dual, eoc_obs;
  std::string meta_json;  // single-line JSON header payload

  void compute_eoc();
  std::string to_csv() const;  // deterministic body, metadata in '#' comments
};

struct ObstacleStudyResult {
  StudyReport report;
  std::vector<ProblemSpec> problems;
  std::vector<PGTrajectory> trajectories;
};

// One row per level n: 1D interval meshes or 2D structured square meshes.
ObstacleStudyResult run_obstacle_study(const ReferenceSolution& ref, int dim,
                                       const std::vector<int>& levels, ObstaclePair pair,
                                       const PGConfig& cfg, int quad_degree = 0,
                                       SquarePattern pattern = SquarePattern::Crisscross);

struct SignoriniSetup {
  LameParameters lame;
  std::function<Eigen::Vector2d(const Pt&)> load;
  SpatialFn gap;
};

struct SignoriniStudyResult {
  StudyReport report;  // err_h1/err_l2 are self-convergence against the fine run
  std::vector<ProblemSpec> problems;
  std::vector<PGTrajectory> trajectories;
  ProblemSpec reference_problem;
  PGTrajectory reference_trajectory;
};

SignoriniStudyResult run_signorini_study(const SignoriniSetup& setup,
                                         const std::vector<int>& levels, int reference_level,
                                         const PGConfig& cfg, int quad_degree = 4);

// Builds the square contact mesh: bottom edge tagged "contact", the rest
// "dirichlet".
std::shared_ptr<Mesh> contact_square_mesh(int n, SquarePattern pattern = SquarePattern::Crisscross);

struct DecaySeries {
  std::vector<int> ell;
  std::vector<double> err_a;      // ||u^ell - u^infty||_a
  std::vector<double> sum_alpha;  // cumulative proximity mass
  double loglog_slope = 0.0;      // least-squares slope of log err vs log ell
};

// Constant-step run on a fixed mesh measured against a surrogate limit taken
// `extra_iterations` beyond the last requested index.
DecaySeries optimization_decay(const ProblemSpec& p, double alpha, const std::vector<int>& ells,
                               int extra_iterations, const NewtonOptions& newton = {});

// --- emission ----------------------------------------------------------------
std::string trajectory_csv(const PGTrajectory& traj);
void write_text_file(const std::string& path, const std::string& content);

struct Manifest {
  std::vector<std::pair<std::string, std::string>> entries;  // (filename, fnv64 hash)
  void add(const std::string& path, const std::string& content);
  std::string to_json() const;
};

int worker_count();  // PROXGAL_THREADS, default 1

}  // namespace proxgal
