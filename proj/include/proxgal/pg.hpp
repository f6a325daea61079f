#pragma once
// Proximal outer loop and the damped Newton solver for the nonlinear
// saddle-point subproblems.

#include <string>
#include <vector>

#include "proxgal/problems.hpp"

namespace proxgal {

enum class AlphaSchedule { Constant, Geometric, Doubling };

struct NewtonOptions {
  int max_iters = 50;
  double abs_tol = 1e-11;
  double rel_tol = 1e-13;
  double backtrack_factor = 0.5;
  int max_backtracks = 30;
  // cap on the upward latent excursion per Newton step (exp-overflow guard);
  // downward excursions are unlimited: the log-type entropies only flatten in
  // that direction, and the forward-tracking line search rides the Newton ray
  // through the barrier walk that would otherwise take O(alpha) iterations
  double max_step_inf = 10.0;
  // a stalled line search counts as converged when the residual already sits
  // at this level (the roundoff floor of the residual evaluation); genuine
  // divergence stalls orders of magnitude above it
  double floor_tol = 1e-9;
};

struct PGConfig {
  AlphaSchedule schedule = AlphaSchedule::Geometric;
  double alpha0 = 1.0;
  double ratio = 2.0;  // geometric growth factor
  int max_outer = 40;
  int min_outer = 0;  // run at least this many outer steps before testing
  double outer_tol = 1e-8;
  NewtonOptions newton;
  bool strict_dissipation = false;  // fail the run when the decay inequality breaks

  double alpha_at(int k) const;  // k = 1, 2, ...
  void validate() const;
};

struct PGState {
  int k = 0;
  Vec u;       // full V dof vector
  Vec psi;     // full W dof vector
  Vec lambda;  // (psi_prev - psi)/alpha
  double alpha = 0.0;
  double energy = 0.0;
  // lhs - rhs of the decay inequality E(u^k) + (D*(k,k-1)+D*(k-1,k))/alpha_k <= E(u^{k-1});
  // recorded from the second state on
  double dissipation_gap = 0.0;
  double feasibility_margin = 0.0;
  bool strictly_interior = true;  // underflow-aware interiority of the observable
  double lambda_l2 = 0.0;
  double psi_increment_l2 = 0.0;
  double u_increment_a = 0.0;
  int newton_iters = 0;
};

enum class PGTermination { Converged, MaxIterations, NewtonFailure };

struct PGTrajectory {
  std::vector<PGState> states;  // states[k-1] is outer iterate k
  Vec psi0;
  PGTermination reason = PGTermination::MaxIterations;
  std::string failure_message;
  int iterations() const { return static_cast<int>(states.size()); }
  const PGState& back() const { return states.back(); }
};

struct NewtonReport {
  int iterations = 0;
  std::vector<double> residual_history;  // merit after each accepted step
};

struct NewtonError : Error {
  NewtonError(const std::string& msg, double residual, int iters)
      : Error(msg), last_residual(residual), iterations(iters) {}
  double last_residual;
  int iterations;
};

// Solves one saddle subproblem: alpha a(u,v) + b(v, psi - psi_prev) = alpha F(v),
// b(u,w) = (grad R*(psi), w). u/psi carry the warm start on entry and the
// solution on exit (full dof vectors, prescribed values untouched). psi_prev
// is taken by value so callers may pass the warm-start vector itself.
NewtonReport newton_subproblem(const ProblemSpec& p, double alpha, Vec psi_prev, Vec& u,
                               Vec& psi, const NewtonOptions& opts);

// Spatially constant latent start at a strictly feasible observable
// (prescribed dofs at their lift values).
Vec default_initial_psi(const ProblemSpec& p);

PGTrajectory pg_solve(const ProblemSpec& p, const PGConfig& config, const Vec* psi0 = nullptr);

// lambda^k = (psi^{k-1} - psi^k)/alpha_k recomputed from the stored history; k >= 1.
Vec dual_variable(const PGTrajectory& traj, const PGConfig& config, int k);

}  // namespace proxgal
