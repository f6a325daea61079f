#include "proxgal/pg.hpp"

#include <cmath>
#include <limits>

namespace proxgal {

double PGConfig::alpha_at(int k) const {
  switch (schedule) {
    case AlphaSchedule::Constant: return alpha0;
    case AlphaSchedule::Geometric: return alpha0 * std::pow(ratio, k - 1);
    case AlphaSchedule::Doubling: return alpha0 * std::pow(2.0, k - 1);
  }
  throw Error("alpha_at: unknown schedule");
}

void PGConfig::validate() const {
  PROXGAL_REQUIRE(alpha0 > 0.0, "pg config: alpha0 must be positive");
  if (schedule == AlphaSchedule::Geometric)
    PROXGAL_REQUIRE(ratio > 1.0, "pg config: geometric ratio must exceed 1");
  PROXGAL_REQUIRE(outer_tol > 0.0, "pg config: outer tolerance must be positive");
  PROXGAL_REQUIRE(max_outer >= 1, "pg config: max_outer must be at least 1");
  PROXGAL_REQUIRE(newton.abs_tol > 0.0 && newton.rel_tol > 0.0,
                  "pg config: newton tolerances must be positive");
}

namespace {

struct Reduced {
  std::vector<int> vfree, wfree;  // global dof lists
  std::vector<int> vidx, widx;    // global dof -> reduced index (-1 constrained)
  int nu = 0, nw = 0;
};

Reduced reduction_maps(const ProblemSpec& p) {
  Reduced r;
  r.vfree = p.V->free_dofs();
  r.wfree = p.W->free_dofs();
  r.vidx = p.V->free_index();
  r.widx = p.W->free_index();
  r.nu = static_cast<int>(r.vfree.size());
  r.nw = static_cast<int>(r.wfree.size());
  return r;
}

// merit vector: equation-1 residual scaled by max(1, alpha), equation-2 residual
Vec residual_vector(const ProblemSpec& p, const Reduced& r, double alpha, const Vec& psi_prev,
                    const Vec& u, const Vec& psi) {
  const Vec r1 = alpha * (p.A.eigen() * u) +
                 p.B.eigen().transpose() * (psi - psi_prev) - alpha * p.F;
  const Vec r2 = p.B.eigen() * u - nonlinear_term(p, psi);
  Vec out(r.nu + r.nw);
  const double s1 = std::max(1.0, alpha);
  for (int i = 0; i < r.nu; ++i) out[i] = r1[r.vfree[i]] / s1;
  for (int j = 0; j < r.nw; ++j) out[r.nu + j] = r2[r.wfree[j]];
  return out;
}

}  // namespace

NewtonReport newton_subproblem(const ProblemSpec& p, double alpha, Vec psi_prev, Vec& u,
                               Vec& psi, const NewtonOptions& opts) {
  PROXGAL_REQUIRE(alpha > 0.0, "newton_subproblem: alpha must be positive");
  const Reduced r = reduction_maps(p);
  NewtonReport report;

  Vec res = residual_vector(p, r, alpha, psi_prev, u, psi);
  double merit = res.norm();
  const double merit0 = merit;
  double merit_prev = std::numeric_limits<double>::infinity();
  double r2_prev = std::numeric_limits<double>::infinity();
  report.residual_history.push_back(merit);
  const double s1 = std::max(1.0, alpha);
  auto r2_norm = [&] { return res.tail(r.nw).norm(); };

  for (int it = 0; it < opts.max_iters; ++it) {
    if (merit <= opts.abs_tol || merit <= opts.rel_tol * merit0) {
      report.iterations = it;
      return report;
    }
    // grinding at the evaluation floor: converged as far as doubles allow;
    // both residual blocks must have stagnated (the constraint block keeps
    // improving below the scaled-first-block floor for a few extra steps)
    if (merit <= opts.floor_tol && merit >= 0.25 * merit_prev && r2_norm() >= 0.25 * r2_prev) {
      report.iterations = it;
      return report;
    }
    merit_prev = merit;
    r2_prev = r2_norm();
    // saddle Jacobian [alpha A, B^T; B, -M(psi)] on the free dofs
    SparseMatrix M = hess_weighted_mass(p, psi);
    std::vector<Eigen::Triplet<double>> trips;
    const auto& Ae = p.A.eigen();
    for (int k = 0; k < Ae.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator itr(Ae, k); itr; ++itr)
        if (r.vidx[itr.row()] >= 0 && r.vidx[itr.col()] >= 0)
          trips.emplace_back(r.vidx[itr.row()], r.vidx[itr.col()], alpha * itr.value());
    const auto& Be = p.B.eigen();
    for (int k = 0; k < Be.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator itr(Be, k); itr; ++itr) {
        const int wi = r.widx[itr.row()], vi = r.vidx[itr.col()];
        if (wi < 0 || vi < 0) continue;
        trips.emplace_back(r.nu + wi, vi, itr.value());  // B block
        trips.emplace_back(vi, r.nu + wi, itr.value());  // B^T block
      }
    const auto& Me = M.eigen();
    for (int k = 0; k < Me.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator itr(Me, k); itr; ++itr)
        if (r.widx[itr.row()] >= 0 && r.widx[itr.col()] >= 0)
          trips.emplace_back(r.nu + r.widx[itr.row()], r.nu + r.widx[itr.col()], -itr.value());
    Eigen::SparseMatrix<double> J(r.nu + r.nw, r.nu + r.nw);
    J.setFromTriplets(trips.begin(), trips.end());

    // unscaled right-hand side
    Vec rhs(r.nu + r.nw);
    for (int i = 0; i < r.nu; ++i) rhs[i] = -res[i] * s1;
    for (int j = 0; j < r.nw; ++j) rhs[r.nu + j] = -res[r.nu + j];
    Vec delta;
    try {
      delta = solve_direct(J, rhs);
    } catch (const SolveError& e) {
      throw NewtonError(std::string("newton_subproblem: linear solve failed: ") + e.what(),
                        merit, it);
    }

    // cap the latent excursion in the overflow-dangerous direction
    const int danger = p.entropy().overflow_direction();
    double dpsi_up = 0.0;
    if (danger != 0)
      for (int j = 0; j < r.nw; ++j)
        dpsi_up = std::max(dpsi_up, danger * delta[r.nu + j]);
    if (dpsi_up > opts.max_step_inf) delta *= opts.max_step_inf / dpsi_up;

    auto merit_at = [&](double t, Vec& u_t, Vec& psi_t, Vec& res_t) {
      u_t = u;
      psi_t = psi;
      for (int i = 0; i < r.nu; ++i) u_t[r.vfree[i]] += t * delta[i];
      for (int j = 0; j < r.nw; ++j) psi_t[r.wfree[j]] += t * delta[r.nu + j];
      res_t = residual_vector(p, r, alpha, psi_prev, u_t, psi_t);
      return res_t.norm();
    };

    Vec u_t, psi_t, res_t;
    double merit_t = merit_at(1.0, u_t, psi_t, res_t);
    bool accepted = false;
    if (merit_t <= (1.0 - 1e-4) * merit) {
      // the linear block is solved exactly at t = 1, so longer steps only
      // trade against the nonlinear block; ride the ray while it keeps paying
      // (this collapses the one-e-fold-per-iteration barrier walk at large
      // alpha into a single iteration)
      accepted = true;
      for (double t = 2.0; t <= 1e12; t *= 2.0) {
        if (dpsi_up * t > opts.max_step_inf && dpsi_up > 0.0) break;
        Vec u_e, psi_e, res_e;
        const double merit_e = merit_at(t, u_e, psi_e, res_e);
        if (!(merit_e < merit_t)) break;
        merit_t = merit_e;
        u_t = std::move(u_e);
        psi_t = std::move(psi_e);
        res_t = std::move(res_e);
      }
    } else {
      double t = opts.backtrack_factor;
      for (int bt = 0; bt < opts.max_backtracks; ++bt, t *= opts.backtrack_factor) {
        merit_t = merit_at(t, u_t, psi_t, res_t);
        if (merit_t <= (1.0 - 1e-4 * t) * merit) {
          accepted = true;
          break;
        }
      }
    }
    if (accepted) {
      u = std::move(u_t);
      psi = std::move(psi_t);
      res = std::move(res_t);
      merit = merit_t;
    }
    report.residual_history.push_back(merit);
    if (!accepted) {
      if (merit <= opts.floor_tol) {
        report.iterations = it + 1;
        return report;
      }
      char buf[48];
      std::snprintf(buf, sizeof(buf), "%.3e", merit);
      throw NewtonError(std::string("newton_subproblem: line search stalled at residual ") + buf,
                        merit, it + 1);
    }
  }
  if (merit <= opts.abs_tol || merit <= opts.rel_tol * merit0 || merit <= opts.floor_tol) {
    report.iterations = opts.max_iters;
    return report;
  }
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3e", merit);
  throw NewtonError("newton_subproblem: no convergence within " +
                        std::to_string(opts.max_iters) + " iterations, residual " + buf,
                    merit, opts.max_iters);
}

Vec default_initial_psi(const ProblemSpec& p) {
  double value = 0.0;
  if (p.kind == ProblemSpec::Kind::Signorini) {
    // strictly feasible constant observable at half the smallest gap
    double gmin = std::numeric_limits<double>::infinity();
    for (int f : p.W->tag_facets()) {
      const auto& bf = p.mesh->boundary_facet(f);
      for (const Pt& x :
           {p.mesh->vertex(bf.v[0]), p.mesh->vertex(bf.v[1]), p.mesh->facet_midpoint(f)})
        gmin = std::min(gmin, p.constraint(x));
    }
    value = -std::log(0.5 * gmin);
  }
  // Shannon/FermiDirac: zero start (observable obstacle+1 / bound midpoint)
  Vec psi = Vec::Constant(p.W->n_dofs(), value);
  for (const auto& c : p.W->constraints()) psi[c.dof] = c.value;
  return psi;
}

PGTrajectory pg_solve(const ProblemSpec& p, const PGConfig& config, const Vec* psi0) {
  config.validate();
  PGTrajectory traj;
  traj.psi0 = psi0 ? *psi0 : default_initial_psi(p);
  PROXGAL_REQUIRE(traj.psi0.size() == p.W->n_dofs(), "pg_solve: psi0 size mismatch");

  Vec u = Vec::Zero(p.V->n_dofs());
  for (const auto& c : p.V->constraints()) u[c.dof] = c.value;
  Vec psi = traj.psi0;

  double dissipation_scale = 1.0;
  for (int k = 1; k <= config.max_outer; ++k) {
    const double alpha = config.alpha_at(k);
    const Vec psi_prev = psi;
    const Vec u_prev = u;
    PGState st;
    st.k = k;
    st.alpha = alpha;
    try {
      const NewtonReport rep = newton_subproblem(p, alpha, psi_prev, u, psi, config.newton);
      st.newton_iters = rep.iterations;
    } catch (const NewtonError& e) {
      traj.reason = PGTermination::NewtonFailure;
      traj.failure_message = "outer iteration " + std::to_string(k) + ": " + e.what();
      return traj;
    }
    st.u = u;
    st.psi = psi;
    st.lambda = (psi_prev - psi) / alpha;
    st.energy = energy(p, u);
    st.feasibility_margin = observable_min_margin(p, psi);
    st.strictly_interior = observable_strictly_interior(p, psi);
    st.psi_increment_l2 = w_l2_norm(p, Vec(psi - psi_prev));
    st.lambda_l2 = st.psi_increment_l2 / alpha;
    st.u_increment_a = a_norm(p, Vec(u - u_prev));
    if (k == 1) {
      dissipation_scale = 1.0 + std::abs(st.energy);
    } else {
      const auto [d_new_old, d_old_new] = bregman_pair(p, psi, psi_prev);
      st.dissipation_gap =
          st.energy + (d_new_old + d_old_new) / alpha - traj.states.back().energy;
      if (config.strict_dissipation && st.dissipation_gap > 1e-9 * dissipation_scale) {
        traj.states.push_back(std::move(st));
        traj.reason = PGTermination::NewtonFailure;
        traj.failure_message = "dissipation violated at outer iteration " + std::to_string(k);
        return traj;
      }
    }
    traj.states.push_back(std::move(st));
    const auto& s = traj.states.back();
    if (k >= std::max(1, config.min_outer) &&
        (s.lambda_l2 <= config.outer_tol || (k >= 2 && s.u_increment_a <= config.outer_tol))) {
      traj.reason = PGTermination::Converged;
      return traj;
    }
  }
  traj.reason = PGTermination::MaxIterations;
  return traj;
}

Vec dual_variable(const PGTrajectory& traj, const PGConfig& config, int k) {
  PROXGAL_REQUIRE(k >= 1, "dual_variable: k must be at least 1");
  PROXGAL_REQUIRE(k <= traj.iterations(), "dual_variable: k beyond the trajectory");
  const Vec& psi_prev = k == 1 ? traj.psi0 : traj.states[k - 2].psi;
  return (psi_prev - traj.states[k - 1].psi) / config.alpha_at(k);
}

}  // namespace proxgal
