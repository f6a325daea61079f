#pragma once
// Concrete problem builders (obstacle, Signorini contact), analytic reference
// solutions, an independent primal-dual active set oracle, and error metrics
// including discrete dual norms.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "proxgal/algebra.hpp"
#include "proxgal/entropy.hpp"
#include "proxgal/mesh.hpp"
#include "proxgal/spaces.hpp"

namespace proxgal {

enum class ObstaclePair { BubbleP0, P1P1 };

struct ProblemSpec {
  enum class Kind { Obstacle, Signorini };
  Kind kind = Kind::Obstacle;

  std::shared_ptr<Mesh> mesh;
  std::shared_ptr<FunctionSpace> V;  // primal space
  std::shared_ptr<FunctionSpace> W;  // latent space

  SparseMatrix A;       // a-form on V (full dof set)
  Vec F;                // load functional
  SparseMatrix B;       // pairing, rows W dofs, cols V dofs
  SparseMatrix W_mass;  // L2 mass on W over the constrained domain

  int quad_degree = 4;  // quadrature for the nonlinear term and divergences
  SpatialFn constraint;  // obstacle phi / gap g
  std::string contact_tag;
  double boundary_delta = 0.0;  // constraint gap at the Dirichlet interface

  // Signorini only: latent lift values at segment-endpoint vertices
  // (vertex index -> value); the latent field entering the entropy is the
  // coefficient function plus this lift.
  std::vector<std::pair<int, double>> psi_lift;

  std::vector<std::string> warnings;

  const LegendreEntropy& entropy() const { return *entropy_; }
  std::optional<LegendreEntropy> entropy_;

  // recorded coercivity/continuity metadata (optional, diagnostics only)
  double nu_estimate = 0.0, m_estimate = 0.0;

  // latent field value at a point of the constrained domain; for the boundary
  // family the point is (tagged facet index, parameter), for volume families
  // it is (cell, reference point)
  double psi_at(const Vec& psi_coeffs, int cell_or_facet, const Pt& ref_or_t) const;
};

ProblemSpec build_obstacle(std::shared_ptr<Mesh> mesh, SpatialFn f, SpatialFn phi,
                           ObstaclePair pair, int quad_degree = 0 /*0: dimension default*/);

struct LameParameters {
  double lambda = 1.0;
  double mu = 1.0;
};

ProblemSpec build_signorini(std::shared_ptr<Mesh> mesh, LameParameters lame,
                            std::function<Eigen::Vector2d(const Pt&)> f, SpatialFn gap,
                            const std::string& dirichlet_tag = "dirichlet",
                            const std::string& contact_tag = "contact", int quad_degree = 4);

// --- state-dependent assemblies over the constrained domain ----------------
Vec nonlinear_term(const ProblemSpec& p, const Vec& psi_coeffs);
SparseMatrix hess_weighted_mass(const ProblemSpec& p, const Vec& psi_coeffs);
double observable_min_margin(const ProblemSpec& p, const Vec& psi_coeffs);
// Strict interiority of the observable at every quadrature point. The margin
// of the log-type entropies is exp(-|psi|)-shaped and underflows to 0.0 in
// double precision deep inside the contact region while remaining positive in
// exact arithmetic; a point counts as strictly interior when its computed
// margin is positive or the latent value is finite and in the underflow range.
bool observable_strictly_interior(const ProblemSpec& p, const Vec& psi_coeffs);
// observable at every quadrature point of the constrained domain, with its
// location and constraint margin
struct ObservableSample {
  Pt x;
  double value;
  double margin;
};
std::vector<ObservableSample> observable_values(const ProblemSpec& p, const Vec& psi_coeffs);
// (D*(a,b), D*(b,a)) integrated over the constrained domain, lift included
std::pair<double, double> bregman_pair(const ProblemSpec& p, const Vec& psi_a, const Vec& psi_b);
double w_l2_norm(const ProblemSpec& p, const Vec& w_coeffs);
double energy(const ProblemSpec& p, const Vec& u_coeffs);
double a_norm(const ProblemSpec& p, const Vec& u_coeffs);

// --- references -------------------------------------------------------------
struct ReferenceSolution {
  std::function<double(const Pt&)> u;
  std::function<Pt(const Pt&)> grad_u;
  std::function<double(const Pt&)> lambda;
  SpatialFn f;
  SpatialFn obstacle;
  std::function<Pt(const Pt&)> grad_obstacle;
  bool has_contact = true;
  double contact_radius = 0.0;   // 1D: half-interval start a; 2D: radius a
  double load_constant = 0.0;    // 2D derived load plateau c (f = c inside r < R)
  double support_radius = 0.0;   // 2D: radius R where the deflection vanishes
  double root_residual = 0.0;    // free-boundary matching residual
  double boundary_delta = 0.0;   // -phi on the domain boundary
  double regularity_s = 1.0, regularity_r = 1.0;
};

// -u'' = f0 + f2 (x - 1/2)^2 on (0,1), u >= phi0, homogeneous Dirichlet data;
// f0 < 0, phi0 < 0, and the load must stay negative on [0,1]. Contact occupies
// a centered interval [a, 1-a]; the free point solves the tangency condition
// (closed form for f2 = 0, bisection otherwise). Parameters admitting no
// contact yield the plain membrane deflection (flagged, not an error; f2 = 0
// only). A nonzero f2 keeps the solution piecewise polynomial but outside the
// bubble-enriched space, so discretization errors saturate at first order.
ReferenceSolution analytic_obstacle_1d(double f0, double phi0, double f2 = 0.0);

// Radially symmetric obstacle problem on the unit square, data centered at
// (1/2, 1/2): paraboloid obstacle b - d r^2 blended (C^2) to the constant
// -delta0 on [r1, r2], load f = c on r < R and 0 outside, so the deflection
// has compact support in the ball of radius R. The free radius a solves the
// C^1 matching condition; c is derived from it.
struct RadialParams {
  double b = 0.15;
  double d = 1.0;
  double support_radius = 0.45;  // R
  double blend_start = 0.40;     // r1
  double blend_end = 0.47;       // r2
  double delta0 = 0.05;
};
ReferenceSolution radial_obstacle_2d(const RadialParams& params = {});

// --- independent oracle ------------------------------------------------------
// Primal-dual active set solve of the nodally constrained problem on P1.
// The optional initializer (typically a coarser-level solve) seeds the active
// set; from a cold start the set boundary creeps one node layer per sweep.
// Convergence means the set is stable with feasible primal and nonnegative
// multiplier values, independently of the initialization.
struct PdasResult {
  std::shared_ptr<FunctionSpace> space;
  FeFunction u;
  Vec multiplier;
  int iterations = 0;
  bool converged = false;
};
PdasResult pdas_obstacle(const Mesh& mesh, const SpatialFn& f, const SpatialFn& phi,
                         int max_iterations = 60, const FeFunction* init = nullptr);

// --- error metrics ----------------------------------------------------------
struct ErrorPair {
  double l2 = 0.0;
  double h1 = 0.0;  // full norm
};
ErrorPair error_norms(const FeFunction& u_h, const std::function<double(const Pt&)>& u_ref,
                      const std::function<Pt(const Pt&)>& grad_ref, int quad_degree = 6);
// both arguments discrete; the second may live on a different (finer) mesh
ErrorPair error_norms_vector(const FeFunction& u_h, const FeFunction& u_fine,
                             int quad_degree = 4);

double observable_l2_error(const ProblemSpec& p, const Vec& psi_coeffs,
                           const std::function<double(const Pt&)>& u_ref, int quad_degree = 6);

// Discrete dual norm via the Riesz lift through the problem's a-form:
// solve a(z, v) = <lambda_h - lambda_ref, B v> on V_h, return ||z||_a.
double dual_norm_error(const ProblemSpec& p, const Vec& lambda_coeffs,
                       const std::function<double(const Pt&)>& lambda_ref, int quad_degree = 6);

// L2 projection onto W (volume families only); the field is evaluated per
// (cell, reference point).
Vec project_onto_w(const ProblemSpec& p, const std::function<double(int, const Pt&)>& v,
                   int quad_degree = 6);

// Estimated orders of convergence between consecutive rows; the mesh sizes
// must halve (relative tolerance 1e-9).
std::vector<double> eoc(const std::vector<double>& h, const std::vector<double>& errors);

}  // namespace proxgal
