#include "proxgal/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace proxgal {

namespace {

double lift_at(const ProblemSpec& p, int v0, int v1, double t) {
  double val = 0.0;
  for (const auto& [v, L] : p.psi_lift) {
    if (v == v0) val += (1.0 - t) * L;
    if (v == v1) val += t * L;
  }
  return val;
}

// quadrature sweep over the constrained domain; fn(region, x, weight, psi_full,
// basis values, basis dofs, n_basis)
template <typename Fn>
void sweep_omega_d(const ProblemSpec& p, const Vec& psi_coeffs, Fn&& fn) {
  const FunctionSpace& W = *p.W;
  const Mesh& mesh = *p.mesh;
  if (W.family() == Family::BoundaryP1Zero) {
    const QuadratureRule q1 = quadrature_rule(1, p.quad_degree);
    const auto& facets = W.tag_facets();
    for (size_t tf = 0; tf < facets.size(); ++tf) {
      const auto& bf = mesh.boundary_facet(facets[tf]);
      const Pt a = mesh.vertex(bf.v[0]), b = mesh.vertex(bf.v[1]);
      const double len = dist(a, b);
      const int dofs[2] = {W.vertex_dof(bf.v[0]), W.vertex_dof(bf.v[1])};
      for (size_t q = 0; q < q1.points.size(); ++q) {
        const double t = q1.points[q][0];
        const double w = q1.weights[q] * len;
        const Pt x{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
        double psi = lift_at(p, bf.v[0], bf.v[1], t);
        const double vals[2] = {1.0 - t, t};
        for (int i = 0; i < 2; ++i)
          if (dofs[i] >= 0) psi += vals[i] * psi_coeffs[dofs[i]];
        fn(static_cast<int>(tf), x, w, psi, vals, dofs, 2);
      }
    }
    return;
  }
  const QuadratureRule quad = quadrature_rule(mesh.dim(), p.quad_degree);
  const int nb = W.n_scalar_basis();
  std::vector<int> dofs;
  double vals[4];
  for (int c = 0; c < mesh.n_cells(); ++c) {
    W.cell_dofs(c, dofs);
    const double scale = mesh.cell_measure(c) / (mesh.dim() == 1 ? 1.0 : 0.5);
    for (size_t q = 0; q < quad.points.size(); ++q) {
      const double w = quad.weights[q] * scale;
      W.basis_values(c, quad.points[q], vals);
      const Pt x = W.physical_point(c, quad.points[q]);
      double psi = 0.0;
      for (int i = 0; i < nb; ++i) psi += vals[i] * psi_coeffs[dofs[i]];
      fn(c, x, w, psi, vals, dofs.data(), nb);
    }
  }
}

}  // namespace

double ProblemSpec::psi_at(const Vec& psi_coeffs, int cell_or_facet, const Pt& ref_or_t) const {
  const FunctionSpace& Wsp = *W;
  if (Wsp.family() == Family::BoundaryP1Zero) {
    const auto& bf = mesh->boundary_facet(Wsp.tag_facets()[cell_or_facet]);
    const double t = ref_or_t[0];
    double psi = lift_at(*this, bf.v[0], bf.v[1], t);
    const int d0 = Wsp.vertex_dof(bf.v[0]), d1 = Wsp.vertex_dof(bf.v[1]);
    if (d0 >= 0) psi += (1.0 - t) * psi_coeffs[d0];
    if (d1 >= 0) psi += t * psi_coeffs[d1];
    return psi;
  }
  double vals[4];
  Wsp.basis_values(cell_or_facet, ref_or_t, vals);
  std::vector<int> dofs;
  Wsp.cell_dofs(cell_or_facet, dofs);
  double psi = 0.0;
  for (size_t i = 0; i < dofs.size(); ++i) psi += vals[i] * psi_coeffs[dofs[i]];
  return psi;
}

Vec nonlinear_term(const ProblemSpec& p, const Vec& psi_coeffs) {
  Vec N = Vec::Zero(p.W->n_dofs());
  const auto& entropy = p.entropy();
  sweep_omega_d(p, psi_coeffs,
                [&](int, const Pt& x, double w, double psi, const double* vals,
                    const int* dofs, int nb) {
                  const double g = entropy.grad_rstar(x, psi);
                  for (int i = 0; i < nb; ++i)
                    if (dofs[i] >= 0) N[dofs[i]] += w * g * vals[i];
                });
  return N;
}

SparseMatrix hess_weighted_mass(const ProblemSpec& p, const Vec& psi_coeffs) {
  SparseMatrix M(p.W->n_dofs(), p.W->n_dofs());
  const auto& entropy = p.entropy();
  sweep_omega_d(p, psi_coeffs,
                [&](int, const Pt& x, double w, double psi, const double* vals,
                    const int* dofs, int nb) {
                  const double h = entropy.hess_rstar(x, psi);
                  for (int i = 0; i < nb; ++i)
                    for (int j = 0; j < nb; ++j)
                      if (dofs[i] >= 0 && dofs[j] >= 0)
                        M.add(dofs[i], dofs[j], w * h * vals[i] * vals[j]);
                });
  M.finalize();
  M.symmetric = true;
  return M;
}

double observable_min_margin(const ProblemSpec& p, const Vec& psi_coeffs) {
  double m = std::numeric_limits<double>::infinity();
  const auto& entropy = p.entropy();
  sweep_omega_d(p, psi_coeffs,
                [&](int, const Pt& x, double, double psi, const double*, const int*, int) {
                  m = std::min(m, entropy.margin_latent(x, psi));
                });
  return m;
}

bool observable_strictly_interior(const ProblemSpec& p, const Vec& psi_coeffs) {
  bool ok = true;
  const auto& entropy = p.entropy();
  sweep_omega_d(p, psi_coeffs,
                [&](int, const Pt& x, double, double psi, const double*, const int*, int) {
                  if (!std::isfinite(psi)) {
                    ok = false;
                    return;
                  }
                  const double m = entropy.margin_latent(x, psi);
                  if (m > 0.0) return;
                  if (m < 0.0) {
                    ok = false;
                    return;
                  }
                  // zero margin: legitimate only as exp underflow of the
                  // log-type entropies
                  if (!(std::abs(psi) > 700.0)) ok = false;
                });
  return ok;
}

std::vector<ObservableSample> observable_values(const ProblemSpec& p, const Vec& psi_coeffs) {
  std::vector<ObservableSample> out;
  const auto& entropy = p.entropy();
  sweep_omega_d(p, psi_coeffs,
                [&](int, const Pt& x, double, double psi, const double*, const int*, int) {
                  const double o = entropy.grad_rstar(x, psi);
                  out.push_back({x, o, entropy.margin(x, o)});
                });
  return out;
}

std::pair<double, double> bregman_pair(const ProblemSpec& p, const Vec& psi_a,
                                       const Vec& psi_b) {
  // evaluate psi_b through a second sweep running in lockstep is awkward;
  // instead reconstruct both fields per point from the coefficient vectors
  double dab = 0.0, dba = 0.0;
  const auto& entropy = p.entropy();
  sweep_omega_d(p, psi_a,
                [&](int region, const Pt& x, double w, double a_val, const double* vals,
                    const int* dofs, int nb) {
                  double b_val = 0.0;
                  if (p.W->family() == Family::BoundaryP1Zero) {
                    const auto& bf = p.mesh->boundary_facet(p.W->tag_facets()[region]);
                    const double t = vals[1];  // basis values are (1-t, t)
                    b_val = lift_at(p, bf.v[0], bf.v[1], t);
                  }
                  for (int i = 0; i < nb; ++i)
                    if (dofs[i] >= 0) b_val += vals[i] * psi_b[dofs[i]];
                  const double ra = entropy.rstar(x, a_val), rb = entropy.rstar(x, b_val);
                  const double ga = entropy.grad_rstar(x, a_val), gb = entropy.grad_rstar(x, b_val);
                  dab += w * (ra - rb - gb * (a_val - b_val));
                  dba += w * (rb - ra - ga * (b_val - a_val));
                });
  return {dab, dba};
}

double w_l2_norm(const ProblemSpec& p, const Vec& w_coeffs) {
  return std::sqrt(std::max(0.0, w_coeffs.dot(p.W_mass.eigen() * w_coeffs)));
}

double energy(const ProblemSpec& p, const Vec& u_coeffs) {
  return 0.5 * u_coeffs.dot(p.A.eigen() * u_coeffs) - p.F.dot(u_coeffs);
}

double a_norm(const ProblemSpec& p, const Vec& u_coeffs) {
  return std::sqrt(std::max(0.0, u_coeffs.dot(p.A.eigen() * u_coeffs)));
}

ProblemSpec build_obstacle(std::shared_ptr<Mesh> mesh, SpatialFn f, SpatialFn phi,
                           ObstaclePair pair, int quad_degree) {
  const int dim = mesh->dim();
  if (quad_degree <= 0) quad_degree = dim == 1 ? 6 : 4;

  // the obstacle must stay below the homogeneous boundary data
  double min_gap = std::numeric_limits<double>::infinity();
  for (int bf = 0; bf < mesh->n_boundary_facets(); ++bf) {
    const auto& facet = mesh->boundary_facet(bf);
    std::vector<Pt> samples{mesh->vertex(facet.v[0]), mesh->facet_midpoint(bf)};
    if (dim == 2) samples.push_back(mesh->vertex(facet.v[1]));
    for (const Pt& x : samples) {
      PROXGAL_REQUIRE(phi(x) < 0.0, "build_obstacle: obstacle must be negative on the boundary");
      min_gap = std::min(min_gap, -phi(x));
    }
  }

  ProblemSpec p;
  p.kind = ProblemSpec::Kind::Obstacle;
  p.mesh = mesh;
  p.quad_degree = quad_degree;
  p.constraint = phi;
  p.boundary_delta = min_gap;
  p.entropy_.emplace(LegendreEntropy::shannon(phi));

  if (pair == ObstaclePair::BubbleP0) {
    p.V = std::make_shared<FunctionSpace>(*mesh, Family::P1Bubble, 1,
                                          std::vector<std::string>{"dirichlet"});
    p.W = std::make_shared<FunctionSpace>(*mesh, Family::P0Broken);
  } else {
    p.V = std::make_shared<FunctionSpace>(*mesh, Family::P1, 1,
                                          std::vector<std::string>{"dirichlet"});
    p.W = std::make_shared<FunctionSpace>(*mesh, Family::P1, 1,
                                          std::vector<std::string>{"dirichlet"});
    const auto& entropy = p.entropy();
    p.W->set_constraint_values([&entropy](const Pt& x, int) { return entropy.lift_value(x); });
    if (dim == 2) {
      const auto sym = check_local_symmetry(*mesh);
      if (!sym.pass)
        p.warnings.push_back("P1-P1 pair on a mesh without local symmetry: interpolation "
                             "optimality is not guaranteed (deviation " +
                             std::to_string(sym.max_deviation) + ")");
    }
    const double ratio = mesh->max_diameter() / mesh->min_diameter();
    if (ratio > 8.0)
      p.warnings.push_back("P1-P1 pair on a strongly graded mesh (h ratio " +
                           std::to_string(ratio) + ")");
  }

  const QuadratureRule q_exact = quadrature_rule(dim, std::max(4, quad_degree));
  const QuadratureRule q_load = quadrature_rule(dim, std::max(6, quad_degree));
  p.A = assemble(stiffness_form(*p.V), q_exact);
  p.F = assemble_vector(f, *p.V, q_load);
  p.B = assemble(mass_form(*p.V, *p.W), q_exact);
  p.W_mass = assemble(mass_form(*p.W, *p.W), q_exact);
  return p;
}

ProblemSpec build_signorini(std::shared_ptr<Mesh> mesh, LameParameters lame,
                            std::function<Eigen::Vector2d(const Pt&)> f, SpatialFn gap,
                            const std::string& dirichlet_tag, const std::string& contact_tag,
                            int quad_degree) {
  PROXGAL_REQUIRE(mesh->dim() == 2, "build_signorini: 2D meshes only");
  const auto check = check_signorini_facets(*mesh, contact_tag);
  PROXGAL_REQUIRE(check.pass, "build_signorini: contact facet check failed: " + check.reason);

  // gap positivity along the contact boundary
  for (int f_idx : mesh->facets_with_tag(contact_tag)) {
    const auto& bf = mesh->boundary_facet(f_idx);
    for (const Pt& x : {mesh->vertex(bf.v[0]), mesh->vertex(bf.v[1]), mesh->facet_midpoint(f_idx)})
      PROXGAL_REQUIRE(gap(x) > 0.0, "build_signorini: gap must be positive on the contact boundary");
  }

  ProblemSpec p;
  p.kind = ProblemSpec::Kind::Signorini;
  p.mesh = mesh;
  p.quad_degree = quad_degree;
  p.constraint = gap;
  p.contact_tag = contact_tag;
  p.entropy_.emplace(LegendreEntropy::signorini_log(gap));

  p.V = std::make_shared<FunctionSpace>(*mesh, Family::P1, 2,
                                        std::vector<std::string>{dirichlet_tag});
  p.W = std::make_shared<FunctionSpace>(*mesh, Family::BoundaryP1Zero, 1,
                                        std::vector<std::string>{}, contact_tag);

  // latent lift at the segment endpoints
  std::map<int, int> incidence;
  for (int f_idx : p.W->tag_facets()) {
    incidence[mesh->boundary_facet(f_idx).v[0]]++;
    incidence[mesh->boundary_facet(f_idx).v[1]]++;
  }
  double delta = std::numeric_limits<double>::infinity();
  for (const auto& [v, n] : incidence)
    if (n == 1) {
      p.psi_lift.push_back({v, p.entropy().lift_value(mesh->vertex(v))});
      delta = std::min(delta, gap(mesh->vertex(v)));
    }
  p.boundary_delta = delta;

  const QuadratureRule q_exact = quadrature_rule(2, std::max(4, quad_degree));
  p.A = assemble(elasticity_form(*p.V, lame.lambda, lame.mu), q_exact);
  p.F = assemble_vector(f, *p.V, q_exact);
  p.B = assemble(boundary_normal_pairing_form(*p.V, *p.W, contact_tag), q_exact);
  p.W_mass = assemble(boundary_mass_form(*p.W), q_exact);
  return p;
}

ReferenceSolution analytic_obstacle_1d(double f0, double phi0, double f2) {
  PROXGAL_REQUIRE(f0 < 0.0 && phi0 < 0.0, "analytic_obstacle_1d: f0 and phi0 must be negative");
  PROXGAL_REQUIRE(f0 + 0.25 * f2 < 0.0, "analytic_obstacle_1d: load must be negative on [0,1]");
  ReferenceSolution ref;
  ref.f = [f0, f2](const Pt& p) { return f0 + f2 * (p[0] - 0.5) * (p[0] - 0.5); };
  ref.obstacle = [phi0](const Pt&) { return phi0; };
  ref.grad_obstacle = [](const Pt&) { return Pt{0.0, 0.0}; };
  ref.boundary_delta = -phi0;

  // tangency condition at the left free point:
  // u(x) = -f0 x^2/2 - f2 (x-1/2)^4/12 + c1 x + c0 on [0, a], u(a) = phi0, u'(a) = 0
  auto tangency = [f0, f2, phi0](double a) {
    const double am = a - 0.5;
    return 0.5 * f0 * a * a +
           f2 * (-am * am * am * am / 12.0 + a * am * am * am / 3.0 + 1.0 / 192.0) - phi0;
  };
  if (tangency(0.5) >= 0.0) {
    PROXGAL_REQUIRE(f2 == 0.0, "analytic_obstacle_1d: contact-free case needs f2 = 0");
    ref.has_contact = false;
    ref.u = [f0](const Pt& p) { return 0.5 * f0 * p[0] * (1.0 - p[0]); };
    ref.grad_u = [f0](const Pt& p) { return Pt{0.5 * f0 * (1.0 - 2.0 * p[0]), 0.0}; };
    ref.lambda = [](const Pt&) { return 0.0; };
    return ref;
  }
  double lo = 1e-12, hi = 0.5;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (tangency(mid) > 0.0 ? lo : hi) = mid;
  }
  const double a = 0.5 * (lo + hi);
  const double c0 = f2 / 192.0;
  const double c1 = f0 * a + f2 * (a - 0.5) * (a - 0.5) * (a - 0.5) / 3.0;
  ref.contact_radius = a;
  ref.root_residual = std::abs(tangency(a));
  auto side = [f0, f2, c0, c1](double x) {
    const double xm = x - 0.5;
    return -0.5 * f0 * x * x - f2 * xm * xm * xm * xm / 12.0 + c1 * x + c0;
  };
  auto side_d = [f0, f2, c1](double x) {
    const double xm = x - 0.5;
    return -f0 * x - f2 * xm * xm * xm / 3.0 + c1;
  };
  ref.u = [a, phi0, side](const Pt& p) {
    double x = p[0];
    if (x > 0.5) x = 1.0 - x;
    return x >= a ? phi0 : side(x);
  };
  ref.grad_u = [a, side_d](const Pt& p) {
    double x = p[0];
    const double sign = p[0] > 0.5 ? -1.0 : 1.0;
    if (x > 0.5) x = 1.0 - x;
    if (x >= a) return Pt{0.0, 0.0};
    return Pt{sign * side_d(x), 0.0};
  };
  ref.lambda = [a, f = ref.f](const Pt& p) {
    return (p[0] >= a && p[0] <= 1.0 - a) ? -f(p) : 0.0;
  };
  return ref;
}

namespace {
double smoothstep(double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); }
double smoothstep_d(double t) { return 30.0 * t * t * (1.0 - t) * (1.0 - t); }
}  // namespace

ReferenceSolution radial_obstacle_2d(const RadialParams& prm) {
  const double b = prm.b, d = prm.d, R = prm.support_radius;
  const double r1 = prm.blend_start, r2 = prm.blend_end, delta0 = prm.delta0;
  PROXGAL_REQUIRE(b > 0 && d > 0 && R > 0 && r1 < r2 && R < 0.5 && r2 < 0.5,
                  "radial_obstacle_2d: invalid geometry");
  PROXGAL_REQUIRE(b - d * r1 * r1 > -delta0,
                  "radial_obstacle_2d: blend target above the paraboloid");

  // free radius from the value-matching condition
  auto match = [&](double a) {
    return -2.0 * d * a * a * R * R * std::log(a / R) / (R * R - a * a) - b;
  };
  double lo = 1e-9, hi = r1;
  PROXGAL_REQUIRE(match(lo) < 0.0 && match(hi) > 0.0,
                  "radial_obstacle_2d: free-boundary root not bracketed");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (match(mid) < 0.0 ? lo : hi) = mid;
  }
  const double a = 0.5 * (lo + hi);
  const double c = -4.0 * d * a * a / (R * R - a * a);

  ReferenceSolution ref;
  ref.has_contact = true;
  ref.contact_radius = a;
  ref.load_constant = c;
  ref.support_radius = R;
  ref.root_residual = std::abs(match(a));
  ref.boundary_delta = delta0;

  const Pt ctr{0.5, 0.5};
  auto radius = [ctr](const Pt& p) { return std::hypot(p[0] - ctr[0], p[1] - ctr[1]); };

  ref.f = [c, R, radius](const Pt& p) { return radius(p) < R ? c : 0.0; };
  ref.obstacle = [=](const Pt& p) {
    const double r = radius(p);
    if (r <= r1) return b - d * r * r;
    if (r >= r2) return -delta0;
    const double s = smoothstep((r - r1) / (r2 - r1));
    return (1.0 - s) * (b - d * r * r) + s * (-delta0);
  };
  ref.grad_obstacle = [=](const Pt& p) {
    const double r = radius(p);
    if (r < 1e-14) return Pt{0.0, 0.0};
    double dr;
    if (r <= r1) {
      dr = -2.0 * d * r;
    } else if (r >= r2) {
      dr = 0.0;
    } else {
      const double t = (r - r1) / (r2 - r1);
      const double s = smoothstep(t), sd = smoothstep_d(t) / (r2 - r1);
      dr = (1.0 - s) * (-2.0 * d * r) + sd * (-delta0 - (b - d * r * r));
    }
    return Pt{dr * (p[0] - ctr[0]) / r, dr * (p[1] - ctr[1]) / r};
  };
  ref.u = [=](const Pt& p) {
    const double r = radius(p);
    if (r <= a) return b - d * r * r;
    if (r >= R) return 0.0;
    return 0.5 * c * (R * R * std::log(r / R) + 0.5 * (R * R - r * r));
  };
  ref.grad_u = [=](const Pt& p) {
    const double r = radius(p);
    if (r < 1e-14) return Pt{0.0, 0.0};
    double ur;
    if (r <= a)
      ur = -2.0 * d * r;
    else if (r >= R)
      ur = 0.0;
    else
      ur = 0.5 * c * (R * R / r - r);
    return Pt{ur * (p[0] - ctr[0]) / r, ur * (p[1] - ctr[1]) / r};
  };
  ref.lambda = [=](const Pt& p) { return radius(p) <= a ? 4.0 * d - c : 0.0; };
  return ref;
}

PdasResult pdas_obstacle(const Mesh& mesh, const SpatialFn& f, const SpatialFn& phi,
                         int max_iterations, const FeFunction* init) {
  PdasResult res;
  res.space = std::make_shared<FunctionSpace>(mesh, Family::P1, 1,
                                              std::vector<std::string>{"dirichlet"});
  const FunctionSpace& V = *res.space;
  const QuadratureRule quad = quadrature_rule(mesh.dim(), 6);
  SparseMatrix A = assemble(stiffness_form(V), quad);
  const Vec F = assemble_vector(f, V, quad);
  const int n = V.n_dofs();
  Vec phi_nodal(n);
  for (int v = 0; v < mesh.n_vertices(); ++v) phi_nodal[v] = phi(mesh.vertex(v));

  std::vector<char> active(n, 0);
  if (init) {
    for (int v = 0; v < mesh.n_vertices(); ++v) {
      if (V.is_constrained(v)) continue;
      const double gap = init->value(mesh.vertex(v)) - phi_nodal[v];
      active[v] = gap <= 1e-10 * (1.0 + std::abs(phi_nodal[v])) ? 1 : 0;
    }
  }
  Vec u = Vec::Zero(n), mu = Vec::Zero(n);
  // lumped mass turns the residual functional into a pointwise multiplier
  // density, keeping the active-set test balanced under refinement
  const Vec lumped = assemble_vector([](const Pt&) { return 1.0; }, V, quad);
  const double c_pd = 1.0;
  for (int it = 1; it <= max_iterations; ++it) {
    // fixed dofs: Dirichlet boundary at 0, active set at the obstacle height
    Vec fixed_val = Vec::Zero(n);
    std::vector<char> fixed(n, 0);
    for (const auto& cst : V.constraints()) {
      fixed[cst.dof] = 1;
      fixed_val[cst.dof] = cst.value;
    }
    for (int i = 0; i < n; ++i)
      if (active[i] && !fixed[i]) {
        fixed[i] = 1;
        fixed_val[i] = phi_nodal[i];
      }
    std::vector<int> idx(n, -1);
    int nf = 0;
    for (int i = 0; i < n; ++i)
      if (!fixed[i]) idx[i] = nf++;
    const Vec fold = A.eigen() * fixed_val;
    Vec rhs(nf);
    for (int i = 0; i < n; ++i)
      if (idx[i] >= 0) rhs[idx[i]] = F[i] - fold[i];
    std::vector<Eigen::Triplet<double>> trips;
    const auto& M = A.eigen();
    for (int k = 0; k < M.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator itr(M, k); itr; ++itr)
        if (idx[itr.row()] >= 0 && idx[itr.col()] >= 0)
          trips.emplace_back(idx[itr.row()], idx[itr.col()], itr.value());
    Eigen::SparseMatrix<double> Aff(nf, nf);
    Aff.setFromTriplets(trips.begin(), trips.end());
    const Vec x = solve_direct(Aff, rhs);
    u = fixed_val;
    for (int i = 0; i < n; ++i)
      if (idx[i] >= 0) u[i] = x[idx[i]];
    mu = A.eigen() * u - F;

    std::vector<char> next(n, 0);
    for (int i = 0; i < n; ++i) {
      if (V.is_constrained(i)) continue;
      next[i] = (mu[i] / lumped[i] + c_pd * (phi_nodal[i] - u[i]) > 0.0) ? 1 : 0;
    }
    res.iterations = it;
    if (next == active && it > 1) {
      res.converged = true;
      break;
    }
    active.swap(next);
  }
  res.u = FeFunction(V);
  res.u.coeffs = u;
  res.multiplier = mu;
  return res;
}

ErrorPair error_norms(const FeFunction& u_h, const std::function<double(const Pt&)>& u_ref,
                      const std::function<Pt(const Pt&)>& grad_ref, int quad_degree) {
  const FunctionSpace& V = *u_h.space;
  const Mesh& mesh = V.mesh();
  const QuadratureRule quad = quadrature_rule(mesh.dim(), quad_degree);
  double l2 = 0.0, semi = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const double scale = mesh.cell_measure(c) / (mesh.dim() == 1 ? 1.0 : 0.5);
    for (size_t q = 0; q < quad.points.size(); ++q) {
      const double w = quad.weights[q] * scale;
      const Pt x = V.physical_point(c, quad.points[q]);
      const double dv = u_h.value_in_cell(c, quad.points[q]) - u_ref(x);
      const Pt gh = u_h.gradient_in_cell(c, quad.points[q]);
      const Pt gr = grad_ref(x);
      l2 += w * dv * dv;
      semi += w * ((gh[0] - gr[0]) * (gh[0] - gr[0]) + (gh[1] - gr[1]) * (gh[1] - gr[1]));
    }
  }
  return {std::sqrt(l2), std::sqrt(l2 + semi)};
}

ErrorPair error_norms_vector(const FeFunction& u_h, const FeFunction& u_fine, int quad_degree) {
  const FunctionSpace& V = *u_h.space;
  const Mesh& mesh = V.mesh();
  const Mesh& fine = u_fine.space->mesh();
  const QuadratureRule quad = quadrature_rule(mesh.dim(), quad_degree);
  double l2 = 0.0, semi = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const double scale = mesh.cell_measure(c) / 0.5;
    for (size_t q = 0; q < quad.points.size(); ++q) {
      const double w = quad.weights[q] * scale;
      const Pt x = V.physical_point(c, quad.points[q]);
      const int fc = fine.locate(x);
      const auto l = fine.barycentric(fc, x);
      const Pt fref{l[1], l[2]};
      const Eigen::Vector2d dv =
          u_h.vector_value_in_cell(c, quad.points[q]) - u_fine.vector_value_in_cell(fc, fref);
      const Eigen::Matrix2d dg =
          u_h.vector_gradient_in_cell(c, quad.points[q]) - u_fine.vector_gradient_in_cell(fc, fref);
      l2 += w * dv.squaredNorm();
      semi += w * dg.squaredNorm();
    }
  }
  return {std::sqrt(l2), std::sqrt(l2 + semi)};
}

double observable_l2_error(const ProblemSpec& p, const Vec& psi_coeffs,
                           const std::function<double(const Pt&)>& u_ref, int quad_degree) {
  PROXGAL_REQUIRE(p.W->family() != Family::BoundaryP1Zero,
                  "observable_l2_error: volume observables only");
  const Mesh& mesh = *p.mesh;
  const FunctionSpace& W = *p.W;
  const QuadratureRule quad = quadrature_rule(mesh.dim(), quad_degree);
  const auto& entropy = p.entropy();
  double err = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const double scale = mesh.cell_measure(c) / (mesh.dim() == 1 ? 1.0 : 0.5);
    for (size_t q = 0; q < quad.points.size(); ++q) {
      const Pt x = W.physical_point(c, quad.points[q]);
      const double psi = p.psi_at(psi_coeffs, c, quad.points[q]);
      const double o = entropy.grad_rstar(x, psi);
      const double dv = o - u_ref(x);
      err += quad.weights[q] * scale * dv * dv;
    }
  }
  return std::sqrt(err);
}

double dual_norm_error(const ProblemSpec& p, const Vec& lambda_coeffs,
                       const std::function<double(const Pt&)>& lambda_ref, int quad_degree) {
  Vec rhs_full = p.B.eigen().transpose() * lambda_coeffs;
  if (lambda_ref) {
    if (p.kind == ProblemSpec::Kind::Obstacle) {
      rhs_full -= assemble_vector(lambda_ref, *p.V, quadrature_rule(p.mesh->dim(), quad_degree));
    } else {
      // boundary pairing against the vector space trace
      const Mesh& mesh = *p.mesh;
      const QuadratureRule q1 = quadrature_rule(1, quad_degree);
      std::vector<int> dofs;
      double vals[4];
      for (int f : p.W->tag_facets()) {
        const auto& bf = mesh.boundary_facet(f);
        const Pt a = mesh.vertex(bf.v[0]), b2 = mesh.vertex(bf.v[1]);
        const double len = mesh.facet_measure(f);
        const Pt n = mesh.facet_outward_normal(f);
        p.V->cell_dofs(bf.cell, dofs);
        const int nb = p.V->n_scalar_basis();
        for (size_t q = 0; q < q1.points.size(); ++q) {
          const double t = q1.points[q][0];
          const double w = q1.weights[q] * len;
          const Pt x{a[0] + t * (b2[0] - a[0]), a[1] + t * (b2[1] - a[1])};
          const auto l = mesh.barycentric(bf.cell, x);
          p.V->basis_values(bf.cell, Pt{l[1], l[2]}, vals);
          const double lr = lambda_ref(x);
          for (int k = 0; k < nb; ++k)
            for (int comp = 0; comp < 2; ++comp)
              rhs_full[dofs[2 * k + comp]] -= w * lr * vals[k] * n[comp];
        }
      }
    }
  }
  Eigen::SparseMatrix<double> A_ff;
  Vec rhs_f;
  // Riesz lift with homogeneous values on the constrained dofs
  const auto& idx = p.V->free_index();
  const int nf = p.V->n_free_dofs();
  rhs_f.resize(nf);
  for (int dof = 0; dof < p.V->n_dofs(); ++dof)
    if (idx[dof] >= 0) rhs_f[idx[dof]] = rhs_full[dof];
  std::vector<Eigen::Triplet<double>> trips;
  const auto& M = p.A.eigen();
  for (int k = 0; k < M.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(M, k); it; ++it)
      if (idx[it.row()] >= 0 && idx[it.col()] >= 0)
        trips.emplace_back(idx[it.row()], idx[it.col()], it.value());
  A_ff.resize(nf, nf);
  A_ff.setFromTriplets(trips.begin(), trips.end());
  const Vec z = solve_direct(A_ff, rhs_f);
  return std::sqrt(std::max(0.0, z.dot(rhs_f)));
}

Vec project_onto_w(const ProblemSpec& p, const std::function<double(int, const Pt&)>& v,
                   int quad_degree) {
  PROXGAL_REQUIRE(p.W->family() != Family::BoundaryP1Zero,
                  "project_onto_w: volume families only");
  const Mesh& mesh = *p.mesh;
  const FunctionSpace& W = *p.W;
  const QuadratureRule quad = quadrature_rule(mesh.dim(), quad_degree);
  Vec rhs = Vec::Zero(W.n_dofs());
  std::vector<int> dofs;
  double vals[4];
  for (int c = 0; c < mesh.n_cells(); ++c) {
    W.cell_dofs(c, dofs);
    const int nb = W.n_scalar_basis();
    const double scale = mesh.cell_measure(c) / (mesh.dim() == 1 ? 1.0 : 0.5);
    for (size_t q = 0; q < quad.points.size(); ++q) {
      const double w = quad.weights[q] * scale;
      W.basis_values(c, quad.points[q], vals);
      const double fv = v(c, quad.points[q]);
      for (int i = 0; i < nb; ++i) rhs[dofs[i]] += w * fv * vals[i];
    }
  }
  return solve_direct(p.W_mass, rhs);
}

std::vector<double> eoc(const std::vector<double>& h, const std::vector<double>& errors) {
  PROXGAL_REQUIRE(h.size() == errors.size() && h.size() >= 2, "eoc: need at least two rows");
  std::vector<double> out;
  for (size_t i = 1; i < h.size(); ++i) {
    PROXGAL_REQUIRE(std::abs(h[i - 1] / h[i] - 2.0) <= 1e-9 * 2.0,
                    "eoc: mesh sizes must halve between rows");
    out.push_back(std::log2(errors[i - 1] / errors[i]));
  }
  return out;
}

}  // namespace proxgal
