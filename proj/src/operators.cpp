#include "proxgal/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "proxgal/algebra.hpp"

namespace proxgal {

namespace {

Pt cell_point(const Mesh& mesh, int c, const Pt& ref) {
  const auto& cell = mesh.cell(c);
  double lambda[3];
  ref_to_lambda(mesh.dim(), ref, lambda);
  Pt p{0.0, 0.0};
  for (int k = 0; k <= mesh.dim(); ++k) {
    p[0] += lambda[k] * mesh.vertex(cell[k])[0];
    p[1] += lambda[k] * mesh.vertex(cell[k])[1];
  }
  return p;
}

// min ||a||^2 subject to M a = b, a >= 0. Small active-set loop with a
// Lawson-Hanson fallback; M has at most dim+1 rows and patch-size columns.
Eigen::VectorXd nnls_lawson_hanson(const Eigen::MatrixXd& M, const Eigen::VectorXd& b) {
  const int m = static_cast<int>(M.cols());
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(m);
  std::vector<char> passive(m, 0);
  Eigen::VectorXd resid = b;
  for (int guard = 0; guard < 4 * m + 8; ++guard) {
    const Eigen::VectorXd w = M.transpose() * resid;
    int best = -1;
    double bestv = 1e-13;
    for (int i = 0; i < m; ++i)
      if (!passive[i] && w[i] > bestv) {
        bestv = w[i];
        best = i;
      }
    if (best < 0) break;
    passive[best] = 1;
    for (int inner = 0; inner < 4 * m + 8; ++inner) {
      std::vector<int> P;
      for (int i = 0; i < m; ++i)
        if (passive[i]) P.push_back(i);
      Eigen::MatrixXd MP(M.rows(), P.size());
      for (size_t c = 0; c < P.size(); ++c) MP.col(c) = M.col(P[c]);
      const Eigen::VectorXd z = MP.completeOrthogonalDecomposition().solve(b);
      double theta = 1.0;
      bool clipped = false;
      for (size_t c = 0; c < P.size(); ++c)
        if (z[c] <= 0.0) {
          const double denom = alpha[P[c]] - z[c];
          if (denom > 0.0) theta = std::min(theta, alpha[P[c]] / denom);
          clipped = true;
        }
      if (!clipped) {
        for (size_t c = 0; c < P.size(); ++c) alpha[P[c]] = z[c];
        break;
      }
      for (size_t c = 0; c < P.size(); ++c)
        alpha[P[c]] += theta * (z[c] - alpha[P[c]]);
      for (int i = 0; i < m; ++i)
        if (passive[i] && alpha[i] <= 1e-14) {
          passive[i] = 0;
          alpha[i] = 0.0;
        }
    }
    resid = b - M * alpha;
  }
  return alpha;
}

std::vector<double> simplex_weights(const Eigen::MatrixXd& M, const Eigen::VectorXd& b,
                                    double feas_tol) {
  const int m = static_cast<int>(M.cols());
  std::vector<char> free_set(m, 1);
  Eigen::VectorXd alpha;
  bool solved = false;
  for (int guard = 0; guard < 16 * m + 32 && !solved; ++guard) {
    std::vector<int> F;
    for (int i = 0; i < m; ++i)
      if (free_set[i]) F.push_back(i);
    if (F.empty()) break;
    Eigen::MatrixXd MF(M.rows(), F.size());
    for (size_t c = 0; c < F.size(); ++c) MF.col(c) = M.col(F[c]);
    const Eigen::VectorXd aF = MF.completeOrthogonalDecomposition().solve(b);
    if ((MF * aF - b).norm() > feas_tol) {
      // infeasible subset: re-admit the dropped column most aligned with the gap
      const Eigen::VectorXd r = b - MF * aF;
      int best = -1;
      double bestv = 0.0;
      for (int i = 0; i < m; ++i)
        if (!free_set[i]) {
          const double v = std::abs(M.col(i).dot(r));
          if (v > bestv) {
            bestv = v;
            best = i;
          }
        }
      if (best < 0) break;
      free_set[best] = 1;
      continue;
    }
    int neg = -1;
    double negv = -1e-13;
    for (size_t c = 0; c < F.size(); ++c)
      if (aF[c] < negv) {
        negv = aF[c];
        neg = F[c];
      }
    if (neg >= 0) {
      free_set[neg] = 0;
      continue;
    }
    // dual feasibility of the dropped columns: alpha_F = MF^T nu
    const Eigen::VectorXd nu =
        (MF * MF.transpose()).completeOrthogonalDecomposition().solve(b);
    int worst = -1;
    double worstv = 1e-11;
    for (int i = 0; i < m; ++i)
      if (!free_set[i] && M.col(i).dot(nu) > worstv) {
        worstv = M.col(i).dot(nu);
        worst = i;
      }
    if (worst >= 0) {
      free_set[worst] = 1;
      continue;
    }
    alpha = Eigen::VectorXd::Zero(m);
    for (size_t c = 0; c < F.size(); ++c) alpha[F[c]] = std::max(0.0, aF[c]);
    solved = true;
  }
  if (!solved) alpha = nnls_lawson_hanson(M, b);
  if ((M * alpha - b).norm() > feas_tol || alpha.minCoeff() < -1e-12)
    throw Error("patch weights: degenerate patch geometry");
  std::vector<double> out(alpha.data(), alpha.data() + m);
  return out;
}

}  // namespace

FieldView pointwise_field(const Mesh& mesh, SpatialFn f) {
  return {[&mesh, f = std::move(f)](int c, const Pt& ref) { return f(cell_point(mesh, c, ref)); }};
}

FieldView fe_field(const FeFunction& f) {
  return {[&f](int c, const Pt& ref) { return f.value_in_cell(c, ref); }};
}

FieldView difference_field(const Mesh& mesh, FieldView a, SpatialFn b) {
  return {[&mesh, a = std::move(a), b = std::move(b)](int c, const Pt& ref) {
    return a.eval(c, ref) - b(cell_point(mesh, c, ref));
  }};
}

OperatorToolbox::OperatorToolbox(std::shared_ptr<Mesh> mesh, int quad_degree)
    : mesh_(std::move(mesh)), quad_degree_(quad_degree) {
  const Mesh& m = *mesh_;
  p1_ = std::make_shared<FunctionSpace>(m, Family::P1);
  p1_bubble_ = std::make_shared<FunctionSpace>(m, Family::P1Bubble);
  p0_ = std::make_shared<FunctionSpace>(m, Family::P0Broken);

  const int dim = m.dim();
  eps_ = std::pow(static_cast<double>(m.n_cells()), -0.5) *
         std::pow(m.min_diameter(), 2.0 - 0.5 * dim);

  weights_.resize(m.n_vertices());
  for (int v = 0; v < m.n_vertices(); ++v) {
    if (m.vertex_on_boundary(v)) continue;
    const auto& patch = m.patch(v);
    const int np = static_cast<int>(patch.size());
    Eigen::MatrixXd M(dim + 1, np);
    Eigen::VectorXd b(dim + 1);
    const Pt z = m.vertex(v);
    const double hscale = m.cell_diameter(patch[0]);
    for (int c = 0; c < np; ++c) {
      const Pt s = m.cell_centroid(patch[c]);
      M(0, c) = (s[0] - z[0]) / hscale;  // centered and scaled for conditioning
      if (dim == 2) M(1, c) = (s[1] - z[1]) / hscale;
      M(dim, c) = 1.0;
    }
    b.setZero();
    b[dim] = 1.0;
    const auto w = simplex_weights(M, b, 1e-12);
    auto& entry = weights_[v];
    for (int c = 0; c < np; ++c)
      if (w[c] > 0.0) entry.push_back({patch[c], w[c]});
  }

  sz_pick_.resize(m.n_vertices());
  std::vector<int> preferred(m.n_vertices(), -1), fallback(m.n_vertices(), -1);
  for (int f = 0; f < m.n_boundary_facets(); ++f) {
    const auto& bf = m.boundary_facet(f);
    const bool dirichlet = bf.tag == "dirichlet";
    for (int k = 0; k < (dim == 2 ? 2 : 1); ++k) {
      const int v = bf.v[k];
      if (dirichlet && preferred[v] < 0) preferred[v] = f;
      if (fallback[v] < 0) fallback[v] = f;
    }
  }
  for (int v = 0; v < m.n_vertices(); ++v) {
    if (m.vertex_on_boundary(v)) {
      sz_pick_[v] = {true, preferred[v] >= 0 ? preferred[v] : fallback[v]};
    } else {
      sz_pick_[v] = {false, m.patch(v).front()};
    }
  }
}

const std::vector<std::pair<int, double>>& OperatorToolbox::patch_weights(int vertex) const {
  PROXGAL_REQUIRE(!mesh_->vertex_on_boundary(vertex), "patch_weights: interior vertices only");
  return weights_[vertex];
}

namespace {

// Scott-Zhang nodal functional
double sz_value(const OperatorToolbox& tb, const FieldView& v, int vertex) {
  const Mesh& mesh = tb.mesh();
  const auto& pick = tb.sz_pick(vertex);
  const QuadratureRule q1 = quadrature_rule(1, std::min(10, std::max(3, tb.quad_degree())));
  if (pick.facet) {
    const auto& bf = mesh.boundary_facet(pick.index);
    if (mesh.dim() == 1) {
      // point facet: nodal evaluation through the owning cell
      const auto& cell = mesh.cell(bf.cell);
      const Pt ref{cell[0] == vertex ? 0.0 : 1.0, 0.0};
      return v.eval(bf.cell, ref);
    }
    // dual edge functional (4 - 6t)/|E| with t = 0 at the vertex
    const int other = bf.v[0] == vertex ? bf.v[1] : bf.v[0];
    const Pt a = mesh.vertex(vertex), b = mesh.vertex(other);
    double val = 0.0;
    for (size_t q = 0; q < q1.points.size(); ++q) {
      const double t = q1.points[q][0];
      const Pt x{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
      const auto l = mesh.barycentric(bf.cell, x);
      val += q1.weights[q] * (4.0 - 6.0 * t) * v.eval(bf.cell, Pt{l[1], l[2]});
    }
    return val;
  }
  // cell-based dual functional
  const int c = pick.index;
  const auto& cell = mesh.cell(c);
  const int n = mesh.dim() + 1;
  int loc = -1;
  for (int k = 0; k < n; ++k)
    if (cell[k] == vertex) loc = k;
  PROXGAL_REQUIRE(loc >= 0, "sz_value: vertex not in its own pick");
  Eigen::MatrixXd Mloc(n, n);
  const double meas = mesh.cell_measure(c);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      Mloc(i, j) = meas * (i == j ? 2.0 : 1.0) / (mesh.dim() == 1 ? 6.0 : 12.0);
  const Eigen::MatrixXd Minv = Mloc.inverse();
  const QuadratureRule quad = quadrature_rule(mesh.dim(), std::max(3, tb.quad_degree()));
  const FunctionSpace& p1 = tb.p1();
  double moments[3] = {0.0, 0.0, 0.0};
  double vals[4];
  for (size_t q = 0; q < quad.points.size(); ++q) {
    const double w = quad.weights[q] * meas / (mesh.dim() == 1 ? 1.0 : 0.5);
    p1.basis_values(c, quad.points[q], vals);
    const double fv = v.eval(c, quad.points[q]);
    for (int j = 0; j < n; ++j) moments[j] += w * fv * vals[j];
  }
  double out = 0.0;
  for (int j = 0; j < n; ++j) out += Minv(loc, j) * moments[j];
  return out;
}

double cell_mean(const OperatorToolbox& tb, const FieldView& v, int c) {
  const Mesh& mesh = tb.mesh();
  const QuadratureRule quad = quadrature_rule(mesh.dim(), tb.quad_degree());
  double s = 0.0;
  for (size_t q = 0; q < quad.points.size(); ++q) s += quad.weights[q] * v.eval(c, quad.points[q]);
  return s / (mesh.dim() == 1 ? 1.0 : 0.5);
}

// (int_T v phi_z, int_T phi_z) for the hat of `vertex` on cell c
std::pair<double, double> hat_moments(const OperatorToolbox& tb, const FieldView& v, int c,
                                      int vertex) {
  const Mesh& mesh = tb.mesh();
  const auto& cell = mesh.cell(c);
  int loc = -1;
  for (int k = 0; k <= mesh.dim(); ++k)
    if (cell[k] == vertex) loc = k;
  PROXGAL_REQUIRE(loc >= 0, "hat_moments: vertex not in cell");
  const QuadratureRule quad = quadrature_rule(mesh.dim(), tb.quad_degree());
  const double scale = mesh.cell_measure(c) / (mesh.dim() == 1 ? 1.0 : 0.5);
  double num = 0.0, den = 0.0;
  double vals[4];
  for (size_t q = 0; q < quad.points.size(); ++q) {
    tb.p1().basis_values(c, quad.points[q], vals);
    const double w = quad.weights[q] * scale * vals[loc];
    num += w * v.eval(c, quad.points[q]);
    den += w;
  }
  return {num, den};
}

}  // namespace

FeFunction scott_zhang(const OperatorToolbox& tb, const FieldView& v) {
  FeFunction out(tb.p1());
  for (int z = 0; z < tb.mesh().n_vertices(); ++z) out.coeffs[z] = sz_value(tb, v, z);
  return out;
}

FeFunction clement_weighted(const OperatorToolbox& tb, const FieldView& v) {
  const Mesh& mesh = tb.mesh();
  FeFunction out(tb.p1());
  for (int z = 0; z < mesh.n_vertices(); ++z) {
    if (mesh.vertex_on_boundary(z)) {
      out.coeffs[z] = sz_value(tb, v, z);
      continue;
    }
    double val = 0.0;
    for (const auto& [c, w] : tb.patch_weights(z)) val += w * cell_mean(tb, v, c);
    out.coeffs[z] = val;
  }
  return out;
}

FeFunction clement_mass(const OperatorToolbox& tb, const FieldView& v) {
  const Mesh& mesh = tb.mesh();
  FeFunction out(tb.p1());
  for (int z = 0; z < mesh.n_vertices(); ++z) {
    if (mesh.vertex_on_boundary(z)) {
      out.coeffs[z] = sz_value(tb, v, z);
      continue;
    }
    double num = 0.0, den = 0.0;
    for (int c : mesh.patch(z)) {
      const auto [n, d] = hat_moments(tb, v, c, z);
      num += n;
      den += d;
    }
    out.coeffs[z] = num / den;
  }
  return out;
}

FeFunction fortin_bubble(const OperatorToolbox& tb, const FieldView& v) {
  const Mesh& mesh = tb.mesh();
  // quasi-interpolant part, forced to vanish on the boundary
  FeFunction lin = scott_zhang(tb, v);
  for (int z = 0; z < mesh.n_vertices(); ++z)
    if (mesh.vertex_on_boundary(z)) lin.coeffs[z] = 0.0;
  FeFunction out(tb.p1_bubble());
  for (int z = 0; z < mesh.n_vertices(); ++z) out.coeffs[z] = lin.coeffs[z];
  const QuadratureRule quad = quadrature_rule(mesh.dim(), tb.quad_degree());
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const double scale = mesh.cell_measure(c) / (mesh.dim() == 1 ? 1.0 : 0.5);
    double resid = 0.0;
    for (size_t q = 0; q < quad.points.size(); ++q)
      resid += quad.weights[q] * scale *
               (v.eval(c, quad.points[q]) - lin.value_in_cell(c, quad.points[q]));
    const double bubble_integral =
        mesh.dim() == 1 ? mesh.cell_measure(c) / 6.0 : mesh.cell_measure(c) / 60.0;
    out.coeffs[mesh.n_vertices() + c] = resid / bubble_integral;
  }
  return out;
}

EnrichedFunction enrich_obstacle(const OperatorToolbox& tb, const FieldView& v,
                                 const SpatialFn& phi, ObstaclePair pair) {
  const Mesh& mesh = tb.mesh();
  const FieldView diff = difference_field(mesh, v, phi);
  // discrete feasibility of the input: cell means (bubble pair) or hat-weighted
  // means (continuous pair) of v - phi must be nonnegative
  if (pair == ObstaclePair::BubbleP0) {
    for (int c = 0; c < mesh.n_cells(); ++c)
      PROXGAL_REQUIRE(cell_mean(tb, diff, c) / mesh.cell_measure(c) * mesh.cell_measure(c) >=
                          -1e-12 * (1.0 + std::abs(cell_mean(tb, diff, c))),
                      "enrich_obstacle: input violates the cell-mean constraints");
  } else {
    for (int z = 0; z < mesh.n_vertices(); ++z) {
      if (mesh.vertex_on_boundary(z)) continue;
      double num = 0.0, den = 0.0;
      for (int c : mesh.patch(z)) {
        const auto [n, d] = hat_moments(tb, diff, c, z);
        num += n;
        den += d;
      }
      PROXGAL_REQUIRE(num / den >= -1e-12 * (1.0 + std::abs(num / den)),
                      "enrich_obstacle: input violates the weighted-mean constraints");
    }
  }
  EnrichedFunction out;
  out.p1_part = (pair == ObstaclePair::BubbleP0) ? clement_weighted(tb, diff)
                                                 : clement_mass(tb, diff);
  for (int z = 0; z < mesh.n_vertices(); ++z)
    if (!mesh.vertex_on_boundary(z)) out.p1_part.coeffs[z] += tb.epsilon_shift();
  out.phi = phi;
  out.min_margin = out.p1_part.coeffs.minCoeff();
  return out;
}

// --- boundary machinery -----------------------------------------------------

BoundaryToolbox::BoundaryToolbox(std::shared_ptr<Mesh> mesh, std::string contact_tag,
                                 std::string dirichlet_tag)
    : mesh_(std::move(mesh)), contact_tag_(std::move(contact_tag)),
      dirichlet_tag_(std::move(dirichlet_tag)) {
  const Mesh& m = *mesh_;
  PROXGAL_REQUIRE(m.dim() == 2, "boundary toolbox: 2D meshes only");
  const auto check = check_signorini_facets(m, contact_tag_);
  PROXGAL_REQUIRE(check.pass, "boundary toolbox: " + check.reason);

  const auto raw = m.facets_with_tag(contact_tag_);
  // direction along the segment
  const Pt a0 = m.vertex(m.boundary_facet(raw[0]).v[0]);
  double len = 0.0;
  for (int f : raw)
    for (int k = 0; k < 2; ++k) {
      const Pt p = m.vertex(m.boundary_facet(f).v[k]);
      const double d = dist(a0, p);
      if (d > len) {
        len = d;
        dir_ = {(p[0] - a0[0]) / d, (p[1] - a0[1]) / d};
      }
    }
  auto param_of = [&](const Pt& p) {
    return dir_[0] * (p[0] - a0[0]) + dir_[1] * (p[1] - a0[1]);
  };
  std::vector<std::pair<double, int>> order;
  for (int f : raw) order.push_back({param_of(m.facet_midpoint(f)), f});
  std::sort(order.begin(), order.end());
  for (const auto& [s, f] : order) facets_.push_back(f);

  std::map<double, int> vset;
  for (int f : facets_)
    for (int k = 0; k < 2; ++k) {
      const int v = m.boundary_facet(f).v[k];
      vset[param_of(m.vertex(v))] = v;
    }
  double smin = vset.begin()->first;
  for (const auto& [s, v] : vset) {
    vertices_.push_back(v);
    params_.push_back(s - smin);
  }
  origin_ = m.vertex(vertices_.front());
  PROXGAL_REQUIRE(static_cast<int>(vertices_.size()) == n_facets() + 1,
                  "boundary toolbox: segment is not a simple chain");

  eps_ = std::pow(static_cast<double>(m.n_cells()), -0.5) * m.min_diameter();

  // hat-weighted centroid parameter of each vertex over its segment facets
  const int nv = n_vertices();
  s_.assign(nv, std::numeric_limits<double>::quiet_NaN());
  auto facet_len = [&](int i) { return params_[i + 1] - params_[i]; };
  for (int i = 0; i < nv; ++i) {
    double num = 0.0, den = 0.0;
    if (i > 0) {  // facet (i-1, i): hat rises 0 -> 1
      const double h = facet_len(i - 1);
      num += h * (params_[i - 1] / 2.0 + h / 3.0);
      den += h / 2.0;
    }
    if (i < nv - 1) {  // facet (i, i+1): hat falls 1 -> 0
      const double h = facet_len(i);
      num += h * (params_[i] / 2.0 + h / 6.0);
      den += h / 2.0;
    }
    s_[i] = num / den;
  }

  weights_.assign(nv, {});
  for (int i = 1; i + 1 < nv; ++i) {
    const double t = params_[i];
    const double hloc = std::max(facet_len(i - 1), facet_len(i));
    if (std::abs(s_[i] - t) <= 1e-13 * hloc) {
      weights_[i] = {{i, 1.0}};
      continue;
    }
    const int partner = s_[i] < t ? i + 1 : i - 1;
    PROXGAL_REQUIRE(partner >= 1 && partner + 1 <= nv - 1,
                    "boundary toolbox: weight construction failure at an endpoint");
    const double sa = std::min(s_[i], s_[partner]);
    const double sb = std::max(s_[i], s_[partner]);
    PROXGAL_REQUIRE(sa <= t && t <= sb,
                    "boundary toolbox: vertex outside its centroid bracket");
    const double wb = (t - sa) / (sb - sa);
    const double wi = s_[i] < t ? 1.0 - wb : wb;
    const double wp = s_[i] < t ? wb : 1.0 - wb;
    weights_[i] = {{i, wi}, {partner, wp}};
  }
}

const std::vector<std::pair<int, double>>& BoundaryToolbox::weights(int ordinal) const {
  PROXGAL_REQUIRE(ordinal >= 1 && ordinal + 1 < n_vertices(),
                  "boundary weights: interior ordinals only");
  return weights_[ordinal];
}

int BoundaryToolbox::dirichlet_neighbor_facet(int ordinal) const {
  PROXGAL_REQUIRE(ordinal == 0 || ordinal == n_vertices() - 1,
                  "dirichlet_neighbor_facet: endpoint ordinals only");
  const int v = vertices_[ordinal];
  const Mesh& m = *mesh_;
  int fallback = -1;
  for (int f = 0; f < m.n_boundary_facets(); ++f) {
    const auto& bf = m.boundary_facet(f);
    if (bf.tag == contact_tag_ || (bf.v[0] != v && bf.v[1] != v)) continue;
    if (bf.tag == dirichlet_tag_) return f;
    if (fallback < 0) fallback = f;
  }
  PROXGAL_REQUIRE(fallback >= 0, "dirichlet_neighbor_facet: endpoint has no non-contact neighbor");
  return fallback;
}

Pt BoundaryToolbox::point_at_param(double s) const {
  return {origin_[0] + s * dir_[0], origin_[1] + s * dir_[1]};
}

BoundaryField pointwise_boundary_field(const BoundaryToolbox& tb, SpatialFn f) {
  return [&tb, f = std::move(f)](int fo, double t) {
    const double s = tb.vertex_param(fo) + t * (tb.vertex_param(fo + 1) - tb.vertex_param(fo));
    return f(tb.point_at_param(s));
  };
}

BoundaryField normal_trace_field(const BoundaryToolbox& tb, const FeFunction& displacement) {
  return [&tb, &displacement](int fo, double t) {
    const Mesh& m = tb.mesh();
    const auto& bf = m.boundary_facet(tb.facet(fo));
    const Pt n = m.facet_outward_normal(tb.facet(fo));
    const Pt a = m.vertex(bf.v[0]), b = m.vertex(bf.v[1]);
    const Pt x{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
    const auto l = m.barycentric(bf.cell, x);
    const Eigen::Vector2d u = displacement.vector_value_in_cell(bf.cell, Pt{l[1], l[2]});
    return u[0] * n[0] + u[1] * n[1];
  };
}

double BoundaryP1::value_at(int fo, double t) const {
  return (1.0 - t) * nodal[fo] + t * nodal[fo + 1];
}

double BoundaryP1::max_nodal() const {
  return *std::max_element(nodal.begin(), nodal.end());
}

double BoundaryP1::min_nodal() const {
  return *std::min_element(nodal.begin(), nodal.end());
}

namespace {

// (int v phi_i, int phi_i) over the segment facets containing vertex ordinal i;
// facet parameterization must match BoundaryField's
std::pair<double, double> boundary_hat_moments(const BoundaryToolbox& tb,
                                               const BoundaryField& v, int i) {
  const QuadratureRule q1 = quadrature_rule(1, 6);
  double num = 0.0, den = 0.0;
  auto facet_len = [&](int f) { return tb.vertex_param(f + 1) - tb.vertex_param(f); };
  if (i > 0) {
    const double h = facet_len(i - 1);
    for (size_t q = 0; q < q1.points.size(); ++q) {
      const double t = q1.points[q][0];
      num += q1.weights[q] * h * t * v(i - 1, t);
      den += q1.weights[q] * h * t;
    }
  }
  if (i < tb.n_vertices() - 1) {
    const double h = facet_len(i);
    for (size_t q = 0; q < q1.points.size(); ++q) {
      const double t = q1.points[q][0];
      num += q1.weights[q] * h * (1.0 - t) * v(i, t);
      den += q1.weights[q] * h * (1.0 - t);
    }
  }
  return {num, den};
}

}  // namespace

BoundaryP1 clement_boundary_signorini(const BoundaryToolbox& tb, const BoundaryField& trace) {
  BoundaryP1 out;
  out.tb = &tb;
  const int nv = tb.n_vertices();
  out.nodal.assign(nv, 0.0);
  out.nodal[0] = trace(0, 0.0);
  out.nodal[nv - 1] = trace(tb.n_facets() - 1, 1.0);
  for (int i = 1; i + 1 < nv; ++i) {
    double val = 0.0;
    for (const auto& [j, w] : tb.weights(i)) {
      const auto [num, den] = boundary_hat_moments(tb, trace, j);
      val += w * num / den;
    }
    out.nodal[i] = val;
  }
  return out;
}

EnrichedBoundary enrich_signorini(const BoundaryToolbox& tb, const BoundaryField& normal_trace,
                                  const SpatialFn& gap) {
  const Mesh& m = tb.mesh();
  BoundaryField diff = [&tb, &normal_trace, &gap](int fo, double t) {
    const double s = tb.vertex_param(fo) + t * (tb.vertex_param(fo + 1) - tb.vertex_param(fo));
    return normal_trace(fo, t) - gap(tb.point_at_param(s));
  };
  const int nv = tb.n_vertices();
  // feasibility of the input in the hat-weighted mean sense
  for (int i = 1; i + 1 < nv; ++i) {
    const auto [num, den] = boundary_hat_moments(tb, diff, i);
    PROXGAL_REQUIRE(num / den <= 1e-12 * (1.0 + std::abs(num / den)),
                    "enrich_signorini: input violates the weighted-mean constraints");
  }
  EnrichedBoundary out;
  out.shifted.tb = &tb;
  out.shifted.nodal.assign(nv, 0.0);
  for (int i = 1; i + 1 < nv; ++i) {
    double val = 0.0;
    for (const auto& [j, w] : tb.weights(i)) {
      const auto [num, den] = boundary_hat_moments(tb, diff, j);
      val += w * num / den;
    }
    out.shifted.nodal[i] = val - tb.epsilon_shift();
  }
  // endpoints: dual-basis functional on the adjacent non-contact facet applied
  // to (0 - gap), since admissible fields vanish there
  const QuadratureRule q1 = quadrature_rule(1, 6);
  for (const int i : {0, nv - 1}) {
    const int f = tb.dirichlet_neighbor_facet(i);
    const auto& bf = m.boundary_facet(f);
    const int z = tb.vertex(i);
    const int other = bf.v[0] == z ? bf.v[1] : bf.v[0];
    const Pt a = m.vertex(z), b = m.vertex(other);
    double val = 0.0;
    for (size_t q = 0; q < q1.points.size(); ++q) {
      const double t = q1.points[q][0];
      const Pt x{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
      val += q1.weights[q] * (4.0 - 6.0 * t) * (0.0 - gap(x));
    }
    out.shifted.nodal[i] = val - tb.epsilon_shift();
  }
  out.min_margin = -out.shifted.max_nodal();
  return out;
}

FeFunction fortin_boundary_scalar(const OperatorToolbox& tb, const BoundaryToolbox& btb,
                                  const FieldView& v) {
  const Mesh& mesh = tb.mesh();
  FunctionSpace W(mesh, Family::BoundaryP1Zero, 1, {}, btb.contact_tag());
  const QuadratureRule quad = quadrature_rule(2, tb.quad_degree());
  SparseMatrix Mb = assemble(boundary_mass_form(W), quad);
  const QuadratureRule q1 = quadrature_rule(1, tb.quad_degree());
  Vec rhs = Vec::Zero(W.n_dofs());
  for (int f : W.tag_facets()) {
    const auto& bf = mesh.boundary_facet(f);
    const Pt a = mesh.vertex(bf.v[0]), b = mesh.vertex(bf.v[1]);
    const double len = mesh.facet_measure(f);
    const int wd[2] = {W.vertex_dof(bf.v[0]), W.vertex_dof(bf.v[1])};
    for (size_t q = 0; q < q1.points.size(); ++q) {
      const double t = q1.points[q][0];
      const Pt x{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
      const auto l = mesh.barycentric(bf.cell, x);
      const double fv = v.eval(bf.cell, Pt{l[1], l[2]});
      if (wd[0] >= 0) rhs[wd[0]] += q1.weights[q] * len * fv * (1.0 - t);
      if (wd[1] >= 0) rhs[wd[1]] += q1.weights[q] * len * fv * t;
    }
  }
  const Vec proj = solve_direct(Mb, rhs);
  FeFunction out(tb.p1());
  for (int z = 0; z < mesh.n_vertices(); ++z) {
    const int wd = W.vertex_dof(z);
    out.coeffs[z] = wd >= 0 ? proj[wd] : sz_value(tb, v, z);
  }
  return out;
}

}  // namespace proxgal
