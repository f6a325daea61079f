#include "proxgal/algebra.hpp"

#include <ostream>

#include <Eigen/SparseLU>

namespace proxgal {

void SparseMatrix::finalize() {
  mat_.resize(rows_, cols_);
  mat_.setFromTriplets(triplets_.begin(), triplets_.end());
  mat_.makeCompressed();
  triplets_.clear();
  triplets_.shrink_to_fit();
  finalized_ = true;
}

const Eigen::SparseMatrix<double>& SparseMatrix::eigen() const {
  PROXGAL_REQUIRE(finalized_, "SparseMatrix: finalize() before use");
  return mat_;
}

Eigen::SparseMatrix<double>& SparseMatrix::eigen() {
  PROXGAL_REQUIRE(finalized_, "SparseMatrix: finalize() before use");
  return mat_;
}

Vec SparseMatrix::apply(const Vec& x) const { return eigen() * x; }

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (int k = 0; k < mat_.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(mat_, k); it; ++it)
      m = std::max(m, std::abs(it.value()));
  return m;
}

double SparseMatrix::symmetry_defect() const {
  Eigen::SparseMatrix<double> d = mat_ - Eigen::SparseMatrix<double>(mat_.transpose());
  double m = 0.0;
  for (int k = 0; k < d.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(d, k); it; ++it)
      m = std::max(m, std::abs(it.value()));
  return m;
}

void SparseMatrix::dump_coordinate(std::ostream& out) const {
  char buf[64];
  for (int k = 0; k < mat_.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(mat_, k); it; ++it) {
      std::snprintf(buf, sizeof(buf), "%.17g", it.value());
      out << it.row() << ' ' << it.col() << ' ' << buf << '\n';
    }
}

FormSpec stiffness_form(const FunctionSpace& space) {
  return {FormSpec::Kind::Stiffness, &space, &space, {}, 1.0, 1.0, ""};
}

FormSpec mass_form(const FunctionSpace& trial, const FunctionSpace& test) {
  return {FormSpec::Kind::Mass, &trial, &test, {}, 1.0, 1.0, ""};
}

FormSpec weighted_mass_form(const FunctionSpace& trial, const FunctionSpace& test,
                            CellCoefficient weight) {
  return {FormSpec::Kind::WeightedMass, &trial, &test, std::move(weight), 1.0, 1.0, ""};
}

FormSpec elasticity_form(const FunctionSpace& space, double lame_lambda, double lame_mu) {
  return {FormSpec::Kind::Elasticity, &space, &space, {}, lame_lambda, lame_mu, ""};
}

FormSpec boundary_normal_pairing_form(const FunctionSpace& vector_space,
                                      const FunctionSpace& boundary_space,
                                      const std::string& tag) {
  return {FormSpec::Kind::BoundaryNormalPairing, &vector_space, &boundary_space, {}, 1.0, 1.0,
          tag};
}

FormSpec boundary_mass_form(const FunctionSpace& boundary_space) {
  return {FormSpec::Kind::BoundaryMass, &boundary_space, &boundary_space, {}, 1.0, 1.0,
          boundary_space.boundary_tag()};
}

namespace {

// volume cell loop shared by the scalar/vector volume kinds
template <typename ElementKernel>
SparseMatrix assemble_volume(const FormSpec& form, const QuadratureRule& quad,
                             ElementKernel&& kernel) {
  const FunctionSpace& trial = *form.trial;
  const FunctionSpace& test = *form.test;
  PROXGAL_REQUIRE(&trial.mesh() == &test.mesh(), "assemble: spaces on different meshes");
  const Mesh& mesh = trial.mesh();
  PROXGAL_REQUIRE(quad.dim == mesh.dim(), "assemble: quadrature/mesh dimension mismatch");
  SparseMatrix A(test.n_dofs(), trial.n_dofs());
  std::vector<int> tr_dofs, te_dofs;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    trial.cell_dofs(c, tr_dofs);
    test.cell_dofs(c, te_dofs);
    kernel(c, tr_dofs, te_dofs, A);
  }
  A.finalize();
  return A;
}

struct BoundarySegment {
  int facet;      // mesh facet index
  int cell;       // owning cell
  Pt a, b;        // facet endpoints
  double length;
  Pt normal;
};

std::vector<BoundarySegment> tagged_segments(const Mesh& mesh, const std::string& tag) {
  std::vector<BoundarySegment> out;
  for (int f : mesh.facets_with_tag(tag)) {
    const auto& bf = mesh.boundary_facet(f);
    BoundarySegment s;
    s.facet = f;
    s.cell = bf.cell;
    s.a = mesh.vertex(bf.v[0]);
    s.b = mesh.vertex(bf.v[1]);
    s.length = mesh.facet_measure(f);
    s.normal = mesh.facet_outward_normal(f);
    out.push_back(s);
  }
  return out;
}

}  // namespace

SparseMatrix assemble(const FormSpec& form, const QuadratureRule& quad) {
  const FunctionSpace& trial = *form.trial;
  const FunctionSpace& test = *form.test;
  const Mesh& mesh = trial.mesh();

  switch (form.kind) {
    case FormSpec::Kind::Stiffness: {
      PROXGAL_REQUIRE(trial.multiplicity() == 1 && test.multiplicity() == 1,
                      "stiffness: scalar spaces (use elasticity for vector problems)");
      auto A = assemble_volume(form, quad, [&](int c, const std::vector<int>& tr,
                                               const std::vector<int>& te, SparseMatrix& out) {
        const int nt = trial.n_scalar_basis(), ns = test.n_scalar_basis();
        Pt gt[4], gs[4];
        for (size_t q = 0; q < quad.points.size(); ++q) {
          const double w = quad.weights[q] * mesh.cell_measure(c) /
                           (mesh.dim() == 1 ? 1.0 : 0.5);
          trial.basis_gradients(c, quad.points[q], gt);
          test.basis_gradients(c, quad.points[q], gs);
          for (int i = 0; i < ns; ++i)
            for (int j = 0; j < nt; ++j)
              out.add(te[i], tr[j], w * (gs[i][0] * gt[j][0] + gs[i][1] * gt[j][1]));
        }
      });
      A.symmetric = (form.trial == form.test);
      return A;
    }
    case FormSpec::Kind::Mass:
    case FormSpec::Kind::WeightedMass: {
      if (trial.family() == Family::BoundaryP1Zero) {
        // boundary pair variant
        PROXGAL_REQUIRE(test.family() == Family::BoundaryP1Zero,
                        "weighted mass: mixed boundary/volume pair");
        FormSpec bf = form;
        bf.kind = form.kind;
        bf.boundary_tag = trial.boundary_tag();
        // fall through to the boundary-mass code below via a small duplicate
        const auto segs = tagged_segments(mesh, bf.boundary_tag);
        QuadratureRule q1 = quadrature_rule(1, quad.degree);
        SparseMatrix A(test.n_dofs(), trial.n_dofs());
        for (const auto& s : segs) {
          const auto& bfc = mesh.boundary_facet(s.facet);
          const int d0t = trial.vertex_dof(bfc.v[0]), d1t = trial.vertex_dof(bfc.v[1]);
          const int d0s = test.vertex_dof(bfc.v[0]), d1s = test.vertex_dof(bfc.v[1]);
          for (size_t q = 0; q < q1.points.size(); ++q) {
            const double t = q1.points[q][0];
            const double w0 = q1.weights[q] * s.length;
            const Pt x{s.a[0] + t * (s.b[0] - s.a[0]), s.a[1] + t * (s.b[1] - s.a[1])};
            const double cw = form.weight ? form.weight(s.cell, x) : 1.0;
            const double vt[2] = {1.0 - t, t};
            const int trd[2] = {d0t, d1t}, ted[2] = {d0s, d1s};
            for (int i = 0; i < 2; ++i)
              for (int j = 0; j < 2; ++j)
                if (ted[i] >= 0 && trd[j] >= 0)
                  A.add(ted[i], trd[j], w0 * cw * vt[i] * vt[j]);
          }
        }
        A.finalize();
        A.symmetric = (form.trial == form.test);
        return A;
      }
      PROXGAL_REQUIRE(trial.multiplicity() == 1 && test.multiplicity() == 1,
                      "mass: scalar spaces only");
      auto A = assemble_volume(form, quad, [&](int c, const std::vector<int>& tr,
                                               const std::vector<int>& te, SparseMatrix& out) {
        const int nt = trial.n_scalar_basis(), ns = test.n_scalar_basis();
        double vt[4], vs[4];
        for (size_t q = 0; q < quad.points.size(); ++q) {
          const double w = quad.weights[q] * mesh.cell_measure(c) /
                           (mesh.dim() == 1 ? 1.0 : 0.5);
          trial.basis_values(c, quad.points[q], vt);
          test.basis_values(c, quad.points[q], vs);
          double cw = 1.0;
          if (form.kind == FormSpec::Kind::WeightedMass && form.weight)
            cw = form.weight(c, trial.physical_point(c, quad.points[q]));
          for (int i = 0; i < ns; ++i)
            for (int j = 0; j < nt; ++j) out.add(te[i], tr[j], w * cw * vs[i] * vt[j]);
        }
      });
      A.symmetric = (form.trial == form.test);
      return A;
    }
    case FormSpec::Kind::Elasticity: {
      PROXGAL_REQUIRE(trial.multiplicity() == 2 && form.trial == form.test,
                      "elasticity: vector space, trial == test");
      const double lam = form.lame_lambda, mu = form.lame_mu;
      auto A = assemble_volume(form, quad, [&](int c, const std::vector<int>& tr,
                                               const std::vector<int>& te, SparseMatrix& out) {
        const int nb = trial.n_scalar_basis();
        Pt g[4];
        for (size_t q = 0; q < quad.points.size(); ++q) {
          const double w = quad.weights[q] * mesh.cell_measure(c) / 0.5;
          trial.basis_gradients(c, quad.points[q], g);
          // dof (k, a): displacement basis = phi_k e_a
          for (int k = 0; k < nb; ++k)
            for (int a = 0; a < 2; ++a)
              for (int l = 0; l < nb; ++l)
                for (int b = 0; b < 2; ++b) {
                  // eps(phi_k e_a) : eps(phi_l e_b)
                  double eps_dot = 0.0;
                  if (a == b)
                    eps_dot = 0.5 * (g[k][0] * g[l][0] + g[k][1] * g[l][1]) +
                              0.5 * g[k][a] * g[l][a];
                  else
                    eps_dot = 0.5 * g[k][b] * g[l][a];
                  const double div_div = g[k][a] * g[l][b];
                  out.add(te[2 * k + a], tr[2 * l + b], w * (2.0 * mu * eps_dot + lam * div_div));
                }
        }
      });
      A.symmetric = true;
      return A;
    }
    case FormSpec::Kind::BoundaryNormalPairing: {
      PROXGAL_REQUIRE(trial.multiplicity() == 2, "boundary pairing: vector trial space");
      PROXGAL_REQUIRE(test.family() == Family::BoundaryP1Zero,
                      "boundary pairing: boundary test space");
      const auto segs = tagged_segments(mesh, form.boundary_tag);
      PROXGAL_REQUIRE(!segs.empty(), "boundary pairing: tag not present");
      QuadratureRule q1 = quadrature_rule(1, std::max(2, quad.degree));
      SparseMatrix B(test.n_dofs(), trial.n_dofs());
      std::vector<int> tr_dofs;
      for (const auto& s : segs) {
        const auto& bfc = mesh.boundary_facet(s.facet);
        trial.cell_dofs(s.cell, tr_dofs);
        const int nb = trial.n_scalar_basis();
        const int wd[2] = {test.vertex_dof(bfc.v[0]), test.vertex_dof(bfc.v[1])};
        double vals[4];
        for (size_t q = 0; q < q1.points.size(); ++q) {
          const double t = q1.points[q][0];
          const double w0 = q1.weights[q] * s.length;
          const Pt x{s.a[0] + t * (s.b[0] - s.a[0]), s.a[1] + t * (s.b[1] - s.a[1])};
          // reference coordinates of x in the owning cell
          const auto l = mesh.barycentric(s.cell, x);
          const Pt ref{l[1], l[2]};
          trial.basis_values(s.cell, ref, vals);
          const double wt[2] = {1.0 - t, t};
          for (int i = 0; i < 2; ++i) {
            if (wd[i] < 0) continue;
            for (int k = 0; k < nb; ++k)
              for (int a = 0; a < 2; ++a)
                B.add(wd[i], tr_dofs[2 * k + a], w0 * wt[i] * vals[k] * s.normal[a]);
          }
        }
      }
      B.finalize();
      return B;
    }
    case FormSpec::Kind::BoundaryMass: {
      FormSpec f2 = form;
      f2.kind = FormSpec::Kind::WeightedMass;
      f2.weight = nullptr;
      return assemble(f2, quad);
    }
  }
  throw Error("assemble: unknown form kind");
}

Vec assemble_vector(const std::function<double(const Pt&)>& load, const FunctionSpace& test,
                    const QuadratureRule& quad) {
  PROXGAL_REQUIRE(test.multiplicity() == 1, "assemble_vector: scalar space");
  const Mesh& mesh = test.mesh();
  Vec F = Vec::Zero(test.n_dofs());
  std::vector<int> dofs;
  double vals[4];
  for (int c = 0; c < mesh.n_cells(); ++c) {
    test.cell_dofs(c, dofs);
    const int nb = test.n_scalar_basis();
    for (size_t q = 0; q < quad.points.size(); ++q) {
      const double w = quad.weights[q] * mesh.cell_measure(c) / (mesh.dim() == 1 ? 1.0 : 0.5);
      test.basis_values(c, quad.points[q], vals);
      const double f = load(test.physical_point(c, quad.points[q]));
      for (int i = 0; i < nb; ++i) F[dofs[i]] += w * f * vals[i];
    }
  }
  return F;
}

Vec assemble_vector(const std::function<Eigen::Vector2d(const Pt&)>& load,
                    const FunctionSpace& test, const QuadratureRule& quad) {
  PROXGAL_REQUIRE(test.multiplicity() == 2, "assemble_vector: vector space");
  const Mesh& mesh = test.mesh();
  Vec F = Vec::Zero(test.n_dofs());
  std::vector<int> dofs;
  double vals[4];
  for (int c = 0; c < mesh.n_cells(); ++c) {
    test.cell_dofs(c, dofs);
    const int nb = test.n_scalar_basis();
    for (size_t q = 0; q < quad.points.size(); ++q) {
      const double w = quad.weights[q] * mesh.cell_measure(c) / 0.5;
      test.basis_values(c, quad.points[q], vals);
      const Eigen::Vector2d f = load(test.physical_point(c, quad.points[q]));
      for (int i = 0; i < nb; ++i)
        for (int a = 0; a < 2; ++a) F[dofs[2 * i + a]] += w * f[a] * vals[i];
    }
  }
  return F;
}

Vec assemble_boundary_vector(const CellCoefficient& load, const FunctionSpace& test,
                             const QuadratureRule& quad1d) {
  PROXGAL_REQUIRE(test.family() == Family::BoundaryP1Zero,
                  "assemble_boundary_vector: boundary space");
  const Mesh& mesh = test.mesh();
  Vec F = Vec::Zero(test.n_dofs());
  for (int f : test.tag_facets()) {
    const auto& bf = mesh.boundary_facet(f);
    const Pt a = mesh.vertex(bf.v[0]), b = mesh.vertex(bf.v[1]);
    const double len = mesh.facet_measure(f);
    const int wd[2] = {test.vertex_dof(bf.v[0]), test.vertex_dof(bf.v[1])};
    for (size_t q = 0; q < quad1d.points.size(); ++q) {
      const double t = quad1d.points[q][0];
      const double w0 = quad1d.weights[q] * len;
      const Pt x{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
      const double g = load(bf.cell, x);
      if (wd[0] >= 0) F[wd[0]] += w0 * g * (1.0 - t);
      if (wd[1] >= 0) F[wd[1]] += w0 * g * t;
    }
  }
  return F;
}

Vec solve_direct(const Eigen::SparseMatrix<double>& A, const Vec& rhs) {
  PROXGAL_REQUIRE(A.rows() == A.cols(), "solve_direct: matrix must be square");
  PROXGAL_REQUIRE(A.rows() == rhs.size(), "solve_direct: size mismatch");
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success)
    throw SolveError("solve_direct: factorization failed (" + lu.lastErrorMessage() + ")");
  Vec x = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw SolveError("solve_direct: back substitution failed");
  const double rhs_norm = rhs.norm();
  // backward-error style scale: a near-zero right-hand side must not turn the
  // roundoff of A x into a spurious failure
  double a_max = 0.0;
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
      a_max = std::max(a_max, std::abs(it.value()));
  const double scale = std::max(rhs_norm, a_max * x.norm());
  const double resid = (A * x - rhs).norm();
  if (scale > 0.0 && !(resid <= 1e-10 * scale)) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3e", resid / scale);
    throw SolveError(std::string("solve_direct: residual check failed, rel = ") + buf);
  }
  return x;
}

Vec solve_direct(const SparseMatrix& A, const Vec& rhs) { return solve_direct(A.eigen(), rhs); }

void reduce_system(const SparseMatrix& A, const FunctionSpace& space, const Vec& rhs_full,
                   Eigen::SparseMatrix<double>& A_ff, Vec& rhs_f) {
  const auto& idx = space.free_index();
  const int nf = space.n_free_dofs();
  Vec x_c = Vec::Zero(space.n_dofs());
  for (const auto& c : space.constraints()) x_c[c.dof] = c.value;
  const Vec fold = A.eigen() * x_c;
  rhs_f.resize(nf);
  for (int d = 0; d < space.n_dofs(); ++d)
    if (idx[d] >= 0) rhs_f[idx[d]] = rhs_full[d] - fold[d];
  std::vector<Eigen::Triplet<double>> trips;
  const auto& M = A.eigen();
  for (int k = 0; k < M.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(M, k); it; ++it)
      if (idx[it.row()] >= 0 && idx[it.col()] >= 0)
        trips.emplace_back(idx[it.row()], idx[it.col()], it.value());
  A_ff.resize(nf, nf);
  A_ff.setFromTriplets(trips.begin(), trips.end());
  A_ff.makeCompressed();
}

Vec expand_free(const FunctionSpace& space, const Vec& x_free) {
  Vec full = Vec::Zero(space.n_dofs());
  const auto& fd = space.free_dofs();
  for (size_t i = 0; i < fd.size(); ++i) full[fd[i]] = x_free[static_cast<int>(i)];
  for (const auto& c : space.constraints()) full[c.dof] = c.value;
  return full;
}

}  // namespace proxgal
