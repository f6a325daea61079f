#include "proxgal/spaces.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

namespace proxgal {

FunctionSpace::FunctionSpace(const Mesh& mesh, Family family, int multiplicity,
                             std::vector<std::string> dirichlet_tags, std::string boundary_tag)
    : mesh_(&mesh), family_(family), mult_(multiplicity), boundary_tag_(std::move(boundary_tag)) {
  PROXGAL_REQUIRE(mult_ == 1 || mult_ == 2, "space: multiplicity must be 1 or 2");
  if (mult_ == 2)
    PROXGAL_REQUIRE(family_ == Family::P1 && mesh.dim() == 2,
                    "space: multiplicity 2 is only available for P1 in 2D");
  const int nv = mesh.n_vertices();
  const int nc = mesh.n_cells();

  switch (family_) {
    case Family::P1:
      n_dofs_ = mult_ * nv;
      break;
    case Family::P1Bubble:
      PROXGAL_REQUIRE(mult_ == 1, "space: bubble family is scalar");
      n_dofs_ = nv + nc;
      break;
    case Family::P0Broken:
      PROXGAL_REQUIRE(mult_ == 1, "space: P0 family is scalar");
      n_dofs_ = nc;
      break;
    case Family::BoundaryP1Zero: {
      PROXGAL_REQUIRE(mult_ == 1, "space: boundary family is scalar");
      PROXGAL_REQUIRE(!boundary_tag_.empty(), "space: boundary family needs a tag");
      tag_facets_ = mesh.facets_with_tag(boundary_tag_);
      PROXGAL_REQUIRE(!tag_facets_.empty(), "space: boundary tag not present in mesh");
      // interior vertices of the segment: incident to two tagged facets
      std::map<int, int> incidence;
      for (int f : tag_facets_) {
        incidence[mesh.boundary_facet(f).v[0]]++;
        incidence[mesh.boundary_facet(f).v[1]]++;
      }
      vertex_dof_.assign(nv, -1);
      for (const auto& [v, n] : incidence)
        if (n == 2) {
          vertex_dof_[v] = n_dofs_;
          ++n_dofs_;
        }
      break;
    }
  }

  constrained_mask_.assign(n_dofs_, 0);
  if (!dirichlet_tags.empty() &&
      (family_ == Family::P1 || family_ == Family::P1Bubble)) {
    std::set<int> fixed_vertices;
    for (const auto& tag : dirichlet_tags) {
      const auto facets = mesh.facets_with_tag(tag);
      PROXGAL_REQUIRE(!facets.empty(), "space: dirichlet tag not present: " + tag);
      for (int f : facets) {
        fixed_vertices.insert(mesh.boundary_facet(f).v[0]);
        if (mesh.dim() == 2) fixed_vertices.insert(mesh.boundary_facet(f).v[1]);
      }
    }
    for (int v : fixed_vertices)
      for (int c = 0; c < mult_; ++c) {
        const int dof = mult_ * v + c;
        constraints_.push_back({dof, 0.0});
        constrained_mask_[dof] = 1;
        constrained_vertex_of_dof_.push_back(v);
      }
  }
  rebuild_free_maps();
}

void FunctionSpace::rebuild_free_maps() {
  free_index_.assign(n_dofs_, -1);
  free_dofs_.clear();
  for (int d = 0; d < n_dofs_; ++d)
    if (!constrained_mask_[d]) {
      free_index_[d] = static_cast<int>(free_dofs_.size());
      free_dofs_.push_back(d);
    }
}

void FunctionSpace::set_constraint_values(const std::function<double(const Pt&, int)>& value) {
  for (size_t i = 0; i < constraints_.size(); ++i) {
    const int v = constrained_vertex_of_dof_[i];
    const int comp = constraints_[i].dof % mult_;
    constraints_[i].value = value(mesh_->vertex(v), comp);
  }
}

int FunctionSpace::n_scalar_basis() const {
  const int d = mesh_->dim();
  switch (family_) {
    case Family::P1: return d + 1;
    case Family::P1Bubble: return d + 2;
    case Family::P0Broken: return 1;
    default: throw Error("n_scalar_basis: not a volume family");
  }
}

void FunctionSpace::cell_dofs(int cell, std::vector<int>& dofs) const {
  const auto& c = mesh_->cell(cell);
  const int d = mesh_->dim();
  dofs.clear();
  switch (family_) {
    case Family::P1:
      for (int k = 0; k <= d; ++k)
        for (int comp = 0; comp < mult_; ++comp) dofs.push_back(mult_ * c[k] + comp);
      break;
    case Family::P1Bubble:
      for (int k = 0; k <= d; ++k) dofs.push_back(c[k]);
      dofs.push_back(mesh_->n_vertices() + cell);
      break;
    case Family::P0Broken:
      dofs.push_back(cell);
      break;
    default:
      throw Error("cell_dofs: not a volume family");
  }
}

void FunctionSpace::basis_values(int cell, const Pt& ref, double* vals) const {
  (void)cell;
  const int d = mesh_->dim();
  double lambda[3];
  ref_to_lambda(d, ref, lambda);
  switch (family_) {
    case Family::P1:
      for (int k = 0; k <= d; ++k) vals[k] = lambda[k];
      break;
    case Family::P1Bubble: {
      for (int k = 0; k <= d; ++k) vals[k] = lambda[k];
      double b = lambda[0] * lambda[1];
      if (d == 2) b *= lambda[2];
      vals[d + 1] = b;
      break;
    }
    case Family::P0Broken:
      vals[0] = 1.0;
      break;
    default:
      throw Error("basis_values: not a volume family");
  }
}

void FunctionSpace::basis_gradients(int cell, const Pt& ref, Pt* grads) const {
  const int d = mesh_->dim();
  const auto& c = mesh_->cell(cell);
  Pt glam[3];  // physical gradients of the barycentric coordinates
  if (d == 1) {
    const double h = mesh_->cell_measure(cell);
    glam[0] = {-1.0 / h, 0.0};
    glam[1] = {1.0 / h, 0.0};
    glam[2] = {0.0, 0.0};
  } else {
    const Pt &a = mesh_->vertex(c[0]), &b = mesh_->vertex(c[1]), &e = mesh_->vertex(c[2]);
    const double twoA = 2.0 * mesh_->cell_measure(cell);
    glam[0] = {(b[1] - e[1]) / twoA, (e[0] - b[0]) / twoA};
    glam[1] = {(e[1] - a[1]) / twoA, (a[0] - e[0]) / twoA};
    glam[2] = {(a[1] - b[1]) / twoA, (b[0] - a[0]) / twoA};
  }
  switch (family_) {
    case Family::P1:
      for (int k = 0; k <= d; ++k) grads[k] = glam[k];
      break;
    case Family::P1Bubble: {
      double lambda[3];
      ref_to_lambda(d, ref, lambda);
      for (int k = 0; k <= d; ++k) grads[k] = glam[k];
      Pt gb{0.0, 0.0};
      if (d == 1) {
        gb[0] = glam[0][0] * lambda[1] + glam[1][0] * lambda[0];
      } else {
        for (int k = 0; k < 3; ++k) {
          const double prod = lambda[(k + 1) % 3] * lambda[(k + 2) % 3];
          gb[0] += glam[k][0] * prod;
          gb[1] += glam[k][1] * prod;
        }
      }
      grads[d + 1] = gb;
      break;
    }
    case Family::P0Broken:
      grads[0] = {0.0, 0.0};
      break;
    default:
      throw Error("basis_gradients: not a volume family");
  }
}

Pt FunctionSpace::physical_point(int cell, const Pt& ref) const {
  const int d = mesh_->dim();
  const auto& c = mesh_->cell(cell);
  double lambda[3];
  ref_to_lambda(d, ref, lambda);
  Pt p{0.0, 0.0};
  for (int k = 0; k <= d; ++k) {
    p[0] += lambda[k] * mesh_->vertex(c[k])[0];
    p[1] += lambda[k] * mesh_->vertex(c[k])[1];
  }
  return p;
}

int FunctionSpace::vertex_dof(int v) const {
  switch (family_) {
    case Family::P1:
    case Family::P1Bubble:
      return mult_ * v;
    case Family::BoundaryP1Zero:
      return vertex_dof_[v];
    default:
      return -1;
  }
}

FunctionSpace build_space(const Mesh& mesh, Family family, int multiplicity,
                          std::vector<std::string> dirichlet_tags, std::string boundary_tag) {
  return FunctionSpace(mesh, family, multiplicity, std::move(dirichlet_tags),
                       std::move(boundary_tag));
}

double FeFunction::value_in_cell(int cell, const Pt& ref) const {
  PROXGAL_REQUIRE(space->multiplicity() == 1, "value_in_cell: scalar spaces only");
  const int nb = space->n_scalar_basis();
  double vals[4];
  space->basis_values(cell, ref, vals);
  std::vector<int> dofs;
  space->cell_dofs(cell, dofs);
  double s = 0.0;
  for (int k = 0; k < nb; ++k) s += coeffs[dofs[k]] * vals[k];
  return s;
}

Pt FeFunction::gradient_in_cell(int cell, const Pt& ref) const {
  PROXGAL_REQUIRE(space->multiplicity() == 1, "gradient_in_cell: scalar spaces only");
  const int nb = space->n_scalar_basis();
  Pt grads[4];
  space->basis_gradients(cell, ref, grads);
  std::vector<int> dofs;
  space->cell_dofs(cell, dofs);
  Pt g{0.0, 0.0};
  for (int k = 0; k < nb; ++k) {
    g[0] += coeffs[dofs[k]] * grads[k][0];
    g[1] += coeffs[dofs[k]] * grads[k][1];
  }
  return g;
}

Eigen::Vector2d FeFunction::vector_value_in_cell(int cell, const Pt& ref) const {
  PROXGAL_REQUIRE(space->multiplicity() == 2, "vector_value_in_cell: vector spaces only");
  const int nb = space->n_scalar_basis();
  double vals[4];
  space->basis_values(cell, ref, vals);
  std::vector<int> dofs;
  space->cell_dofs(cell, dofs);
  Eigen::Vector2d out(0.0, 0.0);
  for (int k = 0; k < nb; ++k)
    for (int c = 0; c < 2; ++c) out[c] += coeffs[dofs[2 * k + c]] * vals[k];
  return out;
}

Eigen::Matrix2d FeFunction::vector_gradient_in_cell(int cell, const Pt& ref) const {
  PROXGAL_REQUIRE(space->multiplicity() == 2, "vector_gradient_in_cell: vector spaces only");
  const int nb = space->n_scalar_basis();
  Pt grads[4];
  space->basis_gradients(cell, ref, grads);
  std::vector<int> dofs;
  space->cell_dofs(cell, dofs);
  Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
  for (int k = 0; k < nb; ++k)
    for (int c = 0; c < 2; ++c) {
      g(c, 0) += coeffs[dofs[2 * k + c]] * grads[k][0];
      g(c, 1) += coeffs[dofs[2 * k + c]] * grads[k][1];
    }
  return g;
}

namespace {
Pt lambda_to_ref(int dim, int cell, const Mesh& mesh, const Pt& p) {
  const auto l = mesh.barycentric(cell, p);
  if (dim == 1) return {l[1], 0.0};
  return {l[1], l[2]};
}
}  // namespace

double FeFunction::value(const Pt& p) const {
  const int cell = space->mesh().locate(p);
  return value_in_cell(cell, lambda_to_ref(space->mesh().dim(), cell, space->mesh(), p));
}

Pt FeFunction::gradient(const Pt& p) const {
  const int cell = space->mesh().locate(p);
  return gradient_in_cell(cell, lambda_to_ref(space->mesh().dim(), cell, space->mesh(), p));
}

Eigen::Vector2d FeFunction::vector_value(const Pt& p) const {
  const int cell = space->mesh().locate(p);
  return vector_value_in_cell(cell, lambda_to_ref(space->mesh().dim(), cell, space->mesh(), p));
}

double FeFunction::boundary_value(int tf, double t) const {
  PROXGAL_REQUIRE(space->family() == Family::BoundaryP1Zero,
                  "boundary_value: boundary family only");
  const Mesh& mesh = space->mesh();
  const auto& bf = mesh.boundary_facet(space->tag_facets()[tf]);
  const int d0 = space->vertex_dof(bf.v[0]);
  const int d1 = space->vertex_dof(bf.v[1]);
  double s = 0.0;
  if (d0 >= 0) s += (1.0 - t) * coeffs[d0];
  if (d1 >= 0) s += t * coeffs[d1];
  return s;
}

FeFunction interpolate(const FunctionSpace& space, const std::function<double(const Pt&)>& f) {
  PROXGAL_REQUIRE(space.multiplicity() == 1, "interpolate: scalar spaces only");
  FeFunction out(space);
  const Mesh& mesh = space.mesh();
  switch (space.family()) {
    case Family::P1:
    case Family::P1Bubble:
      for (int v = 0; v < mesh.n_vertices(); ++v) out.coeffs[v] = f(mesh.vertex(v));
      break;  // bubble dofs stay zero
    case Family::P0Broken:
      for (int c = 0; c < mesh.n_cells(); ++c) out.coeffs[c] = f(mesh.cell_centroid(c));
      break;
    case Family::BoundaryP1Zero:
      for (int v = 0; v < mesh.n_vertices(); ++v)
        if (space.vertex_dof(v) >= 0) out.coeffs[space.vertex_dof(v)] = f(mesh.vertex(v));
      break;
  }
  for (const auto& c : space.constraints()) out.coeffs[c.dof] = c.value;
  return out;
}

FeFunction interpolate_vector(const FunctionSpace& space,
                              const std::function<Eigen::Vector2d(const Pt&)>& f) {
  PROXGAL_REQUIRE(space.multiplicity() == 2, "interpolate_vector: vector spaces only");
  FeFunction out(space);
  const Mesh& mesh = space.mesh();
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const Eigen::Vector2d val = f(mesh.vertex(v));
    out.coeffs[2 * v] = val[0];
    out.coeffs[2 * v + 1] = val[1];
  }
  for (const auto& c : space.constraints()) out.coeffs[c.dof] = c.value;
  return out;
}

double evaluate(const FeFunction& f, const Pt& p) { return f.value(p); }

void write_fefunction(const FeFunction& f, const std::string& csv_path,
                      const std::string& sidecar_path, const std::string& mesh_file) {
  std::ofstream csv(csv_path);
  PROXGAL_REQUIRE(csv.good(), "write_fefunction: cannot open " + csv_path);
  csv << "dof,coefficient\n";
  char buf[64];
  for (int d = 0; d < f.coeffs.size(); ++d) {
    std::snprintf(buf, sizeof(buf), "%.17g", f.coeffs[d]);
    csv << d << ',' << buf << '\n';
  }
  const char* family = nullptr;
  switch (f.space->family()) {
    case Family::P1: family = "P1"; break;
    case Family::P1Bubble: family = "P1Bubble"; break;
    case Family::P0Broken: family = "P0Broken"; break;
    case Family::BoundaryP1Zero: family = "BoundaryP1Zero"; break;
  }
  std::ofstream side(sidecar_path);
  PROXGAL_REQUIRE(side.good(), "write_fefunction: cannot open " + sidecar_path);
  side << "{\n  \"family\": \"" << family << "\",\n  \"multiplicity\": "
       << f.space->multiplicity() << ",\n  \"dofs\": " << f.space->n_dofs()
       << ",\n  \"mesh\": \"" << mesh_file << "\"\n}\n";
}

}  // namespace proxgal
