#pragma once
// Finite element spaces and coefficient-vector functions for the element
// families used by the solver: continuous P1 (scalar or 2-vector), P1 enriched
// with cell bubbles, broken P0, and continuous P1 on a tagged boundary segment
// vanishing at the segment endpoints.

#include <functional>
#include <string>
#include <vector>

#include "proxgal/core.hpp"
#include "proxgal/mesh.hpp"
#include "proxgal/quadrature.hpp"

namespace proxgal {

enum class Family { P1, P1Bubble, P0Broken, BoundaryP1Zero };

struct Constraint {
  int dof;
  double value;
};

class FunctionSpace {
 public:
  FunctionSpace(const Mesh& mesh, Family family, int multiplicity = 1,
                std::vector<std::string> dirichlet_tags = {}, std::string boundary_tag = "");

  const Mesh& mesh() const { return *mesh_; }
  Family family() const { return family_; }
  int multiplicity() const { return mult_; }
  int n_dofs() const { return n_dofs_; }

  // --- volume families -------------------------------------------------
  int n_scalar_basis() const;  // per cell
  // global dofs, component-major per scalar basis function:
  // dofs[mult*k + c] pairs scalar basis k with component c
  void cell_dofs(int cell, std::vector<int>& dofs) const;
  // scalar basis values / physical gradients at a reference point
  void basis_values(int cell, const Pt& ref, double* vals) const;
  void basis_gradients(int cell, const Pt& ref, Pt* grads) const;
  Pt physical_point(int cell, const Pt& ref) const;

  // --- boundary family --------------------------------------------------
  const std::string& boundary_tag() const { return boundary_tag_; }
  const std::vector<int>& tag_facets() const { return tag_facets_; }
  // dof attached to a mesh vertex (scalar families and BoundaryP1Zero);
  // -1 when the vertex carries no dof
  int vertex_dof(int v) const;

  // --- Dirichlet constraints ---------------------------------------------
  const std::vector<Constraint>& constraints() const { return constraints_; }
  bool is_constrained(int dof) const { return constrained_mask_[dof] != 0; }
  // Reassigns prescribed values (dof set is fixed at construction); the
  // callable receives the vertex location and the vector component.
  void set_constraint_values(const std::function<double(const Pt&, int)>& value);
  // free-dof numbering: global dof -> compact index among unconstrained dofs
  const std::vector<int>& free_index() const { return free_index_; }
  const std::vector<int>& free_dofs() const { return free_dofs_; }
  int n_free_dofs() const { return static_cast<int>(free_dofs_.size()); }

 private:
  const Mesh* mesh_;
  Family family_;
  int mult_;
  std::string boundary_tag_;
  int n_dofs_ = 0;
  std::vector<Constraint> constraints_;
  std::vector<char> constrained_mask_;
  std::vector<int> free_index_, free_dofs_;
  std::vector<int> constrained_vertex_of_dof_;  // vertex behind each constrained dof
  std::vector<int> vertex_dof_;                 // BoundaryP1Zero map
  std::vector<int> tag_facets_;

  void rebuild_free_maps();
};

FunctionSpace build_space(const Mesh& mesh, Family family, int multiplicity = 1,
                          std::vector<std::string> dirichlet_tags = {},
                          std::string boundary_tag = "");

struct FeFunction {
  const FunctionSpace* space = nullptr;
  Vec coeffs;

  FeFunction() = default;
  explicit FeFunction(const FunctionSpace& s) : space(&s), coeffs(Vec::Zero(s.n_dofs())) {}

  double value_in_cell(int cell, const Pt& ref) const;
  Pt gradient_in_cell(int cell, const Pt& ref) const;
  Eigen::Vector2d vector_value_in_cell(int cell, const Pt& ref) const;
  Eigen::Matrix2d vector_gradient_in_cell(int cell, const Pt& ref) const;  // rows: components

  // global evaluation with point location (throws outside the mesh)
  double value(const Pt& p) const;
  Pt gradient(const Pt& p) const;
  Eigen::Vector2d vector_value(const Pt& p) const;

  // boundary family: value on the tf-th tagged facet at parameter t in [0,1]
  double boundary_value(int tf, double t) const;
};

// Nodal/centroid interpolation: P1 takes vertex values, P0 takes centroid
// values, bubble dofs are left at zero, the boundary family takes values at
// the interior vertices of its segment. Constrained dofs keep their
// prescribed values.
FeFunction interpolate(const FunctionSpace& space, const std::function<double(const Pt&)>& f);
FeFunction interpolate_vector(const FunctionSpace& space,
                              const std::function<Eigen::Vector2d(const Pt&)>& f);

double evaluate(const FeFunction& f, const Pt& p);

// CSV of "dof,coefficient" plus a JSON sidecar naming the family and mesh file.
void write_fefunction(const FeFunction& f, const std::string& csv_path,
                      const std::string& sidecar_path, const std::string& mesh_file);

// reference -> barycentric helpers shared with assembly
inline void ref_to_lambda(int dim, const Pt& ref, double* lambda) {
  if (dim == 1) {
    lambda[0] = 1.0 - ref[0];
    lambda[1] = ref[0];
    lambda[2] = 0.0;
  } else {
    lambda[0] = 1.0 - ref[0] - ref[1];
    lambda[1] = ref[0];
    lambda[2] = ref[1];
  }
}

}  // namespace proxgal
