#pragma once
// Quasi-interpolation and enrichment machinery: bubble-corrected Fortin map,
// centroid-weighted and hat-weighted Clement-type interpolants, Scott-Zhang
// with facet-based dual functionals, the strictly feasible enriching maps, and
// their boundary-trace counterparts for the contact problem.

#include <memory>
#include <string>
#include <vector>

#include "proxgal/mesh.hpp"
#include "proxgal/problems.hpp"
#include "proxgal/spaces.hpp"

namespace proxgal {

// Scalar field evaluable per (cell, reference point); the adapters below wrap
// pointwise callables and coefficient functions
struct FieldView {
  std::function<double(int cell, const Pt& ref)> eval;
};
FieldView pointwise_field(const Mesh& mesh, SpatialFn f);
FieldView fe_field(const FeFunction& f);
FieldView difference_field(const Mesh& mesh, FieldView a, SpatialFn b);

class OperatorToolbox {
 public:
  explicit OperatorToolbox(std::shared_ptr<Mesh> mesh, int quad_degree = 6);

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<Mesh> mesh_ptr() const { return mesh_; }
  int quad_degree() const { return quad_degree_; }
  const FunctionSpace& p1() const { return *p1_; }
  const FunctionSpace& p1_bubble() const { return *p1_bubble_; }
  const FunctionSpace& p0() const { return *p0_; }

  // convex centroid weights of an interior vertex: (cell, weight) pairs,
  // nonnegative, summing to one, reconstructing the vertex
  const std::vector<std::pair<int, double>>& patch_weights(int vertex) const;
  // strictly feasible shift used by the volume enriching map
  double epsilon_shift() const { return eps_; }

  // Scott-Zhang functional assignment for a vertex: a boundary facet (facet =
  // true; dirichlet-tagged facets preferred) or an incident cell
  struct SzPick {
    bool facet = false;
    int index = -1;
  };
  const SzPick& sz_pick(int vertex) const { return sz_pick_[vertex]; }

 private:
  std::shared_ptr<Mesh> mesh_;
  int quad_degree_;
  std::shared_ptr<FunctionSpace> p1_, p1_bubble_, p0_;
  std::vector<std::vector<std::pair<int, double>>> weights_;
  std::vector<SzPick> sz_pick_;
  double eps_ = 0.0;
};

// Scott-Zhang interpolant: preserves P1 and homogeneous values on tagged
// boundary facets.
FeFunction scott_zhang(const OperatorToolbox& tb, const FieldView& v);

// Centroid-weighted Clement interpolant (interior nodes average cell means
// with the convex patch weights; boundary nodes fall back to Scott-Zhang).
FeFunction clement_weighted(const OperatorToolbox& tb, const FieldView& v);

// Hat-weighted Clement interpolant (optimal on locally symmetric meshes;
// nonnegativity-preserving).
FeFunction clement_mass(const OperatorToolbox& tb, const FieldView& v);

// Bubble-corrected Fortin map into P1-bubble: cell means of the input are
// reproduced, so the pairing with broken-P0 test functions is preserved.
FeFunction fortin_bubble(const OperatorToolbox& tb, const FieldView& v);

// Strictly feasible enrichment: p1_part = C_h(v - phi) + eps at interior
// nodes; the enriched function is p1_part + phi and its constraint margin is
// exactly the minimum nodal value of p1_part.
struct EnrichedFunction {
  FeFunction p1_part;
  SpatialFn phi;
  double min_margin = 0.0;  // min over nodes of p1_part
  double value(const Pt& x) const { return p1_part.value(x) + phi(x); }
};
EnrichedFunction enrich_obstacle(const OperatorToolbox& tb, const FieldView& v,
                                 const SpatialFn& phi, ObstaclePair pair);

// --- contact-boundary machinery ---------------------------------------------

class BoundaryToolbox {
 public:
  BoundaryToolbox(std::shared_ptr<Mesh> mesh, std::string contact_tag,
                  std::string dirichlet_tag = "dirichlet");

  const Mesh& mesh() const { return *mesh_; }
  const std::string& contact_tag() const { return contact_tag_; }
  int n_vertices() const { return static_cast<int>(vertices_.size()); }
  int vertex(int ordinal) const { return vertices_[ordinal]; }
  double vertex_param(int ordinal) const { return params_[ordinal]; }
  int n_facets() const { return static_cast<int>(facets_.size()); }
  int facet(int ordinal) const { return facets_[ordinal]; }
  double epsilon_shift() const { return eps_; }
  // convex weights over vertex ordinals for an interior ordinal
  const std::vector<std::pair<int, double>>& weights(int ordinal) const;
  // hat-weighted average centroid parameter of a vertex ordinal
  double s_param(int ordinal) const { return s_[ordinal]; }
  // adjacent non-contact boundary facet of a segment endpoint ordinal
  int dirichlet_neighbor_facet(int ordinal) const;
  Pt point_at_param(double s) const;

 private:
  std::shared_ptr<Mesh> mesh_;
  std::string contact_tag_, dirichlet_tag_;
  std::vector<int> facets_;    // ordered along the segment
  std::vector<int> vertices_;  // ordered, size n_facets + 1
  std::vector<double> params_; // arclength of each vertex
  std::vector<double> s_;
  std::vector<std::vector<std::pair<int, double>>> weights_;
  double eps_ = 0.0;
  Pt origin_{0, 0}, dir_{1, 0};
};

// trace sampled per (contact facet ordinal, parameter in [0,1])
using BoundaryField = std::function<double(int facet_ordinal, double t)>;
BoundaryField pointwise_boundary_field(const BoundaryToolbox& tb, SpatialFn f);
BoundaryField normal_trace_field(const BoundaryToolbox& tb, const FeFunction& displacement);

// Nodal values along the segment (by vertex ordinal), piecewise linear.
struct BoundaryP1 {
  const BoundaryToolbox* tb = nullptr;
  std::vector<double> nodal;
  double value_at(int facet_ordinal, double t) const;
  double max_nodal() const;
  double min_nodal() const;
};

// Hat-weighted boundary Clement interpolant; interior segment nodes use the
// convex-weight construction, segment endpoints take plain point values.
BoundaryP1 clement_boundary_signorini(const BoundaryToolbox& tb, const BoundaryField& trace);

// Boundary enriching map: returns D = C_h(w_n - g) - eps (nodal); the enriched
// normal trace is D + g and its gap margin is -max(D).
struct EnrichedBoundary {
  BoundaryP1 shifted;      // C_h(w_n - g) - eps
  double min_margin = 0.0; // min over the segment of (g - enriched normal)
};
EnrichedBoundary enrich_signorini(const BoundaryToolbox& tb, const BoundaryField& normal_trace,
                                  const SpatialFn& gap);

// Scalar Fortin-type map for the contact pairing: interior segment vertices
// take the L2(contact) projection values, all other vertices Scott-Zhang.
FeFunction fortin_boundary_scalar(const OperatorToolbox& tb, const BoundaryToolbox& btb,
                                  const FieldView& v);

// Two-point left-endpoint Gauss-Radau rule on [-1,1]; exact through degree 2.
struct GaussRadau {
  std::array<double, 2> points{-1.0, 1.0 / 3.0};
  std::array<double, 2> weights{0.5, 1.5};
};
inline GaussRadau gauss_radau_reference() { return {}; }

}  // namespace proxgal
