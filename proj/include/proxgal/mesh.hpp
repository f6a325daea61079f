#pragma once
// Conforming simplicial meshes on intervals (1D) and polygonal domains (2D):
// structured constructors, uniform refinement, string-keyed boundary tags,
// vertex patches, and the structural checks the solver pipeline relies on.

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "proxgal/core.hpp"

namespace proxgal {

struct BoundaryFacet {
  std::array<int, 2> v{-1, -1};  // vertex indices; v[1] unused in 1D
  int cell = -1;                 // the unique cell owning this facet
  std::string tag;
};

class Mesh {
 public:
  Mesh(int dim, std::vector<Pt> vertices, std::vector<std::array<int, 3>> cells,
       std::vector<BoundaryFacet> boundary);

  int dim() const { return dim_; }
  int n_vertices() const { return static_cast<int>(vertices_.size()); }
  int n_cells() const { return static_cast<int>(cells_.size()); }
  int n_boundary_facets() const { return static_cast<int>(boundary_.size()); }
  int vertices_per_cell() const { return dim_ + 1; }

  const Pt& vertex(int v) const { return vertices_[v]; }
  const std::array<int, 3>& cell(int c) const { return cells_[c]; }
  const BoundaryFacet& boundary_facet(int f) const { return boundary_[f]; }

  double cell_measure(int c) const { return measure_[c]; }
  double cell_diameter(int c) const { return diameter_[c]; }
  double max_diameter() const;
  double min_diameter() const;
  double total_measure() const;
  Pt cell_centroid(int c) const;

  // Cells incident to a vertex, ascending. The inverse of cell->vertex incidence.
  const std::vector<int>& patch(int v) const { return patches_[v]; }

  bool vertex_on_boundary(int v) const { return boundary_vertex_[v] != 0; }
  bool vertex_on_tag(int v, const std::string& tag) const;
  std::vector<int> facets_with_tag(const std::string& tag) const;
  std::vector<std::string> tags() const;

  // Retags every boundary facet by its midpoint.
  void retag_boundary(const std::function<std::string(const Pt&)>& namer);

  Pt facet_midpoint(int f) const;
  double facet_measure(int f) const;
  Pt facet_outward_normal(int f) const;  // 2D only

  // Cell containing p (boundary-inclusive). Throws if p lies outside the mesh.
  int locate(const Pt& p, double tol = 1e-10) const;
  std::optional<int> try_locate(const Pt& p, double tol = 1e-10) const;

  // Barycentric coordinates of p with respect to cell c.
  std::array<double, 3> barycentric(int c, const Pt& p) const;

  // Structural audit: index ranges, orientation, conformity, facet ownership,
  // patch consistency. Throws on the first violation.
  void validate() const;

 private:
  void build_derived();

  int dim_;
  std::vector<Pt> vertices_;
  std::vector<std::array<int, 3>> cells_;
  std::vector<BoundaryFacet> boundary_;
  std::vector<double> measure_;
  std::vector<double> diameter_;
  std::vector<std::vector<int>> patches_;
  std::vector<char> boundary_vertex_;

  // uniform-grid bucket locator
  int nbx_ = 0, nby_ = 0;
  double bx0_ = 0, by0_ = 0, bdx_ = 1, bdy_ = 1;
  std::vector<std::vector<int>> buckets_;
};

Mesh unit_interval_mesh(int n);

enum class SquarePattern { Crisscross, Diagonal };
Mesh unit_square_mesh(int n, SquarePattern pattern = SquarePattern::Crisscross);

// Unit square with the open quadrant [1/2,1) x [1/2,1) removed (n even);
// crisscross pattern on the remaining squares.
Mesh l_shape_mesh(int n);

// 1D: bisection. 2D: each triangle split into 4 congruent children via edge
// midpoints. Boundary tags are inherited by the sub-facets.
Mesh uniform_refine(const Mesh& mesh);

// Local mesh symmetry: for each interior vertex z, the measure-weighted
// average of incident cell centroids must coincide with z.
struct SymmetryReport {
  double max_deviation = 0.0;
  double tolerance = 0.0;  // 1e-12 scaled by the local mesh size
  bool pass = true;
};
SymmetryReport check_local_symmetry(const Mesh& mesh);

// Contact-boundary admissibility: the tagged segment must be straight, carry
// at least two facets, and each end facet must be at least as long as its
// neighbor.
struct FacetCheck {
  bool pass = true;
  std::string reason;
};
FacetCheck check_signorini_facets(const Mesh& mesh, const std::string& contact_tag);

// max over cells of h_T / inradius_T (2D only).
double shape_regularity(const Mesh& mesh);

// Plain-text format: "dim n_vertices n_cells n_bfacets", vertex lines, cell
// lines, boundary facet lines (vertex indices + tag). Round-trips exactly.
void write_mesh(const Mesh& mesh, std::ostream& out);
Mesh read_mesh(std::istream& in);
void write_mesh_file(const Mesh& mesh, const std::string& path);
Mesh read_mesh_file(const std::string& path);

}  // namespace proxgal
