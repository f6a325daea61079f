#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "proxgal/mesh.hpp"

using namespace proxgal;

TEST_SUITE("mesh") {

TEST_CASE("interval construction") {
  CHECK_THROWS_AS(unit_interval_mesh(0), Error);

  const Mesh m1 = unit_interval_mesh(1);
  CHECK(m1.n_vertices() == 2);
  CHECK(m1.n_cells() == 1);
  m1.validate();

  const Mesh m4 = unit_interval_mesh(4);
  for (int c = 0; c < 4; ++c) CHECK(m4.cell_diameter(c) == doctest::Approx(0.25).epsilon(1e-14));
  // interior vertex at 0.5 touches exactly two cells
  int mid = -1;
  for (int v = 0; v < m4.n_vertices(); ++v)
    if (std::abs(m4.vertex(v)[0] - 0.5) < 1e-14) mid = v;
  REQUIRE(mid >= 0);
  CHECK(m4.patch(mid).size() == 2);
  CHECK(m4.vertex_on_boundary(0));
  CHECK_FALSE(m4.vertex_on_boundary(mid));
  m4.validate();
}

TEST_CASE("square construction") {
  CHECK_THROWS_AS(unit_square_mesh(0), Error);

  const Mesh cc = unit_square_mesh(1, SquarePattern::Crisscross);
  CHECK(cc.n_vertices() == 5);
  CHECK(cc.n_cells() == 4);
  for (int c = 0; c < 4; ++c) CHECK(cc.cell_measure(c) == doctest::Approx(0.25).epsilon(1e-14));
  cc.validate();

  const Mesh dg = unit_square_mesh(2, SquarePattern::Diagonal);
  CHECK(dg.n_vertices() == 9);
  CHECK(dg.n_cells() == 8);
  dg.validate();

  const Mesh big = unit_square_mesh(3, SquarePattern::Crisscross);
  big.validate();
  CHECK(big.total_measure() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("l-shape construction") {
  const Mesh l = l_shape_mesh(4);
  l.validate();
  CHECK(l.total_measure() == doctest::Approx(0.75).epsilon(1e-13));
  CHECK(l.n_cells() == 4 * 12);
}

TEST_CASE("uniform refinement") {
  const Mesh m = uniform_refine(unit_interval_mesh(2));
  CHECK(m.n_cells() == 4);
  for (int c = 0; c < 4; ++c) CHECK(m.cell_diameter(c) == doctest::Approx(0.25));
  m.validate();

  const Mesh cc = unit_square_mesh(2, SquarePattern::Crisscross);
  const Mesh fine = uniform_refine(cc);
  fine.validate();
  CHECK(fine.n_cells() == 4 * cc.n_cells());
  // vertex count: old vertices plus one per old edge
  std::set<std::pair<int, int>> edges;
  for (int c = 0; c < cc.n_cells(); ++c)
    for (int e = 0; e < 3; ++e) {
      int a = cc.cell(c)[e], b = cc.cell(c)[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      edges.insert({a, b});
    }
  CHECK(fine.n_vertices() == cc.n_vertices() + static_cast<int>(edges.size()));
  CHECK(fine.max_diameter() == doctest::Approx(0.5 * cc.max_diameter()).epsilon(1e-14));
  CHECK(fine.total_measure() == doctest::Approx(cc.total_measure()).epsilon(1e-14));
  CHECK(fine.n_boundary_facets() == 2 * cc.n_boundary_facets());
  for (int f = 0; f < fine.n_boundary_facets(); ++f)
    CHECK(fine.boundary_facet(f).tag == "dirichlet");
}

TEST_CASE("local symmetry") {
  // structured crisscross meshes satisfy the identity exactly
  const auto cc = check_local_symmetry(unit_square_mesh(2, SquarePattern::Crisscross));
  CHECK(cc.pass);
  CHECK(cc.max_deviation <= cc.tolerance);
  CHECK(check_local_symmetry(unit_square_mesh(4, SquarePattern::Crisscross)).pass);

  // the uniform diagonal pattern turns out to satisfy the identity as well
  // (every interior vertex sees the same translation-invariant hexagon patch);
  // the checker just reports what it computes
  const auto dg = check_local_symmetry(unit_square_mesh(2, SquarePattern::Diagonal));
  CHECK(dg.max_deviation <= dg.tolerance);
  CHECK(dg.pass);

  // single triangle: no interior vertex, vacuous pass
  std::vector<Pt> verts{{0, 0}, {1, 0}, {0, 1}};
  std::vector<std::array<int, 3>> cells{{0, 1, 2}};
  std::vector<BoundaryFacet> bf{{{0, 1}, 0, "dirichlet"},
                                {{1, 2}, 0, "dirichlet"},
                                {{2, 0}, 0, "dirichlet"}};
  const Mesh tri(2, verts, cells, bf);
  const auto single = check_local_symmetry(tri);
  CHECK(single.pass);
  CHECK(single.max_deviation == 0.0);

  // red refinement of a crisscross mesh does NOT preserve the identity: the
  // midpoints of corner-centroid edges sit off their patch average (weighted
  // centroid lands at the midpoint + ~0.08 h (1,1) per unit cell)
  const auto refined = check_local_symmetry(uniform_refine(unit_square_mesh(2)));
  CHECK_FALSE(refined.pass);
  CHECK(refined.max_deviation > 1e-3);
  // the direct construction at the doubled resolution is exactly symmetric
  CHECK(check_local_symmetry(unit_square_mesh(4)).pass);
}

namespace {
// strip mesh over given bottom abscissas: two rows of vertices, squares split
// by the diagonal; bottom tagged "contact", the rest "dirichlet"
Mesh strip_mesh(const std::vector<double>& xs) {
  const int n = static_cast<int>(xs.size());
  std::vector<Pt> verts;
  for (double x : xs) verts.push_back({x, 0.0});
  for (double x : xs) verts.push_back({x, 0.5});
  std::vector<std::array<int, 3>> cells;
  std::vector<BoundaryFacet> bf;
  for (int i = 0; i + 1 < n; ++i) {
    const int base = static_cast<int>(cells.size());
    cells.push_back({i, i + 1, n + i + 1});
    cells.push_back({i, n + i + 1, n + i});
    bf.push_back({{i, i + 1}, base, "contact"});
    bf.push_back({{n + i + 1, n + i}, base + 1, "dirichlet"});
  }
  bf.push_back({{0, n}, 1, "dirichlet"});
  bf.push_back({{n - 1, 2 * n - 1}, static_cast<int>(cells.size()) - 2, "dirichlet"});
  return Mesh(2, verts, cells, bf);
}
}  // namespace

TEST_CASE("contact facet admissibility") {
  // uniform spacing: equality case of the end-facet comparison
  CHECK(check_signorini_facets(strip_mesh({0.0, 0.25, 0.5, 0.75, 1.0}), "contact").pass);

  // a single contact facet fails
  const auto one = check_signorini_facets(strip_mesh({0.0, 1.0}), "contact");
  CHECK_FALSE(one.pass);

  // end facet half the size of its neighbor fails
  const auto graded = check_signorini_facets(strip_mesh({0.0, 0.1, 0.4, 1.0}), "contact");
  CHECK_FALSE(graded.pass);
  CHECK(graded.reason.find("end facet") != std::string::npos);

  // admissible graded chain: ends no shorter than their neighbors
  CHECK(check_signorini_facets(strip_mesh({0.0, 0.3, 0.5, 0.7, 1.0}), "contact").pass);

  CHECK_THROWS_AS(check_signorini_facets(strip_mesh({0.0, 0.5, 1.0}), "absent"), Error);
}

TEST_CASE("shape regularity") {
  // equilateral triangle: h / inradius = 2 sqrt(3)
  std::vector<Pt> verts{{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2.0}};
  std::vector<std::array<int, 3>> cells{{0, 1, 2}};
  std::vector<BoundaryFacet> bf{{{0, 1}, 0, "dirichlet"},
                                {{1, 2}, 0, "dirichlet"},
                                {{2, 0}, 0, "dirichlet"}};
  const Mesh equi(2, verts, cells, bf);
  CHECK(shape_regularity(equi) == doctest::Approx(2.0 * std::sqrt(3.0)).epsilon(1e-12));

  // right isosceles triangles (diagonal pattern): h / inradius = 2 + 2 sqrt(2)
  const Mesh dg = unit_square_mesh(2, SquarePattern::Diagonal);
  const double expected = std::sqrt(2.0) / (1.0 - std::sqrt(2.0) / 2.0);
  CHECK(shape_regularity(dg) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(2.0 + 2.0 * std::sqrt(2.0)).epsilon(1e-12));

  // invariant under uniform refinement (congruent children)
  CHECK(shape_regularity(uniform_refine(dg)) == doctest::Approx(expected).epsilon(1e-12));

  CHECK_THROWS_AS(shape_regularity(unit_interval_mesh(2)), Error);
}

TEST_CASE("boundary retagging") {
  Mesh m = unit_square_mesh(2, SquarePattern::Crisscross);
  m.retag_boundary([](const Pt& mid) {
    return mid[1] < 1e-12 ? std::string("contact") : std::string("dirichlet");
  });
  CHECK(m.facets_with_tag("contact").size() == 2);
  CHECK(m.facets_with_tag("dirichlet").size() == 6);
  CHECK(m.tags().size() == 2);
}

TEST_CASE("text format round trip") {
  Mesh m = unit_square_mesh(3, SquarePattern::Crisscross);
  m.retag_boundary([](const Pt& mid) {
    return mid[1] < 1e-12 ? std::string("contact") : std::string("dirichlet");
  });
  std::ostringstream first;
  write_mesh(m, first);
  std::istringstream in(first.str());
  const Mesh back = read_mesh(in);
  CHECK(back.n_vertices() == m.n_vertices());
  CHECK(back.n_cells() == m.n_cells());
  CHECK(back.facets_with_tag("contact").size() == m.facets_with_tag("contact").size());
  std::ostringstream second;
  write_mesh(back, second);
  CHECK(first.str() == second.str());
  back.validate();
}

TEST_CASE("outward facet normals") {
  const Mesh m = unit_square_mesh(2, SquarePattern::Crisscross);
  for (int f = 0; f < m.n_boundary_facets(); ++f) {
    const Pt n = m.facet_outward_normal(f);
    CHECK(std::hypot(n[0], n[1]) == doctest::Approx(1.0).epsilon(1e-14));
    const Pt mid = m.facet_midpoint(f);
    // outward on the unit square: points away from the center
    CHECK(n[0] * (mid[0] - 0.5) + n[1] * (mid[1] - 0.5) > 0.0);
    if (mid[1] < 1e-12) {
      CHECK(n[0] == doctest::Approx(0.0).epsilon(1e-14));
      CHECK(n[1] == doctest::Approx(-1.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("point location") {
  const Mesh m = unit_square_mesh(4, SquarePattern::Crisscross);
  const int c = m.locate({0.3, 0.7});
  const auto lam = m.barycentric(c, {0.3, 0.7});
  for (int k = 0; k < 3; ++k) CHECK(lam[k] >= -1e-12);
  CHECK_THROWS_AS(m.locate({1.5, 0.5}), Error);
  CHECK_FALSE(m.try_locate({-0.1, 0.2}).has_value());
}

TEST_CASE("construction rejects broken input") {
  std::vector<Pt> verts{{0, 0}, {1, 0}, {0, 1}};
  CHECK_THROWS_AS(Mesh(2, verts, {{0, 1, 7}}, {}), Error);  // index out of range
  CHECK_THROWS_AS(Mesh(2, verts, {{0, 1, 1}}, {}), Error);  // repeated vertex
  std::vector<Pt> line{{0, 0}, {1, 0}, {2, 0}};
  CHECK_THROWS_AS(Mesh(2, line, {{0, 1, 2}}, {}), Error);   // degenerate triangle
}

}  // TEST_SUITE
