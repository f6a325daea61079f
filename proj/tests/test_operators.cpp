#include <doctest.h>

#include <cmath>
#include <random>

#include "proxgal/operators.hpp"
#include "proxgal/study.hpp"

using namespace proxgal;

namespace {

std::shared_ptr<Mesh> cc_mesh(int n) {
  return std::make_shared<Mesh>(unit_square_mesh(n, SquarePattern::Crisscross));
}

double nodal_defect(const FeFunction& f, const SpatialFn& g) {
  double worst = 0.0;
  const Mesh& mesh = f.space->mesh();
  for (int v = 0; v < mesh.n_vertices(); ++v)
    worst = std::max(worst, std::abs(f.coeffs[v] - g(mesh.vertex(v))));
  return worst;
}

}  // namespace

TEST_SUITE("operators") {

TEST_CASE("convex patch weights") {
  for (auto mesh : {cc_mesh(3), std::make_shared<Mesh>(unit_square_mesh(3, SquarePattern::Diagonal)),
                    std::make_shared<Mesh>(uniform_refine(unit_square_mesh(2)))}) {
    OperatorToolbox tb(mesh);
    for (int v = 0; v < mesh->n_vertices(); ++v) {
      if (mesh->vertex_on_boundary(v)) continue;
      const auto& w = tb.patch_weights(v);
      double sum = 0.0;
      Pt recon{0.0, 0.0};
      double hloc = 0.0;
      for (const auto& [c, alpha] : w) {
        CHECK(alpha >= 0.0);
        sum += alpha;
        const Pt s = mesh->cell_centroid(c);
        recon[0] += alpha * s[0];
        recon[1] += alpha * s[1];
        hloc = std::max(hloc, mesh->cell_diameter(c));
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(dist(recon, mesh->vertex(v)) <= 1e-12 * hloc);
    }
  }
  // 1D patches
  auto interval = std::make_shared<Mesh>(unit_interval_mesh(5));
  OperatorToolbox tb1(interval);
  for (int v = 1; v < 5; ++v) {
    double sum = 0.0, recon = 0.0;
    for (const auto& [c, alpha] : tb1.patch_weights(v)) {
      sum += alpha;
      recon += alpha * interval->cell_centroid(c)[0];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(recon - interval->vertex(v)[0]) <= 1e-12);
  }
}

TEST_CASE("scott-zhang reproduces affine fields and boundary zeros") {
  auto mesh = cc_mesh(3);
  OperatorToolbox tb(mesh);
  const SpatialFn affine = [](const Pt& p) { return 1.5 - 0.7 * p[0] + 0.4 * p[1]; };
  CHECK(nodal_defect(scott_zhang(tb, pointwise_field(*mesh, affine)), affine) <= 1e-12);

  const SpatialFn zero_trace = [](const Pt& p) {
    return p[0] * (1.0 - p[0]) * p[1] * (1.0 - p[1]);
  };
  const FeFunction sz = scott_zhang(tb, pointwise_field(*mesh, zero_trace));
  for (int v = 0; v < mesh->n_vertices(); ++v)
    if (mesh->vertex_on_boundary(v)) CHECK(std::abs(sz.coeffs[v]) <= 1e-13);

  // 1D: boundary functionals degenerate to point values
  auto interval = std::make_shared<Mesh>(unit_interval_mesh(4));
  OperatorToolbox tbi(interval);
  const SpatialFn affine1 = [](const Pt& p) { return 2.0 * p[0] - 0.3; };
  CHECK(nodal_defect(scott_zhang(tbi, pointwise_field(*interval, affine1)), affine1) <= 1e-12);
}

TEST_CASE("centroid-weighted interpolant") {
  auto mesh = cc_mesh(3);
  OperatorToolbox tb(mesh);
  const SpatialFn affine = [](const Pt& p) { return -0.2 + 0.9 * p[0] - 1.1 * p[1]; };
  CHECK(nodal_defect(clement_weighted(tb, pointwise_field(*mesh, affine)), affine) <= 1e-12);
  const SpatialFn constant = [](const Pt&) { return 4.2; };
  CHECK(nodal_defect(clement_weighted(tb, pointwise_field(*mesh, constant)), constant) <= 1e-12);
}

TEST_CASE("hat-weighted interpolant") {
  auto mesh = cc_mesh(3);  // locally symmetric
  OperatorToolbox tb(mesh);
  const SpatialFn affine = [](const Pt& p) { return 0.3 + 0.5 * p[0] + 0.25 * p[1]; };
  const FeFunction ch = clement_mass(tb, pointwise_field(*mesh, affine));
  for (int v = 0; v < mesh->n_vertices(); ++v)
    if (!mesh->vertex_on_boundary(v))
      CHECK(std::abs(ch.coeffs[v] - affine(mesh->vertex(v))) <= 1e-12);

  // nonnegative input gives nonnegative nodal values (hat weights are positive)
  const SpatialFn bump = [](const Pt& p) {
    return p[0] * (1.0 - p[0]) * p[1] * (1.0 - p[1]);
  };
  const FeFunction pos = clement_mass(tb, pointwise_field(*mesh, bump));
  for (int v = 0; v < mesh->n_vertices(); ++v) CHECK(pos.coeffs[v] >= -1e-14);
}

TEST_CASE("bubble fortin map preserves cell means") {
  auto mesh = cc_mesh(3);
  OperatorToolbox tb(mesh, 8);
  // continuous P1 input with zero trace
  const SpatialFn vfun = [](const Pt& p) {
    return p[0] * (1.0 - p[0]) * p[1] * (1.0 - p[1]);
  };
  const FieldView v = pointwise_field(*mesh, vfun);
  const FeFunction pv = fortin_bubble(tb, v);
  const QuadratureRule quad = quadrature_rule(2, 8);
  for (int c = 0; c < mesh->n_cells(); ++c) {
    double in = 0.0, out = 0.0;
    for (size_t q = 0; q < quad.points.size(); ++q) {
      in += quad.weights[q] * v.eval(c, quad.points[q]);
      out += quad.weights[q] * pv.value_in_cell(c, quad.points[q]);
    }
    CHECK(in == doctest::Approx(out).epsilon(1e-12));
  }
  // interior constant: means reproduced even though the linear part is clipped
  const FieldView one = pointwise_field(*mesh, [](const Pt&) { return 1.0; });
  const FeFunction p1v = fortin_bubble(tb, one);
  for (int c = 0; c < mesh->n_cells(); ++c) {
    double out = 0.0;
    for (size_t q = 0; q < quad.points.size(); ++q)
      out += quad.weights[q] * p1v.value_in_cell(c, quad.points[q]);
    CHECK(out / 0.5 == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("interpolation rates on a smooth field") {
  const SpatialFn smooth = [](const Pt& p) {
    return std::sin(M_PI * p[0]) * std::sin(M_PI * p[1]);
  };
  const std::function<Pt(const Pt&)> gsmooth = [](const Pt& p) {
    return Pt{M_PI * std::cos(M_PI * p[0]) * std::sin(M_PI * p[1]),
              M_PI * std::sin(M_PI * p[0]) * std::cos(M_PI * p[1])};
  };
  std::vector<double> h, l2w, l2m, l2s, h1w;
  for (int n : {8, 16}) {
    auto mesh = cc_mesh(n);
    OperatorToolbox tb(mesh);
    const FieldView v = pointwise_field(*mesh, smooth);
    h.push_back(mesh->max_diameter());
    l2w.push_back(error_norms(clement_weighted(tb, v), smooth, gsmooth, 8).l2);
    l2m.push_back(error_norms(clement_mass(tb, v), smooth, gsmooth, 8).l2);
    l2s.push_back(error_norms(scott_zhang(tb, v), smooth, gsmooth, 8).l2);
    h1w.push_back(error_norms(clement_weighted(tb, v), smooth, gsmooth, 8).h1);
  }
  // quick sanity between two levels; the 3-level study runs in the acceptance suite
  CHECK(eoc(h, l2w).back() > 1.6);
  CHECK(eoc(h, l2m).back() > 1.6);
  CHECK(eoc(h, l2s).back() > 1.6);
  CHECK(eoc(h, h1w).back() > 0.8);
}

TEST_CASE("volume enrichment: constants and infeasible inputs") {
  auto mesh = cc_mesh(4);
  OperatorToolbox tb(mesh);
  const SpatialFn phi = [](const Pt&) { return -0.25; };
  const double c = 0.125;
  const FieldView shifted = pointwise_field(*mesh, [phi, c](const Pt& p) { return phi(p) + c; });
  for (const auto pair : {ObstaclePair::BubbleP0, ObstaclePair::P1P1}) {
    const EnrichedFunction e = enrich_obstacle(tb, shifted, phi, pair);
    // constants are reproduced: margin floor is exactly c at the boundary nodes
    CHECK(e.min_margin == doctest::Approx(c).epsilon(1e-12));
    CHECK(e.min_margin >= std::min(c, tb.epsilon_shift()) - 1e-12);
  }
  const FieldView below = pointwise_field(*mesh, [phi](const Pt& p) { return phi(p) - 1.0; });
  CHECK_THROWS_AS(enrich_obstacle(tb, below, phi, ObstaclePair::BubbleP0), Error);
  CHECK_THROWS_AS(enrich_obstacle(tb, below, phi, ObstaclePair::P1P1), Error);
}

TEST_CASE("epsilon shift formula") {
  auto mesh = cc_mesh(4);
  OperatorToolbox tb(mesh);
  const double expected =
      std::pow(static_cast<double>(mesh->n_cells()), -0.5) * mesh->min_diameter();
  CHECK(tb.epsilon_shift() == doctest::Approx(expected).epsilon(1e-13));  // n = 2: h^(2-1)
  auto interval = std::make_shared<Mesh>(unit_interval_mesh(8));
  OperatorToolbox tbi(interval);
  CHECK(tbi.epsilon_shift() ==
        doctest::Approx(std::pow(8.0, -0.5) * std::pow(0.125, 1.5)).epsilon(1e-13));
}

TEST_CASE("boundary toolbox geometry") {
  auto mesh = contact_square_mesh(4);
  BoundaryToolbox btb(mesh, "contact");
  CHECK(btb.n_facets() == 4);
  CHECK(btb.n_vertices() == 5);
  // uniform spacing: the hat-weighted centroid of each interior vertex is itself
  for (int i = 1; i + 1 < btb.n_vertices(); ++i) {
    CHECK(btb.s_param(i) == doctest::Approx(btb.vertex_param(i)).epsilon(1e-12));
    const auto& w = btb.weights(i);
    double sum = 0.0, recon = 0.0;
    for (const auto& [j, alpha] : w) {
      CHECK(alpha >= 0.0);
      sum += alpha;
      recon += alpha * btb.s_param(j);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(recon == doctest::Approx(btb.vertex_param(i)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(btb.weights(0), Error);
}

TEST_CASE("boundary interpolant reproduces affine traces") {
  auto mesh = contact_square_mesh(5);
  BoundaryToolbox btb(mesh, "contact");
  const SpatialFn affine = [](const Pt& p) { return 0.2 + 1.7 * p[0]; };
  const BoundaryP1 ch = clement_boundary_signorini(btb, pointwise_boundary_field(btb, affine));
  for (int i = 1; i + 1 < btb.n_vertices(); ++i)
    CHECK(ch.nodal[i] ==
          doctest::Approx(affine(mesh->vertex(btb.vertex(i)))).epsilon(1e-12));
}

TEST_CASE("boundary enrichment margin floor") {
  auto mesh = contact_square_mesh(6);
  BoundaryToolbox btb(mesh, "contact");
  const SpatialFn gap = [](const Pt& p) { return 0.05 + 0.2 * (p[0] - 0.5) * (p[0] - 0.5); };
  const double c = 0.02;
  // trace with constant gap margin c
  const BoundaryField trace = pointwise_boundary_field(
      btb, [gap, c](const Pt& p) { return gap(p) - c; });
  const EnrichedBoundary e = enrich_signorini(btb, trace, gap);
  const double delta = gap(mesh->vertex(btb.vertex(0)));  // 0.1 at both corners
  CHECK(e.min_margin >= std::min({c, delta, btb.epsilon_shift()}) - 1e-12);
  CHECK(e.min_margin > 0.0);
  // infeasible trace rejected
  const BoundaryField bad = pointwise_boundary_field(
      btb, [gap](const Pt& p) { return gap(p) + 0.5; });
  CHECK_THROWS_AS(enrich_signorini(btb, bad, gap), Error);
}

TEST_CASE("boundary fortin map preserves contact moments") {
  auto mesh = contact_square_mesh(5);
  OperatorToolbox tb(mesh, 8);
  BoundaryToolbox btb(mesh, "contact");
  // scalar field vanishing on the non-contact boundary
  const SpatialFn vfun = [](const Pt& p) { return p[0] * (1.0 - p[0]) * (1.0 - p[1]); };
  const FieldView v = pointwise_field(*mesh, vfun);
  const FeFunction pv = fortin_boundary_scalar(tb, btb, v);
  // moment property against every interior contact hat
  const FunctionSpace w(*mesh, Family::BoundaryP1Zero, 1, {}, "contact");
  const QuadratureRule q1 = quadrature_rule(1, 8);
  Vec resid = Vec::Zero(w.n_dofs());
  for (int f : w.tag_facets()) {
    const auto& bf = mesh->boundary_facet(f);
    const Pt a = mesh->vertex(bf.v[0]), b = mesh->vertex(bf.v[1]);
    const double len = mesh->facet_measure(f);
    const int wd[2] = {w.vertex_dof(bf.v[0]), w.vertex_dof(bf.v[1])};
    for (size_t q = 0; q < q1.points.size(); ++q) {
      const double t = q1.points[q][0];
      const Pt x{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
      const auto l = mesh->barycentric(bf.cell, x);
      const double diff =
          vfun(x) - pv.value_in_cell(bf.cell, Pt{l[1], l[2]});
      if (wd[0] >= 0) resid[wd[0]] += q1.weights[q] * len * diff * (1.0 - t);
      if (wd[1] >= 0) resid[wd[1]] += q1.weights[q] * len * diff * t;
    }
  }
  CHECK(resid.lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("boundary machinery on a nonuniform admissible chain") {
  // strip over graded abscissas; end facets no shorter than their neighbors
  const std::vector<double> xs{0.0, 0.3, 0.5, 0.7, 1.0};
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
  auto mesh = std::make_shared<Mesh>(2, verts, cells, bf);
  mesh->validate();

  BoundaryToolbox btb(mesh, "contact");
  // convex weights reconstruct each interior vertex from the hat centroids
  for (int i = 1; i + 1 < btb.n_vertices(); ++i) {
    double sum = 0.0, recon = 0.0;
    for (const auto& [j, w] : btb.weights(i)) {
      CHECK(w >= 0.0);
      CHECK(j >= 1);
      CHECK(j + 1 <= btb.n_vertices() - 1);  // endpoint centroids never used
      sum += w;
      recon += w * btb.s_param(j);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(recon == doctest::Approx(btb.vertex_param(i)).epsilon(1e-12));
  }
  // affine traces reproduced at interior vertices despite the grading
  const SpatialFn affine = [](const Pt& p) { return -0.4 + 2.3 * p[0]; };
  const BoundaryP1 cb = clement_boundary_signorini(btb, pointwise_boundary_field(btb, affine));
  for (int i = 1; i + 1 < btb.n_vertices(); ++i)
    CHECK(cb.nodal[i] == doctest::Approx(affine(mesh->vertex(btb.vertex(i)))).epsilon(1e-12));
  // enrichment floor with a constant-margin trace
  const SpatialFn gap = [](const Pt&) { return 0.2; };
  const auto e = enrich_signorini(
      btb, pointwise_boundary_field(btb, [&gap](const Pt& p) { return gap(p) - 0.05; }), gap);
  CHECK(e.min_margin >= std::min(0.05, btb.epsilon_shift()) - 1e-12);
}

TEST_CASE("toolbox weights on the l-shaped domain") {
  auto mesh = std::make_shared<Mesh>(l_shape_mesh(4));
  OperatorToolbox tb(mesh);
  for (int v = 0; v < mesh->n_vertices(); ++v) {
    if (mesh->vertex_on_boundary(v)) continue;
    double sum = 0.0;
    Pt recon{0.0, 0.0};
    for (const auto& [c, w] : tb.patch_weights(v)) {
      CHECK(w >= 0.0);
      sum += w;
      recon[0] += w * mesh->cell_centroid(c)[0];
      recon[1] += w * mesh->cell_centroid(c)[1];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dist(recon, mesh->vertex(v)) <= 1e-12);
  }
  const SpatialFn affine = [](const Pt& p) { return 1.0 - 0.3 * p[0] + 0.6 * p[1]; };
  CHECK(nodal_defect(clement_weighted(tb, pointwise_field(*mesh, affine)), affine) <= 1e-12);
  CHECK(nodal_defect(scott_zhang(tb, pointwise_field(*mesh, affine)), affine) <= 1e-12);
}

TEST_CASE("gauss-radau reference rule") {
  const auto gr = gauss_radau_reference();
  CHECK(gr.weights[0] > 0.0);
  CHECK(gr.weights[1] > 0.0);
  // defining moment equations on [-1, 1]
  CHECK(gr.weights[0] + gr.weights[1] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(gr.weights[0] * gr.points[0] + gr.weights[1] * gr.points[1] ==
        doctest::Approx(0.0).epsilon(1e-15));
  CHECK(gr.weights[0] * gr.points[0] * gr.points[0] +
            gr.weights[1] * gr.points[1] * gr.points[1] ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

}  // TEST_SUITE
