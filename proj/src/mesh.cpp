#include "proxgal/mesh.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace proxgal {

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return std::string(buf);
}

namespace {

double signed_area(const Pt& a, const Pt& b, const Pt& c) {
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

}  // namespace

Mesh::Mesh(int dim, std::vector<Pt> vertices, std::vector<std::array<int, 3>> cells,
           std::vector<BoundaryFacet> boundary)
    : dim_(dim), vertices_(std::move(vertices)), cells_(std::move(cells)),
      boundary_(std::move(boundary)) {
  PROXGAL_REQUIRE(dim_ == 1 || dim_ == 2, "mesh: dim must be 1 or 2");
  const int nv = n_vertices();
  for (auto& c : cells_) {
    for (int k = 0; k <= dim_; ++k)
      PROXGAL_REQUIRE(c[k] >= 0 && c[k] < nv, "mesh: cell vertex index out of range");
    if (dim_ == 1) {
      PROXGAL_REQUIRE(c[0] != c[1], "mesh: repeated vertex in cell");
      c[2] = -1;
      if (vertices_[c[0]][0] > vertices_[c[1]][0]) std::swap(c[0], c[1]);
    } else {
      PROXGAL_REQUIRE(c[0] != c[1] && c[1] != c[2] && c[0] != c[2],
                      "mesh: repeated vertex in cell");
      // enforce counterclockwise orientation
      if (signed_area(vertices_[c[0]], vertices_[c[1]], vertices_[c[2]]) < 0.0)
        std::swap(c[1], c[2]);
    }
  }
  build_derived();
}

void Mesh::build_derived() {
  const int nc = n_cells();
  const int nv = n_vertices();
  measure_.resize(nc);
  diameter_.resize(nc);
  patches_.assign(nv, {});
  for (int c = 0; c < nc; ++c) {
    const auto& cell = cells_[c];
    if (dim_ == 1) {
      const double len = vertices_[cell[1]][0] - vertices_[cell[0]][0];
      PROXGAL_REQUIRE(len > 0.0, "mesh: degenerate interval cell");
      measure_[c] = len;
      diameter_[c] = len;
    } else {
      const Pt &a = vertices_[cell[0]], &b = vertices_[cell[1]], &d = vertices_[cell[2]];
      const double area = signed_area(a, b, d);
      PROXGAL_REQUIRE(area > 0.0, "mesh: degenerate triangle");
      measure_[c] = area;
      diameter_[c] = std::max({dist(a, b), dist(b, d), dist(a, d)});
    }
    for (int k = 0; k <= dim_; ++k) patches_[cell[k]].push_back(c);
  }
  for (auto& p : patches_) std::sort(p.begin(), p.end());

  boundary_vertex_.assign(nv, 0);
  for (const auto& f : boundary_) {
    boundary_vertex_[f.v[0]] = 1;
    if (dim_ == 2) boundary_vertex_[f.v[1]] = 1;
  }

  // bucket locator
  double x0 = vertices_[0][0], x1 = x0, y0 = vertices_[0][1], y1 = y0;
  for (const auto& p : vertices_) {
    x0 = std::min(x0, p[0]);
    x1 = std::max(x1, p[0]);
    y0 = std::min(y0, p[1]);
    y1 = std::max(y1, p[1]);
  }
  const int nb = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(nc))));
  nbx_ = nb;
  nby_ = dim_ == 2 ? nb : 1;
  bx0_ = x0;
  by0_ = y0;
  bdx_ = std::max(1e-300, (x1 - x0) / nbx_);
  bdy_ = std::max(1e-300, (y1 - y0) / nby_);
  buckets_.assign(static_cast<size_t>(nbx_) * nby_, {});
  auto clampi = [](int i, int n) { return std::min(std::max(i, 0), n - 1); };
  for (int c = 0; c < nc; ++c) {
    double cx0 = vertices_[cells_[c][0]][0], cx1 = cx0;
    double cy0 = vertices_[cells_[c][0]][1], cy1 = cy0;
    for (int k = 1; k <= dim_; ++k) {
      const Pt& p = vertices_[cells_[c][k]];
      cx0 = std::min(cx0, p[0]);
      cx1 = std::max(cx1, p[0]);
      cy0 = std::min(cy0, p[1]);
      cy1 = std::max(cy1, p[1]);
    }
    const int i0 = clampi(static_cast<int>((cx0 - bx0_) / bdx_), nbx_);
    const int i1 = clampi(static_cast<int>((cx1 - bx0_) / bdx_), nbx_);
    const int j0 = clampi(static_cast<int>((cy0 - by0_) / bdy_), nby_);
    const int j1 = clampi(static_cast<int>((cy1 - by0_) / bdy_), nby_);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) buckets_[static_cast<size_t>(j) * nbx_ + i].push_back(c);
  }
}

double Mesh::max_diameter() const {
  double h = 0.0;
  for (double d : diameter_) h = std::max(h, d);
  return h;
}

double Mesh::min_diameter() const {
  double h = diameter_.empty() ? 0.0 : diameter_[0];
  for (double d : diameter_) h = std::min(h, d);
  return h;
}

double Mesh::total_measure() const {
  double m = 0.0;
  for (double v : measure_) m += v;
  return m;
}

Pt Mesh::cell_centroid(int c) const {
  const auto& cell = cells_[c];
  Pt s{0.0, 0.0};
  for (int k = 0; k <= dim_; ++k) {
    s[0] += vertices_[cell[k]][0];
    s[1] += vertices_[cell[k]][1];
  }
  s[0] /= (dim_ + 1);
  s[1] /= (dim_ + 1);
  return s;
}

bool Mesh::vertex_on_tag(int v, const std::string& tag) const {
  for (const auto& f : boundary_) {
    if (f.tag != tag) continue;
    if (f.v[0] == v || (dim_ == 2 && f.v[1] == v)) return true;
  }
  return false;
}

std::vector<int> Mesh::facets_with_tag(const std::string& tag) const {
  std::vector<int> out;
  for (int f = 0; f < n_boundary_facets(); ++f)
    if (boundary_[f].tag == tag) out.push_back(f);
  return out;
}

std::vector<std::string> Mesh::tags() const {
  std::set<std::string> s;
  for (const auto& f : boundary_) s.insert(f.tag);
  return {s.begin(), s.end()};
}

void Mesh::retag_boundary(const std::function<std::string(const Pt&)>& namer) {
  for (int f = 0; f < n_boundary_facets(); ++f) boundary_[f].tag = namer(facet_midpoint(f));
}

Pt Mesh::facet_midpoint(int f) const {
  const auto& bf = boundary_[f];
  if (dim_ == 1) return vertices_[bf.v[0]];
  const Pt &a = vertices_[bf.v[0]], &b = vertices_[bf.v[1]];
  return {0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
}

double Mesh::facet_measure(int f) const {
  const auto& bf = boundary_[f];
  if (dim_ == 1) return 1.0;  // point facet
  return dist(vertices_[bf.v[0]], vertices_[bf.v[1]]);
}

Pt Mesh::facet_outward_normal(int f) const {
  PROXGAL_REQUIRE(dim_ == 2, "facet normals are 2D only");
  const auto& bf = boundary_[f];
  const Pt &a = vertices_[bf.v[0]], &b = vertices_[bf.v[1]];
  const double len = dist(a, b);
  Pt n{(b[1] - a[1]) / len, -(b[0] - a[0]) / len};
  // orient away from the owning cell's centroid
  const Pt s = cell_centroid(bf.cell);
  const Pt m = facet_midpoint(f);
  if (n[0] * (s[0] - m[0]) + n[1] * (s[1] - m[1]) > 0.0) {
    n[0] = -n[0];
    n[1] = -n[1];
  }
  return n;
}

std::array<double, 3> Mesh::barycentric(int c, const Pt& p) const {
  const auto& cell = cells_[c];
  if (dim_ == 1) {
    const double a = vertices_[cell[0]][0], b = vertices_[cell[1]][0];
    const double t = (p[0] - a) / (b - a);
    return {1.0 - t, t, 0.0};
  }
  const Pt &a = vertices_[cell[0]], &b = vertices_[cell[1]], &d = vertices_[cell[2]];
  const double area = measure_[c];
  const double l0 = signed_area(p, b, d) / area;
  const double l1 = signed_area(a, p, d) / area;
  return {l0, l1, 1.0 - l0 - l1};
}

std::optional<int> Mesh::try_locate(const Pt& p, double tol) const {
  auto clampi = [](int i, int n) { return std::min(std::max(i, 0), n - 1); };
  const int i = clampi(static_cast<int>((p[0] - bx0_) / bdx_), nbx_);
  const int j = dim_ == 2 ? clampi(static_cast<int>((p[1] - by0_) / bdy_), nby_) : 0;
  auto inside = [&](int c) {
    const auto l = barycentric(c, p);
    const double slack = tol;
    for (int k = 0; k <= dim_; ++k)
      if (l[k] < -slack) return false;
    return true;
  };
  for (int c : buckets_[static_cast<size_t>(j) * nbx_ + i])
    if (inside(c)) return c;
  // fallback: neighbors, then full sweep (points on bucket seams)
  for (int dj = -1; dj <= 1; ++dj)
    for (int di = -1; di <= 1; ++di) {
      const int ii = i + di, jj = j + dj;
      if (ii < 0 || ii >= nbx_ || jj < 0 || jj >= nby_ || (di == 0 && dj == 0)) continue;
      for (int c : buckets_[static_cast<size_t>(jj) * nbx_ + ii])
        if (inside(c)) return c;
    }
  for (int c = 0; c < n_cells(); ++c)
    if (inside(c)) return c;
  return std::nullopt;
}

int Mesh::locate(const Pt& p, double tol) const {
  auto c = try_locate(p, tol);
  PROXGAL_REQUIRE(c.has_value(), "locate: point outside all cells");
  return *c;
}

void Mesh::validate() const {
  // cell sanity was enforced at construction; audit conformity and ownership
  if (dim_ == 2) {
    // every interior edge shared by exactly 2 cells, boundary edge by 1
    std::map<std::pair<int, int>, int> edge_count;
    for (int c = 0; c < n_cells(); ++c) {
      const auto& cell = cells_[c];
      for (int e = 0; e < 3; ++e) {
        int a = cell[e], b = cell[(e + 1) % 3];
        if (a > b) std::swap(a, b);
        edge_count[{a, b}]++;
      }
    }
    for (const auto& [e, n] : edge_count)
      PROXGAL_REQUIRE(n <= 2, "mesh: edge shared by more than two cells");
    std::map<std::pair<int, int>, int> bedge;
    for (const auto& f : boundary_) {
      int a = f.v[0], b = f.v[1];
      if (a > b) std::swap(a, b);
      PROXGAL_REQUIRE((++bedge[{a, b}] == 1), "mesh: duplicate boundary facet");
      auto it = edge_count.find({a, b});
      PROXGAL_REQUIRE(it != edge_count.end() && it->second == 1,
                      "mesh: boundary facet not a single-cell edge");
      // ownership
      const auto& cell = cells_[f.cell];
      int hit = 0;
      for (int k = 0; k < 3; ++k)
        if (cell[k] == f.v[0] || cell[k] == f.v[1]) ++hit;
      PROXGAL_REQUIRE(hit == 2, "mesh: boundary facet owner does not contain it");
    }
    for (const auto& [e, n] : edge_count)
      if (n == 1)
        PROXGAL_REQUIRE(bedge.count(e) == 1, "mesh: uncovered boundary edge");
    // no hanging vertices: a vertex may not lie in the open interior (or on a
    // facet interior) of a cell it does not belong to; bucket candidates suffice
    auto clampi = [](int i, int n) { return std::min(std::max(i, 0), n - 1); };
    for (int v = 0; v < n_vertices(); ++v) {
      const Pt& p = vertices_[v];
      const int bi = clampi(static_cast<int>((p[0] - bx0_) / bdx_), nbx_);
      const int bj = clampi(static_cast<int>((p[1] - by0_) / bdy_), nby_);
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          const int ii = bi + di, jj = bj + dj;
          if (ii < 0 || ii >= nbx_ || jj < 0 || jj >= nby_) continue;
          for (int cc : buckets_[static_cast<size_t>(jj) * nbx_ + ii]) {
            const auto& cell = cells_[cc];
            if (cell[0] == v || cell[1] == v || cell[2] == v) continue;
            const auto l = barycentric(cc, p);
            int positive = 0, nonneg = 0;
            for (int k = 0; k < 3; ++k) {
              if (l[k] > 1e-10) ++positive;
              if (l[k] > -1e-10) ++nonneg;
            }
            PROXGAL_REQUIRE(!(nonneg == 3 && positive >= 2),
                            "mesh: hanging vertex inside a foreign cell");
          }
        }
    }
  } else {
    std::map<int, int> vertex_count;
    for (const auto& c : cells_) {
      vertex_count[c[0]]++;
      vertex_count[c[1]]++;
    }
    for (const auto& f : boundary_) {
      PROXGAL_REQUIRE(vertex_count[f.v[0]] == 1, "mesh: boundary vertex not at an end");
      const auto& cell = cells_[f.cell];
      PROXGAL_REQUIRE(cell[0] == f.v[0] || cell[1] == f.v[0],
                      "mesh: boundary facet owner does not contain it");
    }
  }
  // patch consistency: z in cell c <=> c in patch(z)
  for (int c = 0; c < n_cells(); ++c)
    for (int k = 0; k <= dim_; ++k) {
      const auto& p = patches_[cells_[c][k]];
      PROXGAL_REQUIRE(std::binary_search(p.begin(), p.end(), c), "mesh: patch map broken");
    }
}

Mesh unit_interval_mesh(int n) {
  PROXGAL_REQUIRE(n >= 1, "unit_interval_mesh: n must be positive");
  std::vector<Pt> verts(n + 1);
  for (int i = 0; i <= n; ++i) verts[i] = {static_cast<double>(i) / n, 0.0};
  std::vector<std::array<int, 3>> cells(n);
  for (int i = 0; i < n; ++i) cells[i] = {i, i + 1, -1};
  std::vector<BoundaryFacet> bf(2);
  bf[0] = {{0, -1}, 0, "dirichlet"};
  bf[1] = {{n, -1}, n - 1, "dirichlet"};
  return Mesh(1, std::move(verts), std::move(cells), std::move(bf));
}

Mesh unit_square_mesh(int n, SquarePattern pattern) {
  PROXGAL_REQUIRE(n >= 1, "unit_square_mesh: n must be positive");
  auto gid = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<Pt> verts;
  verts.reserve(static_cast<size_t>(n + 1) * (n + 1) + (pattern == SquarePattern::Crisscross ? n * n : 0));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      verts.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
  std::vector<std::array<int, 3>> cells;
  std::vector<BoundaryFacet> bf;
  if (pattern == SquarePattern::Crisscross) {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int c = static_cast<int>(verts.size());
        verts.push_back({(i + 0.5) / n, (j + 0.5) / n});
        const int v00 = gid(i, j), v10 = gid(i + 1, j), v01 = gid(i, j + 1), v11 = gid(i + 1, j + 1);
        const int base = static_cast<int>(cells.size());
        cells.push_back({v00, v10, c});  // bottom
        cells.push_back({v10, v11, c});  // right
        cells.push_back({v11, v01, c});  // top
        cells.push_back({v01, v00, c});  // left
        if (j == 0) bf.push_back({{v00, v10}, base + 0, "dirichlet"});
        if (i == n - 1) bf.push_back({{v10, v11}, base + 1, "dirichlet"});
        if (j == n - 1) bf.push_back({{v11, v01}, base + 2, "dirichlet"});
        if (i == 0) bf.push_back({{v01, v00}, base + 3, "dirichlet"});
      }
  } else {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int v00 = gid(i, j), v10 = gid(i + 1, j), v01 = gid(i, j + 1), v11 = gid(i + 1, j + 1);
        const int base = static_cast<int>(cells.size());
        cells.push_back({v00, v10, v11});
        cells.push_back({v00, v11, v01});
        if (j == 0) bf.push_back({{v00, v10}, base + 0, "dirichlet"});
        if (i == n - 1) bf.push_back({{v10, v11}, base + 0, "dirichlet"});
        if (j == n - 1) bf.push_back({{v11, v01}, base + 1, "dirichlet"});
        if (i == 0) bf.push_back({{v01, v00}, base + 1, "dirichlet"});
      }
  }
  return Mesh(2, std::move(verts), std::move(cells), std::move(bf));
}

Mesh l_shape_mesh(int n) {
  PROXGAL_REQUIRE(n >= 2 && n % 2 == 0, "l_shape_mesh: n must be even and at least 2");
  auto gid = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<Pt> verts;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      verts.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
  std::vector<std::array<int, 3>> cells;
  std::vector<BoundaryFacet> bf;
  const int half = n / 2;
  auto kept = [half, n](int i, int j) { return i < half || j < half; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (!kept(i, j)) continue;
      const int c = static_cast<int>(verts.size());
      verts.push_back({(i + 0.5) / n, (j + 0.5) / n});
      const int v00 = gid(i, j), v10 = gid(i + 1, j), v01 = gid(i, j + 1), v11 = gid(i + 1, j + 1);
      const int base = static_cast<int>(cells.size());
      cells.push_back({v00, v10, c});
      cells.push_back({v10, v11, c});
      cells.push_back({v11, v01, c});
      cells.push_back({v01, v00, c});
      if (j == 0) bf.push_back({{v00, v10}, base + 0, "dirichlet"});
      if (i == n - 1 || (i == half - 1 && j >= half)) bf.push_back({{v10, v11}, base + 1, "dirichlet"});
      if (j == n - 1 || (j == half - 1 && i >= half)) bf.push_back({{v11, v01}, base + 2, "dirichlet"});
      if (i == 0) bf.push_back({{v01, v00}, base + 3, "dirichlet"});
    }
  // drop the unused grid vertices of the removed quadrant
  std::vector<int> remap(verts.size(), -1);
  std::vector<Pt> verts2;
  std::vector<char> used(verts.size(), 0);
  for (const auto& c : cells)
    for (int k = 0; k < 3; ++k) used[c[k]] = 1;
  for (size_t v = 0; v < verts.size(); ++v)
    if (used[v]) {
      remap[v] = static_cast<int>(verts2.size());
      verts2.push_back(verts[v]);
    }
  for (auto& c : cells)
    for (int k = 0; k < 3; ++k) c[k] = remap[c[k]];
  for (auto& f : bf) {
    f.v[0] = remap[f.v[0]];
    f.v[1] = remap[f.v[1]];
  }
  return Mesh(2, std::move(verts2), std::move(cells), std::move(bf));
}

Mesh uniform_refine(const Mesh& mesh) {
  if (mesh.dim() == 1) {
    std::vector<Pt> verts;
    verts.reserve(mesh.n_vertices() + mesh.n_cells());
    for (int v = 0; v < mesh.n_vertices(); ++v) verts.push_back(mesh.vertex(v));
    std::vector<std::array<int, 3>> cells;
    cells.reserve(2 * mesh.n_cells());
    std::vector<int> mid(mesh.n_cells());
    for (int c = 0; c < mesh.n_cells(); ++c) {
      const auto& cell = mesh.cell(c);
      mid[c] = static_cast<int>(verts.size());
      verts.push_back({0.5 * (mesh.vertex(cell[0])[0] + mesh.vertex(cell[1])[0]), 0.0});
      cells.push_back({cell[0], mid[c], -1});
      cells.push_back({mid[c], cell[1], -1});
    }
    std::vector<BoundaryFacet> bf;
    for (int f = 0; f < mesh.n_boundary_facets(); ++f) {
      const auto& old = mesh.boundary_facet(f);
      const auto& cell = mesh.cell(old.cell);
      const int child = 2 * old.cell + (old.v[0] == cell[0] ? 0 : 1);
      bf.push_back({{old.v[0], -1}, child, old.tag});
    }
    return Mesh(1, std::move(verts), std::move(cells), std::move(bf));
  }

  std::vector<Pt> verts;
  for (int v = 0; v < mesh.n_vertices(); ++v) verts.push_back(mesh.vertex(v));
  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    auto it = midpoint.find({a, b});
    if (it != midpoint.end()) return it->second;
    const int id = static_cast<int>(verts.size());
    verts.push_back({0.5 * (mesh.vertex(a)[0] + mesh.vertex(b)[0]),
                     0.5 * (mesh.vertex(a)[1] + mesh.vertex(b)[1])});
    midpoint[{a, b}] = id;
    return id;
  };
  std::vector<std::array<int, 3>> cells;
  cells.reserve(4 * mesh.n_cells());
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& t = mesh.cell(c);
    const int m01 = mid(t[0], t[1]), m12 = mid(t[1], t[2]), m02 = mid(t[0], t[2]);
    cells.push_back({t[0], m01, m02});  // child 0: corner t[0]
    cells.push_back({m01, t[1], m12});  // child 1: corner t[1]
    cells.push_back({m02, m12, t[2]});  // child 2: corner t[2]
    cells.push_back({m01, m12, m02});   // child 3: medial
  }
  std::vector<BoundaryFacet> bf;
  for (int f = 0; f < mesh.n_boundary_facets(); ++f) {
    const auto& old = mesh.boundary_facet(f);
    const auto& t = mesh.cell(old.cell);
    const int m = mid(old.v[0], old.v[1]);
    auto corner_child = [&](int v) {
      for (int k = 0; k < 3; ++k)
        if (t[k] == v) return 4 * old.cell + k;
      throw Error("uniform_refine: facet vertex not in owner cell");
    };
    bf.push_back({{old.v[0], m}, corner_child(old.v[0]), old.tag});
    bf.push_back({{m, old.v[1]}, corner_child(old.v[1]), old.tag});
  }
  return Mesh(2, std::move(verts), std::move(cells), std::move(bf));
}

SymmetryReport check_local_symmetry(const Mesh& mesh) {
  PROXGAL_REQUIRE(mesh.dim() == 2, "check_local_symmetry: 2D meshes only");
  SymmetryReport rep;
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    if (mesh.vertex_on_boundary(v)) continue;
    double wx = 0.0, wy = 0.0, wsum = 0.0, hloc = 0.0;
    for (int c : mesh.patch(v)) {
      const Pt s = mesh.cell_centroid(c);
      const double m = mesh.cell_measure(c);
      wx += m * s[0];
      wy += m * s[1];
      wsum += m;
      hloc = std::max(hloc, mesh.cell_diameter(c));
    }
    const Pt z = mesh.vertex(v);
    const double dev = std::hypot(wx / wsum - z[0], wy / wsum - z[1]);
    const double tol = 1e-12 * hloc;
    rep.max_deviation = std::max(rep.max_deviation, dev);
    rep.tolerance = std::max(rep.tolerance, tol);
    if (dev > tol) rep.pass = false;
  }
  return rep;
}

FacetCheck check_signorini_facets(const Mesh& mesh, const std::string& contact_tag) {
  PROXGAL_REQUIRE(mesh.dim() == 2, "check_signorini_facets: 2D meshes only");
  const auto facets = mesh.facets_with_tag(contact_tag);
  PROXGAL_REQUIRE(!facets.empty(), "check_signorini_facets: contact tag not present");
  if (facets.size() < 2) return {false, "contact boundary has fewer than two facets"};

  // straightness: all facet vertices collinear
  const auto& f0 = mesh.boundary_facet(facets[0]);
  const Pt a = mesh.vertex(f0.v[0]);
  Pt dir{0.0, 0.0};
  double len = 0.0;
  for (int f : facets) {
    for (int k = 0; k < 2; ++k) {
      const Pt p = mesh.vertex(mesh.boundary_facet(f).v[k]);
      const double d = dist(a, p);
      if (d > len) {
        len = d;
        dir = {(p[0] - a[0]) / d, (p[1] - a[1]) / d};
      }
    }
  }
  for (int f : facets)
    for (int k = 0; k < 2; ++k) {
      const Pt p = mesh.vertex(mesh.boundary_facet(f).v[k]);
      const double off = std::abs(-dir[1] * (p[0] - a[0]) + dir[0] * (p[1] - a[1]));
      if (off > 1e-10 * std::max(len, 1.0))
        return {false, "contact boundary is not a straight segment"};
    }

  // order along the segment and find end facets
  auto param = [&](const Pt& p) { return dir[0] * (p[0] - a[0]) + dir[1] * (p[1] - a[1]); };
  std::vector<std::pair<double, int>> order;
  for (int f : facets) order.push_back({param(mesh.facet_midpoint(f)), f});
  std::sort(order.begin(), order.end());
  const double e_first = mesh.facet_measure(order.front().second);
  const double e_second = mesh.facet_measure(order[1].second);
  const double e_last = mesh.facet_measure(order.back().second);
  const double e_penult = mesh.facet_measure(order[order.size() - 2].second);
  const double slack = 1.0 - 1e-12;
  if (e_first < slack * e_second || e_last < slack * e_penult)
    return {false, "end facet shorter than its neighbor"};
  return {true, ""};
}

double shape_regularity(const Mesh& mesh) {
  PROXGAL_REQUIRE(mesh.dim() == 2, "shape_regularity: 2D meshes only");
  double worst = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& t = mesh.cell(c);
    const double ab = dist(mesh.vertex(t[0]), mesh.vertex(t[1]));
    const double bc = dist(mesh.vertex(t[1]), mesh.vertex(t[2]));
    const double ca = dist(mesh.vertex(t[2]), mesh.vertex(t[0]));
    const double inradius = 2.0 * mesh.cell_measure(c) / (ab + bc + ca);
    PROXGAL_REQUIRE(inradius > 1e-300, "shape_regularity: degenerate cell");
    worst = std::max(worst, mesh.cell_diameter(c) / inradius);
  }
  return worst;
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
  out << mesh.dim() << ' ' << mesh.n_vertices() << ' ' << mesh.n_cells() << ' '
      << mesh.n_boundary_facets() << '\n';
  char buf[64];
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const Pt& p = mesh.vertex(v);
    std::snprintf(buf, sizeof(buf), "%.17g", p[0]);
    out << buf;
    if (mesh.dim() == 2) {
      std::snprintf(buf, sizeof(buf), "%.17g", p[1]);
      out << ' ' << buf;
    }
    out << '\n';
  }
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& cell = mesh.cell(c);
    out << cell[0] << ' ' << cell[1];
    if (mesh.dim() == 2) out << ' ' << cell[2];
    out << '\n';
  }
  for (int f = 0; f < mesh.n_boundary_facets(); ++f) {
    const auto& bf = mesh.boundary_facet(f);
    out << bf.v[0];
    if (mesh.dim() == 2) out << ' ' << bf.v[1];
    out << ' ' << bf.cell << ' ' << bf.tag << '\n';
  }
}

Mesh read_mesh(std::istream& in) {
  int dim = 0, nv = 0, nc = 0, nb = 0;
  PROXGAL_REQUIRE(static_cast<bool>(in >> dim >> nv >> nc >> nb), "read_mesh: bad header");
  std::vector<Pt> verts(nv, Pt{0.0, 0.0});
  for (int v = 0; v < nv; ++v) {
    in >> verts[v][0];
    if (dim == 2) in >> verts[v][1];
  }
  std::vector<std::array<int, 3>> cells(nc, {0, 0, -1});
  for (int c = 0; c < nc; ++c) {
    in >> cells[c][0] >> cells[c][1];
    if (dim == 2) in >> cells[c][2];
  }
  std::vector<BoundaryFacet> bf(nb);
  for (int f = 0; f < nb; ++f) {
    in >> bf[f].v[0];
    if (dim == 2) in >> bf[f].v[1];
    in >> bf[f].cell >> bf[f].tag;
  }
  PROXGAL_REQUIRE(static_cast<bool>(in), "read_mesh: truncated file");
  return Mesh(dim, std::move(verts), std::move(cells), std::move(bf));
}

void write_mesh_file(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  PROXGAL_REQUIRE(out.good(), "write_mesh_file: cannot open " + path);
  write_mesh(mesh, out);
}

Mesh read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  PROXGAL_REQUIRE(in.good(), "read_mesh_file: cannot open " + path);
  return read_mesh(in);
}

}  // namespace proxgal
