#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "proxgal/algebra.hpp"

using namespace proxgal;

namespace {

// independent dense Gaussian elimination with partial pivoting (test oracle)
Vec dense_gauss_solve(Eigen::MatrixXd A, Vec b) {
  const int n = static_cast<int>(A.rows());
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(A(i, k)) > std::abs(A(piv, k))) piv = i;
    REQUIRE(std::abs(A(piv, k)) > 1e-14);
    if (piv != k) {
      A.row(piv).swap(A.row(k));
      std::swap(b[piv], b[k]);
    }
    for (int i = k + 1; i < n; ++i) {
      const double m = A(i, k) / A(k, k);
      A.row(i).tail(n - k) -= m * A.row(k).tail(n - k);
      b[i] -= m * b[k];
    }
  }
  Vec x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= A(i, j) * x[j];
    x[i] = s / A(i, i);
  }
  return x;
}

}  // namespace

TEST_SUITE("algebra") {

TEST_CASE("1d stiffness entries by hand assembly") {
  const Mesh m = unit_interval_mesh(2);  // h = 1/2, element matrices (1/h)[1,-1;-1,1]
  const FunctionSpace p1(m, Family::P1);
  SparseMatrix A = assemble(stiffness_form(p1), quadrature_rule(1, 4));
  Eigen::MatrixXd D = Eigen::MatrixXd(A.eigen());
  CHECK(D(1, 1) == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(D(0, 1) == doctest::Approx(-2.0).epsilon(1e-13));
  CHECK(D(1, 0) == doctest::Approx(-2.0).epsilon(1e-13));
  CHECK(D(0, 0) == doctest::Approx(2.0).epsilon(1e-13));
  // constants span the kernel before constraints
  CHECK((A.eigen() * Vec::Ones(3)).norm() <= 1e-13);
  CHECK(A.symmetry_defect() <= 1e-12 * A.max_abs());
}

TEST_CASE("mass matrix row sums") {
  const Mesh m = unit_square_mesh(3, SquarePattern::Crisscross);
  const FunctionSpace p1(m, Family::P1);
  SparseMatrix M = assemble(mass_form(p1, p1), quadrature_rule(2, 4));
  const Vec ones = Vec::Ones(p1.n_dofs());
  // partition of unity: 1^T M 1 = |Omega|
  CHECK(ones.dot(M.eigen() * ones) == doctest::Approx(1.0).epsilon(1e-13));
  // nonnegative diagonal
  for (int d = 0; d < p1.n_dofs(); ++d) CHECK(M.eigen().coeff(d, d) >= 0.0);
}

TEST_CASE("boundary normal pairing against constant data") {
  Mesh ms = unit_square_mesh(4, SquarePattern::Crisscross);
  ms.retag_boundary([](const Pt& mid) {
    return mid[1] < 1e-12 ? std::string("contact") : std::string("dirichlet");
  });
  const FunctionSpace v2(ms, Family::P1, 2);
  const FunctionSpace w(ms, Family::BoundaryP1Zero, 1, {}, "contact");
  SparseMatrix B = assemble(boundary_normal_pairing_form(v2, w, "contact"),
                            quadrature_rule(2, 4));
  // v with v.n = 1 on the bottom edge (n = (0,-1))
  const FeFunction v = interpolate_vector(v2, [](const Pt&) { return Eigen::Vector2d(0, -1); });
  const Vec bv = B.eigen() * v.coeffs;
  // each interior hat integrates to the facet length h = 1/4; the endpoint
  // hats (no dofs) account for the missing h compared with |contact| = 1
  double total = 0.0;
  for (int j = 0; j < w.n_dofs(); ++j) {
    CHECK(bv[j] == doctest::Approx(0.25).epsilon(1e-13));
    total += bv[j];
  }
  CHECK(total == doctest::Approx(1.0 - 0.25).epsilon(1e-13));
}

TEST_CASE("load vectors") {
  const Mesh m = unit_interval_mesh(2);
  const FunctionSpace p1(m, Family::P1);
  const Vec f1 = assemble_vector([](const Pt&) { return 1.0; }, p1, quadrature_rule(1, 4));
  CHECK(f1.sum() == doctest::Approx(1.0).epsilon(1e-14));
  const Vec f0 = assemble_vector([](const Pt&) { return 0.0; }, p1, quadrature_rule(1, 4));
  CHECK(f0.norm() == 0.0);
  // f(x) = x against the hat at 0.5: exact integral 1/4
  const Vec fx = assemble_vector([](const Pt& p) { return p[0]; }, p1, quadrature_rule(1, 4));
  CHECK(fx[1] == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("direct solve: identity and poisson") {
  SparseMatrix I(4, 4);
  for (int i = 0; i < 4; ++i) I.add(i, i, 1.0);
  I.finalize();
  Vec rhs(4);
  rhs << 1, 2, 3, 4;
  CHECK((solve_direct(I, rhs) - rhs).norm() <= 1e-14);

  // -u'' = 1 on (0,1), homogeneous data: u = x(1-x)/2, max 0.125 at 0.5
  const Mesh m = unit_interval_mesh(64);
  const FunctionSpace p1(m, Family::P1, 1, {"dirichlet"});
  SparseMatrix A = assemble(stiffness_form(p1), quadrature_rule(1, 4));
  const Vec F = assemble_vector([](const Pt&) { return 1.0; }, p1, quadrature_rule(1, 4));
  Eigen::SparseMatrix<double> Aff;
  Vec rhs_f;
  reduce_system(A, p1, F, Aff, rhs_f);
  const Vec u = expand_free(p1, solve_direct(Aff, rhs_f));
  CHECK(u.maxCoeff() == doctest::Approx(0.125).epsilon(1e-3));
  const double resid = (Aff * solve_direct(Aff, rhs_f) - rhs_f).norm() / rhs_f.norm();
  CHECK(resid <= 1e-10);
}

TEST_CASE("direct solve: quasi-definite saddle system vs dense elimination") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const int na = 5, nm = 3;
  Eigen::MatrixXd Araw(na, na), Mraw(nm, nm), Braw(nm, na);
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < na; ++j) Araw(i, j) = dist(rng);
  for (int i = 0; i < nm; ++i)
    for (int j = 0; j < nm; ++j) Mraw(i, j) = dist(rng);
  for (int i = 0; i < nm; ++i)
    for (int j = 0; j < na; ++j) Braw(i, j) = dist(rng);
  const Eigen::MatrixXd Aspd = Araw * Araw.transpose() + 5.0 * Eigen::MatrixXd::Identity(na, na);
  const Eigen::MatrixXd Mspd = Mraw * Mraw.transpose() + 5.0 * Eigen::MatrixXd::Identity(nm, nm);
  Eigen::MatrixXd K(na + nm, na + nm);
  K << Aspd, Braw.transpose(), Braw, -Mspd;
  SparseMatrix Ks(na + nm, na + nm);
  for (int i = 0; i < na + nm; ++i)
    for (int j = 0; j < na + nm; ++j)
      if (K(i, j) != 0.0) Ks.add(i, j, K(i, j));
  Ks.finalize();
  Vec rhs(na + nm);
  for (int i = 0; i < na + nm; ++i) rhs[i] = dist(rng);
  const Vec x = solve_direct(Ks, rhs);
  const Vec oracle = dense_gauss_solve(K, rhs);
  CHECK((x - oracle).norm() <= 1e-10 * oracle.norm());
  CHECK((K * x - rhs).norm() <= 1e-10 * rhs.norm());
}

TEST_CASE("direct solve rejects singular matrices") {
  SparseMatrix S(3, 3);
  S.add(0, 0, 1.0);
  S.add(1, 1, 1.0);  // row/column 2 empty
  S.finalize();
  Vec rhs(3);
  rhs << 1, 1, 1;
  CHECK_THROWS_AS(solve_direct(S, rhs), SolveError);
}

TEST_CASE("reduced stiffness is positive definite") {
  const Mesh m = unit_interval_mesh(8);
  const FunctionSpace p1(m, Family::P1, 1, {"dirichlet"});
  SparseMatrix A = assemble(stiffness_form(p1), quadrature_rule(1, 2));
  Eigen::SparseMatrix<double> Aff;
  Vec rhs_f;
  reduce_system(A, p1, Vec::Zero(p1.n_dofs()), Aff, rhs_f);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(Aff)};
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("galerkin consistency of the assembled stiffness") {
  const Mesh m = unit_square_mesh(3, SquarePattern::Crisscross);
  const FunctionSpace p1(m, Family::P1);
  SparseMatrix A = assemble(stiffness_form(p1), quadrature_rule(2, 4));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  FeFunction u(p1);
  for (int d = 0; d < u.coeffs.size(); ++d) u.coeffs[d] = dist(rng);
  const Vec Au = A.eigen() * u.coeffs;
  // direct per-cell integration; P1 gradients are constant, so one sample is exact
  Vec oracle = Vec::Zero(p1.n_dofs());
  std::vector<int> dofs;
  Pt grads[4];
  for (int c = 0; c < m.n_cells(); ++c) {
    p1.cell_dofs(c, dofs);
    const Pt gu = u.gradient_in_cell(c, {0.25, 0.25});
    p1.basis_gradients(c, {0.25, 0.25}, grads);
    for (size_t k = 0; k < dofs.size(); ++k)
      oracle[dofs[k]] += m.cell_measure(c) * (gu[0] * grads[k][0] + gu[1] * grads[k][1]);
  }
  CHECK((Au - oracle).norm() <= 1e-12 * (1.0 + oracle.norm()));
}

TEST_CASE("elasticity rigid body modes carry no energy") {
  const Mesh m = unit_square_mesh(3, SquarePattern::Crisscross);
  const FunctionSpace v2(m, Family::P1, 2);
  SparseMatrix A = assemble(elasticity_form(v2, 1.3, 0.7), quadrature_rule(2, 2));
  CHECK(A.symmetry_defect() <= 1e-12 * A.max_abs());
  const auto modes = {
      interpolate_vector(v2, [](const Pt&) { return Eigen::Vector2d(1, 0); }),
      interpolate_vector(v2, [](const Pt&) { return Eigen::Vector2d(0, 1); }),
      interpolate_vector(v2, [](const Pt& p) { return Eigen::Vector2d(-p[1], p[0]); })};
  for (const auto& mode : modes)
    CHECK(std::abs(mode.coeffs.dot(A.eigen() * mode.coeffs)) <= 1e-12);
  // a genuine strain carries positive energy
  const FeFunction stretch =
      interpolate_vector(v2, [](const Pt& p) { return Eigen::Vector2d(p[0], 0); });
  CHECK(stretch.coeffs.dot(A.eigen() * stretch.coeffs) > 0.1);
}

TEST_CASE("weighted mass with unit weight equals mass") {
  const Mesh m = unit_square_mesh(2, SquarePattern::Crisscross);
  const FunctionSpace p1(m, Family::P1);
  SparseMatrix M = assemble(mass_form(p1, p1), quadrature_rule(2, 4));
  SparseMatrix W = assemble(
      weighted_mass_form(p1, p1, [](int, const Pt&) { return 1.0; }), quadrature_rule(2, 4));
  Eigen::SparseMatrix<double> diff = M.eigen() - W.eigen();
  double maxdiff = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(diff, k); it; ++it)
      maxdiff = std::max(maxdiff, std::abs(it.value()));
  CHECK(maxdiff <= 1e-14);
}

TEST_CASE("coordinate dump lists every stored entry") {
  SparseMatrix A(2, 2);
  A.add(0, 0, 1.5);
  A.add(1, 0, -2.0);
  A.finalize();
  std::ostringstream out;
  A.dump_coordinate(out);
  int lines = 0;
  std::string line;
  std::istringstream in(out.str());
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 2);
}

}  // TEST_SUITE
