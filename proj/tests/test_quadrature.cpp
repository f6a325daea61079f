#include <doctest.h>

#include <cmath>
#include <random>

#include "proxgal/quadrature.hpp"

using namespace proxgal;

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// exact reference-simplex monomial integrals
double exact_1d(int a) { return 1.0 / (a + 1); }
double exact_2d(int a, int b) { return factorial(a) * factorial(b) / factorial(a + b + 2); }

double apply(const QuadratureRule& rule, int a, int b) {
  double s = 0.0;
  for (size_t q = 0; q < rule.points.size(); ++q)
    s += rule.weights[q] * std::pow(rule.points[q][0], a) *
         (rule.dim == 2 ? std::pow(rule.points[q][1], b) : 1.0);
  return s;
}

}  // namespace

TEST_SUITE("quadrature") {

TEST_CASE("weights sum to the reference measure") {
  for (int deg = 1; deg <= 10; ++deg) {
    CHECK(apply(quadrature_rule(1, deg), 0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(apply(quadrature_rule(2, deg), 0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  }
}

TEST_CASE("monomial exactness up to the advertised degree") {
  for (int deg = 1; deg <= 10; ++deg) {
    const auto r1 = quadrature_rule(1, deg);
    for (int a = 0; a <= deg; ++a)
      CHECK(apply(r1, a, 0) == doctest::Approx(exact_1d(a)).epsilon(1e-13));
    const auto r2 = quadrature_rule(2, deg);
    for (int a = 0; a <= deg; ++a)
      for (int b = 0; a + b <= deg; ++b)
        CHECK(apply(r2, a, b) == doctest::Approx(exact_2d(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("barycentric product integral") {
  // lambda_1 lambda_2 = x y on the reference triangle integrates to 1/24
  const auto rule = quadrature_rule(2, 2);
  CHECK(apply(rule, 1, 1) == doctest::Approx(1.0 / 24.0).epsilon(1e-14));
}

TEST_CASE("degree-4 rule reproduces degree-3 results on random cubics") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  const auto r3 = quadrature_rule(2, 3);
  const auto r4 = quadrature_rule(2, 4);
  for (int trial = 0; trial < 20; ++trial) {
    double c[10];
    for (double& v : c) v = coeff(rng);
    auto cubic = [&](const Pt& p) {
      const double x = p[0], y = p[1];
      return c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y +
             c[6] * x * x * x + c[7] * x * x * y + c[8] * x * y * y + c[9] * y * y * y;
    };
    double i3 = 0.0, i4 = 0.0;
    for (size_t q = 0; q < r3.points.size(); ++q) i3 += r3.weights[q] * cubic(r3.points[q]);
    for (size_t q = 0; q < r4.points.size(); ++q) i4 += r4.weights[q] * cubic(r4.points[q]);
    CHECK(std::abs(i3 - i4) <= 1e-14);
  }
}

TEST_CASE("unsupported degrees are rejected") {
  CHECK_THROWS_AS(quadrature_rule(2, 11), Error);
  CHECK_THROWS_AS(quadrature_rule(3, 2), Error);
  CHECK_THROWS_AS(quadrature_rule(1, -1), Error);
}

}  // TEST_SUITE
