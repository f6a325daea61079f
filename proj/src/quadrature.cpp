#include "proxgal/quadrature.hpp"

#include <Eigen/Eigenvalues>

namespace proxgal {

namespace {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix built from the
// three-term recurrence, weights come from the first eigenvector components.
void gauss_from_recurrence(const std::vector<double>& alpha, const std::vector<double>& beta,
                           double mu0, std::vector<double>& x, std::vector<double>& w) {
  const int n = static_cast<int>(alpha.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    J(i, i) = alpha[i];
    if (i + 1 < n) {
      const double b = std::sqrt(beta[i + 1]);
      J(i, i + 1) = b;
      J(i + 1, i) = b;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    x[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    w[i] = mu0 * v0 * v0;
  }
}

// Legendre weight 1 on [-1,1].
void gauss_legendre_sym(int n, std::vector<double>& x, std::vector<double>& w) {
  std::vector<double> alpha(n, 0.0), beta(n, 0.0);
  for (int k = 1; k < n; ++k) beta[k] = k * k / (4.0 * k * k - 1.0);
  gauss_from_recurrence(alpha, beta, 2.0, x, w);
}

// Jacobi weight (1-t) on [-1,1].
void gauss_jacobi10_sym(int n, std::vector<double>& x, std::vector<double>& w) {
  std::vector<double> alpha(n), beta(n, 0.0);
  alpha[0] = -1.0 / 3.0;
  for (int k = 1; k < n; ++k) {
    alpha[k] = -1.0 / ((2.0 * k + 1.0) * (2.0 * k + 3.0));
    beta[k] = k * (k + 1.0) / ((2.0 * k + 1.0) * (2.0 * k + 1.0));
  }
  gauss_from_recurrence(alpha, beta, 2.0, x, w);
}

}  // namespace

void gauss_legendre_01(int npoints, std::vector<double>& x, std::vector<double>& w) {
  gauss_legendre_sym(npoints, x, w);
  for (int i = 0; i < npoints; ++i) {
    x[i] = 0.5 * (x[i] + 1.0);
    w[i] *= 0.5;
  }
}

QuadratureRule quadrature_rule(int dim, int degree) {
  PROXGAL_REQUIRE(dim == 1 || dim == 2, "quadrature_rule: dim must be 1 or 2");
  PROXGAL_REQUIRE(degree >= 0 && degree <= 10, "quadrature_rule: unsupported degree");
  QuadratureRule rule;
  rule.dim = dim;
  rule.degree = degree;
  const int n = (degree + 2) / 2;  // ceil((degree+1)/2)
  if (dim == 1) {
    std::vector<double> x, w;
    gauss_legendre_01(n, x, w);
    for (int i = 0; i < n; ++i) {
      rule.points.push_back({x[i], 0.0});
      rule.weights.push_back(w[i]);
    }
    return rule;
  }
  // Collapsed (Duffy) product rule: x = s(1-t), y = t with Gauss-Legendre in s
  // and Gauss-Jacobi (weight (1-t)) in t, both shifted to [0,1].
  std::vector<double> xs, ws, xt, wt;
  gauss_legendre_01(n, xs, ws);
  gauss_jacobi10_sym(n, xt, wt);
  for (int i = 0; i < n; ++i) {
    xt[i] = 0.5 * (xt[i] + 1.0);
    wt[i] *= 0.25;  // dt scaling and the factor-2 rescale of the (1-t) weight
  }
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      rule.points.push_back({xs[i] * (1.0 - xt[j]), xt[j]});
      rule.weights.push_back(ws[i] * wt[j]);
    }
  return rule;
}

}  // namespace proxgal
