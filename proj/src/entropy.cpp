#include "proxgal/entropy.hpp"

namespace proxgal {

namespace {

// branch-wise logistic, safe for any argument
double sigma(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) {
  if (z > 36.0) return z;  // exp(-z) below double epsilon
  if (z < -36.0) return std::exp(z);
  return std::log1p(std::exp(z));
}

}  // namespace

LegendreEntropy::LegendreEntropy(EntropyKind kind, SpatialFn d1, SpatialFn d2, double gamma)
    : kind_(kind), data1_(std::move(d1)), data2_(std::move(d2)), gamma_(gamma),
      clamp_count_(std::make_shared<std::atomic<std::uint64_t>>(0)) {}

LegendreEntropy LegendreEntropy::shannon(SpatialFn obstacle) {
  return LegendreEntropy(EntropyKind::Shannon, std::move(obstacle), nullptr, 1.0);
}

LegendreEntropy LegendreEntropy::fermi_dirac(SpatialFn lower, SpatialFn upper) {
  return LegendreEntropy(EntropyKind::FermiDirac, std::move(lower), std::move(upper), 1.0);
}

LegendreEntropy LegendreEntropy::hellinger(double gamma) {
  PROXGAL_REQUIRE(gamma > 0.0, "hellinger: gamma must be positive");
  return LegendreEntropy(EntropyKind::Hellinger, nullptr, nullptr, gamma);
}

LegendreEntropy LegendreEntropy::signorini_log(SpatialFn gap) {
  return LegendreEntropy(EntropyKind::SignoriniLog, std::move(gap), nullptr, 1.0);
}

double LegendreEntropy::guarded_exp(double a) const {
  if (a > 700.0 || a < -700.0) {
    clamp_count_->fetch_add(1);
    a = a > 0.0 ? 700.0 : -700.0;
  }
  return std::exp(a);
}

double LegendreEntropy::rstar(const Pt& x, double psi) const {
  PROXGAL_REQUIRE(std::isfinite(psi), "rstar: non-finite latent value");
  switch (kind_) {
    case EntropyKind::Shannon:
      return guarded_exp(psi) + data1_(x) * psi;
    case EntropyKind::FermiDirac: {
      const double lo = data1_(x), up = data2_(x);
      return lo * psi + (up - lo) * softplus(psi);
    }
    case EntropyKind::SignoriniLog:
      return guarded_exp(-psi) + data1_(x) * psi;
    case EntropyKind::Hellinger:
      return gamma_ * std::sqrt(1.0 + psi * psi);
  }
  throw Error("rstar: unknown entropy");
}

double LegendreEntropy::grad_rstar(const Pt& x, double psi) const {
  PROXGAL_REQUIRE(std::isfinite(psi), "grad_rstar: non-finite latent value");
  switch (kind_) {
    case EntropyKind::Shannon:
      return guarded_exp(psi) + data1_(x);
    case EntropyKind::FermiDirac: {
      const double lo = data1_(x), up = data2_(x);
      return lo + (up - lo) * sigma(psi);
    }
    case EntropyKind::SignoriniLog:
      return data1_(x) - guarded_exp(-psi);
    case EntropyKind::Hellinger:
      return gamma_ * psi / std::sqrt(1.0 + psi * psi);
  }
  throw Error("grad_rstar: unknown entropy");
}

double LegendreEntropy::hess_rstar(const Pt& x, double psi) const {
  PROXGAL_REQUIRE(std::isfinite(psi), "hess_rstar: non-finite latent value");
  switch (kind_) {
    case EntropyKind::Shannon:
      return guarded_exp(psi);
    case EntropyKind::FermiDirac: {
      const double lo = data1_(x), up = data2_(x);
      const double s = sigma(psi);
      return (up - lo) * s * (1.0 - s);
    }
    case EntropyKind::SignoriniLog:
      return guarded_exp(-psi);
    case EntropyKind::Hellinger: {
      const double d = 1.0 + psi * psi;
      return gamma_ / (d * std::sqrt(d));
    }
  }
  throw Error("hess_rstar: unknown entropy");
}

double LegendreEntropy::grad_r(const Pt& x, double o) const {
  switch (kind_) {
    case EntropyKind::Shannon: {
      const double m = o - data1_(x);
      PROXGAL_REQUIRE(m > 0.0, "grad_r: observable not above the obstacle");
      return std::log(m);
    }
    case EntropyKind::FermiDirac: {
      const double lo = data1_(x), up = data2_(x);
      PROXGAL_REQUIRE(o > lo && o < up, "grad_r: observable outside the bounds");
      return std::log(o - lo) - std::log(up - o);
    }
    case EntropyKind::SignoriniLog: {
      const double m = data1_(x) - o;
      PROXGAL_REQUIRE(m > 0.0, "grad_r: observable not below the gap");
      return -std::log(m);
    }
    case EntropyKind::Hellinger: {
      PROXGAL_REQUIRE(std::abs(o) < gamma_, "grad_r: observable outside the ball");
      return o / std::sqrt(gamma_ * gamma_ - o * o);
    }
  }
  throw Error("grad_r: unknown entropy");
}

double LegendreEntropy::margin(const Pt& x, double o) const {
  switch (kind_) {
    case EntropyKind::Shannon:
      return o - data1_(x);
    case EntropyKind::FermiDirac:
      return std::min(o - data1_(x), data2_(x) - o);
    case EntropyKind::SignoriniLog:
      return data1_(x) - o;
    case EntropyKind::Hellinger:
      return gamma_ - std::abs(o);
  }
  throw Error("margin: unknown entropy");
}

double LegendreEntropy::margin_latent(const Pt& x, double psi) const {
  PROXGAL_REQUIRE(std::isfinite(psi), "margin_latent: non-finite latent value");
  switch (kind_) {
    case EntropyKind::Shannon:
      return guarded_exp(psi);
    case EntropyKind::FermiDirac:
      return (data2_(x) - data1_(x)) * sigma(-std::abs(psi));
    case EntropyKind::SignoriniLog:
      return guarded_exp(-psi);
    case EntropyKind::Hellinger: {
      const double s = std::sqrt(1.0 + psi * psi);
      return gamma_ / (s * (s + std::abs(psi)));
    }
  }
  throw Error("margin_latent: unknown entropy");
}

double LegendreEntropy::lift_value(const Pt& x) const { return grad_r(x, 0.0); }

int LegendreEntropy::overflow_direction() const {
  switch (kind_) {
    case EntropyKind::Shannon: return 1;
    case EntropyKind::SignoriniLog: return -1;
    default: return 0;
  }
}

double LegendreEntropy::rstar_vec(const Pt& x, const Eigen::VectorXd& psi) const {
  if (kind_ != EntropyKind::Hellinger) {
    PROXGAL_REQUIRE(psi.size() == 1, "rstar_vec: scalar entropy takes m = 1");
    return rstar(x, psi[0]);
  }
  return gamma_ * std::sqrt(1.0 + psi.squaredNorm());
}

Eigen::VectorXd LegendreEntropy::grad_rstar_vec(const Pt& x, const Eigen::VectorXd& psi) const {
  if (kind_ != EntropyKind::Hellinger) {
    PROXGAL_REQUIRE(psi.size() == 1, "grad_rstar_vec: scalar entropy takes m = 1");
    Eigen::VectorXd out(1);
    out[0] = grad_rstar(x, psi[0]);
    return out;
  }
  return gamma_ / std::sqrt(1.0 + psi.squaredNorm()) * psi;
}

Eigen::MatrixXd LegendreEntropy::hess_rstar_vec(const Pt& x, const Eigen::VectorXd& psi) const {
  if (kind_ != EntropyKind::Hellinger) {
    PROXGAL_REQUIRE(psi.size() == 1, "hess_rstar_vec: scalar entropy takes m = 1");
    Eigen::MatrixXd out(1, 1);
    out(0, 0) = hess_rstar(x, psi[0]);
    return out;
  }
  const int m = static_cast<int>(psi.size());
  const double d = 1.0 + psi.squaredNorm();
  return gamma_ / (d * std::sqrt(d)) *
         (d * Eigen::MatrixXd::Identity(m, m) - psi * psi.transpose());
}

Eigen::VectorXd LegendreEntropy::grad_r_vec(const Pt& x, const Eigen::VectorXd& o) const {
  if (kind_ != EntropyKind::Hellinger) {
    PROXGAL_REQUIRE(o.size() == 1, "grad_r_vec: scalar entropy takes m = 1");
    Eigen::VectorXd out(1);
    out[0] = grad_r(x, o[0]);
    return out;
  }
  const double n2 = o.squaredNorm();
  PROXGAL_REQUIRE(n2 < gamma_ * gamma_, "grad_r_vec: observable outside the ball");
  return o / std::sqrt(gamma_ * gamma_ - n2);
}

double inverse_check(const LegendreEntropy& entropy, const Pt& x, double observable) {
  return entropy.grad_r(x, observable);
}

double bregman_dual(const LegendreEntropy& entropy, const FeFunction& eta,
                    const FeFunction& psi, const QuadratureRule& quad) {
  PROXGAL_REQUIRE(eta.space == psi.space, "bregman_dual: functions on different spaces");
  const FunctionSpace& W = *eta.space;
  const Mesh& mesh = W.mesh();
  double total = 0.0;
  auto term = [&](const Pt& x, double e, double p) {
    return entropy.rstar(x, e) - entropy.rstar(x, p) -
           entropy.grad_rstar(x, p) * (e - p);
  };
  if (W.family() == Family::BoundaryP1Zero) {
    const QuadratureRule q1 = quadrature_rule(1, quad.degree);
    for (size_t tf = 0; tf < W.tag_facets().size(); ++tf) {
      const auto& bf = mesh.boundary_facet(W.tag_facets()[tf]);
      const Pt a = mesh.vertex(bf.v[0]), b = mesh.vertex(bf.v[1]);
      const double len = dist(a, b);
      for (size_t q = 0; q < q1.points.size(); ++q) {
        const double t = q1.points[q][0];
        const Pt x{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
        total += q1.weights[q] * len *
                 term(x, eta.boundary_value(static_cast<int>(tf), t),
                      psi.boundary_value(static_cast<int>(tf), t));
      }
    }
    return total;
  }
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const double scale = mesh.cell_measure(c) / (mesh.dim() == 1 ? 1.0 : 0.5);
    for (size_t q = 0; q < quad.points.size(); ++q) {
      const Pt x = W.physical_point(c, quad.points[q]);
      total += quad.weights[q] * scale *
               term(x, eta.value_in_cell(c, quad.points[q]),
                    psi.value_in_cell(c, quad.points[q]));
    }
  }
  return total;
}

}  // namespace proxgal
