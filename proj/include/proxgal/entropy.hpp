#pragma once
// Legendre-function toolbox: convex conjugates, their gradients and second
// derivatives, Bregman divergences, constraint margins, and boundary lift
// values for the four entropy families in use.
//
//   Shannon(phi):      R*(x,z) = exp(z) + phi(x) z           grad = exp(z) + phi
//   FermiDirac(lo,up): R*(x,z) = lo z + (up-lo) softplus(z)  grad = lo + (up-lo) sigma(z)
//   Hellinger(gamma):  R*(z)   = gamma sqrt(1+|z|^2)         grad = gamma z / sqrt(1+|z|^2)
//   SignoriniLog(g):   R*(x,z) = exp(-z) + g(x) z            grad = g(x) - exp(-z)
//
// Hellinger is vector-valued and ships for toolbox completeness and tests; the
// other three are scalar and wired to solves.

#include <atomic>
#include <functional>
#include <memory>

#include "proxgal/core.hpp"
#include "proxgal/spaces.hpp"

namespace proxgal {

using SpatialFn = std::function<double(const Pt&)>;

enum class EntropyKind { Shannon, FermiDirac, Hellinger, SignoriniLog };

class LegendreEntropy {
 public:
  static LegendreEntropy shannon(SpatialFn obstacle);
  static LegendreEntropy fermi_dirac(SpatialFn lower, SpatialFn upper);
  static LegendreEntropy hellinger(double gamma);
  static LegendreEntropy signorini_log(SpatialFn gap);

  EntropyKind kind() const { return kind_; }
  int value_dim() const { return kind_ == EntropyKind::Hellinger ? 0 : 1; }  // 0: any m

  // scalar families -------------------------------------------------------
  double rstar(const Pt& x, double psi) const;
  double grad_rstar(const Pt& x, double psi) const;
  double hess_rstar(const Pt& x, double psi) const;
  // closed-form forward gradient (the inverse map of grad_rstar); throws when
  // the observable is not strictly interior
  double grad_r(const Pt& x, double observable) const;
  // distance of an observable from the constraint boundary, positive iff
  // strictly interior (upper+lower gap for the bilateral family)
  double margin(const Pt& x, double observable) const;
  // the same margin computed from the latent value; free of the cancellation
  // that makes margin(x, grad_rstar(x, psi)) collapse to zero once the
  // exponential drops below the roundoff of the constraint data
  double margin_latent(const Pt& x, double psi) const;
  // value of the forward gradient at the zero observable (Dirichlet lift)
  double lift_value(const Pt& x) const;

  // latent direction in which the exponential can overflow: +1 (Shannon),
  // -1 (the contact log entropy), 0 (saturating families, no cap needed)
  int overflow_direction() const;

  // vector family (Hellinger; also accepts m=1 wrappers of the scalar ones)
  double rstar_vec(const Pt& x, const Eigen::VectorXd& psi) const;
  Eigen::VectorXd grad_rstar_vec(const Pt& x, const Eigen::VectorXd& psi) const;
  Eigen::MatrixXd hess_rstar_vec(const Pt& x, const Eigen::VectorXd& psi) const;
  Eigen::VectorXd grad_r_vec(const Pt& x, const Eigen::VectorXd& observable) const;

  double gamma() const { return gamma_; }
  const SpatialFn& data1() const { return data1_; }  // phi / lower / gap
  const SpatialFn& data2() const { return data2_; }  // upper

  // exp arguments are clamped at +-700 to stay inside double range; every
  // clamp is counted, never silent
  std::uint64_t clamp_events() const { return clamp_count_->load(); }

 private:
  LegendreEntropy(EntropyKind kind, SpatialFn d1, SpatialFn d2, double gamma);

  double guarded_exp(double a) const;

  EntropyKind kind_;
  SpatialFn data1_, data2_;
  double gamma_ = 1.0;
  std::shared_ptr<std::atomic<std::uint64_t>> clamp_count_;
};

// int [ R*(eta) - R*(psi) - grad R*(psi) (eta - psi) ] over the domain carried
// by the common space of eta and psi (volume cells, or the tagged segment for
// the boundary family); nonnegative up to quadrature error.
double bregman_dual(const LegendreEntropy& entropy, const FeFunction& eta,
                    const FeFunction& psi, const QuadratureRule& quad);

// Scalar inverse map: psi with grad_rstar(x, psi) = o (closed forms).
double inverse_check(const LegendreEntropy& entropy, const Pt& x, double observable);

}  // namespace proxgal
