#pragma once

// Exact samplers and densities used by the Gibbs kernels:
//
//   IG(mu, lambda)        inverse Gaussian, density
//                           sqrt(lambda / (2 pi x^3)) exp(-lambda (x - mu)^2 / (2 mu^2 x))
//   GIG(1/2, psi, chi)    generalized inverse Gaussian of order one half, density
//                           C x^{-1/2} exp(-(chi / x + psi x) / 2)
//   N(m, Q^{-1})          multivariate normal parameterized by its precision Q
//
// If X ~ GIG(1/2, psi, chi) with chi > 0 then 1/X ~ IG(sqrt(psi / chi), psi), so
// the GIG sampler is a thin wrapper around the inverse Gaussian one.

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "bowl/errors.hpp"
#include "bowl/rng.hpp"

namespace bowl {

// Below this chi the IG mean sqrt(psi/chi) is not representable in a useful way and
// the chi = 0 limit, Gamma(1/2, rate psi/2), is used instead.
inline constexpr double kGigChiFloor = 1e-12;

struct InvGaussianParams {
  double mu;            // mean
  double lambda_shape;  // shape

  void validate() const {
    if (!(mu > 0.0) || !std::isfinite(mu) || !(lambda_shape > 0.0) || !std::isfinite(lambda_shape))
      throw InputError("inverse Gaussian requires finite mu > 0 and lambda > 0");
  }
};

struct GigHalfParams {
  double psi;
  double chi;

  void validate() const {
    if (!(psi > 0.0) || !std::isfinite(psi)) throw InputError("GIG(1/2) requires psi > 0");
    if (!(chi >= 0.0) || !std::isfinite(chi)) throw InputError("GIG(1/2) requires chi >= 0");
  }
};

// N(mean, precision^{-1}); the Cholesky factor of the precision is computed once.
class MvnParams {
 public:
  MvnParams(Eigen::VectorXd mean, const Eigen::MatrixXd& precision)
      : mean_(std::move(mean)), llt_(precision) {
    if (precision.rows() != precision.cols() || precision.rows() != mean_.size())
      throw InputError("MVN mean/precision dimension mismatch");
    if (llt_.info() != Eigen::Success)
      throw NumericalError("MVN precision is not positive definite");
  }

  // Mean given implicitly as precision^{-1} * linear, the usual Gaussian
  // conditional form. Saves a second factorization.
  static MvnParams from_canonical(const Eigen::MatrixXd& precision, const Eigen::VectorXd& linear) {
    MvnParams out(Eigen::VectorXd::Zero(linear.size()), precision);
    out.mean_ = out.llt_.solve(linear);
    return out;
  }

  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::LLT<Eigen::MatrixXd>& precision_llt() const noexcept { return llt_; }
  Eigen::Index dim() const noexcept { return mean_.size(); }

  Eigen::MatrixXd covariance() const {
    return llt_.solve(Eigen::MatrixXd::Identity(dim(), dim()));
  }

 private:
  Eigen::VectorXd mean_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

// Michael, Schucany & Haas transformation with one accept/reject step.
inline double sample_inverse_gaussian(const InvGaussianParams& params, Rng& rng) {
  params.validate();
  const double mu = params.mu;
  const double lam = params.lambda_shape;
  const double z = rng.normal();
  const double y = z * z;
  const double muy = mu * y;
  // mu + mu^2 y/(2 lam) - mu/(2 lam) sqrt(4 mu lam y + (mu y)^2), rearranged to
  // avoid cancellation when mu y >> lam.
  const double root = std::sqrt(muy * (4.0 * lam + muy));
  double x = mu - 2.0 * mu * muy / (muy + root);
  if (!(x > 0.0)) x = std::numeric_limits<double>::min();
  return rng.uniform() * (mu + x) <= mu ? x : mu * (mu / x);
}

inline double sample_gig_half(const GigHalfParams& params, Rng& rng) {
  params.validate();
  if (params.chi < kGigChiFloor) return rng.gamma(0.5, 0.5 * params.psi);
  const InvGaussianParams ig{std::sqrt(params.psi / params.chi), params.psi};
  return 1.0 / sample_inverse_gaussian(ig, rng);
}

// x = mean + L^{-T} z with precision = L L^T.
inline Eigen::VectorXd sample_mvn(const MvnParams& params, Rng& rng) {
  Eigen::VectorXd z(params.dim());
  for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = rng.normal();
  params.precision_llt().matrixU().solveInPlace(z);
  return params.mean() + z;
}

// Log of C(1/2, psi, chi) x^{-1/2} exp(-(chi/x + psi x)/2), where
// C = (psi/chi)^{1/4} / (2 K_{1/2}(sqrt(psi chi))) and K_{1/2}(z) = sqrt(pi/(2z)) e^{-z}.
inline double log_density_gig_half(double x, const GigHalfParams& params) {
  params.validate();
  if (!(x > 0.0)) throw InputError("GIG(1/2) density evaluated at x <= 0");
  if (!(params.chi > 0.0)) throw InputError("GIG(1/2) density requires chi > 0");
  const double omega = std::sqrt(params.psi * params.chi);
  const double log_k_half = 0.5 * std::log(std::numbers::pi / (2.0 * omega)) - omega;
  const double log_c = 0.25 * std::log(params.psi / params.chi) - std::log(2.0) - log_k_half;
  return log_c - 0.5 * std::log(x) - 0.5 * (params.chi / x + params.psi * x);
}

}  // namespace bowl
