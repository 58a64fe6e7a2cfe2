#pragma once

// Convergence summaries for retained draws: effective sample size with Geyer's
// initial-monotone-sequence truncation, and split R-hat.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "bowl/gibbs.hpp"

namespace bowl {

namespace detail {

// Autocovariance of x at lags 0..max_lag (biased, divisor n).
inline std::vector<double> autocovariance(const Eigen::VectorXd& x, Eigen::Index max_lag) {
  const Eigen::Index n = x.size();
  const Eigen::VectorXd c = x.array() - x.mean();
  std::vector<double> acov(static_cast<std::size_t>(max_lag + 1), 0.0);
  for (Eigen::Index lag = 0; lag <= max_lag; ++lag)
    acov[static_cast<std::size_t>(lag)] = c.head(n - lag).dot(c.tail(n - lag)) / static_cast<double>(n);
  return acov;
}

}  // namespace detail

// ESS of one coordinate pooled over chains (chains are columns of `draws`).
inline double effective_sample_size(const Eigen::MatrixXd& draws) {
  const Eigen::Index n = draws.rows();
  const Eigen::Index m = draws.cols();
  if (n < 4) return static_cast<double>(n * m);
  const Eigen::Index max_lag = n - 1;
  std::vector<double> rho(static_cast<std::size_t>(max_lag + 1), 0.0);
  double var_within = 0.0;
  std::vector<std::vector<double>> acovs;
  for (Eigen::Index c = 0; c < m; ++c) {
    acovs.push_back(detail::autocovariance(draws.col(c), max_lag));
    var_within += acovs.back()[0];
  }
  var_within /= static_cast<double>(m);
  if (!(var_within > 0.0)) return static_cast<double>(n * m);
  for (Eigen::Index lag = 0; lag <= max_lag; ++lag) {
    double a = 0.0;
    for (const auto& ac : acovs) a += ac[static_cast<std::size_t>(lag)];
    rho[static_cast<std::size_t>(lag)] = a / static_cast<double>(m) / var_within;
  }
  // Sum of autocorrelation pairs while positive, forced to be nonincreasing.
  double tau = -1.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (Eigen::Index t = 0; t + 1 <= max_lag; t += 2) {
    double pair = rho[static_cast<std::size_t>(t)] + rho[static_cast<std::size_t>(t + 1)];
    if (pair <= 0.0) break;
    pair = std::min(pair, prev_pair);
    tau += 2.0 * pair;
    prev_pair = pair;
  }
  tau = std::max(tau, 1.0 / std::log10(static_cast<double>(n * m)));
  return static_cast<double>(n * m) / tau;
}

// Split R-hat: every chain is halved and the halves are treated as chains.
inline double split_rhat(const Eigen::MatrixXd& draws) {
  const Eigen::Index half = draws.rows() / 2;
  const Eigen::Index m = draws.cols() * 2;
  if (half < 2) return std::numeric_limits<double>::quiet_NaN();
  Eigen::MatrixXd split(half, m);
  for (Eigen::Index c = 0; c < draws.cols(); ++c) {
    split.col(2 * c) = draws.col(c).head(half);
    split.col(2 * c + 1) = draws.col(c).segment(draws.rows() - half, half);
  }
  const Eigen::VectorXd means = split.colwise().mean().transpose();
  const double grand = means.mean();
  const double n = static_cast<double>(half);
  const double between = n / static_cast<double>(m - 1) * (means.array() - grand).square().sum();
  double within = 0.0;
  for (Eigen::Index c = 0; c < m; ++c)
    within += (split.col(c).array() - means[c]).square().sum() / (n - 1.0);
  within /= static_cast<double>(m);
  if (!(within > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double var_plus = (n - 1.0) / n * within + between / n;
  return std::sqrt(var_plus / within);
}

// Retained draws of coordinate j with one column per chain.
inline Eigen::MatrixXd coordinate_by_chain(const PosteriorDraws& draws, Eigen::Index j) {
  Eigen::MatrixXd out(draws.retained_per_chain, draws.n_chains);
  for (int c = 0; c < draws.n_chains; ++c) out.col(c) = draws.chain(c).col(j);
  return out;
}

}  // namespace bowl
