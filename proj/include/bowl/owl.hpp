#pragma once

// Frequentist linear OWL: minimizes
//   F(beta) = (1/n) sum_i w_i max(1 - a_i x_i' beta, 0) + (reg / 2) |beta|^2
// by stochastic subgradient descent over deterministically shuffled epochs,
// step size c / sqrt(t), returning the average of the second half of the iterates.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include <Eigen/Core>

#include "bowl/errors.hpp"
#include "bowl/model.hpp"
#include "bowl/rng.hpp"

namespace bowl {

struct OwlOptions {
  double reg_strength = 1e-3;
  int epochs = 200;
  // Base step; divided by the mean outcome weight so that the effective step
  // does not depend on the reward scale.
  double step_scale = 0.5;
  std::uint64_t seed = 0;
};

struct OwlFit {
  Eigen::VectorXd beta;
  std::vector<double> objective_trace;  // F at the running suffix average, one per epoch
  double reg_strength = 0.0;
};

inline double owl_regularized_objective(const Eigen::VectorXd& beta, const Dataset& data, double reg_strength) {
  return owl_objective(beta, data) + 0.5 * reg_strength * beta.squaredNorm();
}

inline OwlFit fit_owl_linear(const Dataset& data, const OwlOptions& opts) {
  data.validate();
  if (data.n() == 0) throw InputError("OWL fit needs at least one observation");
  if (opts.epochs < 1) throw InputError("epochs must be positive");
  if (!(opts.reg_strength >= 0.0)) throw InputError("reg_strength must be nonnegative");

  const Eigen::Index n = data.n();
  const Eigen::MatrixXd z = data.actions.asDiagonal() * data.features;
  const Eigen::VectorXd w = owl_weights(data);
  const double step0 = opts.step_scale / w.mean();
  const long total = static_cast<long>(opts.epochs) * n;
  const long average_from = total / 2;

  Rng rng(opts.seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(data.p());
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(data.p());
  long averaged = 0;
  long t = 0;
  OwlFit fit;
  fit.reg_strength = opts.reg_strength;
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng.below(k)]);
    for (const Eigen::Index i : order) {
      ++t;
      const double eta = step0 / std::sqrt(static_cast<double>(t));
      const bool active = z.row(i).dot(beta) < 1.0;
      beta *= 1.0 - eta * opts.reg_strength;
      if (active) beta += eta * w[i] * z.row(i).transpose();
      if (t > average_from) {
        ++averaged;
        avg += (beta - avg) / static_cast<double>(averaged);
      }
    }
    fit.objective_trace.push_back(
        owl_regularized_objective(averaged > 0 ? avg : beta, data, opts.reg_strength));
  }
  fit.beta = averaged > 0 ? avg : beta;
  // Never return something worse than the starting point.
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(data.p());
  if (owl_regularized_objective(fit.beta, data, opts.reg_strength) > owl_regularized_objective(zero, data, opts.reg_strength))
    fit.beta = zero;
  return fit;
}

// sign(x' beta) with sign(0) = +1.
inline int predict_owl(const Eigen::VectorXd& beta, const Eigen::VectorXd& x) {
  if (x.size() != beta.size()) throw InputError("feature vector length does not match the coefficients");
  return x.dot(beta) >= 0.0 ? 1 : -1;
}

inline int predict_owl(const OwlFit& fit, const Eigen::VectorXd& x) { return predict_owl(fit.beta, x); }

}  // namespace bowl
