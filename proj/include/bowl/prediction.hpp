#pragma once

// Posterior-predictive treatment recommendations.
//
// P(a = +1 | x) is the average over retained draws of Phi(x' beta). The latent
// lambda does not enter Phi(x' beta), so only the beta draws are needed.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bowl/errors.hpp"
#include "bowl/gibbs.hpp"

namespace bowl {

inline double normal_cdf(double t) { return 0.5 * std::erfc(-t / std::numbers::sqrt2); }

struct Recommendation {
  int action = 1;          // -1 or +1
  double prob_plus = 0.5;  // P(a = +1 | x)
  double certainty = 0.5;  // max(prob_plus, 1 - prob_plus)
};

// Raw feature vector -> model feature vector (prepends the constant when the
// draws were fitted with an intercept).
inline Eigen::VectorXd model_features(const PosteriorDraws& draws, const Eigen::VectorXd& raw) {
  if (draws.intercept) {
    if (raw.size() + 1 != draws.p())
      throw InputError("query has " + std::to_string(raw.size()) + " features, model expects " +
                       std::to_string(draws.p() - 1));
    return add_intercept(raw);
  }
  if (raw.size() != draws.p())
    throw InputError("query has " + std::to_string(raw.size()) + " features, model expects " +
                     std::to_string(draws.p()));
  return raw;
}

// x must already be in model coordinates (see model_features).
inline double predictive_prob(const PosteriorDraws& draws, const Eigen::VectorXd& x) {
  if (x.size() != draws.p()) throw InputError("feature vector length does not match the draws");
  if (draws.size() == 0) throw InputError("no posterior draws");
  const Eigen::VectorXd scores = draws.beta * x;
  double total = 0.0;
  for (Eigen::Index g = 0; g < scores.size(); ++g) total += normal_cdf(scores[g]);
  return total / static_cast<double>(scores.size());
}

inline Recommendation recommendation_from_prob(double prob_plus) {
  Recommendation r;
  r.prob_plus = prob_plus;
  r.action = prob_plus >= 0.5 ? 1 : -1;
  r.certainty = std::max(prob_plus, 1.0 - prob_plus);
  return r;
}

inline Recommendation recommend(const PosteriorDraws& draws, const Eigen::VectorXd& x) {
  return recommendation_from_prob(predictive_prob(draws, x));
}

struct GridSpec {
  Eigen::Index dim1 = 0;  // raw feature indices, 0-based
  Eigen::Index dim2 = 1;
  double lo = -1.0;
  double hi = 1.0;
  int resolution = 33;
  Eigen::VectorXd fill;  // raw-feature values for the other coordinates; empty means 0
};

struct GridNode {
  double x1 = 0.0;
  double x2 = 0.0;
  Recommendation rec;
};

// Nodes in row-major order with dim2 varying fastest.
inline std::vector<GridNode> certainty_grid(const PosteriorDraws& draws, const GridSpec& spec) {
  const Eigen::Index p_raw = draws.intercept ? draws.p() - 1 : draws.p();
  if (spec.resolution < 2) throw InputError("grid resolution must be at least 2");
  if (spec.dim1 < 0 || spec.dim2 < 0 || spec.dim1 >= p_raw || spec.dim2 >= p_raw || spec.dim1 == spec.dim2)
    throw InputError("invalid grid dimensions");
  if (!(spec.hi > spec.lo)) throw InputError("grid range is empty");
  Eigen::VectorXd base = spec.fill.size() == 0 ? Eigen::VectorXd::Zero(p_raw) : spec.fill;
  if (base.size() != p_raw) throw InputError("grid fill vector has wrong length");

  const int k = spec.resolution;
  const double step = (spec.hi - spec.lo) / (k - 1);
  std::vector<GridNode> nodes;
  nodes.reserve(static_cast<std::size_t>(k) * static_cast<std::size_t>(k));
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      Eigen::VectorXd raw = base;
      raw[spec.dim1] = spec.lo + step * a;
      raw[spec.dim2] = spec.lo + step * b;
      nodes.push_back({raw[spec.dim1], raw[spec.dim2], recommend(draws, model_features(draws, raw))});
    }
  }
  return nodes;
}

// |posterior mean| per coordinate; the intercept is dropped unless asked for.
inline Eigen::VectorXd coefficient_magnitudes(const PosteriorDraws& draws, bool include_intercept = false) {
  const Eigen::VectorXd mean = draws.posterior_mean().cwiseAbs();
  if (draws.intercept && !include_intercept) return mean.tail(mean.size() - 1);
  return mean;
}

}  // namespace bowl
