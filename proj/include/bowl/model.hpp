#pragma once

// Data representation, outcome weights, the weighted hinge objective and the
// pseudo-likelihood / pseudo-posterior built from it.
//
// With w_i = r_i / (a_i rho + (1 - a_i)/2) the objective is
//   Q(beta) = (1/n) sum_i w_i max(1 - a_i x_i' beta, 0)
// and the pseudo-likelihood is exp(-2 n Q(beta)). Each factor is a scale mixture
// of normals over a latent lambda_i > 0:
//   exp(-2 max(u, 0)) = int_0^inf (2 pi lambda)^{-1/2} exp(-(u + lambda)^2 / (2 lambda)) dlambda
// which with u = w_i (1 - a_i x_i' beta) gives the augmented term used by the samplers.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "bowl/csv.hpp"
#include "bowl/errors.hpp"

namespace bowl {

struct Dataset {
  Eigen::MatrixXd features;  // n x p, one row per subject
  Eigen::VectorXd actions;   // entries in {-1, +1}
  Eigen::VectorXd rewards;   // strictly positive
  double rho = 0.5;          // P(A = +1), known by design

  Eigen::Index n() const noexcept { return features.rows(); }
  Eigen::Index p() const noexcept { return features.cols(); }

  // Structural checks. An empty dataset (n = 0) is accepted here so that samplers
  // can be run against the prior alone; file ingestion requires n >= 1.
  void validate() const {
    if (p() < 1) throw InputError("dataset needs at least one feature column");
    if (actions.size() != n() || rewards.size() != n())
      throw InputError("features, actions and rewards must have the same number of rows");
    if (!(rho > 0.0 && rho < 1.0)) throw InputError("rho must lie strictly between 0 and 1");
    if (!features.allFinite()) throw InputError("features must be finite");
    for (Eigen::Index i = 0; i < n(); ++i) {
      if (actions[i] != 1.0 && actions[i] != -1.0)
        throw InputError("action in row " + std::to_string(i + 1) + " is not -1 or +1");
      if (!(rewards[i] > 0.0) || !std::isfinite(rewards[i]))
        throw InputError("reward in row " + std::to_string(i + 1) + " is not positive");
    }
  }
};

struct NormalPrior {
  Eigen::VectorXd mu0;  // empty means zero
  double sigma0_sq = 1.0;
};

// Double-exponential (alpha = 1) prior written as a normal scale mixture over omega_j.
struct ExponentialPowerPrior {
  double nu = 0.8;
};

struct SpikeSlabPrior {
  double nu = 0.8;
  double pi_incl = 0.5;
};

struct PriorSpec {
  std::variant<NormalPrior, ExponentialPowerPrior, SpikeSlabPrior> kind = NormalPrior{};
  Eigen::VectorXd sigma;  // per-feature scale sigma_j; empty means "compute from data"

  const char* name() const {
    switch (kind.index()) {
      case 0: return "normal";
      case 1: return "ep";
      default: return "ss";
    }
  }

  // Throws unless all hyperparameters are usable for a model with p coefficients.
  void validate(Eigen::Index p) const {
    if (sigma.size() != p) throw InputError("prior sigma has wrong length");
    if (!(sigma.array() > 0.0).all() || !sigma.allFinite())
      throw InputError("prior sigma entries must be positive");
    if (const auto* np = std::get_if<NormalPrior>(&kind)) {
      if (!(np->sigma0_sq > 0.0) || !std::isfinite(np->sigma0_sq))
        throw InputError("normal prior needs sigma0^2 > 0");
      if (np->mu0.size() != 0 && np->mu0.size() != p) throw InputError("normal prior mu0 has wrong length");
    } else if (const auto* ep = std::get_if<ExponentialPowerPrior>(&kind)) {
      if (!(ep->nu > 0.0)) throw InputError("exponential-power prior needs nu > 0");
    } else {
      const auto& ss = std::get<SpikeSlabPrior>(kind);
      if (!(ss.nu > 0.0)) throw InputError("spike-and-slab prior needs nu > 0");
      if (!(ss.pi_incl > 0.0 && ss.pi_incl < 1.0)) throw InputError("spike-and-slab prior needs 0 < pi < 1");
    }
  }

  Eigen::VectorXd prior_mean(Eigen::Index p) const {
    if (const auto* np = std::get_if<NormalPrior>(&kind); np && np->mu0.size() == p) return np->mu0;
    return Eigen::VectorXd::Zero(p);
  }
};

struct ItrCoefficients {
  Eigen::VectorXd beta;
  bool intercept = false;  // beta[0] multiplies a constant-1 column
};

// Current state of one Gibbs chain. omega is used by the exponential-power prior,
// gamma by spike-and-slab; both are sized p regardless.
struct ChainState {
  Eigen::VectorXd beta;
  Eigen::VectorXd lambda;
  Eigen::VectorXd omega;
  Eigen::VectorXi gamma;
};

inline double owl_weight(double action, double reward, double rho) {
  if (!(reward > 0.0)) throw InputError("OWL weight needs a positive reward");
  return action > 0.0 ? reward / rho : reward / (1.0 - rho);
}

inline Eigen::VectorXd owl_weights(const Dataset& data) {
  Eigen::VectorXd w(data.n());
  for (Eigen::Index i = 0; i < data.n(); ++i) w[i] = owl_weight(data.actions[i], data.rewards[i], data.rho);
  return w;
}

namespace detail {
inline void check_beta(const Eigen::VectorXd& beta, const Dataset& data) {
  if (beta.size() != data.p())
    throw InputError("coefficient vector has length " + std::to_string(beta.size()) + ", expected " +
                     std::to_string(data.p()));
}
}  // namespace detail

// sum_i w_i max(1 - a_i x_i' beta, 0)
inline double weighted_hinge_sum(const Eigen::VectorXd& beta, const Dataset& data) {
  detail::check_beta(beta, data);
  const Eigen::VectorXd margin = data.actions.cwiseProduct(data.features * beta);
  double total = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i)
    total += owl_weight(data.actions[i], data.rewards[i], data.rho) * std::max(1.0 - margin[i], 0.0);
  return total;
}

inline double owl_objective(const Eigen::VectorXd& beta, const Dataset& data) {
  if (data.n() == 0) throw InputError("OWL objective of an empty dataset");
  return weighted_hinge_sum(beta, data) / static_cast<double>(data.n());
}

inline double log_pseudo_likelihood(const Eigen::VectorXd& beta, const Dataset& data) {
  return -2.0 * weighted_hinge_sum(beta, data);
}

// Log prior density of (beta, omega, gamma) up to a constant.
inline double log_prior_terms(const ChainState& state, const PriorSpec& prior) {
  const Eigen::VectorXd& beta = state.beta;
  const Eigen::Index p = beta.size();
  double lp = 0.0;
  if (const auto* np = std::get_if<NormalPrior>(&prior.kind)) {
    const Eigen::VectorXd mu0 = prior.prior_mean(p);
    lp -= 0.5 * (beta - mu0).squaredNorm() / np->sigma0_sq;
  } else if (const auto* ep = std::get_if<ExponentialPowerPrior>(&prior.kind)) {
    if (state.omega.size() != p) throw InputError("omega has wrong length");
    for (Eigen::Index j = 0; j < p; ++j) {
      const double om = state.omega[j];
      if (!(om > 0.0)) throw InputError("omega must be positive");
      const double s = prior.sigma[j];
      // N(beta_j | 0, nu^2 omega_j sigma_j^2) times the Exponential(mean 2) mixing density.
      lp += -0.5 * std::log(om) - 0.5 * beta[j] * beta[j] / (ep->nu * ep->nu * s * s * om) - 0.5 * om;
    }
  } else {
    const auto& ss = std::get<SpikeSlabPrior>(prior.kind);
    if (state.gamma.size() != p) throw InputError("gamma has wrong length");
    for (Eigen::Index j = 0; j < p; ++j) {
      if (state.gamma[j] == 1) {
        const double var = ss.nu * ss.nu * prior.sigma[j] * prior.sigma[j];
        lp += std::log(ss.pi_incl) - 0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * beta[j] * beta[j] / var;
      } else {
        if (beta[j] != 0.0) throw InputError("spike-and-slab state has beta_j != 0 with gamma_j = 0");
        lp += std::log1p(-ss.pi_incl);
      }
    }
  }
  return lp;
}

// Joint log density of (beta, lambda[, omega, gamma]) up to an additive constant:
//   -(1/2) sum_i [log lambda_i + (w_i + lambda_i - w_i a_i x_i' beta)^2 / lambda_i] + log prior.
inline double log_pseudo_posterior(const ChainState& state, const Dataset& data, const PriorSpec& prior) {
  detail::check_beta(state.beta, data);
  if (state.lambda.size() != data.n()) throw InputError("lambda has wrong length");
  const Eigen::VectorXd margin = data.actions.cwiseProduct(data.features * state.beta);
  double lp = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const double lam = state.lambda[i];
    if (!(lam > 0.0)) throw InputError("lambda must be positive");
    const double w = owl_weight(data.actions[i], data.rewards[i], data.rho);
    const double resid = w + lam - w * margin[i];
    lp -= 0.5 * (std::log(lam) + resid * resid / lam);
  }
  return lp + log_prior_terms(state, prior);
}

struct RewardTransform {
  Eigen::VectorXd rewards;
  double shift = 0.0;  // added to every raw reward
};

// Shift rewards onto the positive half-line when needed. The shift is
// -min + eps with eps = 1e-3 * range (1e-3 for a constant vector).
inline RewardTransform reward_transform(const Eigen::VectorXd& raw) {
  if (raw.size() == 0) throw InputError("reward vector is empty");
  if (!raw.allFinite()) throw InputError("rewards must be finite");
  const double lo = raw.minCoeff();
  const double hi = raw.maxCoeff();
  if (lo > 0.0) return {raw, 0.0};
  const double eps = hi > lo ? 1e-3 * (hi - lo) : 1e-3;
  const double shift = -lo + eps;
  return {(raw.array() + shift).matrix(), shift};
}

// Population standard deviation of each column. Columns that are constant
// (including the intercept column) get scale 1.
inline Eigen::VectorXd feature_scales(const Eigen::MatrixXd& features) {
  Eigen::VectorXd s = Eigen::VectorXd::Ones(features.cols());
  if (features.rows() == 0) return s;
  const double n = static_cast<double>(features.rows());
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    const double mean = features.col(j).mean();
    const double var = (features.col(j).array() - mean).square().sum() / n;
    if (var > 1e-24) s[j] = std::sqrt(var);
  }
  return s;
}

// Prepends a constant-1 column.
inline Eigen::MatrixXd add_intercept(const Eigen::MatrixXd& features) {
  Eigen::MatrixXd out(features.rows(), features.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(features.cols()) = features;
  return out;
}

inline Eigen::VectorXd add_intercept(const Eigen::VectorXd& x) {
  Eigen::VectorXd out(x.size() + 1);
  out[0] = 1.0;
  out.tail(x.size()) = x;
  return out;
}

inline Dataset with_intercept(Dataset data) {
  data.features = add_intercept(data.features);
  return data;
}

struct LoadedDataset {
  Dataset data;  // raw features (no intercept column), transformed rewards
  RewardTransform transform;
  std::vector<std::string> feature_names;
};

// Columns x1..xp, a, r in any order; other columns are rejected.
inline LoadedDataset dataset_from_table(const csv::Table& table, double rho) {
  const long a_col = table.column("a");
  const long r_col = table.column("r");
  if (a_col < 0) throw InputError("dataset is missing column 'a'");
  if (r_col < 0) throw InputError("dataset is missing column 'r'");
  std::vector<long> x_cols;
  for (std::size_t k = 1;; ++k) {
    const long c = table.column("x" + std::to_string(k));
    if (c < 0) break;
    x_cols.push_back(c);
  }
  if (x_cols.empty()) throw InputError("dataset is missing feature column 'x1'");
  if (x_cols.size() + 2 != table.header.size())
    throw InputError("dataset has unexpected columns; expected x1..x" + std::to_string(x_cols.size()) + ", a, r");
  if (table.rows.empty()) throw InputError("dataset has no rows");

  const auto n = static_cast<Eigen::Index>(table.rows.size());
  const auto p = static_cast<Eigen::Index>(x_cols.size());
  LoadedDataset out;
  out.data.rho = rho;
  out.data.features.resize(n, p);
  out.data.actions.resize(n);
  Eigen::VectorXd raw(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < p; ++j) out.data.features(i, j) = row[static_cast<std::size_t>(x_cols[j])];
    out.data.actions[i] = row[static_cast<std::size_t>(a_col)];
    raw[i] = row[static_cast<std::size_t>(r_col)];
  }
  out.transform = reward_transform(raw);
  out.data.rewards = out.transform.rewards;
  for (Eigen::Index j = 0; j < p; ++j) out.feature_names.push_back("x" + std::to_string(j + 1));
  out.data.validate();
  return out;
}

inline LoadedDataset read_dataset_csv(const std::filesystem::path& path, double rho) {
  return dataset_from_table(csv::read_file(path), rho);
}

}  // namespace bowl
