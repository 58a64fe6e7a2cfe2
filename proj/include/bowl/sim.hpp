#pragma once

// Simulation scenarios and the replicated misclassification experiment.
//
// Features X_1..X_10 ~ Uniform[-1, 1], A = +-1 with probability 1/2 each,
// R ~ N(1 + 2 X_1 + X_2 + 0.5 X_3 + T(X, A), 1) with
//   scenario 1: T = (X_1 + X_2) A            optimal rule  +1 iff X_1 + X_2 > 0
//   scenario 2: T = 0.442 (1 - X_1 - X_2) A  optimal rule  +1 iff 1 - X_1 - X_2 > 0

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "bowl/errors.hpp"
#include "bowl/gibbs.hpp"
#include "bowl/model.hpp"
#include "bowl/owl.hpp"
#include "bowl/parallel.hpp"
#include "bowl/rng.hpp"

namespace bowl {

inline constexpr int kScenarioFeatures = 10;

struct ScenarioSpec {
  int id = 1;
  int n_train = 100;
  int n_test = 1000;
  int n_reps = 200;
  std::uint64_t seed = 0;
  // Multiplies the interaction term; 1 is the standard design.
  double signal_scale = 1.0;
  double noise_sd = 1.0;

  void validate() const {
    if (id != 1 && id != 2) throw InputError("scenario must be 1 or 2");
    if (n_train < 1 || n_test < 1) throw InputError("sample sizes must be positive");
    if (n_reps < 1) throw InputError("number of replications must be positive");
    if (!(noise_sd >= 0.0)) throw InputError("noise sd must be nonnegative");
  }
};

// Interaction term T(X, A).
inline double scenario_interaction(int scenario, const Eigen::Ref<const Eigen::VectorXd>& x, double action) {
  if (scenario == 1) return (x[0] + x[1]) * action;
  if (scenario == 2) return 0.442 * (1.0 - x[0] - x[1]) * action;
  throw InputError("scenario must be 1 or 2");
}

// Boundary points get -1: the optimal rule is the indicator of a strict inequality.
inline int true_optimal_rule(int scenario, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (scenario == 1) return x[0] + x[1] > 0.0 ? 1 : -1;
  if (scenario == 2) return 1.0 - x[0] - x[1] > 0.0 ? 1 : -1;
  throw InputError("scenario must be 1 or 2");
}

struct GeneratedData {
  Dataset data;  // raw features, shifted rewards, rho = 1/2
  Eigen::VectorXd raw_rewards;
  double reward_shift = 0.0;
  std::vector<int> truth;
};

inline GeneratedData generate_scenario(const ScenarioSpec& spec, Eigen::Index n, Rng& rng) {
  GeneratedData g;
  g.data.rho = 0.5;
  g.data.features.resize(n, kScenarioFeatures);
  g.data.actions.resize(n);
  g.raw_rewards.resize(n);
  g.truth.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < kScenarioFeatures; ++j) g.data.features(i, j) = 2.0 * rng.uniform() - 1.0;
    const auto x = g.data.features.row(i).transpose();
    const double a = rng.bernoulli(0.5) ? 1.0 : -1.0;
    g.data.actions[i] = a;
    const double q0 = 1.0 + 2.0 * x[0] + x[1] + 0.5 * x[2] + spec.signal_scale * scenario_interaction(spec.id, x, a);
    g.raw_rewards[i] = q0 + spec.noise_sd * rng.normal();
    g.truth[static_cast<std::size_t>(i)] = true_optimal_rule(spec.id, x);
  }
  const RewardTransform t = reward_transform(g.raw_rewards);
  g.data.rewards = t.rewards;
  g.reward_shift = t.shift;
  return g;
}

inline double misclassification_rate(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) throw InputError("prediction and truth lengths differ");
  if (predicted.empty()) throw InputError("misclassification rate of an empty set");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) wrong += predicted[i] != truth[i] ? 1 : 0;
  return static_cast<double>(wrong) / static_cast<double>(predicted.size());
}

enum class Method { Owl, BowlNormal, BowlEp, BowlSs };

inline std::string_view method_name(Method m) {
  switch (m) {
    case Method::Owl: return "owl";
    case Method::BowlNormal: return "bowl-normal";
    case Method::BowlEp: return "bowl-ep";
    case Method::BowlSs: return "bowl-ss";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  for (Method m : {Method::Owl, Method::BowlNormal, Method::BowlEp, Method::BowlSs})
    if (method_name(m) == s) return m;
  throw InputError("unknown method '" + std::string(s) + "' (expected owl, bowl-normal, bowl-ep, bowl-ss)");
}

struct MethodConfigs {
  OwlOptions owl;
  GibbsConfig gibbs;  // seed and intercept are overridden per fit
  double nu = 0.8;
  double sigma0_sq = 1.0;
  double pi_incl = 0.5;
  bool intercept = true;
};

inline PriorSpec prior_for(Method m, const MethodConfigs& cfg) {
  PriorSpec prior;
  switch (m) {
    case Method::BowlNormal: prior.kind = NormalPrior{{}, cfg.sigma0_sq}; break;
    case Method::BowlEp: prior.kind = ExponentialPowerPrior{cfg.nu}; break;
    case Method::BowlSs: prior.kind = SpikeSlabPrior{cfg.nu, cfg.pi_incl}; break;
    case Method::Owl: throw InputError("OWL has no prior");
  }
  return prior;
}

// Point estimate of the rule coefficients (posterior mean for the Bayesian methods).
inline ItrCoefficients fit_method(Method m, const Dataset& raw_train, const MethodConfigs& cfg, std::uint64_t seed) {
  const Dataset train = cfg.intercept ? with_intercept(raw_train) : raw_train;
  if (m == Method::Owl) {
    OwlOptions opts = cfg.owl;
    opts.seed = seed;
    return {fit_owl_linear(train, opts).beta, cfg.intercept};
  }
  GibbsConfig gc = cfg.gibbs;
  gc.seed = seed;
  gc.intercept = cfg.intercept;
  gc.jobs = 1;
  return {run_chain(train, prior_for(m, cfg), gc).posterior_mean(), cfg.intercept};
}

inline std::vector<int> predict_rule(const ItrCoefficients& coef, const Eigen::MatrixXd& raw_features) {
  std::vector<int> out(static_cast<std::size_t>(raw_features.rows()));
  for (Eigen::Index i = 0; i < raw_features.rows(); ++i) {
    const Eigen::VectorXd x = raw_features.row(i).transpose();
    out[static_cast<std::size_t>(i)] = predict_owl(coef.beta, coef.intercept ? add_intercept(x) : x);
  }
  return out;
}

struct MethodSummary {
  Method method;
  double mean_rate = 0.0;
  double mc_se = 0.0;
  int n_reps_ok = 0;
};

struct ExperimentResult {
  ScenarioSpec spec;
  std::vector<Method> methods;
  Eigen::MatrixXd raw_rates;  // n_reps x methods; NaN marks a failed fit
  std::vector<std::string> failures;
  std::vector<MethodSummary> summary;
};

inline std::uint64_t replication_seed(const ScenarioSpec& spec, int rep) {
  return derive_seed(spec.seed, {static_cast<std::uint64_t>(spec.id), static_cast<std::uint64_t>(spec.n_train),
                                 static_cast<std::uint64_t>(rep)});
}

// Every replication draws fresh train and test sets; all methods in a
// replication see the same data.
inline ExperimentResult run_experiment(const ScenarioSpec& spec, const std::vector<Method>& methods,
                                       const MethodConfigs& cfg, unsigned jobs = 1) {
  spec.validate();
  if (methods.empty()) throw InputError("no methods selected");
  ExperimentResult res;
  res.spec = spec;
  res.methods = methods;
  res.raw_rates = Eigen::MatrixXd::Constant(spec.n_reps, static_cast<Eigen::Index>(methods.size()),
                                            std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> messages(static_cast<std::size_t>(spec.n_reps) * methods.size());

  parallel_for(static_cast<std::size_t>(spec.n_reps), jobs, [&](std::size_t rep) {
    const std::uint64_t rs = replication_seed(spec, static_cast<int>(rep));
    Rng train_rng(derive_seed(rs, {1}));
    Rng test_rng(derive_seed(rs, {2}));
    const GeneratedData train = generate_scenario(spec, spec.n_train, train_rng);
    const GeneratedData test = generate_scenario(spec, spec.n_test, test_rng);
    for (std::size_t m = 0; m < methods.size(); ++m) {
      try {
        const ItrCoefficients coef = fit_method(methods[m], train.data, cfg, derive_seed(rs, {3, m}));
        res.raw_rates(static_cast<Eigen::Index>(rep), static_cast<Eigen::Index>(m)) =
            misclassification_rate(predict_rule(coef, test.data.features), test.truth);
      } catch (const std::exception& e) {
        messages[rep * methods.size() + m] = "rep " + std::to_string(rep) + " " +
                                             std::string(method_name(methods[m])) + ": " + e.what();
      }
    }
  });

  for (auto& msg : messages)
    if (!msg.empty()) res.failures.push_back(std::move(msg));
  for (std::size_t m = 0; m < methods.size(); ++m) {
    MethodSummary s{methods[m]};
    double sum = 0.0, sumsq = 0.0;
    for (Eigen::Index r = 0; r < res.raw_rates.rows(); ++r) {
      const double v = res.raw_rates(r, static_cast<Eigen::Index>(m));
      if (std::isnan(v)) continue;
      ++s.n_reps_ok;
      sum += v;
      sumsq += v * v;
    }
    if (s.n_reps_ok > 0) {
      s.mean_rate = sum / s.n_reps_ok;
      if (s.n_reps_ok > 1) {
        const double var = std::max(0.0, (sumsq - s.n_reps_ok * s.mean_rate * s.mean_rate) / (s.n_reps_ok - 1));
        s.mc_se = std::sqrt(var / s.n_reps_ok);
      }
    } else {
      s.mean_rate = std::numeric_limits<double>::quiet_NaN();
    }
    res.summary.push_back(s);
  }
  return res;
}

}  // namespace bowl
