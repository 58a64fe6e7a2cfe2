// bowl: fit, predict, reproduce, verify.
//
// Exit status: 0 ok, 1 verification failure, 2 input error, 3 numerical failure.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bowl/csv.hpp"
#include "bowl/diagnostics.hpp"
#include "bowl/errors.hpp"
#include "bowl/gibbs.hpp"
#include "bowl/model.hpp"
#include "bowl/prediction.hpp"
#include "bowl/sim.hpp"
#include "bowl/verify.hpp"

namespace fs = std::filesystem;
using bowl::csv::format_real;
using json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kVerifyFailed = 1, kInputError = 2, kNumericalError = 3 };

struct Common {
  std::uint64_t seed = 0;
  unsigned jobs = bowl::default_jobs();
  std::string out_dir = ".";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  cmd->add_option("--jobs", c.jobs, "Worker threads for chains / replications (does not change results)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out-dir", c.out_dir, "Output directory")->capture_default_str();
}

// Settings echoed into every artifact. Written as "# key = value" under a
// "# [command]" line, so stripping the leading "# " gives a usable --config file.
using Settings = std::vector<std::pair<std::string, std::string>>;

std::string header_comments(const std::string& command, const Settings& settings) {
  std::string s = "# [" + command + "]\n";
  for (const auto& [k, v] : settings) s += "# " + k + " = " + v + "\n";
  return s;
}

json settings_json(const Settings& settings) {
  json j = json::object();
  for (const auto& [k, v] : settings) j[k] = v;
  return j;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  for (std::size_t k = 0; k < v.size(); ++k) os << (k ? "," : "") << v[k];
  return os.str();
}

fs::path prepare_out_dir(const std::string& dir) {
  const fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) throw bowl::InputError("cannot create output directory " + dir);
  return p;
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  Common common;
  std::string data;
  std::string prior = "ep";
  double rho = 0.5;
  int draws = 500;
  int burn_in = 150;
  int chains = 1;
  double nu = 0.8;
  double sigma0_sq = 1.0;
  double pi_incl = 0.5;
  bool intercept = true;
  std::string init = "zeros";
};

bowl::PriorSpec build_prior(const std::string& name, double nu, double sigma0_sq, double pi_incl) {
  bowl::PriorSpec p;
  if (name == "normal") p.kind = bowl::NormalPrior{{}, sigma0_sq};
  else if (name == "ep") p.kind = bowl::ExponentialPowerPrior{nu};
  else if (name == "ss") p.kind = bowl::SpikeSlabPrior{nu, pi_incl};
  else throw bowl::InputError("unknown prior '" + name + "'");
  return p;
}

std::vector<std::string> coefficient_names(const bowl::LoadedDataset& loaded, bool intercept) {
  std::vector<std::string> names;
  if (intercept) names.emplace_back("intercept");
  for (const auto& n : loaded.feature_names) names.push_back(n);
  return names;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

int run_fit(const FitArgs& a) {
  const bowl::LoadedDataset loaded = bowl::read_dataset_csv(a.data, a.rho);
  const bowl::Dataset data = a.intercept ? bowl::with_intercept(loaded.data) : loaded.data;
  const bowl::PriorSpec prior = build_prior(a.prior, a.nu, a.sigma0_sq, a.pi_incl);

  bowl::GibbsConfig gc;
  gc.n_draws = a.draws;
  gc.burn_in = a.burn_in;
  gc.n_chains = a.chains;
  gc.seed = a.common.seed;
  gc.intercept = a.intercept;
  gc.jobs = a.common.jobs;
  if (a.init == "ridge") gc.init = bowl::BetaInit::Ridge;
  else if (a.init != "zeros") throw bowl::InputError("unknown init '" + a.init + "'");

  const fs::path out = prepare_out_dir(a.common.out_dir);
  const bowl::PosteriorDraws draws = bowl::run_chain(data, prior, gc);
  const auto names = coefficient_names(loaded, a.intercept);

  const Settings settings{{"data", a.data},
                          {"prior", a.prior},
                          {"rho", format_real(a.rho)},
                          {"draws", std::to_string(a.draws)},
                          {"burn-in", std::to_string(a.burn_in)},
                          {"chains", std::to_string(a.chains)},
                          {"nu", format_real(a.nu)},
                          {"sigma0-sq", format_real(a.sigma0_sq)},
                          {"pi", format_real(a.pi_incl)},
                          {"intercept", a.intercept ? "true" : "false"},
                          {"init", a.init},
                          {"seed", std::to_string(a.common.seed)}};

  std::string csv = header_comments("fit", settings);
  csv += "chain,draw";
  for (const auto& n : names) csv += "," + n;
  csv += "\n";
  for (int c = 0; c < draws.n_chains; ++c) {
    const auto block = draws.chain(c);
    for (Eigen::Index r = 0; r < block.rows(); ++r) {
      csv += std::to_string(c) + "," + std::to_string(r);
      for (Eigen::Index j = 0; j < block.cols(); ++j) csv += "," + format_real(block(r, j));
      csv += "\n";
    }
  }

  const Eigen::VectorXd mean = draws.posterior_mean();
  json coefs = json::array();
  for (Eigen::Index j = 0; j < draws.p(); ++j) {
    const Eigen::MatrixXd by_chain = bowl::coordinate_by_chain(draws, j);
    json c;
    c["name"] = names[static_cast<std::size_t>(j)];
    c["posterior_mean"] = mean[j];
    c["magnitude"] = std::abs(mean[j]);
    c["ess"] = number_or_null(bowl::effective_sample_size(by_chain));
    c["split_rhat"] = draws.n_chains >= 2 ? number_or_null(bowl::split_rhat(by_chain)) : json(nullptr);
    if (draws.gamma.size() > 0) c["inclusion_frequency"] = draws.gamma.col(j).cast<double>().mean();
    coefs.push_back(std::move(c));
  }
  json summary;
  summary["command"] = "fit";
  summary["seed"] = a.common.seed;
  summary["config"] = settings_json(settings);
  summary["n"] = loaded.data.n();
  summary["p"] = loaded.data.p();
  summary["reward_shift"] = loaded.transform.shift;
  summary["n_chains"] = draws.n_chains;
  summary["retained_per_chain"] = draws.retained_per_chain;
  summary["chain_seeds"] = draws.chain_seeds;
  summary["coefficients"] = std::move(coefs);

  bowl::csv::write_atomically(out / "draws.csv", csv);
  bowl::csv::write_atomically(out / "summary.json", summary.dump(2) + "\n");
  std::cout << "wrote " << (out / "draws.csv").string() << " (" << draws.size() << " draws) and "
            << (out / "summary.json").string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------- predict

struct PredictArgs {
  Common common;
  std::string draws;
  std::string query;
  bool grid = false;
  std::vector<int> grid_dims{1, 2};
  int resolution = 33;
  double lo = -1.0;
  double hi = 1.0;
};

bowl::PosteriorDraws read_draws(const std::string& path) {
  const bowl::csv::Table t = bowl::csv::read_file(path);
  if (t.header.size() < 3 || t.header[0] != "chain" || t.header[1] != "draw")
    throw bowl::InputError(path + " is not a draws file (expected columns chain, draw, coefficients)");
  if (t.rows.empty()) throw bowl::InputError(path + " contains no draws");
  bowl::PosteriorDraws d;
  d.intercept = t.header[2] == "intercept";
  const auto p = static_cast<Eigen::Index>(t.header.size() - 2);
  d.beta.resize(static_cast<Eigen::Index>(t.rows.size()), p);
  int max_chain = 0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    max_chain = std::max(max_chain, static_cast<int>(t.rows[r][0]));
    for (Eigen::Index j = 0; j < p; ++j) d.beta(static_cast<Eigen::Index>(r), j) = t.rows[r][static_cast<std::size_t>(j + 2)];
  }
  d.n_chains = max_chain + 1;
  d.retained_per_chain = static_cast<int>(t.rows.size()) / d.n_chains;
  return d;
}

int run_predict(const PredictArgs& a) {
  if (a.grid == !a.query.empty()) throw bowl::InputError("give exactly one of --query or --grid");
  const bowl::PosteriorDraws draws = read_draws(a.draws);
  const Settings base{{"draws", a.draws}, {"seed", std::to_string(a.common.seed)}};
  const fs::path out = prepare_out_dir(a.common.out_dir);

  if (a.grid) {
    if (a.grid_dims.size() != 2) throw bowl::InputError("--grid-dims needs two feature indices");
    bowl::GridSpec spec;
    spec.dim1 = a.grid_dims[0] - 1;
    spec.dim2 = a.grid_dims[1] - 1;
    spec.resolution = a.resolution;
    spec.lo = a.lo;
    spec.hi = a.hi;
    const auto nodes = bowl::certainty_grid(draws, spec);
    Settings s = base;
    s.emplace_back("grid", "true");
    s.emplace_back("grid-dims", join(a.grid_dims));
    s.emplace_back("grid-res", std::to_string(a.resolution));
    s.emplace_back("grid-lo", format_real(a.lo));
    s.emplace_back("grid-hi", format_real(a.hi));
    std::string csv = header_comments("predict", s);
    csv += "x" + std::to_string(a.grid_dims[0]) + ",x" + std::to_string(a.grid_dims[1]) +
           ",prob_plus,action,certainty\n";
    for (const auto& n : nodes)
      csv += format_real(n.x1) + "," + format_real(n.x2) + "," + format_real(n.rec.prob_plus) + "," +
             std::to_string(n.rec.action) + "," + format_real(n.rec.certainty) + "\n";
    bowl::csv::write_atomically(out / "grid.csv", csv);
    std::cout << "wrote " << (out / "grid.csv").string() << " (" << nodes.size() << " nodes)\n";
    return kOk;
  }

  const bowl::csv::Table q = bowl::csv::read_file(a.query);
  const Eigen::Index p_raw = draws.intercept ? draws.p() - 1 : draws.p();
  std::vector<long> cols;
  for (Eigen::Index j = 1; j <= p_raw; ++j) {
    const long c = q.column("x" + std::to_string(j));
    if (c < 0) throw bowl::InputError("query is missing column 'x" + std::to_string(j) + "'");
    cols.push_back(c);
  }
  if (q.column("x" + std::to_string(p_raw + 1)) >= 0)
    throw bowl::InputError("query has more feature columns than the model (" + std::to_string(p_raw) + ")");
  Settings s = base;
  s.emplace_back("query", a.query);
  std::string csv = header_comments("predict", s);
  csv += "row,prob_plus,action,certainty\n";
  for (std::size_t r = 0; r < q.rows.size(); ++r) {
    Eigen::VectorXd x(p_raw);
    for (Eigen::Index j = 0; j < p_raw; ++j) x[j] = q.rows[r][static_cast<std::size_t>(cols[static_cast<std::size_t>(j)])];
    const auto rec = bowl::recommend(draws, bowl::model_features(draws, x));
    csv += std::to_string(r + 1) + "," + format_real(rec.prob_plus) + "," + std::to_string(rec.action) + "," +
           format_real(rec.certainty) + "\n";
  }
  bowl::csv::write_atomically(out / "recommendations.csv", csv);
  std::cout << "wrote " << (out / "recommendations.csv").string() << " (" << q.rows.size() << " rows)\n";
  return kOk;
}

// ---------------------------------------------------------------- reproduce

struct ReproduceArgs {
  Common common;
  std::vector<int> scenarios{1, 2};
  std::vector<int> sizes{100, 200, 400, 800};
  int reps = 200;
  int n_test = 1000;
  std::vector<std::string> methods{"owl", "bowl-normal", "bowl-ep", "bowl-ss"};
  int draws = 500;
  int burn_in = 150;
  double nu = 0.8;
  double sigma0_sq = 1.0;
  double pi_incl = 0.5;
  bool intercept = true;
  double owl_reg = 1e-3;
  int owl_epochs = 200;
  int heatmap_n = 1000;
  int grid_res = 33;
};

int run_reproduce(const ReproduceArgs& a) {
  if (a.reps < 1) throw bowl::InputError("--reps must be positive");
  if (a.scenarios.empty() || a.sizes.empty() || a.methods.empty())
    throw bowl::InputError("--scenario, --n and --methods must be nonempty");
  std::vector<bowl::Method> methods;
  for (const auto& m : a.methods) methods.push_back(bowl::parse_method(m));
  for (int n : a.sizes)
    if (n < 1) throw bowl::InputError("training sizes must be positive");
  if (a.heatmap_n < 1) throw bowl::InputError("--heatmap-n must be positive");

  bowl::MethodConfigs cfg;
  cfg.gibbs.n_draws = a.draws;
  cfg.gibbs.burn_in = a.burn_in;
  cfg.gibbs.validate();
  cfg.nu = a.nu;
  cfg.sigma0_sq = a.sigma0_sq;
  cfg.pi_incl = a.pi_incl;
  cfg.intercept = a.intercept;
  cfg.owl.reg_strength = a.owl_reg;
  cfg.owl.epochs = a.owl_epochs;

  const Settings settings{{"scenario", join(a.scenarios)},
                          {"n", join(a.sizes)},
                          {"reps", std::to_string(a.reps)},
                          {"n-test", std::to_string(a.n_test)},
                          {"methods", join(a.methods)},
                          {"draws", std::to_string(a.draws)},
                          {"burn-in", std::to_string(a.burn_in)},
                          {"nu", format_real(a.nu)},
                          {"sigma0-sq", format_real(a.sigma0_sq)},
                          {"pi", format_real(a.pi_incl)},
                          {"intercept", a.intercept ? "true" : "false"},
                          {"owl-reg", format_real(a.owl_reg)},
                          {"owl-epochs", std::to_string(a.owl_epochs)},
                          {"heatmap-n", std::to_string(a.heatmap_n)},
                          {"grid-res", std::to_string(a.grid_res)},
                          {"seed", std::to_string(a.common.seed)}};
  const std::string head = header_comments("reproduce", settings);
  const fs::path out = prepare_out_dir(a.common.out_dir);

  std::string tables = head + "method,scenario,n_train,mean_rate,mc_se,n_reps_ok\n";
  std::string raw = head + "scenario,n_train,rep,method,rate\n";
  std::string failures;
  for (int sc : a.scenarios) {
    for (int n : a.sizes) {
      bowl::ScenarioSpec spec;
      spec.id = sc;
      spec.n_train = n;
      spec.n_test = a.n_test;
      spec.n_reps = a.reps;
      spec.seed = a.common.seed;
      const bowl::ExperimentResult res = bowl::run_experiment(spec, methods, cfg, a.common.jobs);
      for (const auto& s : res.summary) {
        const std::string name(bowl::method_name(s.method));
        tables += name + "," + std::to_string(sc) + "," + std::to_string(n) + "," +
                  (s.n_reps_ok > 0 ? format_real(s.mean_rate) : std::string("nan")) + "," + format_real(s.mc_se) +
                  "," + std::to_string(s.n_reps_ok) + "\n";
        std::cout << "scenario " << sc << "  n=" << n << "  " << name << "  rate " << s.mean_rate << " (se "
                  << s.mc_se << ", " << s.n_reps_ok << "/" << a.reps << " ok)\n";
      }
      for (Eigen::Index r = 0; r < res.raw_rates.rows(); ++r)
        for (std::size_t m = 0; m < methods.size(); ++m) {
          const double v = res.raw_rates(r, static_cast<Eigen::Index>(m));
          raw += std::to_string(sc) + "," + std::to_string(n) + "," + std::to_string(r) + "," +
                 std::string(bowl::method_name(methods[m])) + "," + (std::isnan(v) ? "nan" : format_real(v)) + "\n";
        }
      for (const auto& f : res.failures) failures += "# failure: scenario " + std::to_string(sc) + " n " +
                                                     std::to_string(n) + " " + f + "\n";
    }
  }
  raw += failures;

  // Uncertainty map and coefficient magnitudes on one larger training set from
  // the first scenario listed.
  bowl::ScenarioSpec hspec;
  hspec.id = a.scenarios.front();
  hspec.seed = a.common.seed;
  bowl::Rng hrng(bowl::derive_seed(a.common.seed, {0x4ea7, static_cast<std::uint64_t>(hspec.id)}));
  const bowl::GeneratedData hdata = bowl::generate_scenario(hspec, a.heatmap_n, hrng);
  const bowl::Dataset htrain = a.intercept ? bowl::with_intercept(hdata.data) : hdata.data;

  std::string mags = head + "method";
  for (int j = 1; j <= bowl::kScenarioFeatures; ++j) mags += ",x" + std::to_string(j);
  mags += "\n";
  bowl::PosteriorDraws heat_draws;
  bool have_heat = false;
  for (bowl::Method m : {bowl::Method::BowlEp, bowl::Method::BowlNormal, bowl::Method::BowlSs}) {
    bowl::GibbsConfig gc = cfg.gibbs;
    gc.seed = bowl::derive_seed(a.common.seed, {0x4ea8, static_cast<std::uint64_t>(m)});
    gc.intercept = a.intercept;
    gc.jobs = 1;
    const bowl::PosteriorDraws d = bowl::run_chain(htrain, bowl::prior_for(m, cfg), gc);
    const Eigen::VectorXd mag = bowl::coefficient_magnitudes(d);
    mags += std::string(bowl::method_name(m));
    for (Eigen::Index j = 0; j < mag.size(); ++j) mags += "," + format_real(mag[j]);
    mags += "\n";
    if (!have_heat) {
      heat_draws = d;
      have_heat = true;
    }
  }
  bowl::GridSpec grid;
  grid.resolution = a.grid_res;
  const auto nodes = bowl::certainty_grid(heat_draws, grid);
  std::string heat = head + "# heatmap: bowl-ep fit, scenario " + std::to_string(hspec.id) + ", features 3..10 at 0\n";
  heat += "x1,x2,prob_plus,action,certainty,true_action\n";
  for (const auto& n : nodes) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(bowl::kScenarioFeatures);
    x[0] = n.x1;
    x[1] = n.x2;
    heat += format_real(n.x1) + "," + format_real(n.x2) + "," + format_real(n.rec.prob_plus) + "," +
            std::to_string(n.rec.action) + "," + format_real(n.rec.certainty) + "," +
            std::to_string(bowl::true_optimal_rule(hspec.id, x)) + "\n";
  }

  bowl::csv::write_atomically(out / "tables.csv", tables);
  bowl::csv::write_atomically(out / "raw_rates.csv", raw);
  bowl::csv::write_atomically(out / "heatmap.csv", heat);
  bowl::csv::write_atomically(out / "coefficient_magnitudes.csv", mags);
  std::cout << "wrote tables.csv, raw_rates.csv, heatmap.csv, coefficient_magnitudes.csv to " << out.string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
  Common common;
  bool quick = false;
  double tol = 1e-6;
  bool write_report = false;
};

int run_verify(const VerifyArgs& a) {
  if (!(a.tol > 0.0)) throw bowl::InputError("--tol must be positive");
  bowl::verify::Options opt;
  opt.quick = a.quick;
  opt.tol = a.tol;
  opt.seed = a.common.seed;
  const auto results = bowl::verify::run_all(opt);
  bool ok = true;
  std::string report = header_comments("verify", {{"quick", a.quick ? "true" : "false"},
                                                  {"tol", format_real(a.tol)},
                                                  {"seed", std::to_string(a.common.seed)}});
  report += "check,measured,threshold,passed\n";
  for (const auto& r : results) {
    ok = ok && r.passed;
    std::printf("%-4s %-36s measured %.3e  threshold %.3e  (%s)\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                r.measured, r.threshold, r.detail.c_str());
    report += "\"" + r.name + "\"," + format_real(r.measured) + "," + format_real(r.threshold) + "," +
              (r.passed ? "1" : "0") + "\n";
  }
  if (a.write_report) {
    const fs::path out = prepare_out_dir(a.common.out_dir);
    bowl::csv::write_atomically(out / "verify.csv", report);
  }
  std::printf("%s\n", ok ? "all checks passed" : "verification FAILED");
  return ok ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian outcome-weighted learning"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Read options from a TOML/INI file ([command] sections); flags win");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Gibbs-sample the pseudo-posterior for a dataset");
  fit_cmd->add_option("--data", fit.data, "CSV with columns x1..xp, a, r")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--prior", fit.prior, "normal | ep | ss")
      ->check(CLI::IsMember({"normal", "ep", "ss"}))
      ->capture_default_str();
  fit_cmd->add_option("--rho", fit.rho, "P(A = +1) under randomization")->capture_default_str();
  fit_cmd->add_option("--draws", fit.draws, "Gibbs iterations per chain")->capture_default_str();
  fit_cmd->add_option("--burn-in", fit.burn_in, "Discarded iterations")->capture_default_str();
  fit_cmd->add_option("--chains", fit.chains, "Independent chains")->capture_default_str();
  fit_cmd->add_option("--nu", fit.nu, "Prior scale for ep / ss")->capture_default_str();
  fit_cmd->add_option("--sigma0-sq", fit.sigma0_sq, "Normal prior variance")->capture_default_str();
  fit_cmd->add_option("--pi", fit.pi_incl, "Spike-and-slab inclusion probability")->capture_default_str();
  fit_cmd->add_flag("--intercept,!--no-intercept", fit.intercept, "Prepend a constant feature (default on)");
  fit_cmd->add_option("--init", fit.init, "zeros | ridge")
      ->check(CLI::IsMember({"zeros", "ridge"}))
      ->capture_default_str();
  add_common(fit_cmd, fit.common);

  PredictArgs pred;
  auto* pred_cmd = app.add_subcommand("predict", "Posterior-predictive recommendations");
  pred_cmd->add_option("--draws", pred.draws, "draws.csv written by fit")->required()->check(CLI::ExistingFile);
  pred_cmd->add_option("--query", pred.query, "CSV with columns x1..xp")->check(CLI::ExistingFile);
  pred_cmd->add_flag("--grid", pred.grid, "Evaluate a certainty grid instead of a query file");
  pred_cmd->add_option("--grid-dims", pred.grid_dims, "Two 1-based feature indices")->delimiter(',');
  pred_cmd->add_option("--grid-res", pred.resolution, "Nodes per axis")->capture_default_str();
  pred_cmd->add_option("--grid-lo", pred.lo)->capture_default_str();
  pred_cmd->add_option("--grid-hi", pred.hi)->capture_default_str();
  add_common(pred_cmd, pred.common);

  ReproduceArgs rep;
  auto* rep_cmd = app.add_subcommand("reproduce", "Run the simulation study");
  rep_cmd->add_option("--scenario", rep.scenarios, "Scenario ids (1, 2)")->delimiter(',');
  rep_cmd->add_option("--n", rep.sizes, "Training sizes")->delimiter(',');
  rep_cmd->add_option("--reps", rep.reps, "Replications per cell")->capture_default_str();
  rep_cmd->add_option("--n-test", rep.n_test, "Test-set size")->capture_default_str();
  rep_cmd->add_option("--methods", rep.methods, "owl, bowl-normal, bowl-ep, bowl-ss")->delimiter(',');
  rep_cmd->add_option("--draws", rep.draws)->capture_default_str();
  rep_cmd->add_option("--burn-in", rep.burn_in)->capture_default_str();
  rep_cmd->add_option("--nu", rep.nu)->capture_default_str();
  rep_cmd->add_option("--sigma0-sq", rep.sigma0_sq)->capture_default_str();
  rep_cmd->add_option("--pi", rep.pi_incl)->capture_default_str();
  rep_cmd->add_flag("--intercept,!--no-intercept", rep.intercept);
  rep_cmd->add_option("--owl-reg", rep.owl_reg)->capture_default_str();
  rep_cmd->add_option("--owl-epochs", rep.owl_epochs)->capture_default_str();
  rep_cmd->add_option("--heatmap-n", rep.heatmap_n, "Training size for the heatmap fit")->capture_default_str();
  rep_cmd->add_option("--grid-res", rep.grid_res)->capture_default_str();
  add_common(rep_cmd, rep.common);

  VerifyArgs ver;
  ver.common.seed = bowl::verify::Options{}.seed;
  auto* ver_cmd = app.add_subcommand("verify", "Numerical self-checks");
  ver_cmd->add_flag("--quick", ver.quick, "Smaller Monte Carlo sizes");
  ver_cmd->add_option("--tol", ver.tol, "Quadrature tolerance; Monte Carlo thresholds scale with it")
      ->capture_default_str();
  add_common(ver_cmd, ver.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInputError;
  }

  try {
    if (*fit_cmd) return run_fit(fit);
    if (*pred_cmd) return run_predict(pred);
    if (*rep_cmd) return run_reproduce(rep);
    ver.write_report = ver_cmd->count("--out-dir") > 0;
    return run_verify(ver);
  } catch (const bowl::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalError;
  } catch (const bowl::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericalError;
  }
}
