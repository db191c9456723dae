#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nsc/aipw.hpp"
#include "nsc/csv.hpp"
#include "nsc/errors.hpp"
#include "nsc/experiment.hpp"
#include "nsc/functional.hpp"
#include "nsc/oracle.hpp"
#include "nsc/parallel.hpp"

namespace {

using Row = std::vector<std::string>;

void print_table(std::ostream& out, const Row& header, const std::vector<Row>& rows, bool csv) {
  if (csv) {
    auto line = [&](const Row& r) {
      for (std::size_t j = 0; j < r.size(); ++j) out << (j ? "," : "") << r[j];
      out << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return;
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t j = 0; j < header.size(); ++j) width[j] = header[j].size();
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < r.size(); ++j) width[j] = std::max(width[j], r[j].size());
  }
  auto line = [&](const Row& r) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) out << "  ";
      out << std::setw(static_cast<int>(width[j])) << r[j];
    }
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
}

std::string num(double v) { return std::isfinite(v) ? nsc::format_double(v) : std::string("NA"); }

// Writes to `path`, or stdout when it is empty or "-".
template <class F>
void with_output(const std::string& path, F&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open '" + path + "' for writing");
  write(out);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::vector<double> parse_reference(const std::string& text) {
  std::vector<double> l0;
  if (text.empty()) return l0;
  for (const auto& field : nsc::split_csv_line(text)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(field, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != field.size()) throw std::invalid_argument("bad --reference value '" + field + "'");
    l0.push_back(v);
  }
  return l0;
}

struct SimulateArgs {
  std::string setting = "gauss1";
  std::size_t n = 5000;
  std::uint64_t seed = 0;
  std::string output;
  bool full = false;
  std::string missing = "NA";
};

struct EstimateArgs {
  std::string input;
  std::string functional = "mean:L3";
  std::string estimator = "aipw";
  std::string family = "linear";
  std::string reference;
  std::string missing = "NA";
  std::string format = "csv";
  std::string output;
  int bootstrap = 0;
  std::uint64_t seed = 0;
  double clip = 1e-6;
  double alpha = 0.05;
};

struct ExperimentArgs {
  std::string setting = "gauss1";
  std::size_t n = 5000;
  std::size_t trials = 200;
  std::uint64_t seed = 0;
  std::string misspec = "none";
  std::string format = "csv";
  std::string output;
  std::string trials_output;
  bool se = false;
};

struct OracleArgs {
  bool all = false;
  std::uint64_t seed = 20240601;
  int laws = 20;
  int controls = 5;
  std::string format = "text";
};

int run_simulate(const SimulateArgs& a) {
  const auto sim = nsc::simulate_setting(nsc::parse_setting(a.setting), a.n, a.seed);
  with_output(a.output, [&](std::ostream& out) { nsc::write_csv(out, a.full ? sim.full : sim.masked, a.missing); });
  return 0;
}

int run_estimate(const EstimateArgs& a, int threads) {
  const nsc::Dataset data = nsc::ingest_csv_file(a.input, a.missing);
  const auto functional = nsc::TargetFunctional::parse(a.functional, data.k());
  const auto kind = nsc::parse_estimator_kind(a.estimator);

  nsc::EstimatorConfig config;
  if (a.family == "linear") {
    config.family = nsc::BasisFamily::linear;
  } else if (a.family == "saturated") {
    config.family = nsc::BasisFamily::saturated;
  } else {
    throw std::invalid_argument("unknown --family '" + a.family + "'");
  }
  config.clip = a.clip;
  config.reference = parse_reference(a.reference);
  config.compute_se = kind != nsc::EstimatorKind::complete_case;

  nsc::EstimateReport rep = kind == nsc::EstimatorKind::complete_case ? nsc::estimate_complete_case(data, functional)
                                                                      : nsc::estimate(data, functional, config, kind);
  if (a.bootstrap > 0) {
    auto boot_config = config;
    boot_config.compute_se = false;
    const auto boot = nsc::bootstrap_ci(data, functional, boot_config, a.bootstrap, a.seed, a.alpha, kind, threads);
    rep.bootstrap_ci = std::make_pair(boot.lo, boot.hi);
  }
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';

  const Row header = {"functional", "estimate", "se", "ci_lo", "ci_hi", "n", "n_complete", "n_clipped"};
  const double lo = rep.bootstrap_ci ? rep.bootstrap_ci->first : std::numeric_limits<double>::quiet_NaN();
  const double hi = rep.bootstrap_ci ? rep.bootstrap_ci->second : std::numeric_limits<double>::quiet_NaN();
  const Row row = {functional.name(),          num(rep.beta_hat),          num(rep.sandwich_se),
                   num(lo),                    num(hi),                    std::to_string(rep.n),
                   std::to_string(rep.n_complete), std::to_string(rep.n_clipped_weights)};
  with_output(a.output, [&](std::ostream& out) { print_table(out, header, {row}, a.format == "csv"); });
  return 0;
}

int run_experiment_cmd(const ExperimentArgs& a, int threads) {
  const auto setting = nsc::parse_setting(a.setting);
  const auto misspec = nsc::parse_misspec(a.misspec);
  nsc::ExperimentOptions opt;
  opt.compute_se = a.se;
  opt.threads = threads;
  const auto result = nsc::run_experiment(setting, a.n, a.trials, a.seed, misspec, opt);

  with_output(a.output, [&](std::ostream& out) {
    if (a.format == "csv") {
      nsc::write_summary_csv(out, result);
      return;
    }
    const Row header = {"estimator", "truth", "mean", "bias", "percent_bias", "mse", "variance", "mc_se",
                        "completed", "failed"};
    std::vector<Row> rows;
    for (const auto& s : result.summaries) {
      rows.push_back({s.estimator, num(result.truth), num(s.mean), num(s.bias), num(s.percent_bias), num(s.mse),
                      num(s.variance), num(s.mc_se), std::to_string(s.completed), std::to_string(s.failed)});
    }
    print_table(out, header, rows, false);
  });
  if (!a.trials_output.empty()) {
    with_output(a.trials_output, [&](std::ostream& out) { nsc::write_trials_csv(out, result); });
  }
  if (result.failure_rate_exceeded) {
    std::cerr << "warning: more than 5% of AIPW trials failed\n";
  }
  return 0;
}

int run_oracle(const OracleArgs& a) {
  nsc::OracleSuiteOptions opt;
  opt.seed = a.seed;
  opt.nsc_laws = a.laws;
  opt.self_censoring_laws = a.controls;
  const auto checks = nsc::run_oracle_suite(opt);
  std::vector<Row> rows;
  bool ok = true;
  for (const auto& c : checks) {
    std::ostringstream value, threshold;
    value << std::scientific << std::setprecision(3) << c.value;
    threshold << std::scientific << std::setprecision(0) << c.threshold;
    rows.push_back({c.name, value.str(), std::string(c.must_exceed ? ">" : "<=") + " " + threshold.str(),
                    c.pass ? "PASS" : "FAIL"});
    ok = ok && c.pass;
  }
  print_table(std::cout, {"check", "max_error", "threshold", "result"}, rows, a.format == "csv");
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semiparametric AIPW estimation under no self-censoring"};
  app.require_subcommand(1);
  int threads = nsc::default_threads();
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Draw a dataset from a simulation setting");
  simulate->add_option("--setting", sim.setting, "gauss1|gauss2|binary1|binary2")->required();
  simulate->add_option("--n", sim.n, "Sample size")->required()->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed, "Random seed")->required();
  simulate->add_option("--output,-o", sim.output, "Output CSV (default stdout)");
  simulate->add_flag("--full", sim.full, "Write the complete data instead of the masked data");
  simulate->add_option("--missing", sim.missing, "Missing-value token");

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Estimate a functional from a CSV dataset");
  estimate->add_option("--input,-i", est.input, "Input CSV with columns L1..LK, X1..Xp")->required();
  estimate->add_option("--functional", est.functional, "mean:Lj | product | product:L1L2 | cell:101");
  estimate->add_option("--estimator", est.estimator, "aipw|ipw|cc");
  estimate->add_option("--family", est.family, "Nuisance family: linear|saturated");
  estimate->add_option("--reference", est.reference, "Odds-ratio reference point l0, comma separated");
  estimate->add_option("--bootstrap", est.bootstrap, "Bootstrap replicates (0 = none)")->check(CLI::NonNegativeNumber);
  auto* est_seed = estimate->add_option("--seed", est.seed, "Random seed for the bootstrap");
  estimate->add_option("--clip", est.clip, "Floor on the complete-case probability")->check(CLI::PositiveNumber);
  estimate->add_option("--alpha", est.alpha, "Bootstrap interval level")->check(CLI::Range(0.0, 1.0));
  estimate->add_option("--format", est.format, "csv|text")->check(CLI::IsMember({"csv", "text"}));
  estimate->add_option("--missing", est.missing, "Missing-value token");
  estimate->add_option("--output,-o", est.output, "Report path (default stdout)");

  ExperimentArgs exp;
  auto* experiment = app.add_subcommand("experiment", "Run a Monte Carlo simulation study");
  experiment->add_option("--setting", exp.setting, "gauss1|gauss2|binary1|binary2")->required();
  experiment->add_option("--n", exp.n, "Sample size per trial")->check(CLI::PositiveNumber);
  experiment->add_option("--trials", exp.trials, "Number of trials")->check(CLI::PositiveNumber);
  experiment->add_option("--seed", exp.seed, "Random seed")->required();
  experiment->add_option("--misspec", exp.misspec, "none|outcome|missingness|both");
  experiment->add_flag("--se", exp.se, "Compute sandwich standard errors");
  experiment->add_option("--format", exp.format, "csv|text")->check(CLI::IsMember({"csv", "text"}));
  experiment->add_option("--output,-o", exp.output, "Summary path (default stdout)");
  experiment->add_option("--trials-output", exp.trials_output, "Per-trial CSV path");

  OracleArgs orc;
  auto* oracle = app.add_subcommand("oracle-check", "Run the enumeration oracle suite");
  oracle->add_flag("--all", orc.all, "Run every check");
  oracle->add_option("--seed", orc.seed, "Seed for the random laws");
  oracle->add_option("--laws", orc.laws, "Random NSC laws")->check(CLI::PositiveNumber);
  oracle->add_option("--controls", orc.controls, "Self-censoring negative controls")->check(CLI::PositiveNumber);
  oracle->add_option("--format", orc.format, "csv|text")->check(CLI::IsMember({"csv", "text"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*simulate) return run_simulate(sim);
    if (*estimate) {
      if (est.bootstrap > 0 && est_seed->count() == 0) throw std::invalid_argument("--bootstrap needs --seed");
      return run_estimate(est, threads);
    }
    if (*experiment) return run_experiment_cmd(exp, threads);
    if (*oracle) return run_oracle(orc);
  } catch (const nsc::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const nsc::CsvError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
