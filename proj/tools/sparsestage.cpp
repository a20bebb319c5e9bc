// sparsestage command-line front end.
//
//   sparsestage simulate --config cfg.json --seed 42 --out table.csv [--format csv|json] [--workers N]
//   sparsestage solve    --data fixture.json --lambda L --theta T --stages K --out result.json
//   sparsestage spectra  --data fixture.json --k K [--samples S --seed R]
//   sparsestage diagnose --inputs theory.json
//   sparsestage generate --n 100 --p 250 --kbar 30 --sigma 1 --seed 7 --out fixture.json
//
// Exit status: 0 success, 1 validation error, 2 numeric failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "sparsestage/sparsestage.hpp"

namespace {

using namespace sparsestage;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumeric = 2;

struct SimulateArgs {
  std::string config;
  std::optional<Seed> seed;
  std::string out;
  std::string format = "csv";
  unsigned workers = 1;
  std::optional<long> replications;
};

struct SolveArgs {
  std::string data;
  double lambda = 0.0;
  double theta = 0.0;
  long stages = 8;
  std::string out;
  bool early_stop = false;
  SolverConfig solver;
};

struct SpectraArgs {
  std::string data;
  Index k = 1;
  std::optional<std::uint64_t> samples;
  Seed seed = 0;
  std::uint64_t budget = kDefaultSubsetBudget;
  unsigned workers = 1;
  bool header = false;
};

struct DiagnoseArgs {
  std::string inputs;
  std::string data;
  double sigma = 1.0;
  double eta = 0.1;
  std::vector<Index> s_grid;
  double lambda = 0.0;
  double theta = 0.0;
  std::optional<long> ell;
  std::uint64_t samples = 20000;
  Seed seed = 0;
  std::uint64_t budget = kDefaultSubsetBudget;
};

struct GenerateArgs {
  Index n = 100;
  Index p = 250;
  Index kbar = 30;
  double sigma = 1.0;
  double low = 1.0;
  double high = 10.0;
  Seed seed = 0;
  std::string noise = "gaussian";
  std::string out;
};

int run_simulate(const SimulateArgs& a) {
  require(a.seed.has_value(), ErrorCode::invalid_argument, "--seed is required for simulate");
  ExperimentConfig cfg;
  if (!a.config.empty()) cfg = experiment_config_from_json(read_json_file(a.config));
  cfg.master_seed = *a.seed;
  if (a.replications) cfg.replications = *a.replications;
  const TableFormat fmt = a.format == "json" ? TableFormat::json : TableFormat::csv;
  const RecoveryTable table = run_grid(cfg, a.workers);
  if (a.out.empty() || a.out == "-")
    std::cout << render_table(table, fmt);
  else
    emit_table(table, fmt, a.out);
  return kExitOk;
}

int run_solve(const SolveArgs& a) {
  const Fixture fx = fixture_from_json(read_json_file(a.data));
  MultiStageConfig cfg;
  cfg.lambda = a.lambda;
  cfg.theta = a.theta;
  cfg.max_stages = a.stages;
  cfg.early_stop = a.early_stop;
  const MultiStageResult res = run_multistage(fx.x, fx.y, cfg, a.solver);
  auto doc = multistage_json(res, cfg);
  if (fx.target) {
    auto& stages = doc["stages"];
    for (std::size_t i = 0; i < res.traces.size(); ++i)
      stages[i]["exact_recovery"] = exact_recovery(res.traces[i].solution.coefficients, *fx.target);
  }
  const std::string text = doc.dump(2) + "\n";
  if (a.out.empty() || a.out == "-")
    std::cout << text;
  else
    write_text_file(a.out, text);
  return kExitOk;
}

int run_spectra(const SpectraArgs& a) {
  const Fixture fx = fixture_from_json(read_json_file(a.data));
  const SparseSpectrum s = a.samples ? sparse_eigen_sampled(fx.x, a.k, *a.samples, a.seed)
                                     : sparse_eigen_exact(fx.x, a.k, a.budget, a.workers);
  if (a.header) std::cout << "k,rho_minus,rho_plus,method,subsets_evaluated\n";
  std::printf("%lld,%.17g,%.17g,%s,%llu\n", static_cast<long long>(s.k), s.rho_minus, s.rho_plus,
              to_string(s.method), static_cast<unsigned long long>(s.subsets_evaluated));
  return kExitOk;
}

std::string fmt_opt(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", *v);
  return buf;
}

void print_report(const ConditionReport& r, bool header) {
  const auto& in = r.inputs;
  if (header) {
    std::printf("lambda            %.6g\n", in.lambda);
    std::printf("theta             %.6g\n", in.theta);
    std::printf("lambda_min (x7)   %.6g  %s\n", r.lambda_min_selection, r.lambda_ok ? "pass" : "FAIL");
    std::printf("lambda_min (x20)  %.6g  %s\n", r.lambda_min_estimation,
                in.lambda >= r.lambda_min_estimation ? "pass" : "FAIL");
    std::printf("\n%6s %12s %12s %12s %6s %12s %6s %6s %12s\n", "s", "sec_ratio", "sec_limit",
                "sec_margin", "sec", "theta_min", "theta", "L", "l2_bound");
  }
  std::printf("%6lld %12s %12s %12s %6s %12s %6s %6s %12s\n", static_cast<long long>(in.s),
              fmt_opt(r.sec ? std::optional(r.sec->ratio) : std::nullopt).c_str(),
              fmt_opt(r.sec ? std::optional(r.sec->limit) : std::nullopt).c_str(),
              fmt_opt(r.sec ? std::optional(r.sec->margin) : std::nullopt).c_str(),
              r.sec ? (r.sec->holds ? "pass" : "FAIL") : "n/a", fmt_opt(r.theta_min).c_str(),
              r.theta_min ? (r.theta_ok ? "pass" : "FAIL") : "n/a",
              r.stage_bound ? std::to_string(*r.stage_bound).c_str() : "n/a",
              fmt_opt(r.param_bound).c_str());
}

int run_diagnose(const DiagnoseArgs& a) {
  require(!a.inputs.empty() || !a.data.empty(), ErrorCode::invalid_argument,
          "diagnose needs --inputs or --data");
  if (!a.inputs.empty()) {
    const ConditionReport r = evaluate_conditions(theory_inputs_from_json(read_json_file(a.inputs)));
    print_report(r, true);
    for (const auto& note : r.notes) std::printf("note: %s\n", note.c_str());
    return kExitOk;
  }
  const Fixture fx = fixture_from_json(read_json_file(a.data));
  TheoryInputs base;
  base.sigma = a.sigma;
  base.eta = a.eta;
  base.lambda = a.lambda;
  base.theta = a.theta;
  base.ell = a.ell;
  if (fx.target) base.kbar = std::max<Index>(1, fx.target->kbar());
  const std::vector<Index> grid = a.s_grid.empty() ? default_s_grid(base.kbar) : a.s_grid;
  const DatasetDiagnosis d = diagnose_dataset(fx.x, fx.target, base, grid, {a.budget, a.samples, a.seed});

  std::printf("spectra (k, rho_minus, rho_plus, method, subsets)\n");
  for (const auto& [k, s] : d.spectra)
    std::printf("  %lld %.6g %.6g %s %llu\n", static_cast<long long>(k), s.rho_minus, s.rho_plus,
                to_string(s.method), static_cast<unsigned long long>(s.subsets_evaluated));
  if (d.min_coef_ok) std::printf("min |wbar_j| > 2 theta: %s\n", *d.min_coef_ok ? "pass" : "FAIL");
  std::printf("\n");
  for (std::size_t i = 0; i < d.per_s.size(); ++i) print_report(d.per_s[i], i == 0);
  std::printf("\nbest s = %lld\n", static_cast<long long>(d.per_s[d.best].inputs.s));
  for (const auto& r : d.per_s)
    for (const auto& note : r.notes)
      std::printf("note (s=%lld): %s\n", static_cast<long long>(r.inputs.s), note.c_str());
  return kExitOk;
}

int run_generate(const GenerateArgs& a) {
  require(a.noise == "gaussian" || a.noise == "uniform", ErrorCode::invalid_argument,
          "--noise must be gaussian or uniform");
  const DesignMatrix x = generate_design(a.n, a.p, derive_seed(a.seed, {0}));
  const SparseTarget t = generate_target(a.p, a.kbar, a.low, a.high, derive_seed(a.seed, {1}));
  const NoiseSpec noise = a.noise == "gaussian" ? NoiseSpec::gaussian(a.sigma) : NoiseSpec::uniform_width(2.0 * a.sigma);
  const Observations y = generate_observations(x, t, noise, derive_seed(a.seed, {2}));
  const std::string text = fixture_json(x, y, &t).dump() + "\n";
  if (a.out.empty() || a.out == "-")
    std::cout << text;
  else
    write_text_file(a.out, text);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-stage capped-L1 sparse regression toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo exact-support-recovery grid");
  simulate->add_option("--config", sim.config, "Experiment config JSON")->check(CLI::ExistingFile);
  simulate->add_option("--seed", sim.seed, "Master seed")->required();
  simulate->add_option("--out", sim.out, "Output path ('-' for stdout)");
  simulate->add_option("--format", sim.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  simulate->add_option("--workers", sim.workers, "Worker threads")->check(CLI::Range(1u, 1024u));
  simulate->add_option("--replications", sim.replications, "Override replications");

  SolveArgs sol;
  auto* solve = app.add_subcommand("solve", "Multi-stage capped-L1 fit of one dataset");
  solve->add_option("--data", sol.data, "Dataset fixture JSON")->required()->check(CLI::ExistingFile);
  solve->add_option("--lambda", sol.lambda, "Penalty level")->required();
  solve->add_option("--theta", sol.theta, "Capping threshold")->required();
  solve->add_option("--stages", sol.stages, "Maximum stages");
  solve->add_option("--out", sol.out, "Output path ('-' for stdout)");
  solve->add_flag("--early-stop", sol.early_stop, "Stop at the reweighting fixed point");
  solve->add_option("--tol", sol.solver.tol, "Coordinate change tolerance");
  solve->add_option("--max-sweeps", sol.solver.max_sweeps, "Sweep cap per stage");
  solve->add_option("--kkt-tol", sol.solver.kkt_tol, "KKT residual tolerance");

  SpectraArgs spec;
  auto* spectra = app.add_subcommand("spectra", "Sparse eigenvalues rho-(k), rho+(k)");
  spectra->add_option("--data", spec.data, "Dataset fixture JSON")->required()->check(CLI::ExistingFile);
  spectra->add_option("--k", spec.k, "Sparsity level")->required();
  spectra->add_option("--samples", spec.samples, "Sample random subsets instead of enumerating");
  spectra->add_option("--seed", spec.seed, "Sampling seed");
  spectra->add_option("--budget", spec.budget, "Max subsets for exact enumeration");
  spectra->add_option("--workers", spec.workers, "Worker threads for enumeration");
  spectra->add_flag("--header", spec.header, "Print a CSV header line");

  DiagnoseArgs diag;
  auto* diagnose = app.add_subcommand("diagnose", "Evaluate recovery conditions and bounds");
  auto* inputs_opt = diagnose->add_option("--inputs", diag.inputs, "TheoryInputs JSON")->check(CLI::ExistingFile);
  diagnose->add_option("--data", diag.data, "Dataset fixture JSON (alternative to --inputs)")
      ->check(CLI::ExistingFile)
      ->excludes(inputs_opt);
  diagnose->add_option("--sigma", diag.sigma, "Noise scale");
  diagnose->add_option("--eta", diag.eta, "Failure probability");
  diagnose->add_option("--s-grid", diag.s_grid, "Values of s to scan")->delimiter(',');
  diagnose->add_option("--lambda", diag.lambda, "Penalty level");
  diagnose->add_option("--theta", diag.theta, "Capping threshold");
  diagnose->add_option("--ell", diag.ell, "Stage index for the l2 bound");
  diagnose->add_option("--samples", diag.samples, "Samples for levels beyond the budget");
  diagnose->add_option("--seed", diag.seed, "Sampling seed");
  diagnose->add_option("--budget", diag.budget, "Max subsets for exact enumeration");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic dataset fixture");
  generate->add_option("--n", gen.n, "Samples");
  generate->add_option("--p", gen.p, "Features");
  generate->add_option("--kbar", gen.kbar, "Nonzeros in the target");
  generate->add_option("--sigma", gen.sigma, "Noise scale");
  generate->add_option("--low", gen.low, "Lower end of nonzero magnitudes");
  generate->add_option("--high", gen.high, "Upper end of nonzero magnitudes");
  generate->add_option("--noise", gen.noise, "gaussian or uniform");
  generate->add_option("--seed", gen.seed, "Seed")->required();
  generate->add_option("--out", gen.out, "Output path ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*simulate) return run_simulate(sim);
    if (*solve) return run_solve(sol);
    if (*spectra) return run_spectra(spec);
    if (*diagnose) return run_diagnose(diag);
    if (*generate) return run_generate(gen);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_numeric() ? kExitNumeric : kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
