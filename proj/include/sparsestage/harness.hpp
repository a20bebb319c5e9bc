#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "sparsestage/error.hpp"
#include "sparsestage/model.hpp"
#include "sparsestage/multistage.hpp"
#include "sparsestage/rng.hpp"
#include "sparsestage/solver.hpp"

namespace sparsestage {

inline constexpr const char* kVersion = "0.1.0";

/// Monte-Carlo recovery study. Defaults reproduce the n=100, p=250, kbar=30 design.
struct ExperimentConfig {
  Index n = 100;
  Index p = 250;
  Index kbar = 30;
  double sigma = 1.0;
  NoiseKind noise_kind = NoiseKind::gaussian;
  double coef_low = 1.0;
  double coef_high = 10.0;
  bool random_sign = false;
  std::vector<double> tau_grid{1, 2, 4, 8, 16, 32};
  std::vector<double> mu_grid{0.5, 1, 2, 4};
  std::vector<long> stages_recorded{1, 2, 4, 8};
  long replications = 100;
  Seed master_seed = 0;
  // lambda = tau * lambda_unit; defaults to sigma * sqrt(ln p / n). Needed when sigma = 0.
  std::optional<double> lambda_unit;
  // Skip stages past a reweighting fixed point; later recorded stages reuse the last solution.
  bool early_stop = true;
  SolverConfig solver;

  double unit() const {
    return lambda_unit ? *lambda_unit
                       : sigma * std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(n));
  }
  double lambda_for(double tau) const { return tau * unit(); }
  long max_stage() const { return stages_recorded.empty() ? 1 : stages_recorded.back(); }

  void validate() const {
    require(n >= 1 && p >= 1, ErrorCode::invalid_dimension, "n and p must be >= 1");
    require(kbar >= 1 && kbar <= p, ErrorCode::invalid_sparsity, "kbar must lie in [1, p]");
    require(replications >= 1, ErrorCode::invalid_argument, "replications must be >= 1");
    require(!tau_grid.empty() && !mu_grid.empty() && !stages_recorded.empty(),
            ErrorCode::invalid_argument, "tau, mu and stage grids must be nonempty");
    require(std::is_sorted(stages_recorded.begin(), stages_recorded.end()) &&
                std::adjacent_find(stages_recorded.begin(), stages_recorded.end()) ==
                    stages_recorded.end() &&
                stages_recorded.front() >= 1,
            ErrorCode::invalid_argument, "stages_recorded must be strictly ascending and >= 1");
    require(sigma >= 0.0, ErrorCode::invalid_argument, "sigma must be >= 0");
    require(unit() > 0.0, ErrorCode::invalid_argument,
            "lambda unit is zero; set lambda_unit when sigma = 0");
    for (double t : tau_grid) require(t > 0.0, ErrorCode::invalid_argument, "tau must be > 0");
    for (double m : mu_grid) require(m > 0.0, ErrorCode::invalid_argument, "mu must be > 0");
    solver.validate();
  }
};

struct RecoveryRow {
  double mu = 0.0;
  double tau = 0.0;
  double lambda = 0.0;
  long stage = 1;
  long successes = 0;
  long replications = 1;

  double recovery_probability() const {
    return static_cast<double>(successes) / static_cast<double>(replications);
  }
};

struct RecoveryTable {
  std::vector<RecoveryRow> rows;
  ExperimentConfig config;
  std::string version = kVersion;

  const RecoveryRow* find(double mu, double tau, long stage) const {
    for (const auto& r : rows)
      if (r.mu == mu && r.tau == tau && r.stage == stage) return &r;
    return nullptr;
  }
};

/// supp(w_hat) == supp(target), compared without tolerance.
inline bool exact_recovery(const Vector& w_hat, const SparseTarget& target) {
  require(w_hat.size() == target.p(), ErrorCode::invalid_dimension,
          "exact_recovery: coefficient length != target length");
  const Vector& w = target.coefficients();
  for (Index j = 0; j < w.size(); ++j)
    if ((w_hat[j] != 0.0) != (w[j] != 0.0)) return false;
  return true;
}

/// One simulated dataset. Streams derive from (master_seed, rep_index) only.
struct Replicate {
  DesignMatrix x;
  SparseTarget target;
  Observations y;
};

enum class StreamPurpose : std::uint64_t { design = 0, target = 1, noise = 2 };

inline Seed replicate_seed(Seed master, long rep, StreamPurpose purpose) {
  return derive_seed(master, {static_cast<std::uint64_t>(rep), static_cast<std::uint64_t>(purpose)});
}

inline Replicate make_replicate(const ExperimentConfig& cfg, long rep) {
  const Seed sd = replicate_seed(cfg.master_seed, rep, StreamPurpose::design);
  const Seed st = replicate_seed(cfg.master_seed, rep, StreamPurpose::target);
  const Seed sn = replicate_seed(cfg.master_seed, rep, StreamPurpose::noise);
  DesignMatrix x = generate_design(cfg.n, cfg.p, sd);
  SparseTarget target = generate_target(cfg.p, cfg.kbar, cfg.coef_low, cfg.coef_high, st, cfg.random_sign);
  const NoiseSpec noise = cfg.noise_kind == NoiseKind::gaussian ? NoiseSpec::gaussian(cfg.sigma)
                                                                : NoiseSpec::uniform_width(2.0 * cfg.sigma);
  Observations y = generate_observations(x, target, noise, sn);
  y.provenance->design_seed = sd;
  y.provenance->target_seed = st;
  return Replicate{std::move(x), std::move(target), std::move(y)};
}

/// Recovery flag at every recorded stage for one (tau, mu) cell on a prepared replicate.
inline std::vector<bool> recovery_flags(const ExperimentConfig& cfg, const QuadraticModel& model,
                                        const SparseTarget& target, double tau, double mu) {
  MultiStageConfig ms;
  ms.lambda = cfg.lambda_for(tau);
  ms.theta = mu * ms.lambda;
  ms.max_stages = cfg.max_stage();
  ms.early_stop = cfg.early_stop;
  const MultiStageResult res = run_multistage(model, ms, cfg.solver);

  std::vector<bool> flags;
  flags.reserve(cfg.stages_recorded.size());
  for (long stage : cfg.stages_recorded) {
    const auto idx = static_cast<std::size_t>(std::min(stage, res.stages_run) - 1);
    flags.push_back(exact_recovery(res.traces[idx].solution.coefficients, target));
  }
  return flags;
}

inline std::string cell_label(double tau, double mu, long rep) {
  std::ostringstream os;
  os << "tau=" << tau << " mu=" << mu << " rep=" << rep;
  return os.str();
}

inline std::vector<bool> run_replication(const ExperimentConfig& cfg, double tau, double mu,
                                         long rep_index) {
  cfg.validate();
  const Replicate data = make_replicate(cfg, rep_index);
  try {
    return recovery_flags(cfg, QuadraticModel(data.x, data.y), data.target, tau, mu);
  } catch (const Error& e) {
    throw Error(e.code(), cell_label(tau, mu, rep_index) + ": " + e.what());
  }
}

/// Full (mu, tau, stage) grid. Each replicate dataset is shared by every cell.
/// Output is independent of `workers`: flags are stored per replication and
/// reduced as integer counts.
inline RecoveryTable run_grid(const ExperimentConfig& cfg, unsigned workers = 1) {
  cfg.validate();
  const std::size_t n_tau = cfg.tau_grid.size();
  const std::size_t n_mu = cfg.mu_grid.size();
  const std::size_t n_stage = cfg.stages_recorded.size();
  const std::size_t cells = n_mu * n_tau;
  const auto reps = static_cast<std::size_t>(cfg.replications);

  // flags[rep][(mu * n_tau + tau) * n_stage + stage]
  std::vector<std::vector<unsigned char>> flags(reps, std::vector<unsigned char>(cells * n_stage, 0));
  std::vector<std::string> failures;
  std::mutex failure_mutex;
  ErrorCode first_code = ErrorCode::numeric_failure;
  std::atomic<std::size_t> next_rep{0};

  auto work = [&] {
    for (std::size_t r = next_rep++; r < reps; r = next_rep++) {
      const long rep = static_cast<long>(r);
      try {
        const Replicate data = make_replicate(cfg, rep);
        const QuadraticModel model(data.x, data.y);
        for (std::size_t m = 0; m < n_mu; ++m) {
          for (std::size_t t = 0; t < n_tau; ++t) {
            try {
              const auto f = recovery_flags(cfg, model, data.target, cfg.tau_grid[t], cfg.mu_grid[m]);
              for (std::size_t s = 0; s < n_stage; ++s) flags[r][(m * n_tau + t) * n_stage + s] = f[s];
            } catch (const Error& e) {
              std::lock_guard lock(failure_mutex);
              if (failures.empty()) first_code = e.code();
              failures.push_back(cell_label(cfg.tau_grid[t], cfg.mu_grid[m], rep) + ": " + e.what());
            }
          }
        }
      } catch (const Error& e) {
        std::lock_guard lock(failure_mutex);
        if (failures.empty()) first_code = e.code();
        failures.push_back("rep=" + std::to_string(rep) + ": " + e.what());
      }
    }
  };

  workers = std::max(1u, workers);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  if (!failures.empty()) {
    std::sort(failures.begin(), failures.end());
    std::string summary = std::to_string(failures.size()) + " failed cell(s):";
    for (const auto& f : failures) summary += "\n  " + f;
    throw Error(first_code, summary);
  }

  RecoveryTable table;
  table.config = cfg;
  for (std::size_t m = 0; m < n_mu; ++m) {
    for (std::size_t t = 0; t < n_tau; ++t) {
      for (std::size_t s = 0; s < n_stage; ++s) {
        RecoveryRow row;
        row.mu = cfg.mu_grid[m];
        row.tau = cfg.tau_grid[t];
        row.lambda = cfg.lambda_for(row.tau);
        row.stage = cfg.stages_recorded[s];
        row.replications = cfg.replications;
        for (std::size_t r = 0; r < reps; ++r) row.successes += flags[r][(m * n_tau + t) * n_stage + s];
        table.rows.push_back(row);
      }
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Table output

enum class TableFormat { csv, json };

namespace detail {

/// Shortest representation that parses back to the same double.
inline std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string six_digits(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  require(res.ec == std::errc() && res.ptr == s.data() + s.size(), ErrorCode::invalid_argument,
          "bad number '" + std::string(s) + "'");
  return v;
}

inline long parse_long(std::string_view s) {
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  require(res.ec == std::errc() && res.ptr == s.data() + s.size(), ErrorCode::invalid_argument,
          "bad integer '" + std::string(s) + "'");
  return v;
}

}  // namespace detail

inline constexpr std::string_view kCsvHeader = "mu,tau,lambda,stage,recovery_prob,reps";

inline std::string table_csv(const RecoveryTable& table) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : table.rows) {
    out += detail::shortest(r.mu) + ',' + detail::shortest(r.tau) + ',' + detail::six_digits(r.lambda) +
           ',' + std::to_string(r.stage) + ',' + detail::shortest(r.recovery_probability()) + ',' +
           std::to_string(r.replications) + '\n';
  }
  return out;
}

/// Inverse of table_csv. Lambda comes back at its printed 6-digit precision.
inline std::vector<RecoveryRow> parse_table_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && line == kCsvHeader, ErrorCode::invalid_argument,
          "missing or unexpected CSV header");
  std::vector<RecoveryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest.remove_prefix(pos + 1))
      f.push_back(rest.substr(0, pos));
    f.push_back(rest);
    require(f.size() == 6, ErrorCode::invalid_argument, "CSV row needs 6 fields: " + line);
    RecoveryRow r;
    r.mu = detail::parse_double(f[0]);
    r.tau = detail::parse_double(f[1]);
    r.lambda = detail::parse_double(f[2]);
    r.stage = detail::parse_long(f[3]);
    r.replications = detail::parse_long(f[5]);
    r.successes = std::lround(detail::parse_double(f[4]) * static_cast<double>(r.replications));
    rows.push_back(r);
  }
  return rows;
}

inline nlohmann::ordered_json solver_config_json(const SolverConfig& s) {
  return {{"tol", s.tol}, {"max_sweeps", s.max_sweeps}, {"kkt_tol", s.kkt_tol}};
}

inline nlohmann::ordered_json experiment_config_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["n"] = c.n;
  j["p"] = c.p;
  j["kbar"] = c.kbar;
  j["sigma"] = c.sigma;
  j["noise"] = c.noise_kind == NoiseKind::gaussian ? "gaussian" : "uniform";
  j["coef_low"] = c.coef_low;
  j["coef_high"] = c.coef_high;
  j["random_sign"] = c.random_sign;
  j["tau_grid"] = c.tau_grid;
  j["mu_grid"] = c.mu_grid;
  j["stages_recorded"] = c.stages_recorded;
  j["replications"] = c.replications;
  j["master_seed"] = c.master_seed;
  if (c.lambda_unit) j["lambda_unit"] = *c.lambda_unit;
  j["early_stop"] = c.early_stop;
  j["solver"] = solver_config_json(c.solver);
  return j;
}

/// Parse a config document; absent fields keep their defaults.
inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    c.n = j.value("n", c.n);
    c.p = j.value("p", c.p);
    c.kbar = j.value("kbar", c.kbar);
    c.sigma = j.value("sigma", c.sigma);
    if (j.contains("noise")) {
      const auto kind = j.at("noise").get<std::string>();
      require(kind == "gaussian" || kind == "uniform", ErrorCode::invalid_argument,
              "noise must be 'gaussian' or 'uniform'");
      c.noise_kind = kind == "gaussian" ? NoiseKind::gaussian : NoiseKind::uniform_bounded;
    }
    c.coef_low = j.value("coef_low", c.coef_low);
    c.coef_high = j.value("coef_high", c.coef_high);
    c.random_sign = j.value("random_sign", c.random_sign);
    c.tau_grid = j.value("tau_grid", c.tau_grid);
    c.mu_grid = j.value("mu_grid", c.mu_grid);
    c.stages_recorded = j.value("stages_recorded", c.stages_recorded);
    c.replications = j.value("replications", c.replications);
    c.master_seed = j.value("master_seed", c.master_seed);
    if (j.contains("lambda_unit")) c.lambda_unit = j.at("lambda_unit").get<double>();
    c.early_stop = j.value("early_stop", c.early_stop);
    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      c.solver.tol = s.value("tol", c.solver.tol);
      c.solver.max_sweeps = s.value("max_sweeps", c.solver.max_sweeps);
      c.solver.kkt_tol = s.value("kkt_tol", c.solver.kkt_tol);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::invalid_argument, std::string("config: ") + e.what());
  }
  return c;
}

inline nlohmann::ordered_json table_json(const RecoveryTable& table) {
  nlohmann::ordered_json j;
  j["metadata"] = {{"version", table.version}, {"config", experiment_config_json(table.config)}};
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"mu", r.mu},
                    {"tau", r.tau},
                    {"lambda", r.lambda},
                    {"stage", r.stage},
                    {"recovery_prob", r.recovery_probability()},
                    {"successes", r.successes},
                    {"reps", r.replications}});
  }
  j["rows"] = std::move(rows);
  return j;
}

inline std::string render_table(const RecoveryTable& table, TableFormat format) {
  return format == TableFormat::csv ? table_csv(table) : table_json(table).dump(2) + "\n";
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::io_error, "cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  require(static_cast<bool>(out), ErrorCode::io_error, "write to '" + path + "' failed");
}

inline void emit_table(const RecoveryTable& table, TableFormat format, const std::string& path) {
  write_text_file(path, render_table(table, format));
}

}  // namespace sparsestage
