#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "sparsestage/error.hpp"
#include "sparsestage/model.hpp"
#include "sparsestage/multistage.hpp"
#include "sparsestage/theory.hpp"

namespace sparsestage {

/// Dataset fixture: design, observations and (optionally) the generating target.
struct Fixture {
  DesignMatrix x;
  Observations y;
  std::optional<SparseTarget> target;
};

inline nlohmann::ordered_json fixture_json(const DesignMatrix& x, const Observations& y,
                                           const SparseTarget* target = nullptr) {
  require(y.n() == x.n(), ErrorCode::invalid_dimension, "fixture: observations length != n");
  nlohmann::ordered_json j;
  j["n"] = x.n();
  j["p"] = x.p();
  auto xs = nlohmann::ordered_json::array();
  for (Index i = 0; i < x.n(); ++i)
    for (Index k = 0; k < x.p(); ++k) xs.push_back(x.matrix()(i, k));
  j["x"] = std::move(xs);
  j["y"] = std::vector<double>(y.y.data(), y.y.data() + y.y.size());
  if (target) {
    const Vector& w = target->coefficients();
    j["wbar"] = std::vector<double>(w.data(), w.data() + w.size());
  }
  return j;
}

inline Fixture fixture_from_json(const nlohmann::json& j) {
  try {
    const Index n = j.at("n").get<Index>();
    const Index p = j.at("p").get<Index>();
    require(n >= 1 && p >= 1, ErrorCode::invalid_dimension, "fixture needs n >= 1, p >= 1");
    const auto xs = j.at("x").get<std::vector<double>>();
    require(static_cast<Index>(xs.size()) == n * p, ErrorCode::invalid_dimension,
            "fixture 'x' must hold n*p row-major values");
    Matrix m(n, p);
    for (Index i = 0; i < n; ++i)
      for (Index k = 0; k < p; ++k) m(i, k) = xs[static_cast<std::size_t>(i * p + k)];
    const auto ys = j.at("y").get<std::vector<double>>();
    require(static_cast<Index>(ys.size()) == n, ErrorCode::invalid_dimension,
            "fixture 'y' must have length n");
    Observations obs{Eigen::Map<const Vector>(ys.data(), n), std::nullopt};
    std::optional<SparseTarget> target;
    if (j.contains("wbar")) {
      const auto ws = j.at("wbar").get<std::vector<double>>();
      require(static_cast<Index>(ws.size()) == p, ErrorCode::invalid_dimension,
              "fixture 'wbar' must have length p");
      target.emplace(Eigen::Map<const Vector>(ws.data(), p));
    }
    return Fixture{DesignMatrix::from_normalized(std::move(m)), std::move(obs), std::move(target)};
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::invalid_argument, std::string("fixture: ") + e.what());
  }
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::io_error, "cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::invalid_argument, "'" + path + "' is not valid JSON: " + e.what());
  }
}

inline nlohmann::ordered_json multistage_json(const MultiStageResult& r, const MultiStageConfig& cfg) {
  auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::ordered_json j;
  j["lambda"] = cfg.lambda;
  j["theta"] = cfg.theta;
  j["stages_run"] = r.stages_run;
  j["fixed_point_reached"] = r.fixed_point_reached;
  auto stages = nlohmann::ordered_json::array();
  for (const auto& t : r.traces) {
    std::vector<int> mask(static_cast<std::size_t>(t.weights_in.size()));
    for (Index k = 0; k < t.weights_in.size(); ++k) mask[static_cast<std::size_t>(k)] = t.weights_in[k] != 0.0;
    stages.push_back({{"stage", t.stage},
                      {"penalized_mask", mask},
                      {"coefficients", vec(t.solution.coefficients)},
                      {"support", t.support},
                      {"capped_objective", t.capped_objective},
                      {"joint_objective", t.joint_objective},
                      {"kkt_residual", t.solution.kkt_residual},
                      {"sweeps", t.solution.sweeps_used},
                      {"converged", t.solution.converged}});
  }
  j["stages"] = std::move(stages);
  j["final"] = vec(r.final);
  return j;
}

inline TheoryInputs theory_inputs_from_json(const nlohmann::json& j) {
  TheoryInputs in;
  try {
    in.sigma = j.value("sigma", in.sigma);
    in.n = j.value("n", in.n);
    in.p = j.value("p", in.p);
    in.kbar = j.value("kbar", in.kbar);
    in.eta = j.value("eta", in.eta);
    in.s = j.value("s", in.s);
    in.rho_plus_1 = j.value("rho_plus_1", in.rho_plus_1);
    in.rho_minus_a = j.value("rho_minus_a", in.rho_minus_a);
    in.rho_plus_s = j.value("rho_plus_s", in.rho_plus_s);
    in.rho_minus_b = j.value("rho_minus_b", in.rho_minus_b);
    in.rho_plus_kbar = j.value("rho_plus_kbar", in.rho_plus_kbar);
    in.rho_minus_c = j.value("rho_minus_c", in.rho_minus_c);
    in.lambda = j.value("lambda", in.lambda);
    in.theta = j.value("theta", in.theta);
    in.k_theta = j.value("k_theta", in.k_theta);
    if (j.contains("ell") && !j.at("ell").is_null()) in.ell = j.at("ell").get<long>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::invalid_argument, std::string("theory inputs: ") + e.what());
  }
  return in;
}

}  // namespace sparsestage
