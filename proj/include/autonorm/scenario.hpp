#pragma once

#include "autonorm/calabi.hpp"
#include "autonorm/displacement.hpp"
#include "autonorm/factorization.hpp"

#include "json.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace autonorm {

/// Malformed or inconsistent scenario file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScenarioConfig {
  int n = 1;
  std::vector<std::string> factors;
  PlanOptions plan;
  IntegratorConfig integrator;
  VerifyOptions verification;
  double calabi_spacing = 0.0;  ///< 0 selects the default (r + 1) / 256
  bool calabi_balance = false;
};

ScenarioConfig parse_scenario(const nlohmann::json& doc);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Parse the factor strings; ParseError is rethrown as ConfigError.
std::vector<Expr> parse_factors(const ScenarioConfig& config);

/// Plan for the scenario, balanced when requested.
FactorizationPlan build_plan(const ScenarioConfig& config);

nlohmann::json box_json(const Box& b);
nlohmann::json point_json(const PhasePoint& z);
nlohmann::json plan_json(const FactorizationPlan& plan);
nlohmann::json displacement_json(const DisplacementReport& rep);
nlohmann::json composition_json(const FactorizationReport& rep);
nlohmann::json calabi_json(const CalabiPlanReport& rep);
nlohmann::json environment_json(const ScenarioConfig& config);

/// The full `verify` report. Deterministic for a fixed config.
struct VerifyOutcome {
  nlohmann::json report;
  bool composition_pass = false;
  bool displacement_pass = false;
};

VerifyOutcome run_verify(const ScenarioConfig& config);

struct CalabiOutcome {
  nlohmann::json report;
  bool pass = false;
};

/// Calabi report; with balancing, also requires |Cal(A_k)| <= 1e-5 for each k.
CalabiOutcome run_calabi(const ScenarioConfig& config);

inline constexpr double kBalancedFactorTolerance = 1e-5;

}  // namespace autonorm
