#include "autonorm/scenario.hpp"

#include <fstream>

namespace autonorm {

using nlohmann::json;

namespace {

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.is_object() || !obj.contains(key) || obj.at(key).is_null()) return fallback;
  return obj.at(key).get<T>();
}

}  // namespace

ScenarioConfig parse_scenario(const json& doc) {
  if (!doc.is_object()) throw ConfigError("scenario must be a JSON object");
  ScenarioConfig c;
  try {
    c.n = get_or<int>(doc, "n", 1);
    if (c.n < 1 || c.n > kMaxHalfDim) throw ConfigError("n must lie in [1, " + std::to_string(kMaxHalfDim) + "]");
    if (!doc.contains("factors") || !doc.at("factors").is_array()) throw ConfigError("'factors' must be a list of strings");
    c.factors = doc.at("factors").get<std::vector<std::string>>();
    if (c.factors.empty()) throw ConfigError("'factors' is empty; need at least one autonomous factor");

    const json disp = doc.value("displacement", json::object());
    c.plan.n = c.n;
    if (disp.contains("L") && !disp.at("L").is_null()) c.plan.L = disp.at("L").get<double>();
    if (disp.contains("L_over_r") && !disp.at("L_over_r").is_null()) c.plan.L_over_r = disp.at("L_over_r").get<double>();
    c.plan.eps = get_or<double>(disp, "eps", 0.5);
    c.plan.allow_short_translation = get_or<bool>(disp, "allow_L_leq_2r", false);

    const json integ = doc.value("integrator", json::object());
    c.integrator.scheme = scheme_from_string(get_or<std::string>(integ, "scheme", "rk4"));
    c.integrator.step = get_or<double>(integ, "step", 1e-3);
    c.integrator.max_steps = get_or<std::int64_t>(integ, "max_steps", 10'000'000);
    if (!(c.integrator.step > 0.0)) throw ConfigError("integrator.step must be positive");
    if (c.integrator.max_steps < 1) throw ConfigError("integrator.max_steps must be positive");

    const json ver = doc.value("verification", json::object());
    c.verification.samples = get_or<int>(ver, "samples", 200);
    c.verification.seed = get_or<std::uint64_t>(ver, "seed", 1);
    c.verification.tolerance = get_or<double>(ver, "tolerance", 1e-3);
    c.verification.glued_samples = get_or<int>(ver, "glued_samples", 50);
    c.verification.glued_tolerance = get_or<double>(ver, "glued_tolerance", 1e-4);
    c.verification.deep_check_points = get_or<int>(ver, "deep_check_points", 0);
    if (c.verification.samples < 1) throw ConfigError("verification.samples must be at least 1");
    if (c.verification.glued_samples < 0) throw ConfigError("verification.glued_samples must be non-negative");

    const json cal = doc.value("calabi", json::object());
    c.calabi_spacing = get_or<double>(cal, "grid_spacing", 0.0);
    c.calabi_balance = get_or<bool>(cal, "balance", false);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed scenario: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_scenario(doc);
}

std::vector<Expr> parse_factors(const ScenarioConfig& config) {
  std::vector<Expr> out;
  for (std::size_t i = 0; i < config.factors.size(); ++i) {
    try {
      out.push_back(parse(config.factors[i], config.n));
    } catch (const ParseError& e) {
      throw ConfigError("factor " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

FactorizationPlan build_plan(const ScenarioConfig& config) {
  const std::vector<Expr> factors = parse_factors(config);
  FactorizationPlan plan = plan_factorization(factors, config.plan);
  if (config.calabi_balance) {
    CalabiOptions opts;
    opts.spacing = config.calabi_spacing;
    plan = balance_calabi(plan, opts);
  }
  return plan;
}

json box_json(const Box& b) {
  if (b.isEmpty()) return "empty";
  json axes = json::array();
  for (Eigen::Index k = 0; k < b.dim(); ++k) axes.push_back({b.min()[k], b.max()[k]});
  return axes;
}

json point_json(const PhasePoint& z) {
  json out = json::array();
  for (Eigen::Index k = 0; k < z.size(); ++k) out.push_back(z[k]);
  return out;
}

json plan_json(const FactorizationPlan& plan) {
  json out;
  out["n"] = plan.spec.n;
  out["m"] = plan.m();
  out["r"] = plan.spec.r;
  out["L"] = plan.spec.L;
  out["eps"] = plan.spec.eps;
  out["tube"] = box_json(plan.spec.tube());
  json inputs = json::array();
  for (int i = 0; i < plan.m(); ++i) {
    inputs.push_back({{"hamiltonian", print(plan.inputs[i])},
                      {"support", box_json(plan.input_supports[i])},
                      {"glued_support", box_json(plan.glued_supports[i])}});
  }
  out["inputs"] = inputs;
  out["displacing_hamiltonian"] = print(plan.H);
  out["g_letters"] = plan.g.size();
  json factors = json::array();
  for (const AutonomousFactor* f : {&plan.A1, &plan.A2, &plan.A3}) {
    factors.push_back({{"name", f->name},
                       {"description", f->description},
                       {"hamiltonian", f->hamiltonian ? json(print(*f->hamiltonian)) : json(nullptr)},
                       {"letters", f->word.size()}});
  }
  out["factors"] = factors;
  return out;
}

json displacement_json(const DisplacementReport& rep) {
  json out;
  out["samples"] = rep.samples;
  out["powers"] = rep.powers;
  out["max_translation_error"] = rep.max_translation_error;
  out["max_error_h1"] = rep.max_error_h1;
  out["min_separation"] = rep.min_separation;
  out["separation_bound"] = rep.separation_bound;
  out["tolerance"] = rep.tolerance;
  out["analytic_disjoint"] = rep.analytic_disjoint;
  out["sampled_disjoint"] = rep.sampled_disjoint;
  out["overlap_detected"] = rep.overlap_witness.has_value();
  out["overlap_witness"] = rep.overlap_witness ? point_json(*rep.overlap_witness) : json(nullptr);
  out["pass"] = rep.pass;
  return out;
}

json composition_json(const FactorizationReport& rep) {
  json out;
  out["samples"] = rep.samples;
  out["max_error"] = rep.max_error;
  out["mean_error"] = rep.mean_error;
  out["tolerance"] = rep.tolerance;
  out["h_evaluations"] = rep.h_evaluations;
  out["tube_violations"] = rep.tube_violations;
  out["pass"] = rep.composition_pass;
  out["glued"] = {{"samples", rep.glued_samples},
                  {"max_error", rep.glued_max_error},
                  {"pullback_convention_max_error", rep.glued_alternative_max_error},
                  {"tolerance", rep.glued_tolerance},
                  {"pass", rep.glued_pass},
                  {"pullback_convention_rejected", rep.alternative_rejected}};
  out["a1_witness_drift"] = rep.a1_witness_drift;
  out["symbolic_coherence"] = rep.symbolic_coherence;
  out["identity_holds"] = rep.identity_holds;
  out["deep_check"] = {{"points", rep.deep_check_points},
                       {"max_error", rep.deep_check_max_error ? json(*rep.deep_check_max_error) : json(nullptr)}};
  out["error_budget"] =
      "per-flow RK4 error x O(m^2) letter applications x Lipschitz amplification of the composed flows";
  out["all_checks_pass"] = rep.pass;
  return out;
}

json calabi_json(const CalabiPlanReport& rep) {
  auto value_json = [](const CalabiValue& v) {
    return json{{"value", v.value}, {"spacing", v.spacing}, {"refined_value", v.refined_value},
                {"refinement_delta", v.refinement_delta}};
  };
  json out;
  out["spacing"] = rep.spacing;
  json inputs = json::array();
  for (const CalabiValue& v : rep.inputs) inputs.push_back(value_json(v));
  out["inputs"] = inputs;
  out["inputs_sum"] = rep.inputs_sum;
  out["glued"] = value_json(rep.glued);
  out["displacing"] = value_json(rep.displacing);
  out["translation_error"] = rep.translation_error;
  out["translation_pass"] = rep.translation_pass;
  out["coarse_spacing"] = rep.coarse_spacing;
  out["a1_change_of_variables"] = rep.a1_measured;
  out["change_of_variables_error"] = rep.change_of_variables_error;
  out["change_of_variables_pass"] = rep.change_of_variables_pass;
  out["factors"] = {{"A1", rep.factor[0]}, {"A2", rep.factor[1]}, {"A3", rep.factor[2]}};
  out["a1_plus_a2"] = rep.a1_plus_a2;
  out["pass"] = rep.pass;
  return out;
}

json environment_json(const ScenarioConfig& config) {
  json out;
  out["scheme"] = to_string(config.integrator.scheme);
  out["step"] = config.integrator.step;
  out["max_steps"] = config.integrator.max_steps;
  out["seed"] = config.verification.seed;
  out["samples"] = config.verification.samples;
  out["tolerance"] = config.verification.tolerance;
  out["calabi_balance"] = config.calabi_balance;
#if defined(__clang__)
  out["compiler"] = "clang " __clang_version__;
#elif defined(__GNUC__)
  out["compiler"] = "gcc " __VERSION__;
#endif
  out["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                 std::to_string(EIGEN_MINOR_VERSION);
  return out;
}

VerifyOutcome run_verify(const ScenarioConfig& config) {
  const FactorizationPlan plan = build_plan(config);
  const DisplacementReport disp =
      verify_displacement(plan.h, plan.spec, config.verification.samples, config.integrator, config.verification.tolerance);
  const FactorizationReport comp = verify_factorization(plan, config.verification, config.integrator);
  VerifyOutcome out;
  out.report["plan"] = plan_json(plan);
  out.report["displacement"] = displacement_json(disp);
  out.report["composition"] = composition_json(comp);
  out.report["calabi"] = nullptr;
  if (config.calabi_balance) {
    CalabiOptions opts;
    opts.spacing = config.calabi_spacing;
    out.report["calabi"] = calabi_json(calabi_of_plan(plan, opts, config.integrator));
  }
  out.report["environment"] = environment_json(config);
  out.composition_pass = comp.composition_pass;
  out.displacement_pass = disp.pass;
  return out;
}

CalabiOutcome run_calabi(const ScenarioConfig& config) {
  const FactorizationPlan plan = build_plan(config);
  CalabiOptions opts;
  opts.spacing = config.calabi_spacing;
  const CalabiPlanReport rep = calabi_of_plan(plan, opts, config.integrator);
  CalabiOutcome out;
  out.report["plan"] = plan_json(plan);
  out.report["calabi"] = calabi_json(rep);
  out.pass = rep.pass;
  if (config.calabi_balance) {
    bool trivial = true;
    for (double v : rep.factor) trivial = trivial && std::abs(v) <= kBalancedFactorTolerance;
    out.report["calabi"]["balanced"] = true;
    out.report["calabi"]["factors_trivial"] = trivial;
    out.pass = out.pass && trivial;
  }
  out.report["environment"] = environment_json(config);
  return out;
}

}  // namespace autonorm
