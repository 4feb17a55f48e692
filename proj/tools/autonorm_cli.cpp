// Command-line driver: symbolic identity check, plan construction, numeric
// verification, Calabi reports and orbit export.

#include "autonorm/calabi.hpp"
#include "autonorm/displacement.hpp"
#include "autonorm/factorization.hpp"
#include "autonorm/scenario.hpp"
#include "autonorm/word_algebra.hpp"

#include "CLI11.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace autonorm;

enum ExitCode : int { kPass = 0, kVerificationFail = 1, kUsageError = 2, kConstructionError = 3 };

void write_json(const nlohmann::json& doc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << doc.dump(2) << '\n';
}

std::string number(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

PhasePoint parse_point(const std::string& text, int dim) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    if (first == std::string::npos) throw ConfigError("empty coordinate in --point");
    auto [ptr, ec] = std::from_chars(item.data() + first, item.data() + last + 1, v);
    if (ec != std::errc{} || ptr != item.data() + last + 1) throw ConfigError("bad coordinate '" + item + "' in --point");
    values.push_back(v);
  }
  if (static_cast<int>(values.size()) != dim) {
    throw ConfigError("--point needs " + std::to_string(dim) + " comma-separated values");
  }
  PhasePoint z(dim);
  for (int k = 0; k < dim; ++k) z[k] = values[k];
  return z;
}

int cmd_identity(int m, const std::string& trace_path) {
  if (m < 1) {
    std::cerr << "identity: --m must be at least 1\n";
    return kUsageError;
  }
  const IdentityResult id = verify_identity(m);
  const bool split = verify_commutator_split(m);
  std::cout << cancellation_summary(m);
  const auto [lo, hi] = id.trace.label_range();
  std::cout << "[g,h]*b = " << to_string(id.lhs) << '\n'
            << "f       = " << to_string(id.expected) << '\n'
            << "identity f = [g,h]*b: " << (id.holds ? "holds" : "FAILS") << '\n'
            << "commutator split [g,h] = (g h g^-1) h^-1: " << (split ? "holds" : "FAILS") << '\n'
            << "trace: " << id.trace.steps.size() << " steps, " << id.trace.letters() << " letter rewrites, labels "
            << lo << ".." << hi << '\n';
  if (!trace_path.empty()) {
    std::ofstream out(trace_path);
    if (!out) throw ConfigError("cannot write '" + trace_path + "'");
    out << serialize(id.trace);
  }
  return id.holds && split ? kPass : kVerificationFail;
}

int cmd_factorize(const std::string& config_path, const std::string& out_path) {
  const ScenarioConfig config = load_scenario(config_path);
  const FactorizationPlan plan = build_plan(config);
  nlohmann::json doc;
  doc["plan"] = plan_json(plan);
  doc["environment"] = environment_json(config);
  write_json(doc, out_path);
  std::cout << "plan: m=" << plan.m() << " r=" << plan.spec.r << " L=" << plan.spec.L << ", factors A1 ("
            << plan.A1.word.size() << " letters), A2, A3\n";
  return kPass;
}

int cmd_verify(const std::string& config_path, const std::string& out_path) {
  const ScenarioConfig config = load_scenario(config_path);
  const VerifyOutcome outcome = run_verify(config);
  write_json(outcome.report, out_path);
  const auto& comp = outcome.report["composition"];
  std::cout << "composition max error " << comp["max_error"].get<double>() << " (tolerance "
            << comp["tolerance"].get<double>() << "): " << (outcome.composition_pass ? "PASS" : "FAIL") << '\n'
            << "displacement: " << (outcome.displacement_pass ? "PASS" : "FAIL");
  if (outcome.report["displacement"]["overlap_detected"].get<bool>()) std::cout << " (overlap h(B) with B detected)";
  std::cout << '\n';
  return outcome.composition_pass && outcome.displacement_pass ? kPass : kVerificationFail;
}

int cmd_calabi(const std::string& config_path, const std::string& out_path) {
  const ScenarioConfig config = load_scenario(config_path);
  const CalabiOutcome outcome = run_calabi(config);
  write_json(outcome.report, out_path);
  const auto& f = outcome.report["calabi"]["factors"];
  std::cout << "Cal(A1)=" << f["A1"].get<double>() << " Cal(A2)=" << f["A2"].get<double>()
            << " Cal(A3)=" << f["A3"].get<double>() << ": " << (outcome.pass ? "PASS" : "FAIL") << '\n';
  return outcome.pass ? kPass : kVerificationFail;
}

int cmd_trace(const std::string& config_path, const std::string& point, const std::string& which,
              const std::string& out_path) {
  const ScenarioConfig config = load_scenario(config_path);
  const FactorizationPlan plan = build_plan(config);
  const DiffeoWord* word = nullptr;
  if (which == "f") word = &plan.f;
  else if (which == "A1") word = &plan.A1.word;
  else if (which == "A2") word = &plan.A2.word;
  else if (which == "A3") word = &plan.A3.word;
  else if (which == "h") word = &plan.h;
  else throw ConfigError("--which must be one of f, A1, A2, A3, h");

  PhasePoint z = parse_point(point, plan.dim());
  std::ofstream out(out_path);
  if (!out) throw ConfigError("cannot write '" + out_path + "'");
  out << 't';
  for (int k = 0; k < plan.dim(); ++k) out << ',' << coordinate_name(k);
  out << '\n';
  double t = 0.0;
  auto row = [&](const PhasePoint& p) {
    out << number(t);
    for (Eigen::Index k = 0; k < p.size(); ++k) out << ',' << number(p[k]);
    out << '\n';
  };
  row(z);
  const auto& letters = word->letters();
  for (auto it = letters.rbegin(); it != letters.rend(); ++it) {
    bool moved = false;
    z = flow(*it, it->duration, z, config.integrator, [&](double dt, const PhasePoint& p) {
      moved = true;
      t += dt;
      row(p);
    });
    if (!moved) {
      // Outside the letter's support: the map is the identity, one row.
      t += std::abs(it->duration);
      row(z);
    }
  }
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Factor compactly supported Hamiltonian diffeomorphisms of R^2n into three autonomous ones"};
  app.require_subcommand(1);

  int m = 0;
  std::string trace_path;
  auto* identity = app.add_subcommand("identity", "check f = [g,h] b and the commutator split symbolically");
  identity->add_option("--m", m, "number of factors")->required();
  identity->add_option("--trace", trace_path, "write the rewrite trace here");

  std::string config_path;
  std::string out_path;
  auto* factorize = app.add_subcommand("factorize", "build the plan and write its summary");
  auto* verify = app.add_subcommand("verify", "numerically verify f = A1 A2 A3 and the displacement");
  auto* calabi_cmd = app.add_subcommand("calabi", "Calabi invariants of inputs and factors");
  for (auto* sub : {factorize, verify, calabi_cmd}) {
    sub->add_option("--config", config_path, "scenario JSON")->required();
    sub->add_option("--out", out_path, "report JSON")->required();
  }

  std::string point;
  std::string which;
  auto* trace = app.add_subcommand("trace", "export the orbit of a point under one word as CSV");
  trace->add_option("--config", config_path, "scenario JSON")->required();
  trace->add_option("--point", point, "comma-separated coordinates x1,y1,...,xn,yn")->required();
  trace->add_option("--which", which, "f, A1, A2, A3 or h")->required();
  trace->add_option("--out", out_path, "CSV output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*identity) return cmd_identity(m, trace_path);
    if (*factorize) return cmd_factorize(config_path, out_path);
    if (*verify) return cmd_verify(config_path, out_path);
    if (*calabi_cmd) return cmd_calabi(config_path, out_path);
    if (*trace) return cmd_trace(config_path, point, which, out_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ConstructionError& e) {
    std::cerr << "construction error: " << e.what() << '\n';
    return kConstructionError;
  } catch (const IntegrationError& e) {
    std::cerr << "integration error: " << e.what() << '\n';
    return kConstructionError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConstructionError;
  }
  return kUsageError;
}
