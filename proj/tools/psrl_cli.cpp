#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "psrl/config.hpp"
#include "psrl/exact_solver.hpp"
#include "psrl/format.hpp"
#include "psrl/harness.hpp"
#include "psrl/mdp.hpp"
#include "psrl/report.hpp"
#include "psrl/returns_oracle.hpp"

namespace fs = std::filesystem;
using namespace psrl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::vector<std::string> overrides;
  bool quiet = false;
};

ExperimentConfig load_config(const Globals& g) {
  if (g.config_path.empty()) throw UsageError("this subcommand needs --config");
  nlohmann::json doc = load_json_file(g.config_path);
  for (const std::string& assignment : g.overrides) apply_override(doc, assignment);
  if (g.seed_given) doc["base_seed"] = g.seed;
  return parse_config(doc, fs::path(g.config_path).parent_path());
}

Mdp mdp_from_args(const Globals& g, const std::string& mdp_file) {
  if (!mdp_file.empty()) {
    try {
      return load_mdp(mdp_file);
    } catch (const MdpFormatError& e) {
      throw ConfigError(e.what());
    }
  }
  if (g.config_path.empty()) throw UsageError("give an MDP file or --config");
  const ExperimentConfig config = load_config(g);
  return build_mdp(config.mdp, config.base_dir);
}

fs::path out_dir(const Globals& g) {
  const fs::path dir = g.out_dir.empty() ? fs::path(".") : fs::path(g.out_dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_qstar(const fs::path& dir, const Mdp& mdp, const QStarTable& q) {
  std::ofstream out(dir / "qstar.csv", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir / "qstar.csv").string());
  write_q_csv(out, mdp, q.values);
}

QStarTable solve_oracle(const Mdp& mdp, const SolverOptions& options) {
  try {
    return value_iteration(mdp, options);
  } catch (const SolverError& e) {
    throw CheckFailure(std::string("exact solver failed: ") + e.what());
  }
}

int cmd_validate(const Globals& g, const std::string& mdp_file) {
  const Mdp mdp = mdp_from_args(g, mdp_file);
  const auto violations = validate(mdp);
  for (const std::string& v : violations) std::cout << v << '\n';
  if (!violations.empty()) return kExitCheckFailed;
  if (!g.quiet) std::cout << "ok: " << mdp.n_states << " states, " << mdp.n_actions << " actions\n";
  return kExitOk;
}

int cmd_solve(const Globals& g, const std::string& mdp_file, double tol) {
  const Mdp mdp = mdp_from_args(g, mdp_file);
  const auto violations = validate(mdp);
  if (!violations.empty()) {
    for (const std::string& v : violations) std::cerr << v << '\n';
    return kExitCheckFailed;
  }
  SolverOptions options;
  options.tol = tol;
  const QStarTable q = solve_oracle(mdp, options);
  for (const std::string& w : q.warnings) std::cerr << "warning: " << w << '\n';
  const fs::path dir = out_dir(g);
  write_qstar(dir, mdp, q);
  if (!g.quiet) {
    write_q_csv(std::cout, mdp, q.values);
    std::cout << "sweeps " << q.iterations << ", final change " << format_double(q.residual) << '\n';
  }
  return kExitOk;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void print_result(const TrainingResult& r) {
  std::cout << r.agent.name << " [" << r.tag << "]\n";
  for (const ReplicaResult& rep : r.replicas) {
    std::cout << "  replica " << rep.replica << " seed " << rep.seed << ": episodes "
              << rep.episodes_run << ", delta_max_norm " << format_double(rep.final_delta)
              << ", policy_match " << (rep.final_policy_match ? "yes" : "no") << ", truncated "
              << rep.truncated_episodes << '\n';
  }
  std::cout << "  audits " << (r.audits_passed() ? "passed" : "FAILED") << '\n';
}

int cmd_train(const Globals& g) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig config = load_config(g);
  if (config.agents.size() != 1) {
    throw UsageError("train needs exactly one agent; use compare for several");
  }
  const Mdp mdp = build_mdp(config.mdp, config.base_dir);
  const QStarTable q = solve_oracle(mdp, config.solver);
  const TrainingResult result = run_training(config, mdp, q, 0);

  const fs::path dir = out_dir(g);
  std::ofstream report(dir / "report.csv", std::ios::binary);
  if (!report) throw std::runtime_error("cannot write " + (dir / "report.csv").string());
  write_report_csv(report, result);
  report.close();
  write_qstar(dir, mdp, q);
  write_text(dir / "summary.json", run_summary(config, mdp, q, {result}, seconds_since(start)).dump(2) + "\n");
  if (!g.quiet) print_result(result);
  return result.audits_passed() ? kExitOk : kExitCheckFailed;
}

int cmd_compare(const Globals& g) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig config = load_config(g);
  if (config.agents.size() < 2) throw UsageError("compare needs >= 2 agents");
  std::set<std::string> names;
  for (const AgentSpec& a : config.agents) {
    if (!names.insert(a.name).second) throw UsageError("duplicate agent name '" + a.name + "'");
  }
  const Mdp mdp = build_mdp(config.mdp, config.base_dir);
  const QStarTable q = solve_oracle(mdp, config.solver);
  std::vector<TrainingResult> results;
  for (std::size_t i = 0; i < config.agents.size(); ++i) {
    results.push_back(run_training(config, mdp, q, i));
  }

  const fs::path dir = out_dir(g);
  std::ofstream csv(dir / "compare.csv", std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write " + (dir / "compare.csv").string());
  write_compare_csv(csv, results);
  csv.close();
  write_qstar(dir, mdp, q);
  write_text(dir / "summary.json", run_summary(config, mdp, q, results, seconds_since(start)).dump(2) + "\n");
  bool audits = true;
  for (const TrainingResult& r : results) {
    if (!g.quiet) print_result(r);
    audits = audits && r.audits_passed();
  }
  return audits ? kExitOk : kExitCheckFailed;
}

int cmd_oracle_check(const Globals& g, std::size_t cases, double tolerance, bool inject_fault,
                     std::size_t max_horizon) {
  const double fault = inject_fault ? 1e-6 : 0.0;
  const OracleSweepResult r = oracle_sweep(g.seed, cases, tolerance, fault, max_horizon);
  if (!g.out_dir.empty()) write_text(out_dir(g) / "summary.json", to_json(r).dump(2) + "\n");
  if (!g.quiet || !r.passed()) {
    std::cout << (r.passed() ? "pass" : "FAIL") << ": " << r.cases << " schedules, "
              << r.comparisons << " comparisons, " << r.failures << " failures, max deviation "
              << format_double(r.max_deviation) << " (tolerance " << format_double(r.tolerance)
              << ")";
    if (!r.worst.empty()) std::cout << ", worst " << r.worst;
    std::cout << '\n';
  }
  return r.passed() ? kExitOk : kExitCheckFailed;
}

int cmd_ensemble(const Globals& g, std::size_t agents, std::size_t horizon, double eta,
                 double gamma_damp) {
  Mdp mdp;
  if (g.config_path.empty()) {
    mdp = make_two_state_recurrent(0.9);
  } else {
    const ExperimentConfig config = load_config(g);
    mdp = build_mdp(config.mdp, config.base_dir);
  }
  Table policy(mdp.n_states, mdp.n_actions, 1.0 / static_cast<double>(mdp.n_actions));
  Rng rng(g.seed);
  std::vector<double> rewards(horizon);
  for (double& r : rewards) r = uniform01(rng);
  const EnsembleRecord record =
      ensemble_average_experiment(mdp, policy, agents, rewards, eta, gamma_damp, g.seed + 1);

  nlohmann::json doc = to_json(record);
  doc["seed"] = g.seed;
  doc["rewards"] = rewards;
  if (eta > 0.0 && gamma_damp < 1.0) {
    const double sum = ensemble_h_normalized_sum(rewards, eta, gamma_damp, 1.0);
    const double closed = ensemble_h_normalized_closed(rewards, eta, gamma_damp, 1.0);
    doc["normalized_identity"] = {{"sum_form", sum}, {"closed_form", closed}};
  }
  if (!g.out_dir.empty()) write_text(out_dir(g) / "summary.json", doc.dump(2) + "\n");
  if (!g.quiet || !record.passed()) {
    for (const EnsembleEdge& e : record.edges) {
      std::cout << "edge (" << e.state << "," << mdp.action_label(e.action) << "): empirical "
                << format_double(e.empirical_mean) << " +- " << format_double(e.std_error)
                << ", analytic " << format_double(e.analytic) << (e.within ? "" : "  OUTSIDE")
                << '\n';
    }
    std::cout << (record.passed() ? "pass" : "FAIL") << ": " << record.n_agents << " agents, horizon "
              << record.horizon << ", " << format_double(record.n_sigma) << " standard errors\n";
  }
  return record.passed() ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projective simulation and tabular RL experiment runner"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config_path, "Experiment config (JSON)");
  app.add_option("--out", g.out_dir, "Output directory");
  auto* seed_opt = app.add_option("--seed", g.seed, "Base seed (overrides the config)");
  app.add_option("--set", g.overrides, "Override a config value: dotted.key=value")
      ->allow_extra_args(false);
  app.add_flag("--quiet", g.quiet, "Print only failures");

  std::string mdp_file;
  auto* validate_cmd = app.add_subcommand("validate", "Check an MDP file for invariant violations");
  validate_cmd->add_option("mdp", mdp_file, "MDP file (JSON)");

  double tol = 1e-10;
  auto* solve_cmd = app.add_subcommand("solve", "Compute q* by value iteration");
  solve_cmd->add_option("mdp", mdp_file, "MDP file (JSON)");
  solve_cmd->add_option("--tol", tol, "Sup-norm stopping tolerance")->capture_default_str();

  auto* train_cmd = app.add_subcommand("train", "Train one agent and report convergence");
  auto* compare_cmd = app.add_subcommand("compare", "Train several agents on one model");

  std::size_t cases = 1000;
  double oracle_tol = 1e-10;
  bool inject_fault = false;
  std::size_t max_horizon = 200;
  auto* oracle_cmd =
      app.add_subcommand("oracle-check", "Compare the h-value recursion with its closed forms");
  oracle_cmd->add_option("--cases", cases, "Random schedules")->capture_default_str();
  oracle_cmd->add_option("--tolerance", oracle_tol, "Absolute tolerance")->capture_default_str();
  oracle_cmd->add_option("--max-horizon", max_horizon, "Longest schedule")->capture_default_str();
  oracle_cmd->add_flag("--inject-fault", inject_fault, "Scale rewards seen by the agent by 1 + 1e-6");

  std::size_t agents = 10000;
  std::size_t horizon = 20;
  double eta = 0.3;
  double gamma_damp = 0.0;
  auto* ensemble_cmd =
      app.add_subcommand("ensemble", "Ensemble mean of h against the occupancy-weighted value");
  ensemble_cmd->add_option("--agents", agents, "Ensemble size")->capture_default_str();
  ensemble_cmd->add_option("--horizon", horizon, "Steps per agent")->capture_default_str();
  ensemble_cmd->add_option("--eta", eta, "Glow parameter")->capture_default_str();
  ensemble_cmd->add_option("--gamma-damp", gamma_damp, "h damping")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  g.seed_given = seed_opt->count() > 0;

  try {
    if (*validate_cmd) return cmd_validate(g, mdp_file);
    if (*solve_cmd) return cmd_solve(g, mdp_file, tol);
    if (*train_cmd) return cmd_train(g);
    if (*compare_cmd) return cmd_compare(g);
    if (*oracle_cmd) return cmd_oracle_check(g, cases, oracle_tol, inject_fault, max_horizon);
    if (*ensemble_cmd) return cmd_ensemble(g, agents, horizon, eta, gamma_damp);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CheckFailure& e) {
    std::cerr << "check failed: " << e.what() << '\n';
    return kExitCheckFailed;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
  return kExitUsage;
}
