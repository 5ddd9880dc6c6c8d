#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "psrl/baselines.hpp"
#include "psrl/exact_solver.hpp"
#include "psrl/mdp.hpp"
#include "psrl/ps_agent.hpp"

namespace psrl {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kConfigSchemaVersion = 1;

enum class AgentType { ps, baseline };

struct AgentSpec {
  std::string name;
  AgentType type = AgentType::ps;
  PsParams ps;
  /// glie_c derived from the model: 1 / (2 n_s B), B = reward_bound / (1 - gamma_dis).
  bool glie_c_auto = true;
  BaselineParams baseline;
};

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  /// Builder spec: {"kind": "chain" | "gridworld" | "two_state" | "file", ...}.
  nlohmann::json mdp;
  std::vector<AgentSpec> agents;
  std::size_t episodes = 1000;
  std::size_t t_max = 10000;
  std::uint64_t base_seed = 0;
  std::size_t replicas = 1;
  std::size_t eval_every = 100;
  /// Step budget per replica; 0 means unlimited.
  std::uint64_t max_total_steps = 0;
  bool include_truncated = false;
  /// Worker threads for replicas; 0 picks the hardware concurrency.
  std::size_t threads = 0;
  SolverOptions solver;
  /// Directory against which relative file paths are resolved.
  std::filesystem::path base_dir;
};

/// Reads and parses a JSON file. Throws ConfigError when unreadable or malformed.
nlohmann::json load_json_file(const std::filesystem::path& path);

/// Applies `a.b.0.c=value`. The value is parsed as JSON when possible and
/// taken as a string otherwise. Throws ConfigError on a malformed path.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Strict parse: unknown keys, wrong types and out-of-range values throw
/// ConfigError. Missing optional keys take their defaults.
ExperimentConfig parse_config(const nlohmann::json& doc, std::filesystem::path base_dir = {});

/// Normalized echo with every default filled in; parse_config(to_json(c))
/// reproduces c.
nlohmann::json to_json(const ExperimentConfig& config);

/// Builds and validates the model described by a builder spec.
Mdp build_mdp(const nlohmann::json& spec, const std::filesystem::path& base_dir = {});

/// 1 / (2 n_s B) with n_s the non-terminal states and B = reward_bound / (1 - gamma_dis).
double default_glie_c(const Mdp& mdp);

/// PS parameters with glie_c resolved against the model.
PsParams resolve_ps_params(const AgentSpec& spec, const Mdp& mdp);

}  // namespace psrl
