#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "psrl/config.hpp"
#include "psrl/exact_solver.hpp"
#include "psrl/mdp.hpp"
#include "psrl/ps_agent.hpp"
#include "psrl/returns_oracle.hpp"
#include "psrl/rng.hpp"
#include "psrl/table.hpp"

namespace psrl {

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
  friend bool operator==(const Rational&, const Rational&) = default;
};

/// Simplest fraction within `tol` of x (continued-fraction convergents).
Rational to_rational(double x, double tol = 1e-12, std::int64_t max_den = 1'000'000'000);

enum class Admissibility { admissible, boundary, not_admissible };
std::string to_string(Admissibility a);

struct ContractionReport {
  Rational gamma;
  /// f = 2 gamma / (1 - gamma) in lowest terms; den == 0 means infinite.
  Rational f;
  double f_value = 0.0;
  Admissibility status = Admissibility::not_admissible;
};

/// Admissible iff f < 1, i.e. 3 p < q for gamma = p / q.
ContractionReport contraction_coefficient(double gamma_dis);

struct Finding {
  std::string name;
  /// "ok", "violated" or "info".
  std::string status;
  std::string detail;
};

struct TheoremCheck {
  std::vector<Finding> findings;
  ContractionReport contraction;
  bool theorem_mode = false;
};

TheoremCheck theorem_condition_check(const PsParams& params, const Mdp& mdp);
nlohmann::json to_json(const TheoremCheck& check);

/// Learning rates chi_m / (N_m + 1) of one edge, N_m counting visited
/// episodes up to and including m.
std::vector<double> alpha_sequence(std::span<const std::uint8_t> visited_pattern);

struct AlphaAudit {
  bool applicable = false;
  std::size_t episodes = 0;
  /// Episodes in which an edge's visit count differed from the number of
  /// visited episodes.
  std::size_t count_mismatches = 0;
  std::vector<double> sum_alpha;
  std::vector<double> sum_alpha_sq;
  double max_sum_alpha_sq = 0.0;
  bool passed() const;
};

/// Streaming form of the learning-rate audit over a first-visit run.
class AlphaAuditor {
 public:
  explicit AlphaAuditor(std::size_t n_edges);
  /// `visited[e]` is chi_m(e); `agent_counts[e]` the agent's N after episode m.
  void record(std::span<const std::uint8_t> visited, std::span<const std::uint64_t> agent_counts);
  AlphaAudit result() const;

 private:
  AlphaAudit audit_;
  std::vector<std::uint64_t> counts_;
};

inline constexpr double kSumAlphaSqBound = 1.6449340668482264 + 1e-9;
inline constexpr double kGlieRelativeSlack = 1e-12;

struct GlieAudit {
  bool applicable = false;
  /// Bound on |h-hat| used in exp(-2 B beta) / n_a.
  double bound_b = 0.0;
  std::size_t episodes_checked = 0;
  std::size_t violations = 0;
  std::optional<std::size_t> first_violation_episode;
  /// min over episodes of measured / bound.
  double min_ratio = std::numeric_limits<double>::infinity();
  bool passed() const { return violations == 0; }
};

struct ReportRow {
  std::size_t replica = 0;
  std::size_t episode = 0;
  double delta_max_norm = 0.0;
  bool policy_match = false;
  double beta = 0.0;
  double min_action_prob = 0.0;
  std::size_t truncated_episodes = 0;
  std::uint64_t seed = 0;
};

struct ReplicaResult {
  std::size_t replica = 0;
  std::uint64_t seed = 0;
  std::vector<ReportRow> rows;
  std::size_t episodes_run = 0;
  std::size_t truncated_episodes = 0;
  std::uint64_t total_steps = 0;
  double final_delta = 0.0;
  bool final_policy_match = false;
  /// h-hat for PS agents, Q for baselines.
  Table final_estimate;
  GlieAudit glie;
  AlphaAudit alpha;
  /// Rows where ||Delta|| was below half the minimum action gap but the
  /// greedy policy still differed from the optimal one.
  std::size_t gap_violations = 0;
};

struct TrainingResult {
  AgentSpec agent;
  /// Parameters after resolving glie_c (PS agents only).
  PsParams resolved_ps;
  /// "theorem", "outside-theorem" or "baseline".
  std::string tag;
  std::optional<TheoremCheck> theorem;
  std::vector<ReplicaResult> replicas;
  bool audits_passed() const;
};

/// Trains `config.agents[agent_index]` on every replica (seed base_seed + i)
/// and evaluates against q*. Replicas run on worker threads and are merged in
/// replica order.
TrainingResult run_training(const ExperimentConfig& config, const Mdp& mdp, const QStarTable& qstar,
                            std::size_t agent_index);

/// max over non-terminal (s, a) of |estimate - q*|.
double delta_max_norm(const Mdp& mdp, const Table& estimate, const Table& qstar);

/// True when the greedy action of `estimate` is optimal in every non-terminal state.
bool policy_matches(const Mdp& mdp, const Table& estimate,
                    const std::vector<std::vector<std::size_t>>& optimal_sets);

/// p_l(s, a) for l = 1..horizon under a fixed policy from mdp.start_state.
std::vector<Table> occupancy_probabilities(const Mdp& mdp, const Table& policy,
                                           std::size_t horizon);

struct EnsembleEdge {
  std::size_t state = 0;
  std::size_t action = 0;
  double empirical_mean = 0.0;
  double std_error = 0.0;
  double analytic = 0.0;
  bool within = false;
};

struct EnsembleRecord {
  std::size_t n_agents = 0;
  std::size_t horizon = 0;
  double eta = 0.0;
  double gamma_damp = 0.0;
  double n_sigma = 3.0;
  std::vector<EnsembleEdge> edges;
  bool passed() const;
};

/// Runs n_agents accumulating-glow PS agents (h0 = h_eq = 0) that follow a
/// fixed policy and all receive the prescribed reward signal `rewards`
/// (one entry per step). Compares the ensemble mean of h per edge with the
/// occupancy-weighted analytic value.
EnsembleRecord ensemble_average_experiment(const Mdp& mdp, const Table& policy,
                                           std::size_t n_agents, std::span<const double> rewards,
                                           double eta, double gamma_damp, std::uint64_t seed,
                                           double n_sigma = 3.0);

nlohmann::json to_json(const EnsembleRecord& record);

/// Random schedule with horizon in [0, max_horizon] and distinct visit times.
VisitSchedule random_schedule(Rng& rng, std::size_t max_horizon);

/// Feeds a schedule through a one-state, two-action PsAgent: action 0 on
/// visit steps, action 1 otherwise. Returns h(0, 0). `fault` scales every
/// reward by (1 + fault).
double replay_schedule(const VisitSchedule& schedule, const GlowSetting& setting,
                       double fault = 0.0);

struct OracleSweepResult {
  std::size_t cases = 0;
  std::size_t comparisons = 0;
  std::size_t failures = 0;
  double max_deviation = 0.0;
  double tolerance = 1e-10;
  std::string worst;
  bool passed() const { return failures == 0; }
};

/// Random schedules x {replacing, accumulating, first_visit} x s in
/// {1, 1 - eta}: agent recursion against closed_form_h, plus the by-step and
/// regrouped replacing forms.
OracleSweepResult oracle_sweep(std::uint64_t seed, std::size_t cases, double tolerance = 1e-10,
                               double fault = 0.0, std::size_t max_horizon = 200);

nlohmann::json to_json(const OracleSweepResult& result);

}  // namespace psrl
