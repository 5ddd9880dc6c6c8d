#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "psrl/mdp.hpp"
#include "psrl/rng.hpp"
#include "psrl/table.hpp"

namespace psrl {

/// Action-value table for the baseline learners. Terminal rows stay 0.
struct QTable {
  QTable() = default;
  QTable(std::size_t n_states, std::size_t n_actions, double alpha, double gamma_dis,
         double lambda_tra, std::vector<bool> terminal = {});

  Table q;
  double alpha = 0.1;
  double gamma_dis = 1.0;
  double lambda_tra = 0.0;
  std::vector<bool> terminal;

  bool is_terminal(std::size_t s) const { return s < terminal.size() && terminal[s]; }
};

struct TraceMatrix {
  TraceMatrix() = default;
  TraceMatrix(std::size_t n_states, std::size_t n_actions) : z(n_states, n_actions, 0.0) {}

  Table z;

  void reset() { z.fill(0.0); }
};

/// r + gamma q(s', a') - q(s, a); q(s', .) counts as 0 for terminal s'.
double td_error(const QTable& q, std::size_t s, std::size_t a, double r, std::size_t s_next,
                std::size_t a_next);

/// Accumulating-trace SARSA(lambda): z <- gamma lambda z, z(s,a) += 1,
/// q <- q + alpha delta z.
void sarsa_lambda_step(QTable& q, TraceMatrix& z, std::size_t s, std::size_t a, double r,
                       std::size_t s_next, std::size_t a_next);

/// One-step SARSA: q(s,a) += alpha delta.
void sarsa_step(QTable& q, std::size_t s, std::size_t a, double r, std::size_t s_next,
                std::size_t a_next);

/// q(s,a) <- (1 - alpha) q(s,a) + alpha (r + gamma max_b q(s', b)).
void q_learning_step(QTable& q, std::size_t s, std::size_t a, double r, std::size_t s_next);

/// SARSA rewritten in the local form of the h-value update. The trace is
/// advanced first (g <- gamma lambda g + visit), then
/// h <- h + alpha r g - alpha h(s,a) [visit / lambda + (1 - 1/lambda) g].
/// Throws std::invalid_argument for lambda_tra <= 0.
void ps_style_sarsa_step(Table& h, Table& g, std::size_t s, std::size_t a, double r_next,
                         double lambda_tra, double alpha, double gamma_dis);

/// Index of the row maximum, lowest index on ties.
std::size_t argmax_lowest(std::span<const double> row);

/// Probabilities of the epsilon-greedy rule over one row.
std::vector<double> epsilon_greedy_distribution(std::span<const double> row, double epsilon);

/// One uniform draw decides exploration; an exploring step takes a second
/// draw for the uniform action.
std::size_t epsilon_greedy(std::span<const double> row, double epsilon, Rng& rng);

enum class BaselineKind { sarsa_lambda, q_learning };
enum class AlphaSchedule { constant, inverse_count };

std::string to_string(BaselineKind k);
std::string to_string(AlphaSchedule s);
BaselineKind baseline_kind_from_string(const std::string& name);
AlphaSchedule alpha_schedule_from_string(const std::string& name);

struct BaselineParams {
  BaselineKind kind = BaselineKind::q_learning;
  double alpha = 0.1;
  AlphaSchedule alpha_schedule = AlphaSchedule::constant;
  double epsilon = 0.1;
  /// epsilon_m = epsilon / m in episode m.
  bool epsilon_decay = false;
  double lambda_tra = 0.0;
  double q0 = 0.0;

  friend bool operator==(const BaselineParams&, const BaselineParams&) = default;
};

void validate_params(const BaselineParams& params);
nlohmann::json to_json(const BaselineParams& params);
BaselineParams baseline_params_from_json(const nlohmann::json& doc);

/// Episodic driver around QTable/TraceMatrix with exploration and step-size
/// schedules.
class BaselineAgent {
 public:
  BaselineAgent(const Mdp& mdp, BaselineParams params);

  /// Action for the first step of an episode.
  std::size_t begin_episode(std::size_t s, Rng& rng);

  /// Learns from (s, a, r, s') and returns the next action (0 when s' is
  /// terminal). SARSA picks a' before its update, Q-learning after.
  std::size_t observe(std::size_t s, std::size_t a, double r, std::size_t s_next, Rng& rng);

  void end_episode();

  double epsilon() const;
  std::vector<double> policy(std::size_t s) const;

  const BaselineParams& params() const { return params_; }
  const QTable& table() const { return q_; }
  const TraceMatrix& traces() const { return z_; }
  const Matrix<std::uint64_t>& n_updates() const { return n_; }
  std::size_t episode_index() const { return episode_; }

  nlohmann::json snapshot() const;

 private:
  std::size_t choose(std::size_t s, Rng& rng) const;

  BaselineParams params_;
  QTable q_;
  TraceMatrix z_;
  Matrix<std::uint64_t> n_;
  std::size_t episode_ = 1;
};

}  // namespace psrl
