#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "psrl/rng.hpp"

namespace psrl {

/// One entry of the joint distribution p(s', r | s, a).
struct Outcome {
  std::size_t next_state = 0;
  double reward = 0.0;
  double probability = 0.0;

  friend bool operator==(const Outcome&, const Outcome&) = default;
};

/// Tabular episodic MDP. Rewards live on transitions; terminal states are
/// absorbing with zero reward.
struct Mdp {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  /// Outcome lists indexed by s * n_actions + a.
  std::vector<std::vector<Outcome>> transitions;
  /// Sorted, unique.
  std::vector<std::size_t> terminal_states;
  double gamma_dis = 1.0;
  double reward_bound = 0.0;
  /// Episodes start here. Not part of the formal model.
  std::size_t start_state = 0;
  /// Optional labels used in CSV output; empty means numeric labels.
  std::vector<std::string> action_names;

  const std::vector<Outcome>& outcomes(std::size_t s, std::size_t a) const;
  std::vector<Outcome>& outcomes(std::size_t s, std::size_t a);

  bool is_terminal(std::size_t s) const;
  std::vector<bool> terminal_mask() const;
  std::size_t n_nonterminal() const { return n_states - terminal_states.size(); }

  /// r(s, a) = E[R_{t+1} | s, a].
  double expected_reward(std::size_t s, std::size_t a) const;
  std::string action_label(std::size_t a) const;

  friend bool operator==(const Mdp&, const Mdp&) = default;
};

class MdpFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every invariant violation of `mdp`, one description each. Empty iff the
/// model is well formed.
std::vector<std::string> validate(const Mdp& mdp);

struct Transition {
  std::size_t next_state = 0;
  double reward = 0.0;
};

/// Draws (s', r) by inverse CDF over the stored outcome order.
/// Throws std::out_of_range for bad indices.
Transition sample_step(const Mdp& mdp, std::size_t s, std::size_t a, Rng& rng);

namespace chain_action {
inline constexpr std::size_t forward = 0;
inline constexpr std::size_t back = 1;
}  // namespace chain_action

/// States 0..n-1 on a line, the last one terminal. `forward` steps right,
/// `back` steps left and is clamped at state 0.
Mdp make_chain(std::size_t n, double step_reward, double goal_reward, double gamma_dis);

namespace two_state_action {
inline constexpr std::size_t stay = 0;
inline constexpr std::size_t move = 1;
}  // namespace two_state_action

/// Two recurrent states, no terminal. `stay` keeps the state with
/// probability 0.8, `move` switches with probability 0.9. Entering state 1
/// from state 0 pays 1, every other transition pays 0.
Mdp make_two_state_recurrent(double gamma_dis);

struct Cell {
  std::size_t x = 0;
  std::size_t y = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

namespace grid_action {
inline constexpr std::size_t up = 0;
inline constexpr std::size_t right = 1;
inline constexpr std::size_t down = 2;
inline constexpr std::size_t left = 3;
}  // namespace grid_action

struct GridSpec {
  std::size_t width = 4;
  std::size_t height = 4;
  std::set<Cell> walls;
  Cell start{0, 0};
  Cell goal{3, 3};
  double step_reward = 0.0;
  double goal_reward = 1.0;
  double gamma_dis = 0.3;
  double slip_prob = 0.0;
};

/// Four-action grid. Free cells are numbered row-major, walls are skipped.
/// With probability slip_prob the chosen move is replaced by a uniformly
/// random one. Bumping into a wall or the border leaves the agent in place.
Mdp make_gridworld(const GridSpec& spec);

/// State index of a free cell of `spec`, or nullopt for walls / outside.
std::optional<std::size_t> grid_state_index(const GridSpec& spec, Cell cell);

/// Appends one terminal state and routes probability p_T of (s, a) into it.
/// Throws std::invalid_argument when (s, a) already ends the episode surely.
Mdp attach_terminal(const Mdp& mdp, std::size_t s, std::size_t a, double p_T);

nlohmann::json to_json(const Mdp& mdp);
Mdp mdp_from_json(const nlohmann::json& doc);
Mdp load_mdp(const std::filesystem::path& path);
void save_mdp(const Mdp& mdp, const std::filesystem::path& path);

struct EpisodeStep {
  std::size_t state = 0;
  std::size_t action = 0;
  double reward = 0.0;
  std::size_t next_state = 0;
};

/// Ordered record of one episode with first-visit times per (s, a).
class EpisodeTrace {
 public:
  void push(const EpisodeStep& step);
  const std::vector<EpisodeStep>& steps() const { return steps_; }
  std::optional<std::size_t> first_visit_time(std::size_t s, std::size_t a) const;
  const std::map<std::pair<std::size_t, std::size_t>, std::size_t>& first_visits() const {
    return first_visit_;
  }

  bool terminated = false;
  bool truncated = false;

 private:
  std::vector<EpisodeStep> steps_;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> first_visit_;
};

}  // namespace psrl
