#include "psrl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "psrl/format.hpp"

namespace psrl {

namespace {

constexpr double kMassTolerance = 1e-12;

std::string where(std::size_t s, std::size_t a) {
  return "state " + std::to_string(s) + " action " + std::to_string(a) + ": ";
}

void check_index(const Mdp& mdp, std::size_t s, std::size_t a) {
  if (s >= mdp.n_states) {
    throw std::out_of_range("state " + std::to_string(s) + " out of range (n_states=" +
                            std::to_string(mdp.n_states) + ")");
  }
  if (a >= mdp.n_actions) {
    throw std::out_of_range("action " + std::to_string(a) + " out of range (n_actions=" +
                            std::to_string(mdp.n_actions) + ")");
  }
}

}  // namespace

const std::vector<Outcome>& Mdp::outcomes(std::size_t s, std::size_t a) const {
  return transitions.at(s * n_actions + a);
}

std::vector<Outcome>& Mdp::outcomes(std::size_t s, std::size_t a) {
  return transitions.at(s * n_actions + a);
}

bool Mdp::is_terminal(std::size_t s) const {
  return std::binary_search(terminal_states.begin(), terminal_states.end(), s);
}

std::vector<bool> Mdp::terminal_mask() const {
  std::vector<bool> mask(n_states, false);
  for (std::size_t s : terminal_states) {
    if (s < n_states) mask[s] = true;
  }
  return mask;
}

double Mdp::expected_reward(std::size_t s, std::size_t a) const {
  double r = 0.0;
  for (const Outcome& o : outcomes(s, a)) r += o.probability * o.reward;
  return r;
}

std::string Mdp::action_label(std::size_t a) const {
  if (a < action_names.size()) return action_names[a];
  return std::to_string(a);
}

std::vector<std::string> validate(const Mdp& mdp) {
  std::vector<std::string> out;
  if (mdp.n_states == 0) out.emplace_back("n_states must be positive");
  if (mdp.n_actions == 0) out.emplace_back("n_actions must be positive");
  if (!(mdp.gamma_dis >= 0.0 && mdp.gamma_dis <= 1.0)) {
    out.push_back("gamma_dis " + format_double(mdp.gamma_dis) + " outside [0, 1]");
  }
  if (!(mdp.reward_bound >= 0.0) || !std::isfinite(mdp.reward_bound)) {
    out.push_back("reward_bound " + format_double(mdp.reward_bound) +
                  " must be finite and non-negative");
  }
  if (mdp.n_states > 0 && mdp.start_state >= mdp.n_states) {
    out.push_back("start_state " + std::to_string(mdp.start_state) + " out of range");
  }
  if (!mdp.action_names.empty() && mdp.action_names.size() != mdp.n_actions) {
    out.emplace_back("action_names must be empty or have one entry per action");
  }
  if (!std::is_sorted(mdp.terminal_states.begin(), mdp.terminal_states.end()) ||
      std::adjacent_find(mdp.terminal_states.begin(), mdp.terminal_states.end()) !=
          mdp.terminal_states.end()) {
    out.emplace_back("terminal_states must be sorted and unique");
  }
  for (std::size_t s : mdp.terminal_states) {
    if (s >= mdp.n_states) {
      out.push_back("terminal state " + std::to_string(s) + " out of range");
    }
  }
  if (mdp.transitions.size() != mdp.n_states * mdp.n_actions) {
    out.push_back("expected " + std::to_string(mdp.n_states * mdp.n_actions) +
                  " outcome lists, found " + std::to_string(mdp.transitions.size()));
    return out;
  }

  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    const bool terminal = mdp.is_terminal(s);
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
      const auto& list = mdp.outcomes(s, a);
      if (list.empty()) {
        out.push_back(where(s, a) + "no outcomes");
        continue;
      }
      double mass = 0.0;
      for (const Outcome& o : list) {
        if (o.next_state >= mdp.n_states) {
          out.push_back(where(s, a) + "next state " + std::to_string(o.next_state) +
                        " out of range");
        }
        if (!(o.probability >= 0.0 && o.probability <= 1.0)) {
          out.push_back(where(s, a) + "probability " + format_double(o.probability) +
                        " outside [0, 1]");
        }
        if (!(std::abs(o.reward) <= mdp.reward_bound)) {
          out.push_back(where(s, a) + "|reward| " + format_double(std::abs(o.reward)) +
                        " exceeds reward_bound " + format_double(mdp.reward_bound));
        }
        mass += o.probability;
      }
      if (terminal) {
        if (list.size() != 1 || list.front().next_state != s ||
            list.front().probability != 1.0) {
          out.push_back(where(s, a) + "terminal state must self-loop with probability 1");
        }
        for (const Outcome& o : list) {
          if (o.reward != 0.0) {
            out.push_back(where(s, a) + "terminal reward must be 0");
            break;
          }
        }
      } else if (std::abs(mass - 1.0) > kMassTolerance) {
        out.push_back(where(s, a) + "probability mass " + format_double(mass) + " != 1");
      }
    }
  }
  return out;
}

Transition sample_step(const Mdp& mdp, std::size_t s, std::size_t a, Rng& rng) {
  check_index(mdp, s, a);
  const auto& list = mdp.outcomes(s, a);
  // One draw per call, including single-outcome lists.
  const double u = uniform01(rng);
  double cumulative = 0.0;
  const Outcome* chosen = nullptr;
  for (const Outcome& o : list) {
    if (o.probability <= 0.0) continue;
    chosen = &o;
    cumulative += o.probability;
    if (u < cumulative) break;
  }
  if (chosen == nullptr) chosen = &list.back();
  return {chosen->next_state, chosen->reward};
}

Mdp make_chain(std::size_t n, double step_reward, double goal_reward, double gamma_dis) {
  if (n < 2) throw std::invalid_argument("make_chain: n must be at least 2");
  Mdp mdp;
  mdp.n_states = n;
  mdp.n_actions = 2;
  mdp.transitions.resize(n * 2);
  mdp.terminal_states = {n - 1};
  mdp.gamma_dis = gamma_dis;
  mdp.reward_bound = std::max(std::abs(step_reward), std::abs(goal_reward));
  mdp.start_state = 0;
  mdp.action_names = {"forward", "back"};
  const std::size_t goal = n - 1;
  for (std::size_t s = 0; s < goal; ++s) {
    const std::size_t right = s + 1;
    mdp.outcomes(s, chain_action::forward) = {
        {right, right == goal ? goal_reward : step_reward, 1.0}};
    mdp.outcomes(s, chain_action::back) = {{s == 0 ? 0 : s - 1, step_reward, 1.0}};
  }
  for (std::size_t a = 0; a < 2; ++a) mdp.outcomes(goal, a) = {{goal, 0.0, 1.0}};
  return mdp;
}

Mdp make_two_state_recurrent(double gamma_dis) {
  Mdp mdp;
  mdp.n_states = 2;
  mdp.n_actions = 2;
  mdp.transitions.resize(4);
  mdp.gamma_dis = gamma_dis;
  mdp.reward_bound = 1.0;
  mdp.action_names = {"stay", "move"};
  mdp.outcomes(0, two_state_action::stay) = {{0, 0.0, 0.8}, {1, 1.0, 0.2}};
  mdp.outcomes(0, two_state_action::move) = {{0, 0.0, 0.1}, {1, 1.0, 0.9}};
  mdp.outcomes(1, two_state_action::stay) = {{1, 0.0, 0.8}, {0, 0.0, 0.2}};
  mdp.outcomes(1, two_state_action::move) = {{1, 0.0, 0.1}, {0, 0.0, 0.9}};
  return mdp;
}

std::optional<std::size_t> grid_state_index(const GridSpec& spec, Cell cell) {
  if (cell.x >= spec.width || cell.y >= spec.height || spec.walls.contains(cell)) {
    return std::nullopt;
  }
  std::size_t index = 0;
  for (std::size_t y = 0; y < spec.height; ++y) {
    for (std::size_t x = 0; x < spec.width; ++x) {
      const Cell c{x, y};
      if (c == cell) return index;
      if (!spec.walls.contains(c)) ++index;
    }
  }
  return std::nullopt;
}

Mdp make_gridworld(const GridSpec& spec) {
  if (spec.width == 0 || spec.height == 0) {
    throw std::invalid_argument("make_gridworld: empty grid");
  }
  if (!(spec.slip_prob >= 0.0 && spec.slip_prob <= 1.0)) {
    throw std::invalid_argument("make_gridworld: slip_prob outside [0, 1]");
  }
  for (const Cell& w : spec.walls) {
    if (w.x >= spec.width || w.y >= spec.height) {
      throw std::invalid_argument("make_gridworld: wall outside the grid");
    }
  }
  const auto goal = grid_state_index(spec, spec.goal);
  if (!goal) throw std::invalid_argument("make_gridworld: goal outside the grid or on a wall");
  const auto start = grid_state_index(spec, spec.start);
  if (!start) throw std::invalid_argument("make_gridworld: start outside the grid or on a wall");

  std::vector<Cell> cells;
  for (std::size_t y = 0; y < spec.height; ++y) {
    for (std::size_t x = 0; x < spec.width; ++x) {
      if (!spec.walls.contains(Cell{x, y})) cells.push_back(Cell{x, y});
    }
  }

  Mdp mdp;
  mdp.n_states = cells.size();
  mdp.n_actions = 4;
  mdp.transitions.resize(mdp.n_states * 4);
  mdp.terminal_states = {*goal};
  mdp.gamma_dis = spec.gamma_dis;
  mdp.reward_bound = std::max(std::abs(spec.step_reward), std::abs(spec.goal_reward));
  mdp.start_state = *start;
  mdp.action_names = {"up", "right", "down", "left"};

  auto move = [&](Cell c, std::size_t dir) -> std::size_t {
    Cell n = c;
    switch (dir) {
      case grid_action::up:
        if (c.y > 0) n.y = c.y - 1;
        break;
      case grid_action::right:
        n.x = c.x + 1;
        break;
      case grid_action::down:
        n.y = c.y + 1;
        break;
      default:
        if (c.x > 0) n.x = c.x - 1;
        break;
    }
    auto idx = grid_state_index(spec, n);
    return idx ? *idx : *grid_state_index(spec, c);
  };

  for (std::size_t s = 0; s < cells.size(); ++s) {
    if (s == *goal) {
      for (std::size_t a = 0; a < 4; ++a) mdp.outcomes(s, a) = {{s, 0.0, 1.0}};
      continue;
    }
    for (std::size_t a = 0; a < 4; ++a) {
      std::map<std::size_t, double> mass;
      for (std::size_t dir = 0; dir < 4; ++dir) {
        const double p = (dir == a ? 1.0 - spec.slip_prob : 0.0) + spec.slip_prob / 4.0;
        if (p > 0.0) mass[move(cells[s], dir)] += p;
      }
      auto& list = mdp.outcomes(s, a);
      for (const auto& [next, p] : mass) {
        list.push_back({next, next == *goal ? spec.goal_reward : spec.step_reward, p});
      }
    }
  }
  return mdp;
}

Mdp attach_terminal(const Mdp& mdp, std::size_t s, std::size_t a, double p_T) {
  check_index(mdp, s, a);
  if (!(p_T > 0.0 && p_T <= 1.0)) {
    throw std::invalid_argument("attach_terminal: p_T must lie in (0, 1]");
  }
  if (mdp.is_terminal(s)) {
    throw std::invalid_argument("attach_terminal: state " + std::to_string(s) +
                                " is already terminal");
  }
  double terminal_mass = 0.0;
  for (const Outcome& o : mdp.outcomes(s, a)) {
    if (mdp.is_terminal(o.next_state)) terminal_mass += o.probability;
  }
  if (terminal_mass >= 1.0 - kMassTolerance) {
    throw std::invalid_argument("attach_terminal: " + where(s, a) +
                                "already leads to a terminal state with probability 1");
  }

  Mdp out = mdp;
  const std::size_t added = mdp.n_states;
  out.n_states = mdp.n_states + 1;
  out.transitions.resize(out.n_states * out.n_actions);
  for (std::size_t b = 0; b < out.n_actions; ++b) out.outcomes(added, b) = {{added, 0.0, 1.0}};
  out.terminal_states.push_back(added);

  std::vector<Outcome> rescaled;
  for (const Outcome& o : mdp.outcomes(s, a)) {
    const double p = o.probability * (1.0 - p_T);
    if (p > 0.0) rescaled.push_back({o.next_state, o.reward, p});
  }
  rescaled.push_back({added, 0.0, p_T});
  out.outcomes(s, a) = std::move(rescaled);
  return out;
}

nlohmann::json to_json(const Mdp& mdp) {
  nlohmann::json transitions = nlohmann::json::array();
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    nlohmann::json per_state = nlohmann::json::array();
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
      nlohmann::json list = nlohmann::json::array();
      for (const Outcome& o : mdp.outcomes(s, a)) {
        list.push_back(nlohmann::json::array({o.next_state, o.reward, o.probability}));
      }
      per_state.push_back(std::move(list));
    }
    transitions.push_back(std::move(per_state));
  }
  nlohmann::json doc;
  doc["n_states"] = mdp.n_states;
  doc["n_actions"] = mdp.n_actions;
  doc["transitions"] = std::move(transitions);
  doc["terminal_states"] = mdp.terminal_states;
  doc["gamma_dis"] = mdp.gamma_dis;
  doc["reward_bound"] = mdp.reward_bound;
  doc["start_state"] = mdp.start_state;
  if (!mdp.action_names.empty()) doc["action_names"] = mdp.action_names;
  return doc;
}

Mdp mdp_from_json(const nlohmann::json& doc) {
  static const std::set<std::string> known = {"n_states",     "n_actions",   "transitions",
                                              "terminal_states", "gamma_dis", "reward_bound",
                                              "start_state",  "action_names"};
  if (!doc.is_object()) throw MdpFormatError("MDP document must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (!known.contains(key)) throw MdpFormatError("unknown MDP key '" + key + "'");
  }
  for (const char* key : {"n_states", "n_actions", "transitions", "terminal_states",
                          "gamma_dis", "reward_bound"}) {
    if (!doc.contains(key)) throw MdpFormatError(std::string("missing MDP key '") + key + "'");
  }
  try {
    Mdp mdp;
    mdp.n_states = doc.at("n_states").get<std::size_t>();
    mdp.n_actions = doc.at("n_actions").get<std::size_t>();
    mdp.gamma_dis = doc.at("gamma_dis").get<double>();
    mdp.reward_bound = doc.at("reward_bound").get<double>();
    mdp.terminal_states = doc.at("terminal_states").get<std::vector<std::size_t>>();
    if (doc.contains("start_state")) mdp.start_state = doc.at("start_state").get<std::size_t>();
    if (doc.contains("action_names")) {
      mdp.action_names = doc.at("action_names").get<std::vector<std::string>>();
    }
    const auto& transitions = doc.at("transitions");
    if (!transitions.is_array() || transitions.size() != mdp.n_states) {
      throw MdpFormatError("transitions must hold one entry per state");
    }
    mdp.transitions.resize(mdp.n_states * mdp.n_actions);
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
      const auto& per_state = transitions[s];
      if (!per_state.is_array() || per_state.size() != mdp.n_actions) {
        throw MdpFormatError("transitions[" + std::to_string(s) +
                             "] must hold one outcome list per action");
      }
      for (std::size_t a = 0; a < mdp.n_actions; ++a) {
        for (const auto& triple : per_state[a]) {
          if (!triple.is_array() || triple.size() != 3) {
            throw MdpFormatError("outcome must be [next_state, reward, probability]");
          }
          mdp.outcomes(s, a).push_back({triple[0].get<std::size_t>(), triple[1].get<double>(),
                                        triple[2].get<double>()});
        }
      }
    }
    return mdp;
  } catch (const nlohmann::json::exception& e) {
    throw MdpFormatError(std::string("malformed MDP document: ") + e.what());
  }
}

Mdp load_mdp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MdpFormatError("cannot open MDP file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw MdpFormatError("cannot parse " + path.string() + ": " + e.what());
  }
  return mdp_from_json(doc);
}

void save_mdp(const Mdp& mdp, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write MDP file " + path.string());
  out << to_json(mdp).dump(2) << '\n';
}

void EpisodeTrace::push(const EpisodeStep& step) {
  const std::size_t t = steps_.size();
  first_visit_.try_emplace({step.state, step.action}, t);
  steps_.push_back(step);
}

std::optional<std::size_t> EpisodeTrace::first_visit_time(std::size_t s, std::size_t a) const {
  auto it = first_visit_.find({s, a});
  if (it == first_visit_.end()) return std::nullopt;
  return it->second;
}

}  // namespace psrl
