#include "psrl/exact_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "psrl/format.hpp"

namespace psrl {

namespace {

void require_valid(const Mdp& mdp) {
  const auto violations = validate(mdp);
  if (!violations.empty()) throw SolverError("invalid MDP: " + violations.front());
}

void require_proper_if_undiscounted(const Mdp& mdp) {
  if (mdp.gamma_dis == 1.0 && !terminals_reachable(mdp)) {
    throw SolverError(
        "improper MDP: gamma_dis = 1 but some state cannot reach a terminal state");
  }
}

// One synchronous sweep; `next_value[s']` is the bootstrap value of s'.
double sweep(const Mdp& mdp, const std::vector<double>& next_value, const Table& q, Table& out) {
  double change = 0.0;
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    const bool terminal = mdp.is_terminal(s);
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
      double value = 0.0;
      if (!terminal) {
        for (const Outcome& o : mdp.outcomes(s, a)) {
          value += o.probability * (o.reward + mdp.gamma_dis * next_value[o.next_state]);
        }
      }
      out(s, a) = value;
      change = std::max(change, std::abs(value - q(s, a)));
    }
  }
  return change;
}

}  // namespace

double QStarTable::v(std::size_t s) const {
  const auto row = values.row(s);
  return *std::max_element(row.begin(), row.end());
}

bool terminals_reachable(const Mdp& mdp) {
  // Backward search from the terminal set over positive-probability edges.
  std::vector<std::vector<std::size_t>> predecessors(mdp.n_states);
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
      for (const Outcome& o : mdp.outcomes(s, a)) {
        if (o.probability > 0.0) predecessors[o.next_state].push_back(s);
      }
    }
  }
  std::vector<bool> reaches(mdp.n_states, false);
  std::queue<std::size_t> frontier;
  for (std::size_t t : mdp.terminal_states) {
    reaches[t] = true;
    frontier.push(t);
  }
  while (!frontier.empty()) {
    const std::size_t s = frontier.front();
    frontier.pop();
    for (std::size_t p : predecessors[s]) {
      if (!reaches[p]) {
        reaches[p] = true;
        frontier.push(p);
      }
    }
  }
  return std::all_of(reaches.begin(), reaches.end(), [](bool b) { return b; });
}

QStarTable value_iteration(const Mdp& mdp, const SolverOptions& options) {
  require_valid(mdp);
  require_proper_if_undiscounted(mdp);

  QStarTable result;
  result.gamma_dis = mdp.gamma_dis;
  if (mdp.gamma_dis == 1.0) {
    result.warnings.emplace_back(
        "gamma_dis = 1: value iteration converges only if every policy is proper");
  }

  Table q(mdp.n_states, mdp.n_actions, 0.0);
  Table next(mdp.n_states, mdp.n_actions, 0.0);
  std::vector<double> v(mdp.n_states, 0.0);
  for (std::size_t it = 1; it <= options.max_iters; ++it) {
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
      const auto row = q.row(s);
      v[s] = *std::max_element(row.begin(), row.end());
    }
    const double change = sweep(mdp, v, q, next);
    std::swap(q, next);
    result.residual_history.push_back(change);
    if (change <= options.tol) {
      result.values = std::move(q);
      result.residual = change;
      result.iterations = it;
      return result;
    }
  }
  throw SolverError("value iteration did not reach tol " + format_double(options.tol) +
                    " within " + std::to_string(options.max_iters) + " sweeps");
}

Table policy_q_values(const Mdp& mdp, const Table& policy, const SolverOptions& options) {
  require_valid(mdp);
  require_proper_if_undiscounted(mdp);
  if (policy.rows() != mdp.n_states || policy.cols() != mdp.n_actions) {
    throw std::invalid_argument("policy_q_values: policy shape does not match the MDP");
  }
  Table q(mdp.n_states, mdp.n_actions, 0.0);
  Table next(mdp.n_states, mdp.n_actions, 0.0);
  std::vector<double> v(mdp.n_states, 0.0);
  for (std::size_t it = 1; it <= options.max_iters; ++it) {
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
      double value = 0.0;
      for (std::size_t a = 0; a < mdp.n_actions; ++a) value += policy(s, a) * q(s, a);
      v[s] = value;
    }
    const double change = sweep(mdp, v, q, next);
    std::swap(q, next);
    if (change <= options.tol) return q;
  }
  throw SolverError("policy evaluation did not reach tol " + format_double(options.tol) +
                    " within " + std::to_string(options.max_iters) + " sweeps");
}

DeterministicPolicy greedy_policy(const Table& q) {
  DeterministicPolicy pi(q.rows(), 0);
  for (std::size_t s = 0; s < q.rows(); ++s) {
    const auto row = q.row(s);
    // max_element returns the first maximum, i.e. the lowest index on ties.
    pi[s] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return pi;
}

DeterministicPolicy greedy_policy(const QStarTable& q) { return greedy_policy(q.values); }

std::vector<std::vector<std::size_t>> optimal_action_sets(const Table& q, double rel_tol) {
  std::vector<std::vector<std::size_t>> sets(q.rows());
  for (std::size_t s = 0; s < q.rows(); ++s) {
    const auto row = q.row(s);
    const double best = *std::max_element(row.begin(), row.end());
    const double slack = rel_tol * std::max(1.0, std::abs(best));
    for (std::size_t a = 0; a < row.size(); ++a) {
      if (row[a] >= best - slack) sets[s].push_back(a);
    }
  }
  return sets;
}

double min_action_gap(const Mdp& mdp, const Table& q, double rel_tol) {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < q.rows(); ++s) {
    if (mdp.is_terminal(s)) continue;
    const auto row = q.row(s);
    const double best = *std::max_element(row.begin(), row.end());
    const double slack = rel_tol * std::max(1.0, std::abs(best));
    for (double value : row) {
      if (value < best - slack) gap = std::min(gap, best - value);
    }
  }
  return gap;
}

double bellman_residual(const Mdp& mdp, const Table& q) {
  double residual = 0.0;
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
      double target = 0.0;
      if (!mdp.is_terminal(s)) {
        for (const Outcome& o : mdp.outcomes(s, a)) {
          const auto row = q.row(o.next_state);
          target += o.probability *
                    (o.reward + mdp.gamma_dis * *std::max_element(row.begin(), row.end()));
        }
      }
      residual = std::max(residual, std::abs(q(s, a) - target));
    }
  }
  return residual;
}

void write_q_csv(std::ostream& out, const Mdp& mdp, const Table& q) {
  out << "state,action,q_value\n";
  for (std::size_t s = 0; s < q.rows(); ++s) {
    for (std::size_t a = 0; a < q.cols(); ++a) {
      out << s << ',' << mdp.action_label(a) << ',' << format_double(q(s, a)) << '\n';
    }
  }
}

}  // namespace psrl
