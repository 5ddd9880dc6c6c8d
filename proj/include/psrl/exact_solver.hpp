#pragma once

#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "psrl/mdp.hpp"
#include "psrl/table.hpp"

namespace psrl {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverOptions {
  double tol = 1e-10;
  std::size_t max_iters = 1'000'000;
};

/// Optimal action values. Terminal rows are zero.
struct QStarTable {
  Table values;
  double gamma_dis = 0.0;
  /// Sup-norm change of the final sweep; bounds the Bellman residual of `values`.
  double residual = 0.0;
  std::size_t iterations = 0;
  /// Sup-norm change of every sweep, in order.
  std::vector<double> residual_history;
  std::vector<std::string> warnings;

  double v(std::size_t s) const;
};

/// Synchronous value iteration on q. For gamma_dis == 1 every non-terminal
/// state must be able to reach a terminal state.
/// Throws SolverError on an improper model or when max_iters is exhausted.
QStarTable value_iteration(const Mdp& mdp, const SolverOptions& options = {});

/// Policy evaluation for a stochastic policy given as a row-stochastic
/// (state, action) table.
Table policy_q_values(const Mdp& mdp, const Table& policy, const SolverOptions& options = {});

using DeterministicPolicy = std::vector<std::size_t>;

/// argmax per row, ties to the lowest action index.
DeterministicPolicy greedy_policy(const Table& q);
DeterministicPolicy greedy_policy(const QStarTable& q);

/// Actions within `rel_tol * max(1, |best|)` of the row maximum.
std::vector<std::vector<std::size_t>> optimal_action_sets(const Table& q, double rel_tol = 1e-9);

/// Smallest gap between the best and the best strictly-worse action over
/// non-terminal rows (infinity when every row is a tie).
double min_action_gap(const Mdp& mdp, const Table& q, double rel_tol = 1e-9);

/// max_{s,a} |q(s,a) - sum p (r + gamma max_b q(s',b))|.
double bellman_residual(const Mdp& mdp, const Table& q);

/// True when every non-terminal state has some action sequence reaching a
/// terminal state with positive probability.
bool terminals_reachable(const Mdp& mdp);

/// CSV with header `state,action,q_value`, state-major rows.
void write_q_csv(std::ostream& out, const Mdp& mdp, const Table& q);

}  // namespace psrl
