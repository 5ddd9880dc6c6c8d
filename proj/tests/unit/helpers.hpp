#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "psrl/mdp.hpp"
#include "psrl/table.hpp"

namespace testing {

/// Dense Gaussian elimination with partial pivoting; solves A x = b.
inline std::vector<double> solve_linear(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-300) throw std::runtime_error("singular system");
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= a[i][c] * x[c];
    x[i] = acc / a[i][i];
  }
  return x;
}

/// q_pi from (I - gamma P_pi) q = r over (s, a) pairs, terminal rows fixed at 0.
inline psrl::Table policy_q_linear(const psrl::Mdp& mdp, const psrl::Table& policy) {
  const std::size_t n = mdp.n_states * mdp.n_actions;
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  std::vector<double> b(n, 0.0);
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    for (std::size_t act = 0; act < mdp.n_actions; ++act) {
      const std::size_t i = s * mdp.n_actions + act;
      a[i][i] = 1.0;
      if (mdp.is_terminal(s)) continue;
      for (const psrl::Outcome& o : mdp.outcomes(s, act)) {
        b[i] += o.probability * o.reward;
        if (mdp.is_terminal(o.next_state)) continue;
        for (std::size_t a2 = 0; a2 < mdp.n_actions; ++a2) {
          a[i][o.next_state * mdp.n_actions + a2] -=
              mdp.gamma_dis * o.probability * policy(o.next_state, a2);
        }
      }
    }
  }
  const auto x = solve_linear(a, b);
  psrl::Table q(mdp.n_states, mdp.n_actions);
  q.data() = x;
  return q;
}

inline psrl::Table uniform_policy(std::size_t n_states, std::size_t n_actions) {
  return psrl::Table(n_states, n_actions, 1.0 / static_cast<double>(n_actions));
}

/// Plain left-to-right sum of chi^k rewards[t1 + k], k = 0..t2 - t1.
inline double naive_return(const std::vector<double>& rewards, std::size_t t1, std::size_t t2,
                           double chi) {
  double acc = 0.0;
  double w = 1.0;
  for (std::size_t k = t1; k <= t2; ++k) {
    acc += w * rewards[k];
    w *= chi;
  }
  return acc;
}

}  // namespace testing
