#include <cmath>
#include <filesystem>
#include <map>
#include <queue>

#include "doctest.h"
#include "helpers.hpp"
#include "psrl/exact_solver.hpp"
#include "psrl/mdp.hpp"

using namespace psrl;

namespace {

Mdp two_outcome_mdp() {
  Mdp mdp;
  mdp.n_states = 3;
  mdp.n_actions = 1;
  mdp.transitions.resize(3);
  mdp.terminal_states = {1, 2};
  mdp.gamma_dis = 0.9;
  mdp.reward_bound = 1.0;
  mdp.outcomes(0, 0) = {{1, 0.0, 0.3}, {2, 1.0, 0.7}};
  mdp.outcomes(1, 0) = {{1, 0.0, 1.0}};
  mdp.outcomes(2, 0) = {{2, 0.0, 1.0}};
  return mdp;
}

// Four states on a ring: `advance` moves to the next state and pays 1 when
// wrapping from 3 to 0, `stay` keeps the state and pays nothing.
Mdp reward_cycle(double gamma_dis) {
  Mdp mdp;
  mdp.n_states = 4;
  mdp.n_actions = 2;
  mdp.transitions.resize(8);
  mdp.gamma_dis = gamma_dis;
  mdp.reward_bound = 1.0;
  for (std::size_t s = 0; s < 4; ++s) {
    mdp.outcomes(s, 0) = {{(s + 1) % 4, s == 3 ? 1.0 : 0.0, 1.0}};
    mdp.outcomes(s, 1) = {{s, 0.0, 1.0}};
  }
  return mdp;
}

}  // namespace

TEST_SUITE("mdp") {
  TEST_CASE("validate accepts a well-formed two-state chain") {
    CHECK(validate(make_chain(2, 0.0, 1.0, 0.5)).empty());
  }

  TEST_CASE("validate reports a probability mass defect once") {
    Mdp mdp = make_chain(3, 0.0, 1.0, 0.5);
    mdp.outcomes(0, chain_action::forward) = {{1, 0.0, 0.5}, {0, 0.0, 0.4}};
    const auto v = validate(mdp);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("probability mass 0.9") != std::string::npos);
  }

  TEST_CASE("validate rejects a rewarding terminal self-loop") {
    Mdp mdp = make_chain(3, 0.0, 1.0, 0.5);
    mdp.outcomes(2, 0) = {{2, 1.0, 1.0}};
    const auto v = validate(mdp);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("terminal reward must be 0") != std::string::npos);
  }

  TEST_CASE("validate flags reward bound, discount and terminal shape") {
    Mdp mdp = make_chain(3, 0.0, 1.0, 0.5);
    mdp.reward_bound = 0.5;
    CHECK(validate(mdp).size() == 1);
    mdp.reward_bound = 1.0;
    mdp.gamma_dis = 1.5;
    CHECK(validate(mdp).size() == 1);
    mdp.gamma_dis = 0.5;
    mdp.outcomes(2, 1) = {{0, 0.0, 1.0}};
    CHECK(validate(mdp).size() == 1);
  }

  TEST_CASE("terminal states always return to themselves with zero reward") {
    const Mdp mdp = make_chain(4, 0.0, 1.0, 0.3);
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
      for (std::size_t a = 0; a < mdp.n_actions; ++a) {
        const auto tr = sample_step(mdp, 3, a, rng);
        CHECK(tr.next_state == 3);
        CHECK(tr.reward == 0.0);
      }
    }
  }

  TEST_CASE("deterministic edges always yield their single outcome") {
    const Mdp mdp = make_chain(4, -0.5, 1.0, 0.3);
    Rng rng(11);
    for (int i = 0; i < 1000; ++i) {
      const auto tr = sample_step(mdp, 1, chain_action::back, rng);
      CHECK(tr.next_state == 0);
      CHECK(tr.reward == -0.5);
    }
  }

  TEST_CASE("sample_step frequencies sit within three binomial standard errors") {
    const Mdp mdp = two_outcome_mdp();
    Rng rng(2024);
    const int n = 100000;
    int first = 0;
    for (int i = 0; i < n; ++i) {
      const auto tr = sample_step(mdp, 0, 0, rng);
      if (tr.next_state == 1) {
        ++first;
        CHECK(tr.reward == 0.0);
      } else {
        CHECK(tr.reward == 1.0);
      }
    }
    for (double p : {0.3, 0.7}) {
      const double count = p == 0.3 ? first : n - first;
      const double se = std::sqrt(p * (1.0 - p) / n);
      CHECK(std::abs(count / n - p) <= 3.0 * se);
    }
  }

  TEST_CASE("sample_step rejects bad indices") {
    const Mdp mdp = make_chain(3, 0.0, 1.0, 0.3);
    Rng rng(1);
    CHECK_THROWS_AS(sample_step(mdp, 3, 0, rng), std::out_of_range);
    CHECK_THROWS_AS(sample_step(mdp, 0, 2, rng), std::out_of_range);
  }

  TEST_CASE("sampling is reproducible for a fixed seed") {
    const Mdp mdp = two_outcome_mdp();
    Rng a(5);
    Rng b(5);
    for (int i = 0; i < 100; ++i) {
      CHECK(sample_step(mdp, 0, 0, a).next_state == sample_step(mdp, 0, 0, b).next_state);
    }
  }

  TEST_CASE("make_chain shapes") {
    CHECK_THROWS_AS(make_chain(1, 0.0, 1.0, 0.3), std::invalid_argument);

    const Mdp two = make_chain(2, 0.0, 1.0, 0.3);
    CHECK(two.n_nonterminal() == 1);
    const auto& fwd = two.outcomes(0, chain_action::forward);
    REQUIRE(fwd.size() == 1);
    CHECK(fwd[0].next_state == 1);
    CHECK(fwd[0].reward == 1.0);
    CHECK(two.is_terminal(1));

    for (std::size_t n = 2; n <= 12; ++n) CHECK(validate(make_chain(n, -0.1, 1.0, 0.9)).empty());
  }

  TEST_CASE("chain n=3 optimal values by hand recursion") {
    const auto q = value_iteration(make_chain(3, 0.0, 1.0, 0.3));
    CHECK(q.values(0, chain_action::forward) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(q.values(1, chain_action::forward) == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("1x2 grid matches the two-state chain up to relabeling") {
    GridSpec spec;
    spec.width = 2;
    spec.height = 1;
    spec.start = {0, 0};
    spec.goal = {1, 0};
    spec.gamma_dis = 0.3;
    const Mdp grid = make_gridworld(spec);
    const Mdp chain = make_chain(2, 0.0, 1.0, 0.3);
    CHECK(grid.outcomes(0, grid_action::right) == chain.outcomes(0, chain_action::forward));
    CHECK(grid.outcomes(0, grid_action::left) == chain.outcomes(0, chain_action::back));
    const auto qg = value_iteration(grid);
    const auto qc = value_iteration(chain);
    CHECK(qg.values(0, grid_action::right) == qc.values(0, chain_action::forward));
    CHECK(qg.values(0, grid_action::left) == qc.values(0, chain_action::back));
  }

  TEST_CASE("3x3 grid optimal policy follows a shortest path") {
    GridSpec spec;
    spec.width = 3;
    spec.height = 3;
    spec.start = {0, 0};
    spec.goal = {2, 2};
    spec.step_reward = -0.01;
    spec.goal_reward = 1.0;
    spec.gamma_dis = 0.9;
    const Mdp mdp = make_gridworld(spec);
    CHECK(validate(mdp).empty());

    std::map<Cell, int> dist;
    std::queue<Cell> frontier;
    dist[spec.goal] = 0;
    frontier.push(spec.goal);
    while (!frontier.empty()) {
      const Cell c = frontier.front();
      frontier.pop();
      const int dx[] = {0, 1, 0, -1};
      const int dy[] = {-1, 0, 1, 0};
      for (int k = 0; k < 4; ++k) {
        const long nx = static_cast<long>(c.x) + dx[k];
        const long ny = static_cast<long>(c.y) + dy[k];
        if (nx < 0 || ny < 0 || nx >= 3 || ny >= 3) continue;
        const Cell n{static_cast<std::size_t>(nx), static_cast<std::size_t>(ny)};
        if (dist.contains(n)) continue;
        dist[n] = dist[c] + 1;
        frontier.push(n);
      }
    }

    const auto policy = greedy_policy(value_iteration(mdp));
    for (const auto& [cell, d] : dist) {
      const std::size_t s = *grid_state_index(spec, cell);
      if (mdp.is_terminal(s)) continue;
      const auto& out = mdp.outcomes(s, policy[s]);
      REQUIRE(out.size() == 1);
      Cell next{};
      for (const auto& [c2, d2] : dist) {
        if (*grid_state_index(spec, c2) == out[0].next_state) next = c2;
      }
      CHECK(dist[next] == d - 1);
    }
  }

  TEST_CASE("gridworld geometry and validation") {
    GridSpec spec;
    spec.walls = {{1, 1}, {2, 2}};
    spec.goal = {3, 3};
    spec.slip_prob = 0.1;
    const Mdp mdp = make_gridworld(spec);
    CHECK(mdp.n_states == 14);
    CHECK(validate(mdp).empty());
    CHECK(validate(make_gridworld(GridSpec{})).empty());

    GridSpec bad = spec;
    bad.goal = {1, 1};
    CHECK_THROWS_AS(make_gridworld(bad), std::invalid_argument);
    bad = spec;
    bad.goal = {4, 0};
    CHECK_THROWS_AS(make_gridworld(bad), std::invalid_argument);
    bad = spec;
    bad.slip_prob = 1.5;
    CHECK_THROWS_AS(make_gridworld(bad), std::invalid_argument);
  }

  TEST_CASE("slip spreads mass uniformly over the four moves") {
    GridSpec spec;
    spec.slip_prob = 0.4;
    const Mdp mdp = make_gridworld(spec);
    // From the corner (0,0) moving right: up and left bump back into (0,0).
    const auto& out = mdp.outcomes(mdp.start_state, grid_action::right);
    double stay = 0.0;
    double right = 0.0;
    double down = 0.0;
    for (const auto& o : out) {
      if (o.next_state == 0) stay += o.probability;
      if (o.next_state == 1) right += o.probability;
      if (o.next_state == 4) down += o.probability;
    }
    CHECK(stay == doctest::Approx(0.2));
    CHECK(right == doctest::Approx(0.7));
    CHECK(down == doctest::Approx(0.1));
  }

  TEST_CASE("attach_terminal with p_T = 1 routes the edge only to the new terminal") {
    const Mdp base = make_chain(3, 0.0, 1.0, 0.3);
    const Mdp aug = attach_terminal(base, 0, chain_action::back, 1.0);
    CHECK(aug.n_states == 4);
    CHECK(aug.is_terminal(3));
    const auto& out = aug.outcomes(0, chain_action::back);
    REQUIRE(out.size() == 1);
    CHECK(out[0].next_state == 3);
    CHECK(out[0].probability == 1.0);
    CHECK(validate(aug).empty());
  }

  TEST_CASE("attach_terminal keeps probabilities normalized on a recurrent model") {
    const Mdp base = make_two_state_recurrent(0.9);
    CHECK(base.terminal_states.empty());
    for (std::size_t s = 0; s < 2; ++s) {
      for (std::size_t a = 0; a < 2; ++a) {
        const Mdp aug = attach_terminal(base, s, a, 0.1);
        double mass = 0.0;
        for (const auto& o : aug.outcomes(s, a)) mass += o.probability;
        CHECK(std::abs(mass - 1.0) <= 1e-12);
        CHECK(validate(aug).empty());
      }
    }
  }

  TEST_CASE("attach_terminal preconditions") {
    const Mdp chain = make_chain(2, 0.0, 1.0, 0.3);
    CHECK_THROWS_AS(attach_terminal(chain, 0, chain_action::forward, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(attach_terminal(chain, 0, chain_action::back, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(attach_terminal(chain, 0, chain_action::back, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(attach_terminal(chain, 1, 0, 0.5), std::invalid_argument);
  }

  TEST_CASE("remote termination on a reward cycle keeps the discounted optimal policy") {
    const Mdp cycle = reward_cycle(1.0);
    Mdp augmented = attach_terminal(cycle, 3, 0, 0.01);
    CHECK(validate(augmented).empty());
    const auto q_aug = value_iteration(augmented);

    // Truncation discount per step with the same survival per lap.
    Mdp truncated = reward_cycle(std::pow(0.99, 0.25));
    const auto q_trunc = value_iteration(truncated);

    const auto pa = greedy_policy(q_aug);
    const auto pt = greedy_policy(q_trunc);
    for (std::size_t s = 0; s < 4; ++s) CHECK(pa[s] == pt[s]);
  }

  TEST_CASE("JSON round trip is bit exact") {
    GridSpec spec;
    spec.slip_prob = 0.1;
    spec.step_reward = -0.01;
    const Mdp mdp = make_gridworld(spec);
    CHECK(mdp_from_json(to_json(mdp)) == mdp);
    CHECK(mdp_from_json(nlohmann::json::parse(to_json(mdp).dump())) == mdp);

    const auto path = std::filesystem::temp_directory_path() / "psrl_mdp_roundtrip.json";
    save_mdp(mdp, path);
    CHECK(load_mdp(path) == mdp);
    std::filesystem::remove(path);
  }

  TEST_CASE("malformed MDP documents are rejected") {
    auto doc = to_json(make_chain(3, 0.0, 1.0, 0.3));
    doc["extra"] = 1;
    CHECK_THROWS_AS(mdp_from_json(doc), MdpFormatError);
    doc.erase("extra");
    doc.erase("gamma_dis");
    CHECK_THROWS_AS(mdp_from_json(doc), MdpFormatError);
    CHECK_THROWS_AS(load_mdp("/nonexistent/psrl.json"), MdpFormatError);
  }

  TEST_CASE("episode trace records first visits") {
    EpisodeTrace trace;
    trace.push({0, 1, 0.0, 1});
    trace.push({1, 0, 0.0, 0});
    trace.push({0, 1, 1.0, 2});
    CHECK(trace.steps().size() == 3);
    CHECK(trace.first_visit_time(0, 1) == 0);
    CHECK(trace.first_visit_time(1, 0) == 1);
    CHECK_FALSE(trace.first_visit_time(1, 1).has_value());
  }
}
