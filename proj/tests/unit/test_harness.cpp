#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "psrl/harness.hpp"
#include "psrl/report.hpp"

using namespace psrl;

namespace {

nlohmann::json ps_config(const nlohmann::json& mdp, const nlohmann::json& params,
                         std::size_t episodes, std::size_t replicas = 1,
                         std::size_t eval_every = 100) {
  return {{"schema_version", 1},
          {"mdp", mdp},
          {"agents", {{{"name", "ps"}, {"type", "ps"}, {"params", params}}}},
          {"episodes", episodes},
          {"base_seed", 11},
          {"replicas", replicas},
          {"eval_every", eval_every}};
}

const nlohmann::json kTheoremParams = {{"eta", 0.7},
                                       {"gamma_damp", 0},
                                       {"h0", 0},
                                       {"h_eq", 0},
                                       {"glow", "first_visit"},
                                       {"policy", "softmax_htilde_glie"},
                                       {"glie_c", "auto"}};

TrainingResult train(const nlohmann::json& doc, std::size_t agent = 0) {
  const ExperimentConfig config = parse_config(doc);
  const Mdp mdp = build_mdp(config.mdp);
  return run_training(config, mdp, value_iteration(mdp, config.solver), agent);
}

std::string report_text(const TrainingResult& r) {
  std::ostringstream out;
  write_report_csv(out, r);
  return out.str();
}

PsParams theorem_params(double eta) {
  PsParams p;
  p.eta = eta;
  p.h0 = 0.0;
  p.h_eq = 0.0;
  p.glow = GlowVariant::first_visit;
  p.policy = PolicyKind::softmax_htilde_glie;
  return p;
}

const Finding& finding(const TheoremCheck& c, const std::string& name) {
  for (const Finding& f : c.findings) {
    if (f.name == name) return f;
  }
  throw std::runtime_error("missing finding " + name);
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("rational reconstruction") {
    CHECK(to_rational(0.3) == Rational{3, 10});
    CHECK(to_rational(1.0 / 3.0) == Rational{1, 3});
    CHECK(to_rational(0.0) == Rational{0, 1});
    CHECK(to_rational(1.0) == Rational{1, 1});
    CHECK(to_rational(0.125) == Rational{1, 8});
  }

  TEST_CASE("contraction coefficient at 0.3 is 6/7 and admissible") {
    const auto c = contraction_coefficient(0.3);
    CHECK(c.f == Rational{6, 7});
    CHECK(c.f_value == doctest::Approx(6.0 / 7.0).epsilon(1e-15));
    CHECK(c.status == Admissibility::admissible);
  }

  TEST_CASE("gamma 1/3 is the boundary and larger values are not admissible") {
    const auto b = contraction_coefficient(1.0 / 3.0);
    CHECK(b.f == Rational{1, 1});
    CHECK(b.status == Admissibility::boundary);
    CHECK(to_string(b.status) == "boundary: not admissible");
    CHECK(contraction_coefficient(0.5).status == Admissibility::not_admissible);
    CHECK(contraction_coefficient(0.5).f == Rational{2, 1});
    CHECK(contraction_coefficient(0.9).status == Admissibility::not_admissible);
    CHECK(contraction_coefficient(1.0).f.den == 0);
    CHECK(contraction_coefficient(0.0).f == Rational{0, 1});
  }

  TEST_CASE("theorem check flags a broken glow-discount coupling") {
    const Mdp mdp = make_chain(5, 0.0, 1.0, 0.3);
    const auto bad = theorem_condition_check(theorem_params(0.5), mdp);
    CHECK(finding(bad, "glow_discount_coupling").status == "violated");
    CHECK_FALSE(bad.theorem_mode);

    const auto good = theorem_condition_check(theorem_params(0.7), mdp);
    CHECK(good.theorem_mode);
    for (const Finding& f : good.findings) CHECK(f.status == "ok");
    CHECK(to_json(good).at("contraction").at("f") == "6/7");
  }

  TEST_CASE("theorem check on other violations") {
    const Mdp far = make_chain(5, 0.0, 1.0, 0.9);
    const auto c = theorem_condition_check(theorem_params(0.1), far);
    CHECK(finding(c, "discount_at_most_one_third").status == "violated");
    CHECK(finding(c, "contraction_coefficient").status == "violated");
    CHECK_FALSE(c.theorem_mode);

    PsParams rep = theorem_params(0.7);
    rep.glow = GlowVariant::replacing;
    rep.policy = PolicyKind::softmax_h;
    const auto r = theorem_condition_check(rep, make_chain(5, 0.0, 1.0, 0.3));
    CHECK(finding(r, "first_visit_glow").status == "violated");
    CHECK(finding(r, "glie_capable_policy").status == "violated");
    CHECK(finding(r, "finite_spaces").status == "ok");
    CHECK(finding(r, "bounded_rewards").status == "ok");
  }

  TEST_CASE("alpha sequence from a visit pattern") {
    const std::vector<std::uint8_t> pattern{1, 0, 1, 1};
    const auto a = alpha_sequence(pattern);
    REQUIRE(a.size() == 4);
    CHECK(a[0] == 0.5);
    CHECK(a[1] == 0.0);
    CHECK(a[2] == 1.0 / 3.0);
    CHECK(a[3] == 0.25);
    for (double x : alpha_sequence(std::vector<std::uint8_t>(50, 0))) CHECK(x == 0.0);
  }

  TEST_CASE("sum of squared learning rates stays below pi^2/6") {
    AlphaAuditor auditor(1);
    std::vector<std::uint64_t> counts{0};
    const std::vector<std::uint8_t> visit{1};
    for (int m = 0; m < 10000; ++m) {
      ++counts[0];
      auditor.record(visit, counts);
    }
    const auto audit = auditor.result();
    CHECK(audit.passed());
    CHECK(audit.count_mismatches == 0);
    CHECK(audit.max_sum_alpha_sq <= std::numbers::pi * std::numbers::pi / 6.0 + 1e-9);
    CHECK(audit.max_sum_alpha_sq > 0.64);
  }

  TEST_CASE("alpha auditor catches miscounted visits") {
    AlphaAuditor auditor(2);
    const std::vector<std::uint8_t> visit{1, 0};
    const std::vector<std::uint64_t> wrong{2, 0};
    auditor.record(visit, wrong);
    CHECK(auditor.result().count_mismatches == 1);
    CHECK_FALSE(auditor.result().passed());
  }

  TEST_CASE("zero episodes are rejected") {
    CHECK_THROWS_AS(parse_config(ps_config({{"kind", "chain"}, {"n", 3}, {"gamma_dis", 0.3}},
                                           kTheoremParams, 0)),
                    ConfigError);
    ExperimentConfig config = parse_config(
        ps_config({{"kind", "chain"}, {"n", 3}, {"gamma_dis", 0.3}}, kTheoremParams, 10));
    config.episodes = 0;
    const Mdp mdp = build_mdp(config.mdp);
    CHECK_THROWS_AS(run_training(config, mdp, value_iteration(mdp), 0), ConfigError);
  }

  TEST_CASE("all-zero rewards with h0 = 0 keep delta at zero") {
    nlohmann::json params = kTheoremParams;
    params["glie_c"] = 0.5;
    const auto result = train(ps_config(
        {{"kind", "chain"}, {"n", 4}, {"goal_reward", 0}, {"gamma_dis", 0.3}}, params, 300, 2, 10));
    for (const auto& rep : result.replicas) {
      CHECK(rep.rows.size() == 30);
      for (const auto& row : rep.rows) CHECK(row.delta_max_norm == 0.0);
    }
  }

  TEST_CASE("GLIE lower bound holds on a 10^4-episode chain run") {
    const auto result = train(ps_config({{"kind", "chain"}, {"n", 3}, {"gamma_dis", 0.3}},
                                         kTheoremParams, 10000, 1, 1000));
    REQUIRE(result.tag == "theorem");
    const auto& rep = result.replicas.front();
    CHECK(rep.glie.applicable);
    CHECK(rep.glie.episodes_checked == 10000);
    CHECK(rep.glie.violations == 0);
    CHECK(rep.glie.min_ratio >= 1.0 - kGlieRelativeSlack);
    CHECK(rep.alpha.applicable);
    CHECK(rep.alpha.passed());
    CHECK(rep.gap_violations == 0);
    CHECK(result.audits_passed());
  }

  TEST_CASE("short theorem-mode chain run converges") {
    const auto result = train(ps_config(
        {{"kind", "chain"}, {"n", 5}, {"gamma_dis", 0.3}}, kTheoremParams, 20000, 2, 5000));
    for (const auto& rep : result.replicas) {
      CHECK(rep.final_delta <= 0.1 * (1.0 + 1.0));
      CHECK(rep.final_policy_match);
    }
  }

  TEST_CASE("report rows, seeds and cadence") {
    const auto result = train(ps_config({{"kind", "chain"}, {"n", 4}, {"gamma_dis", 0.3}},
                                        kTheoremParams, 250, 3, 100));
    REQUIRE(result.replicas.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      const auto& rep = result.replicas[i];
      CHECK(rep.seed == 11 + i);
      REQUIRE(rep.rows.size() == 3);
      CHECK(rep.rows[0].episode == 100);
      CHECK(rep.rows[1].episode == 200);
      CHECK(rep.rows[2].episode == 250);
      for (const auto& row : rep.rows) {
        CHECK(row.delta_max_norm >= 0.0);
        CHECK(row.replica == i);
        CHECK(row.beta > 0.0);
      }
    }
    const std::string text = report_text(result);
    CHECK(text.rfind(
              "replica,episode,delta_max_norm,policy_match,beta,min_action_prob,"
              "truncated_episodes,seed\n",
              0) == 0);
  }

  TEST_CASE("identical config and seed give identical reports, threaded or not") {
    auto doc = ps_config({{"kind", "chain"}, {"n", 5}, {"gamma_dis", 0.3}}, kTheoremParams, 2000,
                         4, 100);
    doc["threads"] = 1;
    const std::string a = report_text(train(doc));
    const std::string b = report_text(train(doc));
    doc["threads"] = 4;
    const std::string c = report_text(train(doc));
    CHECK(a == b);
    CHECK(a == c);
    doc["base_seed"] = 12;
    CHECK(report_text(train(doc)) != a);
  }

  TEST_CASE("truncated episodes are counted and skipped") {
    nlohmann::json params = kTheoremParams;
    auto doc = ps_config({{"kind", "chain"}, {"n", 8}, {"gamma_dis", 0.3}}, params, 50, 1, 1);
    doc["t_max"] = 2;
    const auto result = train(doc);
    const auto& rep = result.replicas.front();
    CHECK(rep.truncated_episodes == 50);
    REQUIRE(rep.rows.size() == 1);
    CHECK(rep.rows.back().episode == 50);
    CHECK(rep.rows.back().truncated_episodes == 50);

    doc["include_truncated"] = true;
    CHECK(train(doc).replicas.front().rows.size() == 50);
  }

  TEST_CASE("baseline agents on the chain reach the oracle within the step budget") {
    const nlohmann::json doc = {
        {"mdp", {{"kind", "chain"}, {"n", 5}, {"gamma_dis", 0.3}}},
        {"agents",
         {{{"name", "q"},
           {"type", "baseline"},
           {"params",
            {{"kind", "q_learning"},
             {"alpha_schedule", "inverse_count"},
             {"epsilon", 1.0},
             {"epsilon_decay", true}}}},
          {{"name", "sarsa0"},
           {"type", "baseline"},
           {"params",
            {{"kind", "sarsa_lambda"},
             {"alpha_schedule", "inverse_count"},
             {"epsilon", 1.0},
             {"epsilon_decay", true}}}}}},
        {"episodes", 100000},
        {"max_total_steps", 100000},
        {"base_seed", 3},
        {"eval_every", 5000}};
    for (std::size_t agent = 0; agent < 2; ++agent) {
      const auto result = train(doc, agent);
      CHECK(result.tag == "baseline");
      const auto& rep = result.replicas.front();
      CHECK(rep.total_steps == 100000);
      CHECK(rep.final_delta <= 0.05);
      CHECK(rep.final_policy_match);
    }
  }

  TEST_CASE("delta ignores terminal rows and policy match uses optimal sets") {
    const Mdp mdp = make_chain(3, 0.0, 1.0, 0.3);
    const auto q = value_iteration(mdp);
    Table est = q.values;
    est(2, 0) = 99.0;
    CHECK(delta_max_norm(mdp, est, q.values) == 0.0);
    est(0, 0) = 0.35;
    CHECK(delta_max_norm(mdp, est, q.values) == doctest::Approx(0.05));
    const auto sets = optimal_action_sets(q.values);
    CHECK(policy_matches(mdp, est, sets));
    est(0, 1) = 0.5;
    CHECK_FALSE(policy_matches(mdp, est, sets));
  }

  TEST_CASE("occupancy probabilities are distributions over edges") {
    const Mdp mdp = make_two_state_recurrent(0.9);
    Table policy(2, 2, 0.5);
    const auto occ = occupancy_probabilities(mdp, policy, 20);
    REQUIRE(occ.size() == 20);
    CHECK(occ[0](0, 0) == 0.5);
    CHECK(occ[0](1, 0) == 0.0);
    for (const Table& p : occ) {
      double total = 0.0;
      for (double x : p.data()) total += x;
      CHECK(std::abs(total - 1.0) <= 1e-12);
    }
    CHECK(occ[1](1, 1) == doctest::Approx(0.5 * (0.5 * 0.2 + 0.5 * 0.9)));
  }

  TEST_CASE("ensemble with zero rewards") {
    const Mdp mdp = make_two_state_recurrent(0.9);
    const std::vector<double> zero(15, 0.0);
    const auto rec = ensemble_average_experiment(mdp, Table(2, 2, 0.5), 100, zero, 0.3, 0.0, 1);
    CHECK(rec.passed());
    for (const auto& e : rec.edges) {
      CHECK(e.empirical_mean == 0.0);
      CHECK(e.analytic == 0.0);
    }
  }

  TEST_CASE("ensemble on a deterministic path has no variance") {
    Mdp mdp;
    mdp.n_states = 3;
    mdp.n_actions = 1;
    mdp.transitions.resize(3);
    mdp.reward_bound = 1.0;
    mdp.gamma_dis = 0.9;
    mdp.outcomes(0, 0) = {{1, 0.0, 1.0}};
    mdp.outcomes(1, 0) = {{2, 0.0, 1.0}};
    mdp.outcomes(2, 0) = {{0, 0.0, 1.0}};
    Rng rng(4);
    std::vector<double> rewards(12);
    for (double& r : rewards) r = uniform01(rng);
    const auto rec =
        ensemble_average_experiment(mdp, Table(3, 1, 1.0), 50, rewards, 0.4, 0.1, 9);
    CHECK(rec.passed());
    for (const auto& e : rec.edges) {
      CHECK(e.std_error <= 1e-12);
      CHECK(std::abs(e.empirical_mean - e.analytic) <= 1e-12);
    }
  }

  TEST_CASE("10^4-agent ensemble mean sits within three standard errors") {
    const Mdp mdp = make_two_state_recurrent(0.9);
    Rng rng(21);
    std::vector<double> rewards(20);
    for (double& r : rewards) r = uniform01(rng);
    const auto rec =
        ensemble_average_experiment(mdp, Table(2, 2, 0.5), 10000, rewards, 0.3, 0.0, 22);
    REQUIRE(rec.edges.size() == 4);
    for (const auto& e : rec.edges) {
      CHECK(e.std_error > 0.0);
      CHECK(std::abs(e.empirical_mean - e.analytic) <= 3.0 * e.std_error);
    }
    CHECK(rec.passed());
  }

  TEST_CASE("summary marks outside-theorem runs") {
    nlohmann::json params = kTheoremParams;
    params["eta"] = 0.1;
    const auto doc = ps_config({{"kind", "chain"}, {"n", 4}, {"gamma_dis", 0.9}}, params, 100);
    const ExperimentConfig config = parse_config(doc);
    const Mdp mdp = build_mdp(config.mdp);
    const auto q = value_iteration(mdp);
    const std::vector<TrainingResult> results{run_training(config, mdp, q, 0)};
    const auto summary = run_summary(config, mdp, q, results, 0.0);
    CHECK(summary.at("agents")[0].at("tag") == "outside-theorem");
    CHECK(summary.at("config") == to_json(config));
    CHECK(summary.at("engineering_tolerance").contains("delta_max_norm"));
  }
}
