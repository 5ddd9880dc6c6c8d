#include "psrl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "psrl/baselines.hpp"
#include "psrl/format.hpp"

namespace psrl {

Rational to_rational(double x, double tol, std::int64_t max_den) {
  if (!std::isfinite(x)) throw std::invalid_argument("to_rational: non-finite input");
  const bool negative = x < 0.0;
  const double target = std::abs(x);
  std::int64_t h_prev = 0, h = 1, k_prev = 1, k = 0;
  double y = target;
  Rational best{0, 1};
  for (int i = 0; i < 64; ++i) {
    const double a_real = std::floor(y);
    if (a_real > 9e15) break;
    const auto a = static_cast<std::int64_t>(a_real);
    const std::int64_t h_next = a * h + h_prev;
    const std::int64_t k_next = a * k + k_prev;
    if (k_next > max_den) break;
    h_prev = h;
    h = h_next;
    k_prev = k;
    k = k_next;
    best = {h, k};
    if (std::abs(target - static_cast<double>(h) / static_cast<double>(k)) <=
        tol * std::max(1.0, target)) {
      break;
    }
    const double frac = y - a_real;
    if (frac == 0.0) break;
    y = 1.0 / frac;
  }
  if (negative) best.num = -best.num;
  return best;
}

std::string to_string(Admissibility a) {
  switch (a) {
    case Admissibility::admissible:
      return "contraction admissible";
    case Admissibility::boundary:
      return "boundary: not admissible";
    case Admissibility::not_admissible:
      return "not admissible";
  }
  return "?";
}

ContractionReport contraction_coefficient(double gamma_dis) {
  ContractionReport r;
  r.gamma = to_rational(gamma_dis);
  const std::int64_t p = r.gamma.num;
  const std::int64_t q = r.gamma.den;
  if (q == p) {
    r.f = {1, 0};
    r.f_value = std::numeric_limits<double>::infinity();
  } else {
    std::int64_t num = 2 * p;
    std::int64_t den = q - p;
    const std::int64_t g = std::gcd(num, den);
    if (g != 0) {
      num /= g;
      den /= g;
    }
    r.f = {num, den};
    r.f_value = 2.0 * gamma_dis / (1.0 - gamma_dis);
  }
  if (3 * p < q) {
    r.status = Admissibility::admissible;
  } else if (3 * p == q) {
    r.status = Admissibility::boundary;
  } else {
    r.status = Admissibility::not_admissible;
  }
  return r;
}

namespace {

std::string rational_text(const Rational& r) {
  if (r.den == 0) return "inf";
  if (r.den == 1) return std::to_string(r.num);
  return std::to_string(r.num) + "/" + std::to_string(r.den);
}

Finding yes_no(const std::string& name, bool ok, const std::string& detail) {
  return {name, ok ? "ok" : "violated", detail};
}

}  // namespace

TheoremCheck theorem_condition_check(const PsParams& params, const Mdp& mdp) {
  TheoremCheck check;
  check.findings.push_back({"finite_spaces", mdp.n_states > 0 && mdp.n_actions > 0 ? "ok" : "violated",
                            std::to_string(mdp.n_states) + " states, " +
                                std::to_string(mdp.n_actions) + " actions"});

  double largest = 0.0;
  for (const auto& list : mdp.transitions) {
    for (const Outcome& o : list) largest = std::max(largest, std::abs(o.reward));
  }
  const bool bounded = std::isfinite(mdp.reward_bound) && largest <= mdp.reward_bound;
  check.findings.push_back(yes_no("bounded_rewards", bounded,
                                  "max |r| = " + format_double(largest) +
                                      ", reward_bound = " + format_double(mdp.reward_bound)));

  const Rational gamma = to_rational(mdp.gamma_dis);
  const bool discount_ok = 3 * gamma.num <= gamma.den;
  check.findings.push_back(yes_no("discount_at_most_one_third", discount_ok,
                                  "gamma_dis = " + rational_text(gamma)));

  const Rational eta_bar = to_rational(1.0 - params.eta);
  const bool coupled = eta_bar == gamma;
  check.findings.push_back(yes_no("glow_discount_coupling", coupled,
                                  "1 - eta = " + rational_text(eta_bar) +
                                      ", gamma_dis = " + rational_text(gamma)));

  const bool first_visit = params.glow == GlowVariant::first_visit;
  check.findings.push_back(yes_no("first_visit_glow", first_visit, to_string(params.glow)));

  const bool glie = params.policy == PolicyKind::softmax_htilde_glie;
  check.findings.push_back(yes_no("glie_capable_policy", glie, to_string(params.policy)));

  check.contraction = contraction_coefficient(mdp.gamma_dis);
  check.findings.push_back({"contraction_coefficient",
                            check.contraction.status == Admissibility::admissible ? "ok" : "violated",
                            "f = 2 gamma / (1 - gamma) = " + rational_text(check.contraction.f) +
                                ": " + to_string(check.contraction.status)});

  check.theorem_mode = bounded && discount_ok && coupled && first_visit && glie;
  return check;
}

nlohmann::json to_json(const TheoremCheck& check) {
  nlohmann::json findings = nlohmann::json::array();
  for (const Finding& f : check.findings) {
    findings.push_back({{"name", f.name}, {"status", f.status}, {"detail", f.detail}});
  }
  const auto& c = check.contraction;
  nlohmann::json f_value = std::isfinite(c.f_value) ? nlohmann::json(c.f_value)
                                                    : nlohmann::json("inf");
  return {{"findings", findings},
          {"contraction",
           {{"gamma", rational_text(c.gamma)},
            {"f", rational_text(c.f)},
            {"f_value", f_value},
            {"status", to_string(c.status)}}},
          {"theorem_mode", check.theorem_mode}};
}

std::vector<double> alpha_sequence(std::span<const std::uint8_t> visited_pattern) {
  std::vector<double> out;
  out.reserve(visited_pattern.size());
  std::uint64_t count = 0;
  for (std::uint8_t chi : visited_pattern) {
    if (chi) {
      ++count;
      out.push_back(1.0 / static_cast<double>(count + 1));
    } else {
      out.push_back(0.0);
    }
  }
  return out;
}

bool AlphaAudit::passed() const {
  return !applicable || (count_mismatches == 0 && max_sum_alpha_sq <= kSumAlphaSqBound);
}

AlphaAuditor::AlphaAuditor(std::size_t n_edges) : counts_(n_edges, 0) {
  audit_.applicable = true;
  audit_.sum_alpha.assign(n_edges, 0.0);
  audit_.sum_alpha_sq.assign(n_edges, 0.0);
}

void AlphaAuditor::record(std::span<const std::uint8_t> visited,
                          std::span<const std::uint64_t> agent_counts) {
  ++audit_.episodes;
  bool mismatch = false;
  for (std::size_t e = 0; e < counts_.size(); ++e) {
    if (visited[e]) {
      ++counts_[e];
      const double alpha = 1.0 / static_cast<double>(counts_[e] + 1);
      audit_.sum_alpha[e] += alpha;
      audit_.sum_alpha_sq[e] += alpha * alpha;
      audit_.max_sum_alpha_sq = std::max(audit_.max_sum_alpha_sq, audit_.sum_alpha_sq[e]);
    }
    if (agent_counts[e] != counts_[e]) mismatch = true;
  }
  if (mismatch) ++audit_.count_mismatches;
}

AlphaAudit AlphaAuditor::result() const { return audit_; }

bool TrainingResult::audits_passed() const {
  for (const ReplicaResult& r : replicas) {
    if (!r.glie.passed() || !r.alpha.passed() || r.gap_violations != 0) return false;
  }
  return true;
}

double delta_max_norm(const Mdp& mdp, const Table& estimate, const Table& qstar) {
  double m = 0.0;
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    if (mdp.is_terminal(s)) continue;
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
      m = std::max(m, std::abs(estimate(s, a) - qstar(s, a)));
    }
  }
  return m;
}

bool policy_matches(const Mdp& mdp, const Table& estimate,
                    const std::vector<std::vector<std::size_t>>& optimal_sets) {
  const auto greedy = greedy_policy(estimate);
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    if (mdp.is_terminal(s)) continue;
    const auto& set = optimal_sets[s];
    if (std::find(set.begin(), set.end(), greedy[s]) == set.end()) return false;
  }
  return true;
}

namespace {

struct Evaluator {
  const Mdp& mdp;
  const Table& qstar;
  std::vector<std::vector<std::size_t>> optimal_sets;
  double half_gap = 0.0;

  Evaluator(const Mdp& m, const Table& q)
      : mdp(m), qstar(q), optimal_sets(optimal_action_sets(q)), half_gap(0.5 * min_action_gap(m, q)) {}
};

// Shared episode bookkeeping for both agent families.
struct EpisodeLoop {
  const ExperimentConfig& config;
  const Evaluator& eval;
  ReplicaResult& out;
  double window_min_prob = std::numeric_limits<double>::infinity();

  bool budget_left() const {
    return config.max_total_steps == 0 || out.total_steps < config.max_total_steps;
  }

  void finish_episode(std::size_t m, bool truncated, double beta, const Table& estimate, bool last) {
    out.episodes_run = m;
    if (truncated) ++out.truncated_episodes;
    const bool due = m % config.eval_every == 0 || last;
    if (!due) return;
    if (truncated && !config.include_truncated && !last) return;
    ReportRow row;
    row.replica = out.replica;
    row.episode = m;
    row.delta_max_norm = delta_max_norm(eval.mdp, estimate, eval.qstar);
    row.policy_match = policy_matches(eval.mdp, estimate, eval.optimal_sets);
    row.beta = beta;
    row.min_action_prob = std::isfinite(window_min_prob) ? window_min_prob : 1.0;
    row.truncated_episodes = out.truncated_episodes;
    row.seed = out.seed;
    if (row.delta_max_norm < eval.half_gap && !row.policy_match) ++out.gap_violations;
    out.rows.push_back(row);
    window_min_prob = std::numeric_limits<double>::infinity();
    if (last) {
      out.final_delta = row.delta_max_norm;
      out.final_policy_match = row.policy_match;
      out.final_estimate = estimate;
    }
  }
};

double min_of(const std::vector<double>& p) { return *std::min_element(p.begin(), p.end()); }

void run_ps_replica(const ExperimentConfig& config, const Mdp& mdp, const Evaluator& eval,
                    const PsParams& params, ReplicaResult& out) {
  Rng rng(out.seed);
  PsAgent agent(mdp, params);
  const std::size_t n_edges = mdp.n_states * mdp.n_actions;
  const bool first_visit = params.glow == GlowVariant::first_visit;
  const bool glie_audit = first_visit && params.policy == PolicyKind::softmax_htilde_glie &&
                          params.eta > 0.0;
  std::optional<AlphaAuditor> alphas;
  if (first_visit) alphas.emplace(n_edges);
  if (glie_audit) {
    out.glie.applicable = true;
    out.glie.bound_b = std::max(mdp.reward_bound / params.eta, std::abs(params.h0));
  }

  EpisodeLoop loop{config, eval, out};
  std::vector<std::uint8_t> chi(n_edges, 0);
  for (std::size_t m = 1; m <= config.episodes; ++m) {
    std::fill(chi.begin(), chi.end(), 0);
    std::size_t s = mdp.start_state;
    std::size_t steps = 0;
    double episode_min = std::numeric_limits<double>::infinity();
    while (!mdp.is_terminal(s) && steps < config.t_max && loop.budget_left()) {
      const auto p = agent.policy(s);
      episode_min = std::min(episode_min, min_of(p));
      const std::size_t a = sample_index(p, rng);
      const Transition tr = sample_step(mdp, s, a, rng);
      agent.update_step(s, a, tr.reward);
      chi[s * mdp.n_actions + a] = 1;
      s = tr.next_state;
      ++steps;
      ++out.total_steps;
    }
    const bool truncated = !mdp.is_terminal(s);
    const double beta = agent.beta();
    if (glie_audit && steps > 0) {
      const double bound =
          std::exp(-2.0 * out.glie.bound_b * beta) / static_cast<double>(mdp.n_actions);
      ++out.glie.episodes_checked;
      out.glie.min_ratio = std::min(out.glie.min_ratio, episode_min / bound);
      if (episode_min < bound * (1.0 - kGlieRelativeSlack)) {
        ++out.glie.violations;
        if (!out.glie.first_violation_episode) out.glie.first_violation_episode = m;
      }
    }
    loop.window_min_prob = std::min(loop.window_min_prob, episode_min);
    agent.end_episode();
    if (alphas) alphas->record(chi, agent.n_visits().data());
    const bool last = m == config.episodes || !loop.budget_left();
    loop.finish_episode(m, truncated, beta, agent.normalized_h(), last);
    if (last) break;
  }
  if (alphas) out.alpha = alphas->result();
}

void run_baseline_replica(const ExperimentConfig& config, const Mdp& mdp, const Evaluator& eval,
                          const BaselineParams& params, ReplicaResult& out) {
  Rng rng(out.seed);
  BaselineAgent agent(mdp, params);
  EpisodeLoop loop{config, eval, out};
  for (std::size_t m = 1; m <= config.episodes; ++m) {
    std::size_t s = mdp.start_state;
    std::size_t steps = 0;
    double episode_min = std::numeric_limits<double>::infinity();
    std::size_t a = mdp.is_terminal(s) ? 0 : agent.begin_episode(s, rng);
    while (!mdp.is_terminal(s) && steps < config.t_max && loop.budget_left()) {
      episode_min = std::min(episode_min, min_of(agent.policy(s)));
      const Transition tr = sample_step(mdp, s, a, rng);
      a = agent.observe(s, a, tr.reward, tr.next_state, rng);
      s = tr.next_state;
      ++steps;
      ++out.total_steps;
    }
    const bool truncated = !mdp.is_terminal(s);
    const double epsilon = agent.epsilon();
    loop.window_min_prob = std::min(loop.window_min_prob, episode_min);
    agent.end_episode();
    const bool last = m == config.episodes || !loop.budget_left();
    loop.finish_episode(m, truncated, epsilon, agent.table().q, last);
    if (last) break;
  }
}

}  // namespace

TrainingResult run_training(const ExperimentConfig& config, const Mdp& mdp, const QStarTable& qstar,
                            std::size_t agent_index) {
  if (agent_index >= config.agents.size()) throw std::out_of_range("agent index out of range");
  if (config.episodes < 1) throw ConfigError("episodes must be at least 1");
  if (config.replicas < 1) throw ConfigError("replicas must be at least 1");

  TrainingResult result;
  result.agent = config.agents[agent_index];
  if (result.agent.type == AgentType::ps) {
    result.resolved_ps = resolve_ps_params(result.agent, mdp);
    try {
      PsAgent probe(mdp, result.resolved_ps);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(result.agent.name + ": " + e.what());
    }
    result.theorem = theorem_condition_check(result.resolved_ps, mdp);
    result.tag = result.theorem->theorem_mode ? "theorem" : "outside-theorem";
  } else {
    result.tag = "baseline";
  }

  const Evaluator eval(mdp, qstar.values);
  result.replicas.resize(config.replicas);
  for (std::size_t i = 0; i < config.replicas; ++i) {
    result.replicas[i].replica = i;
    result.replicas[i].seed = config.base_seed + i;
  }

  std::size_t workers = config.threads;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, config.replicas);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= config.replicas) return;
      try {
        if (result.agent.type == AgentType::ps) {
          run_ps_replica(config, mdp, eval, result.resolved_ps, result.replicas[i]);
        } else {
          run_baseline_replica(config, mdp, eval, result.agent.baseline, result.replicas[i]);
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return result;
}

std::vector<Table> occupancy_probabilities(const Mdp& mdp, const Table& policy,
                                           std::size_t horizon) {
  if (policy.rows() != mdp.n_states || policy.cols() != mdp.n_actions) {
    throw std::invalid_argument("occupancy_probabilities: policy shape does not match the MDP");
  }
  std::vector<Table> out;
  out.reserve(horizon);
  std::vector<double> dist(mdp.n_states, 0.0);
  dist[mdp.start_state] = 1.0;
  for (std::size_t l = 1; l <= horizon; ++l) {
    Table p(mdp.n_states, mdp.n_actions, 0.0);
    std::vector<double> next(mdp.n_states, 0.0);
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
      for (std::size_t a = 0; a < mdp.n_actions; ++a) {
        p(s, a) = dist[s] * policy(s, a);
        for (const Outcome& o : mdp.outcomes(s, a)) next[o.next_state] += p(s, a) * o.probability;
      }
    }
    out.push_back(std::move(p));
    dist = std::move(next);
  }
  return out;
}

bool EnsembleRecord::passed() const {
  return std::all_of(edges.begin(), edges.end(), [](const EnsembleEdge& e) { return e.within; });
}

EnsembleRecord ensemble_average_experiment(const Mdp& mdp, const Table& policy,
                                           std::size_t n_agents, std::span<const double> rewards,
                                           double eta, double gamma_damp, std::uint64_t seed,
                                           double n_sigma) {
  if (n_agents < 2) throw std::invalid_argument("ensemble needs at least two agents");
  const std::size_t horizon = rewards.size();
  const std::size_t n_edges = mdp.n_states * mdp.n_actions;
  PsParams params;
  params.eta = eta;
  params.gamma_damp = gamma_damp;
  params.h0 = 0.0;
  params.h_eq = 0.0;
  params.glow = GlowVariant::accumulating;
  params.policy = PolicyKind::softmax_h;

  std::vector<double> mean(n_edges, 0.0);
  std::vector<double> m2(n_edges, 0.0);
  Rng rng(seed);
  for (std::size_t i = 0; i < n_agents; ++i) {
    PsAgent agent(mdp.n_states, mdp.n_actions, params);
    std::size_t s = mdp.start_state;
    for (std::size_t k = 0; k < horizon; ++k) {
      const std::size_t a = sample_index(policy.row(s), rng);
      agent.update_step(s, a, rewards[k]);
      s = sample_step(mdp, s, a, rng).next_state;
    }
    const double n = static_cast<double>(i + 1);
    for (std::size_t e = 0; e < n_edges; ++e) {
      const double x = agent.h().data()[e];
      const double d = x - mean[e];
      mean[e] += d / n;
      m2[e] += d * (x - mean[e]);
    }
  }

  const auto occupancy = occupancy_probabilities(mdp, policy, horizon);
  EnsembleRecord record;
  record.n_agents = n_agents;
  record.horizon = horizon;
  record.eta = eta;
  record.gamma_damp = gamma_damp;
  record.n_sigma = n_sigma;
  const double n = static_cast<double>(n_agents);
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
      const std::size_t e = s * mdp.n_actions + a;
      std::vector<double> p(horizon);
      for (std::size_t l = 0; l < horizon; ++l) p[l] = std::clamp(occupancy[l](s, a), 0.0, 1.0);
      EnsembleEdge edge;
      edge.state = s;
      edge.action = a;
      edge.empirical_mean = mean[e];
      edge.std_error = std::sqrt(m2[e] / (n - 1.0)) / std::sqrt(n);
      edge.analytic = ensemble_h_expected(p, rewards, eta, gamma_damp);
      edge.within = std::abs(edge.empirical_mean - edge.analytic) <=
                    n_sigma * edge.std_error + 1e-12 * (1.0 + std::abs(edge.analytic));
      record.edges.push_back(edge);
    }
  }
  return record;
}

nlohmann::json to_json(const EnsembleRecord& record) {
  nlohmann::json edges = nlohmann::json::array();
  for (const EnsembleEdge& e : record.edges) {
    edges.push_back({{"state", e.state},
                     {"action", e.action},
                     {"empirical_mean", e.empirical_mean},
                     {"std_error", e.std_error},
                     {"analytic", e.analytic},
                     {"within", e.within}});
  }
  return {{"n_agents", record.n_agents},
          {"horizon", record.horizon},
          {"eta", record.eta},
          {"gamma_damp", record.gamma_damp},
          {"n_sigma", record.n_sigma},
          {"edges", edges},
          {"passed", record.passed()}};
}

VisitSchedule random_schedule(Rng& rng, std::size_t max_horizon) {
  VisitSchedule sched;
  sched.horizon = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(max_horizon + 1));
  sched.horizon = std::min(sched.horizon, max_horizon);
  const double p_visit = uniform01(rng);
  for (std::size_t k = 1; k <= sched.horizon; ++k) {
    if (uniform01(rng) < p_visit) sched.visits.push_back(k);
    sched.rewards.push_back(2.0 * uniform01(rng) - 1.0);
  }
  return sched;
}

double replay_schedule(const VisitSchedule& schedule, const GlowSetting& setting, double fault) {
  PsParams params;
  params.eta = setting.eta;
  params.gamma_damp = setting.gamma_damp;
  params.h0 = setting.h0;
  params.h_eq = setting.h_eq;
  params.glow = setting.variant;
  params.glow_order_s = setting.order_s;
  params.policy = PolicyKind::softmax_h;
  PsAgent agent(1, 2, params);
  std::size_t next = 0;
  for (std::size_t k = 1; k <= schedule.horizon; ++k) {
    const bool visit = next < schedule.visits.size() && schedule.visits[next] == k;
    if (visit) ++next;
    agent.update_step(0, visit ? 0 : 1, schedule.rewards[k - 1] * (1.0 + fault));
  }
  return agent.h()(0, 0);
}

namespace {

double random_unit_param(Rng& rng) {
  const double u = uniform01(rng);
  if (u < 0.1) return 0.0;
  if (u < 0.2) return 1.0;
  return uniform01(rng);
}

}  // namespace

OracleSweepResult oracle_sweep(std::uint64_t seed, std::size_t cases, double tolerance,
                               double fault, std::size_t max_horizon) {
  OracleSweepResult result;
  result.tolerance = tolerance;
  Rng rng(seed);
  auto compare = [&](double got, double want, const std::string& what) {
    ++result.comparisons;
    const double dev = std::abs(got - want);
    if (!(dev <= tolerance)) ++result.failures;
    if (!(dev <= result.max_deviation)) {
      result.max_deviation = dev;
      result.worst = what;
    }
  };
  for (std::size_t c = 0; c < cases; ++c) {
    ++result.cases;
    const VisitSchedule sched = random_schedule(rng, max_horizon);
    GlowSetting base;
    base.eta = random_unit_param(rng);
    base.gamma_damp = uniform01(rng) < 0.2 ? 0.0 : 0.5 * uniform01(rng);
    base.h0 = 2.0 * uniform01(rng) - 1.0;
    base.h_eq = 2.0 * uniform01(rng) - 1.0;
    for (GlowVariant v : {GlowVariant::replacing, GlowVariant::accumulating, GlowVariant::first_visit}) {
      for (double s : {1.0, 1.0 - base.eta}) {
        GlowSetting setting = base;
        setting.variant = v;
        setting.order_s = s;
        std::ostringstream what;
        what << "case " << c << " " << to_string(v) << " s=" << format_double(s)
             << " T=" << sched.horizon;
        compare(replay_schedule(sched, setting, fault), closed_form_h(sched, setting), what.str());
        if (v == GlowVariant::replacing) {
          const double exp_h = experience_h(sched, setting);
          compare(experience_h_by_step(sched, setting), exp_h, what.str() + " by-step");
          compare(experience_h_regrouped(sched, setting), exp_h, what.str() + " regrouped");
        }
      }
    }
  }
  return result;
}

nlohmann::json to_json(const OracleSweepResult& r) {
  return {{"cases", r.cases},
          {"comparisons", r.comparisons},
          {"failures", r.failures},
          {"max_deviation", r.max_deviation},
          {"tolerance", r.tolerance},
          {"worst", r.worst},
          {"passed", r.passed()}};
}

}  // namespace psrl
