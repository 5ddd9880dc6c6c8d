#include "psrl/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace psrl {

namespace {

constexpr int kSnapshotSchema = 1;

double row_max(const Table& q, std::size_t s) {
  const auto row = q.row(s);
  return *std::max_element(row.begin(), row.end());
}

}  // namespace

QTable::QTable(std::size_t n_states, std::size_t n_actions, double alpha_, double gamma_dis_,
               double lambda_tra_, std::vector<bool> terminal_)
    : q(n_states, n_actions, 0.0),
      alpha(alpha_),
      gamma_dis(gamma_dis_),
      lambda_tra(lambda_tra_),
      terminal(std::move(terminal_)) {
  if (!terminal.empty() && terminal.size() != n_states) {
    throw std::invalid_argument("QTable: terminal mask has the wrong length");
  }
}

double td_error(const QTable& q, std::size_t s, std::size_t a, double r, std::size_t s_next,
                std::size_t a_next) {
  const double next = q.is_terminal(s_next) ? 0.0 : q.q(s_next, a_next);
  return r + q.gamma_dis * next - q.q(s, a);
}

void sarsa_lambda_step(QTable& q, TraceMatrix& z, std::size_t s, std::size_t a, double r,
                       std::size_t s_next, std::size_t a_next) {
  const double delta = td_error(q, s, a, r, s_next, a_next);
  const double decay = q.gamma_dis * q.lambda_tra;
  for (double& x : z.z.data()) x *= decay;
  z.z(s, a) += 1.0;
  for (std::size_t i = 0; i < q.q.size(); ++i) {
    const double zi = z.z.data()[i];
    if (zi != 0.0) q.q.data()[i] += q.alpha * delta * zi;
  }
}

void sarsa_step(QTable& q, std::size_t s, std::size_t a, double r, std::size_t s_next,
                std::size_t a_next) {
  const double delta = td_error(q, s, a, r, s_next, a_next);
  q.q(s, a) += q.alpha * delta;
}

void q_learning_step(QTable& q, std::size_t s, std::size_t a, double r, std::size_t s_next) {
  const double next = q.is_terminal(s_next) ? 0.0 : row_max(q.q, s_next);
  const double target = r + q.gamma_dis * next;
  q.q(s, a) = (1.0 - q.alpha) * q.q(s, a) + q.alpha * target;
}

void ps_style_sarsa_step(Table& h, Table& g, std::size_t s, std::size_t a, double r_next,
                         double lambda_tra, double alpha, double gamma_dis) {
  if (!(lambda_tra > 0.0)) throw std::invalid_argument("ps_style_sarsa_step needs lambda_tra > 0");
  const double decay = gamma_dis * lambda_tra;
  for (double& x : g.data()) x *= decay;
  g(s, a) += 1.0;
  const double h_sa = h(s, a);
  const double inv = 1.0 / lambda_tra;
  const std::size_t visit = s * h.cols() + a;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double gi = g.data()[i];
    const double local = (i == visit ? inv : 0.0) + (1.0 - inv) * gi;
    h.data()[i] += alpha * r_next * gi - alpha * h_sa * local;
  }
}

std::size_t argmax_lowest(std::span<const double> row) {
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

std::vector<double> epsilon_greedy_distribution(std::span<const double> row, double epsilon) {
  const double n = static_cast<double>(row.size());
  std::vector<double> p(row.size(), epsilon / n);
  p[argmax_lowest(row)] += 1.0 - epsilon;
  return p;
}

std::size_t epsilon_greedy(std::span<const double> row, double epsilon, Rng& rng) {
  if (uniform01(rng) < epsilon) {
    const auto pick = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(row.size()));
    return std::min(pick, row.size() - 1);
  }
  return argmax_lowest(row);
}

std::string to_string(BaselineKind k) {
  return k == BaselineKind::sarsa_lambda ? "sarsa_lambda" : "q_learning";
}

std::string to_string(AlphaSchedule s) {
  return s == AlphaSchedule::constant ? "constant" : "inverse_count";
}

BaselineKind baseline_kind_from_string(const std::string& name) {
  if (name == "sarsa_lambda") return BaselineKind::sarsa_lambda;
  if (name == "q_learning") return BaselineKind::q_learning;
  throw std::invalid_argument("unknown baseline kind '" + name + "'");
}

AlphaSchedule alpha_schedule_from_string(const std::string& name) {
  if (name == "constant") return AlphaSchedule::constant;
  if (name == "inverse_count") return AlphaSchedule::inverse_count;
  throw std::invalid_argument("unknown alpha schedule '" + name + "'");
}

void validate_params(const BaselineParams& p) {
  if (!(p.alpha > 0.0 && p.alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
  if (!(p.epsilon >= 0.0 && p.epsilon <= 1.0)) {
    throw std::invalid_argument("epsilon must lie in [0, 1]");
  }
  if (!(p.lambda_tra >= 0.0 && p.lambda_tra <= 1.0)) {
    throw std::invalid_argument("lambda_tra must lie in [0, 1]");
  }
  if (!std::isfinite(p.q0)) throw std::invalid_argument("q0 must be finite");
}

nlohmann::json to_json(const BaselineParams& p) {
  return {{"kind", to_string(p.kind)},
          {"alpha", p.alpha},
          {"alpha_schedule", to_string(p.alpha_schedule)},
          {"epsilon", p.epsilon},
          {"epsilon_decay", p.epsilon_decay},
          {"lambda_tra", p.lambda_tra},
          {"q0", p.q0}};
}

BaselineParams baseline_params_from_json(const nlohmann::json& doc) {
  BaselineParams p;
  p.kind = baseline_kind_from_string(doc.at("kind").get<std::string>());
  p.alpha = doc.at("alpha").get<double>();
  p.alpha_schedule = alpha_schedule_from_string(doc.at("alpha_schedule").get<std::string>());
  p.epsilon = doc.at("epsilon").get<double>();
  p.epsilon_decay = doc.at("epsilon_decay").get<bool>();
  p.lambda_tra = doc.at("lambda_tra").get<double>();
  p.q0 = doc.at("q0").get<double>();
  return p;
}

BaselineAgent::BaselineAgent(const Mdp& mdp, BaselineParams params)
    : params_(params),
      q_(mdp.n_states, mdp.n_actions, params.alpha, mdp.gamma_dis, params.lambda_tra,
         mdp.terminal_mask()),
      z_(mdp.n_states, mdp.n_actions),
      n_(mdp.n_states, mdp.n_actions, 0) {
  validate_params(params_);
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    if (mdp.is_terminal(s)) continue;
    for (double& x : q_.q.row(s)) x = params_.q0;
  }
}

double BaselineAgent::epsilon() const {
  return params_.epsilon_decay ? params_.epsilon / static_cast<double>(episode_)
                               : params_.epsilon;
}

std::vector<double> BaselineAgent::policy(std::size_t s) const {
  return epsilon_greedy_distribution(q_.q.row(s), epsilon());
}

std::size_t BaselineAgent::choose(std::size_t s, Rng& rng) const {
  return epsilon_greedy(q_.q.row(s), epsilon(), rng);
}

std::size_t BaselineAgent::begin_episode(std::size_t s, Rng& rng) {
  z_.reset();
  return choose(s, rng);
}

std::size_t BaselineAgent::observe(std::size_t s, std::size_t a, double r, std::size_t s_next,
                                   Rng& rng) {
  const std::uint64_t count = ++n_(s, a);
  if (params_.alpha_schedule == AlphaSchedule::inverse_count) {
    q_.alpha = 1.0 / static_cast<double>(count);
  }
  const bool done = q_.is_terminal(s_next);
  if (params_.kind == BaselineKind::sarsa_lambda) {
    const std::size_t a_next = done ? 0 : choose(s_next, rng);
    sarsa_lambda_step(q_, z_, s, a, r, s_next, a_next);
    return a_next;
  }
  q_learning_step(q_, s, a, r, s_next);
  return done ? 0 : choose(s_next, rng);
}

void BaselineAgent::end_episode() {
  z_.reset();
  ++episode_;
}

nlohmann::json BaselineAgent::snapshot() const {
  return {{"schema_version", kSnapshotSchema},
          {"kind", "baseline"},
          {"params", to_json(params_)},
          {"n_states", q_.q.rows()},
          {"n_actions", q_.q.cols()},
          {"episode_index", episode_},
          {"q", q_.q.data()},
          {"z", z_.z.data()},
          {"N", n_.data()}};
}

}  // namespace psrl
