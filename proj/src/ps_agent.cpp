#include "psrl/ps_agent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace psrl {

namespace {

constexpr int kSnapshotSchema = 1;

bool in_unit_interval(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

std::string to_string(GlowVariant v) {
  switch (v) {
    case GlowVariant::replacing:
      return "replacing";
    case GlowVariant::accumulating:
      return "accumulating";
    case GlowVariant::first_visit:
      return "first_visit";
  }
  return "?";
}

std::string to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::linear_h:
      return "linear_h";
    case PolicyKind::softmax_h:
      return "softmax_h";
    case PolicyKind::softmax_htilde_glie:
      return "softmax_htilde_glie";
  }
  return "?";
}

GlowVariant glow_variant_from_string(const std::string& name) {
  if (name == "replacing") return GlowVariant::replacing;
  if (name == "accumulating") return GlowVariant::accumulating;
  if (name == "first_visit") return GlowVariant::first_visit;
  throw std::invalid_argument("unknown glow variant '" + name + "'");
}

PolicyKind policy_kind_from_string(const std::string& name) {
  if (name == "linear_h") return PolicyKind::linear_h;
  if (name == "softmax_h") return PolicyKind::softmax_h;
  if (name == "softmax_htilde_glie") return PolicyKind::softmax_htilde_glie;
  throw std::invalid_argument("unknown policy kind '" + name + "'");
}

void validate_params(const PsParams& p) {
  if (!in_unit_interval(p.eta)) throw std::invalid_argument("eta must lie in [0, 1]");
  if (!in_unit_interval(p.gamma_damp)) {
    throw std::invalid_argument("gamma_damp must lie in [0, 1]");
  }
  if (!std::isfinite(p.h0) || !std::isfinite(p.h_eq)) {
    throw std::invalid_argument("h0 and h_eq must be finite");
  }
  if (!std::isfinite(p.glow_order_s)) throw std::invalid_argument("glow_order_s must be finite");
  if (!(p.beta_fixed >= 0.0) || !std::isfinite(p.beta_fixed)) {
    throw std::invalid_argument("beta_fixed must be finite and non-negative");
  }
  if (!(p.glie_c > 0.0) || !std::isfinite(p.glie_c)) {
    throw std::invalid_argument("glie_c must be finite and positive");
  }
  if (p.policy == PolicyKind::linear_h && (p.h0 < 0.0 || p.h_eq < 0.0)) {
    throw std::invalid_argument("linear_h policy requires h0 >= 0 and h_eq >= 0");
  }
}

nlohmann::json to_json(const PsParams& p) {
  return {{"eta", p.eta},
          {"gamma_damp", p.gamma_damp},
          {"h_eq", p.h_eq},
          {"h0", p.h0},
          {"glow", to_string(p.glow)},
          {"glow_order_s", p.glow_order_s},
          {"policy", to_string(p.policy)},
          {"beta_fixed", p.beta_fixed},
          {"glie_c", p.glie_c},
          {"reset_glow_every_episode", p.reset_glow_every_episode}};
}

PsParams ps_params_from_json(const nlohmann::json& doc) {
  PsParams p;
  p.eta = doc.at("eta").get<double>();
  p.gamma_damp = doc.at("gamma_damp").get<double>();
  p.h_eq = doc.at("h_eq").get<double>();
  p.h0 = doc.at("h0").get<double>();
  p.glow = glow_variant_from_string(doc.at("glow").get<std::string>());
  p.glow_order_s = doc.at("glow_order_s").get<double>();
  p.policy = policy_kind_from_string(doc.at("policy").get<std::string>());
  p.beta_fixed = doc.at("beta_fixed").get<double>();
  p.glie_c = doc.at("glie_c").get<double>();
  p.reset_glow_every_episode = doc.at("reset_glow_every_episode").get<bool>();
  return p;
}

double glie_beta(std::size_t m, double c) {
  if (m < 1) throw std::invalid_argument("glie_beta: episode index starts at 1");
  return c * std::log(static_cast<double>(m) + 1.0);
}

double adaptive_alpha_update(double alpha, bool visited) {
  return visited ? alpha / (1.0 + alpha) : alpha;
}

std::vector<double> policy_distribution(std::span<const double> row, PolicyKind kind,
                                        double beta) {
  std::vector<double> p(row.begin(), row.end());
  if (p.empty()) return p;
  if (kind == PolicyKind::linear_h) {
    double total = 0.0;
    for (double x : p) {
      if (x < 0.0) throw std::domain_error("linear policy on a negative h-value");
      total += x;
    }
    if (total == 0.0) {
      std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(p.size()));
      return p;
    }
    for (double& x : p) x /= total;
    return p;
  }
  // Shifting by the row maximum leaves the distribution unchanged.
  const double top = *std::max_element(p.begin(), p.end());
  double total = 0.0;
  for (double& x : p) {
    x = std::exp(beta * (x - top));
    total += x;
  }
  for (double& x : p) x /= total;
  return p;
}

PsAgent::PsAgent(std::size_t n_states, std::size_t n_actions, PsParams params,
                 std::vector<std::size_t> terminal_states)
    : params_(params),
      terminal_(n_states, false),
      h_(n_states, n_actions, params.h0),
      g_(n_states, n_actions, 0.0),
      n_(n_states, n_actions, 0),
      visited_(n_states, n_actions, 0) {
  validate_params(params_);
  if (n_states == 0 || n_actions == 0) {
    throw std::invalid_argument("PsAgent needs at least one state and one action");
  }
  if (params_.glow == GlowVariant::first_visit) params_.gamma_damp = 0.0;
  for (std::size_t t : terminal_states) {
    if (t >= n_states) throw std::out_of_range("terminal state out of range");
    terminal_[t] = true;
    for (double& x : h_.row(t)) x = 0.0;
  }
  beta_ = current_beta();
}

namespace {

PsParams checked_for(const Mdp& mdp, PsParams params) {
  if (params.policy == PolicyKind::linear_h) {
    for (const auto& list : mdp.transitions) {
      for (const Outcome& o : list) {
        if (o.reward < 0.0) {
          throw std::invalid_argument("linear_h policy requires non-negative rewards");
        }
      }
    }
  }
  return params;
}

}  // namespace

PsAgent::PsAgent(const Mdp& mdp, PsParams params)
    : PsAgent(mdp.n_states, mdp.n_actions, checked_for(mdp, params), mdp.terminal_states) {}

double PsAgent::current_beta() const {
  switch (params_.policy) {
    case PolicyKind::linear_h:
      return 0.0;
    case PolicyKind::softmax_h:
      return params_.beta_fixed;
    case PolicyKind::softmax_htilde_glie:
      return glie_beta(episode_, params_.glie_c);
  }
  return 0.0;
}

std::span<const double> PsAgent::policy_row(std::size_t s, std::vector<double>& scratch) const {
  if (params_.policy != PolicyKind::softmax_htilde_glie) return h_.row(s);
  scratch.resize(h_.cols());
  for (std::size_t a = 0; a < h_.cols(); ++a) {
    scratch[a] = h_(s, a) / (static_cast<double>(n_(s, a)) + 1.0);
  }
  return scratch;
}

std::vector<double> PsAgent::policy(std::size_t s) const {
  if (s >= n_states()) throw std::out_of_range("state out of range");
  if (terminal_[s]) throw std::invalid_argument("no action selection in a terminal state");
  std::vector<double> scratch;
  return policy_distribution(policy_row(s, scratch), params_.policy, beta_);
}

std::size_t PsAgent::select_action(std::size_t s, Rng& rng) const {
  const auto p = policy(s);
  return sample_index(p, rng);
}

void PsAgent::update_step(std::size_t s, std::size_t a, double reward) {
  if (s >= n_states() || a >= n_actions()) throw std::out_of_range("edge out of range");
  if (terminal_[s]) throw std::invalid_argument("update_step from a terminal state");

  const double keep = 1.0 - params_.eta;
  const double order = params_.glow_order_s;
  for (double& x : g_.data()) x *= keep;
  switch (params_.glow) {
    case GlowVariant::replacing:
      g_(s, a) = order;
      ++n_(s, a);
      break;
    case GlowVariant::accumulating:
      g_(s, a) += order;
      ++n_(s, a);
      break;
    case GlowVariant::first_visit:
      if (!visited_(s, a)) {
        g_(s, a) += order;
        ++n_(s, a);
      }
      break;
  }
  visited_(s, a) = 1;

  const double damp = params_.gamma_damp;
  const double h_eq = params_.h_eq;
  for (std::size_t i = 0; i < n_states(); ++i) {
    if (terminal_[i]) continue;
    auto hr = h_.row(i);
    const auto gr = g_.row(i);
    for (std::size_t j = 0; j < hr.size(); ++j) {
      hr[j] = hr[j] - damp * (hr[j] - h_eq) + gr[j] * reward;
    }
  }
}

void PsAgent::end_episode() {
  if (params_.glow == GlowVariant::first_visit || params_.reset_glow_every_episode) {
    g_.fill(0.0);
  }
  visited_.fill(0);
  ++episode_;
  beta_ = current_beta();
}

Table PsAgent::normalized_h() const {
  Table out(h_.rows(), h_.cols());
  for (std::size_t i = 0; i < h_.size(); ++i) {
    out.data()[i] = h_.data()[i] / (static_cast<double>(n_.data()[i]) + 1.0);
  }
  return out;
}

nlohmann::json PsAgent::snapshot() const {
  std::vector<std::size_t> terminals;
  for (std::size_t s = 0; s < terminal_.size(); ++s) {
    if (terminal_[s]) terminals.push_back(s);
  }
  return {{"schema_version", kSnapshotSchema},
          {"kind", "ps"},
          {"params", to_json(params_)},
          {"n_states", n_states()},
          {"n_actions", n_actions()},
          {"terminal_states", terminals},
          {"episode_index", episode_},
          {"beta", beta_},
          {"h", h_.data()},
          {"g", g_.data()},
          {"N", n_.data()},
          {"visited", visited_.data()}};
}

PsAgent PsAgent::from_snapshot(const nlohmann::json& doc) {
  if (doc.at("schema_version").get<int>() != kSnapshotSchema) {
    throw std::invalid_argument("unsupported agent snapshot schema");
  }
  PsAgent agent(doc.at("n_states").get<std::size_t>(), doc.at("n_actions").get<std::size_t>(),
                ps_params_from_json(doc.at("params")),
                doc.at("terminal_states").get<std::vector<std::size_t>>());
  auto load = [&](const char* key, auto& matrix) {
    using T = typename std::decay_t<decltype(matrix.data())>::value_type;
    auto values = doc.at(key).get<std::vector<T>>();
    if (values.size() != matrix.size()) {
      throw std::invalid_argument(std::string("snapshot matrix '") + key + "' has wrong size");
    }
    matrix.data() = std::move(values);
  };
  load("h", agent.h_);
  load("g", agent.g_);
  load("N", agent.n_);
  load("visited", agent.visited_);
  agent.episode_ = doc.at("episode_index").get<std::size_t>();
  agent.beta_ = doc.at("beta").get<double>();
  return agent;
}

}  // namespace psrl
