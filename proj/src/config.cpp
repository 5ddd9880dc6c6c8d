#include "psrl/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace psrl {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

std::string at_path(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

double get_real(const json& obj, const std::string& key, const std::string& where,
                std::optional<double> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError("missing key '" + at_path(where, key) + "'");
  }
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(at_path(where, key) + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(at_path(where, key) + " must be finite");
  return x;
}

std::uint64_t get_count(const json& obj, const std::string& key, const std::string& where,
                        std::optional<std::uint64_t> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError("missing key '" + at_path(where, key) + "'");
  }
  const json& v = obj.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (x >= 0.0 && x < 1.8e19 && std::floor(x) == x) return static_cast<std::uint64_t>(x);
  }
  throw ConfigError(at_path(where, key) + " must be a non-negative integer");
}

bool get_bool(const json& obj, const std::string& key, const std::string& where, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(at_path(where, key) + " must be true or false");
  return v.get<bool>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& where,
                       std::optional<std::string> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError("missing key '" + at_path(where, key) + "'");
  }
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(at_path(where, key) + " must be a string");
  return v.get<std::string>();
}

bool is_count(const json& v) {
  return v.is_number_integer() && v.get<std::int64_t>() >= 0;
}

Cell get_cell(const json& obj, const std::string& key, const std::string& where, Cell fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() != 2 || !is_count(v[0]) || !is_count(v[1])) {
    throw ConfigError(at_path(where, key) + " must be [x, y] with non-negative integers");
  }
  return Cell{v[0].get<std::size_t>(), v[1].get<std::size_t>()};
}

PsParams parse_ps_params(const json& obj, const std::string& where, bool& glie_c_auto) {
  check_keys(obj,
             {"eta", "gamma_damp", "h_eq", "h0", "glow", "glow_order_s", "policy", "beta_fixed",
              "glie_c", "reset_glow_every_episode"},
             where);
  const PsParams d;
  PsParams p;
  p.eta = get_real(obj, "eta", where, d.eta);
  p.gamma_damp = get_real(obj, "gamma_damp", where, d.gamma_damp);
  p.h_eq = get_real(obj, "h_eq", where, d.h_eq);
  p.h0 = get_real(obj, "h0", where, d.h0);
  p.glow_order_s = get_real(obj, "glow_order_s", where, d.glow_order_s);
  p.beta_fixed = get_real(obj, "beta_fixed", where, d.beta_fixed);
  p.reset_glow_every_episode =
      get_bool(obj, "reset_glow_every_episode", where, d.reset_glow_every_episode);
  try {
    p.glow = glow_variant_from_string(get_string(obj, "glow", where, to_string(d.glow)));
    p.policy = policy_kind_from_string(get_string(obj, "policy", where, to_string(d.policy)));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  glie_c_auto = true;
  if (obj.contains("glie_c")) {
    const json& v = obj.at("glie_c");
    if (v.is_string()) {
      if (v.get<std::string>() != "auto") {
        throw ConfigError(at_path(where, "glie_c") + " must be a number or \"auto\"");
      }
    } else {
      p.glie_c = get_real(obj, "glie_c", where);
      glie_c_auto = false;
    }
  }
  try {
    validate_params(p);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return p;
}

BaselineParams parse_baseline_params(const json& obj, const std::string& where) {
  check_keys(obj,
             {"kind", "alpha", "alpha_schedule", "epsilon", "epsilon_decay", "lambda_tra", "q0"},
             where);
  const BaselineParams d;
  BaselineParams p;
  try {
    p.kind = baseline_kind_from_string(get_string(obj, "kind", where, to_string(d.kind)));
    p.alpha_schedule = alpha_schedule_from_string(
        get_string(obj, "alpha_schedule", where, to_string(d.alpha_schedule)));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  p.alpha = get_real(obj, "alpha", where, d.alpha);
  p.epsilon = get_real(obj, "epsilon", where, d.epsilon);
  p.epsilon_decay = get_bool(obj, "epsilon_decay", where, d.epsilon_decay);
  p.lambda_tra = get_real(obj, "lambda_tra", where, d.lambda_tra);
  p.q0 = get_real(obj, "q0", where, d.q0);
  try {
    validate_params(p);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return p;
}

json ps_params_echo(const AgentSpec& spec) {
  json out = to_json(spec.ps);
  if (spec.glie_c_auto) out["glie_c"] = "auto";
  return out;
}

json normalized_mdp_spec(const json& spec) {
  const std::string where = "mdp";
  if (!spec.is_object()) throw ConfigError("mdp must be a JSON object");
  const std::string kind = get_string(spec, "kind", where);
  json out;
  if (kind == "chain") {
    check_keys(spec, {"kind", "n", "step_reward", "goal_reward", "gamma_dis", "augment"}, where);
    out = {{"kind", kind},
           {"n", get_count(spec, "n", where)},
           {"step_reward", get_real(spec, "step_reward", where, 0.0)},
           {"goal_reward", get_real(spec, "goal_reward", where, 1.0)},
           {"gamma_dis", get_real(spec, "gamma_dis", where)}};
  } else if (kind == "gridworld") {
    check_keys(spec,
               {"kind", "width", "height", "walls", "start", "goal", "step_reward", "goal_reward",
                "gamma_dis", "slip_prob", "augment"},
               where);
    const GridSpec d;
    json walls = json::array();
    if (spec.contains("walls")) {
      if (!spec.at("walls").is_array()) throw ConfigError("mdp.walls must be an array of [x, y]");
      for (std::size_t i = 0; i < spec.at("walls").size(); ++i) {
        const json holder = {{"cell", spec.at("walls")[i]}};
        const Cell c = get_cell(holder, "cell", "mdp.walls[" + std::to_string(i) + "]", {});
        walls.push_back({c.x, c.y});
      }
    }
    const Cell start = get_cell(spec, "start", where, d.start);
    const Cell goal = get_cell(spec, "goal", where, d.goal);
    out = {{"kind", kind},
           {"width", get_count(spec, "width", where, d.width)},
           {"height", get_count(spec, "height", where, d.height)},
           {"walls", walls},
           {"start", {start.x, start.y}},
           {"goal", {goal.x, goal.y}},
           {"step_reward", get_real(spec, "step_reward", where, d.step_reward)},
           {"goal_reward", get_real(spec, "goal_reward", where, d.goal_reward)},
           {"gamma_dis", get_real(spec, "gamma_dis", where, d.gamma_dis)},
           {"slip_prob", get_real(spec, "slip_prob", where, d.slip_prob)}};
  } else if (kind == "two_state") {
    check_keys(spec, {"kind", "gamma_dis", "augment"}, where);
    out = {{"kind", kind}, {"gamma_dis", get_real(spec, "gamma_dis", where)}};
  } else if (kind == "file") {
    check_keys(spec, {"kind", "path", "augment"}, where);
    out = {{"kind", kind}, {"path", get_string(spec, "path", where)}};
  } else {
    throw ConfigError("mdp.kind must be chain, gridworld, two_state or file, not '" + kind +
                      "'");
  }
  json augment = json::array();
  if (spec.contains("augment")) {
    if (!spec.at("augment").is_array()) throw ConfigError("mdp.augment must be an array");
    for (std::size_t i = 0; i < spec.at("augment").size(); ++i) {
      const json& entry = spec.at("augment")[i];
      const std::string w = "mdp.augment[" + std::to_string(i) + "]";
      check_keys(entry, {"state", "action", "p_T"}, w);
      augment.push_back({{"state", get_count(entry, "state", w)},
                         {"action", get_count(entry, "action", w)},
                         {"p_T", get_real(entry, "p_T", w)}});
    }
  }
  out["augment"] = augment;
  return out;
}

}  // namespace

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;
  }

  json* node = &doc;
  std::stringstream parts(key);
  std::string part;
  std::vector<std::string> segments;
  while (std::getline(parts, part, '.')) {
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty segment");
    segments.push_back(part);
  }
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const std::string& seg = segments[i];
    const bool last = i + 1 == segments.size();
    if (node->is_array()) {
      std::size_t index = 0;
      try {
        std::size_t used = 0;
        index = std::stoul(seg, &used);
        if (used != seg.size()) throw std::invalid_argument(seg);
      } catch (const std::exception&) {
        throw ConfigError("override key '" + key + "': '" + seg + "' is not an array index");
      }
      if (index >= node->size()) {
        throw ConfigError("override key '" + key + "': index " + seg + " out of range");
      }
      node = &(*node)[index];
    } else if (node->is_object() || node->is_null()) {
      node = &(*node)[seg];
    } else {
      throw ConfigError("override key '" + key + "': cannot descend into a scalar");
    }
    if (last) *node = value;
  }
}

ExperimentConfig parse_config(const json& doc, std::filesystem::path base_dir) {
  check_keys(doc,
             {"schema_version", "mdp", "agents", "episodes", "t_max", "base_seed", "replicas",
              "eval_every", "max_total_steps", "include_truncated", "threads", "solver"},
             "config");
  ExperimentConfig c;
  c.base_dir = std::move(base_dir);
  const auto version = get_count(doc, "schema_version", "", kConfigSchemaVersion);
  if (version != static_cast<std::uint64_t>(kConfigSchemaVersion)) {
    throw ConfigError("unsupported schema_version " + std::to_string(version));
  }
  if (!doc.contains("mdp")) throw ConfigError("missing key 'mdp'");
  c.mdp = normalized_mdp_spec(doc.at("mdp"));

  if (!doc.contains("agents") || !doc.at("agents").is_array() || doc.at("agents").empty()) {
    throw ConfigError("'agents' must be a non-empty array");
  }
  const json& agents = doc.at("agents");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::string where = "agents[" + std::to_string(i) + "]";
    const json& entry = agents[i];
    check_keys(entry, {"name", "type", "params"}, where);
    AgentSpec spec;
    spec.name = get_string(entry, "name", where);
    if (spec.name.empty()) throw ConfigError(where + ".name must not be empty");
    const std::string type = get_string(entry, "type", where);
    const json params = entry.contains("params") ? entry.at("params") : json::object();
    if (type == "ps") {
      spec.type = AgentType::ps;
      spec.ps = parse_ps_params(params, where + ".params", spec.glie_c_auto);
    } else if (type == "baseline") {
      spec.type = AgentType::baseline;
      spec.baseline = parse_baseline_params(params, where + ".params");
    } else {
      throw ConfigError(where + ".type must be ps or baseline, not '" + type + "'");
    }
    c.agents.push_back(std::move(spec));
  }

  c.episodes = get_count(doc, "episodes", "", c.episodes);
  c.t_max = get_count(doc, "t_max", "", c.t_max);
  c.base_seed = get_count(doc, "base_seed", "", c.base_seed);
  c.replicas = get_count(doc, "replicas", "", c.replicas);
  c.eval_every = get_count(doc, "eval_every", "", c.eval_every);
  c.max_total_steps = get_count(doc, "max_total_steps", "", c.max_total_steps);
  c.include_truncated = get_bool(doc, "include_truncated", "", c.include_truncated);
  c.threads = get_count(doc, "threads", "", c.threads);
  if (doc.contains("solver")) {
    const json& s = doc.at("solver");
    check_keys(s, {"tol", "max_iters"}, "solver");
    c.solver.tol = get_real(s, "tol", "solver", c.solver.tol);
    c.solver.max_iters = get_count(s, "max_iters", "solver", c.solver.max_iters);
  }
  if (c.episodes < 1) throw ConfigError("episodes must be at least 1");
  if (c.replicas < 1) throw ConfigError("replicas must be at least 1");
  if (c.t_max < 1) throw ConfigError("t_max must be at least 1");
  if (c.eval_every < 1) throw ConfigError("eval_every must be at least 1");
  if (!(c.solver.tol > 0.0)) throw ConfigError("solver.tol must be positive");
  return c;
}

json to_json(const ExperimentConfig& c) {
  json agents = json::array();
  for (const AgentSpec& a : c.agents) {
    if (a.type == AgentType::ps) {
      agents.push_back({{"name", a.name}, {"type", "ps"}, {"params", ps_params_echo(a)}});
    } else {
      agents.push_back({{"name", a.name}, {"type", "baseline"}, {"params", to_json(a.baseline)}});
    }
  }
  return {{"schema_version", c.schema_version},
          {"mdp", c.mdp},
          {"agents", agents},
          {"episodes", c.episodes},
          {"t_max", c.t_max},
          {"base_seed", c.base_seed},
          {"replicas", c.replicas},
          {"eval_every", c.eval_every},
          {"max_total_steps", c.max_total_steps},
          {"include_truncated", c.include_truncated},
          {"threads", c.threads},
          {"solver", {{"tol", c.solver.tol}, {"max_iters", c.solver.max_iters}}}};
}

Mdp build_mdp(const json& raw, const std::filesystem::path& base_dir) {
  const json spec = normalized_mdp_spec(raw);
  const std::string kind = spec.at("kind").get<std::string>();
  Mdp mdp;
  try {
    if (kind == "chain") {
      mdp = make_chain(spec.at("n").get<std::size_t>(), spec.at("step_reward").get<double>(),
                       spec.at("goal_reward").get<double>(), spec.at("gamma_dis").get<double>());
    } else if (kind == "gridworld") {
      GridSpec g;
      g.width = spec.at("width").get<std::size_t>();
      g.height = spec.at("height").get<std::size_t>();
      for (const json& w : spec.at("walls")) g.walls.insert({w[0].get<std::size_t>(), w[1].get<std::size_t>()});
      g.start = {spec.at("start")[0].get<std::size_t>(), spec.at("start")[1].get<std::size_t>()};
      g.goal = {spec.at("goal")[0].get<std::size_t>(), spec.at("goal")[1].get<std::size_t>()};
      g.step_reward = spec.at("step_reward").get<double>();
      g.goal_reward = spec.at("goal_reward").get<double>();
      g.gamma_dis = spec.at("gamma_dis").get<double>();
      g.slip_prob = spec.at("slip_prob").get<double>();
      mdp = make_gridworld(g);
    } else if (kind == "two_state") {
      mdp = make_two_state_recurrent(spec.at("gamma_dis").get<double>());
    } else {
      std::filesystem::path path = spec.at("path").get<std::string>();
      if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
      mdp = load_mdp(path);
    }
    for (const json& aug : spec.at("augment")) {
      mdp = attach_terminal(mdp, aug.at("state").get<std::size_t>(),
                            aug.at("action").get<std::size_t>(), aug.at("p_T").get<double>());
    }
  } catch (const MdpFormatError& e) {
    throw ConfigError(e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("mdp: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw ConfigError(std::string("mdp: ") + e.what());
  }
  const auto violations = validate(mdp);
  if (!violations.empty()) throw ConfigError("mdp: " + violations.front());
  return mdp;
}

double default_glie_c(const Mdp& mdp) {
  if (!(mdp.gamma_dis < 1.0)) {
    throw ConfigError("glie_c \"auto\" needs gamma_dis < 1; give glie_c explicitly");
  }
  if (!(mdp.reward_bound > 0.0)) {
    throw ConfigError("glie_c \"auto\" needs a positive reward_bound; give glie_c explicitly");
  }
  const double bound = mdp.reward_bound / (1.0 - mdp.gamma_dis);
  return 1.0 / (2.0 * static_cast<double>(mdp.n_nonterminal()) * bound);
}

PsParams resolve_ps_params(const AgentSpec& spec, const Mdp& mdp) {
  PsParams p = spec.ps;
  if (spec.glie_c_auto && p.policy == PolicyKind::softmax_htilde_glie) p.glie_c = default_glie_c(mdp);
  return p;
}

}  // namespace psrl
