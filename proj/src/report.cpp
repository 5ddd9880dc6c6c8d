#include "psrl/report.hpp"

#include <algorithm>
#include <cmath>

#include "psrl/format.hpp"

namespace psrl {

namespace {

constexpr const char* kColumns =
    "replica,episode,delta_max_norm,policy_match,beta,min_action_prob,truncated_episodes,seed";

void write_row(std::ostream& out, const ReportRow& r) {
  out << r.replica << ',' << r.episode << ',' << format_double(r.delta_max_norm) << ','
      << (r.policy_match ? 1 : 0) << ',' << format_double(r.beta) << ','
      << format_double(r.min_action_prob) << ',' << r.truncated_episodes << ',' << r.seed << '\n';
}

nlohmann::json finite_or_text(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

nlohmann::json to_json(const GlieAudit& g) {
  nlohmann::json out = {{"applicable", g.applicable}};
  if (!g.applicable) return out;
  out["bound_b"] = g.bound_b;
  out["episodes_checked"] = g.episodes_checked;
  out["violations"] = g.violations;
  out["min_ratio_to_bound"] = finite_or_text(g.min_ratio);
  out["first_violation_episode"] =
      g.first_violation_episode ? nlohmann::json(*g.first_violation_episode) : nlohmann::json();
  out["passed"] = g.passed();
  return out;
}

nlohmann::json to_json(const AlphaAudit& a) {
  nlohmann::json out = {{"applicable", a.applicable}};
  if (!a.applicable) return out;
  out["episodes"] = a.episodes;
  out["count_mismatches"] = a.count_mismatches;
  out["max_sum_alpha_sq"] = a.max_sum_alpha_sq;
  out["sum_alpha_sq_bound"] = kSumAlphaSqBound;
  out["max_sum_alpha"] = a.sum_alpha.empty()
                             ? 0.0
                             : *std::max_element(a.sum_alpha.begin(), a.sum_alpha.end());
  out["passed"] = a.passed();
  return out;
}

}  // namespace

void write_report_csv(std::ostream& out, const TrainingResult& result) {
  out << kColumns << '\n';
  for (const ReplicaResult& rep : result.replicas) {
    for (const ReportRow& row : rep.rows) write_row(out, row);
  }
}

void write_compare_csv(std::ostream& out, const std::vector<TrainingResult>& results) {
  out << "agent," << kColumns << '\n';
  for (const TrainingResult& result : results) {
    for (const ReplicaResult& rep : result.replicas) {
      for (const ReportRow& row : rep.rows) {
        out << result.agent.name << ',';
        write_row(out, row);
      }
    }
  }
}

nlohmann::json agent_summary(const TrainingResult& result) {
  nlohmann::json out;
  out["name"] = result.agent.name;
  out["tag"] = result.tag;
  if (result.agent.type == AgentType::ps) {
    out["type"] = "ps";
    out["resolved_params"] = to_json(result.resolved_ps);
  } else {
    out["type"] = "baseline";
    out["resolved_params"] = to_json(result.agent.baseline);
  }
  if (result.theorem) out["theorem_check"] = to_json(*result.theorem);

  nlohmann::json replicas = nlohmann::json::array();
  double worst_delta = 0.0;
  bool all_match = true;
  for (const ReplicaResult& r : result.replicas) {
    worst_delta = std::max(worst_delta, r.final_delta);
    all_match = all_match && r.final_policy_match;
    replicas.push_back({{"replica", r.replica},
                        {"seed", r.seed},
                        {"episodes_run", r.episodes_run},
                        {"total_steps", r.total_steps},
                        {"truncated_episodes", r.truncated_episodes},
                        {"final_delta_max_norm", r.final_delta},
                        {"final_policy_match", r.final_policy_match},
                        {"glie_audit", to_json(r.glie)},
                        {"alpha_audit", to_json(r.alpha)},
                        {"gap_audit", {{"violations", r.gap_violations},
                                       {"passed", r.gap_violations == 0}}}});
  }
  out["replicas"] = replicas;
  out["final_delta_max_norm_worst"] = worst_delta;
  out["final_policy_match_all"] = all_match;
  out["audits_passed"] = result.audits_passed();
  return out;
}

nlohmann::json run_summary(const ExperimentConfig& config, const Mdp& mdp, const QStarTable& qstar,
                           const std::vector<TrainingResult>& results, double wall_seconds) {
  nlohmann::json agents = nlohmann::json::array();
  bool audits = true;
  const double qmax = max_abs(qstar.values);
  const double tolerance = 0.1 * (1.0 + qmax);
  for (const TrainingResult& r : results) {
    nlohmann::json block = agent_summary(r);
    block["within_engineering_tolerance"] =
        block["final_delta_max_norm_worst"].get<double>() <= tolerance;
    agents.push_back(std::move(block));
    audits = audits && r.audits_passed();
  }
  return {{"schema_version", kConfigSchemaVersion},
          {"config", to_json(config)},
          {"mdp", to_json(mdp)},
          {"qstar",
           {{"max_abs", qmax},
            {"residual", qstar.residual},
            {"iterations", qstar.iterations},
            {"warnings", qstar.warnings}}},
          {"engineering_tolerance",
           {{"delta_max_norm", tolerance},
            {"rule", "0.1 * (1 + max|q*|)"},
            {"note",
             "finite-episode tolerances are engineering choices; the convergence guarantee is "
             "asymptotic"}}},
          {"agents", agents},
          {"audits_passed", audits},
          {"wall_time_seconds", wall_seconds}};
}

}  // namespace psrl
