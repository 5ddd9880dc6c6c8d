#pragma once

#include <ostream>
#include <vector>

#include "json.hpp"
#include "psrl/config.hpp"
#include "psrl/exact_solver.hpp"
#include "psrl/harness.hpp"

namespace psrl {

/// Header: replica,episode,delta_max_norm,policy_match,beta,min_action_prob,
/// truncated_episodes,seed. Rows in replica order, then episode order.
void write_report_csv(std::ostream& out, const TrainingResult& result);

/// Same columns with a leading `agent` column, agents in config order.
void write_compare_csv(std::ostream& out, const std::vector<TrainingResult>& results);

/// Per-agent block: tag, theorem findings, final norms and audit verdicts.
nlohmann::json agent_summary(const TrainingResult& result);

/// Config echo, model echo, q* diagnostics and one block per agent.
nlohmann::json run_summary(const ExperimentConfig& config, const Mdp& mdp, const QStarTable& qstar,
                           const std::vector<TrainingResult>& results, double wall_seconds);

}  // namespace psrl
