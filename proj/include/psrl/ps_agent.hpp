#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "psrl/mdp.hpp"
#include "psrl/rng.hpp"
#include "psrl/table.hpp"

namespace psrl {

enum class GlowVariant { replacing, accumulating, first_visit };
enum class PolicyKind { linear_h, softmax_h, softmax_htilde_glie };

std::string to_string(GlowVariant v);
std::string to_string(PolicyKind k);
GlowVariant glow_variant_from_string(const std::string& name);
PolicyKind policy_kind_from_string(const std::string& name);

struct PsParams {
  double eta = 1.0;         ///< glow damping
  double gamma_damp = 0.0;  ///< h damping toward h_eq
  double h_eq = 1.0;
  double h0 = 1.0;
  GlowVariant glow = GlowVariant::replacing;
  /// Ordering parameter s: 1 damps then resets, 1 - eta resets then damps.
  double glow_order_s = 1.0;
  PolicyKind policy = PolicyKind::linear_h;
  double beta_fixed = 1.0;
  double glie_c = 1.0;
  /// Clear glow at episode end for every variant, not only first_visit.
  bool reset_glow_every_episode = false;

  friend bool operator==(const PsParams&, const PsParams&) = default;
};

/// Throws std::invalid_argument when a parameter is out of range.
void validate_params(const PsParams& params);

nlohmann::json to_json(const PsParams& params);
PsParams ps_params_from_json(const nlohmann::json& doc);

/// beta_m = c ln(m + 1).
double glie_beta(std::size_t m, double c);

/// alpha / (1 + alpha) after a visit, alpha otherwise.
double adaptive_alpha_update(double alpha, bool visited);

/// Action probabilities for one row of edge strengths. Linear rows must be
/// non-negative (std::domain_error otherwise); an all-zero linear row is
/// uniform.
std::vector<double> policy_distribution(std::span<const double> row, PolicyKind kind,
                                        double beta);

/// Two-layer PS agent: percept clips fully connected to action clips, each
/// edge carrying an h-value, a glow value and a visit count.
class PsAgent {
 public:
  PsAgent(std::size_t n_states, std::size_t n_actions, PsParams params,
          std::vector<std::size_t> terminal_states = {});
  /// Also rejects the linear policy on models with negative rewards.
  PsAgent(const Mdp& mdp, PsParams params);

  std::vector<double> policy(std::size_t s) const;
  std::size_t select_action(std::size_t s, Rng& rng) const;

  /// One interaction cycle: the visit of (s, a) enters the glow matrix, then
  /// every h-value is damped and credited with glow * reward, where reward
  /// is the one received right after taking `a` in `s`.
  void update_step(std::size_t s, std::size_t a, double reward);

  void end_episode();

  /// h / (N + 1).
  Table normalized_h() const;

  const PsParams& params() const { return params_; }
  const Table& h() const { return h_; }
  const Table& g() const { return g_; }
  const Matrix<std::uint64_t>& n_visits() const { return n_; }
  const Matrix<std::uint8_t>& visited_this_episode() const { return visited_; }
  std::size_t episode_index() const { return episode_; }
  double beta() const { return beta_; }
  std::size_t n_states() const { return h_.rows(); }
  std::size_t n_actions() const { return h_.cols(); }
  bool is_terminal(std::size_t s) const { return terminal_[s]; }

  nlohmann::json snapshot() const;
  static PsAgent from_snapshot(const nlohmann::json& doc);

 private:
  double current_beta() const;
  std::span<const double> policy_row(std::size_t s, std::vector<double>& scratch) const;

  PsParams params_;
  std::vector<bool> terminal_;
  Table h_;
  Table g_;
  Matrix<std::uint64_t> n_;
  Matrix<std::uint8_t> visited_;
  std::size_t episode_ = 1;
  double beta_ = 0.0;
};

}  // namespace psrl
