#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "psrl/ps_agent.hpp"

namespace psrl {

/// Compensated (Neumaier) running sum.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + correction_; }

 private:
  double sum_ = 0.0;
  double correction_ = 0.0;
};

double compensated_sum(std::span<const double> values);

/// Visit record of one edge over steps 1..horizon. `rewards[k - 1]` is the
/// reward received right after step k, so a visit at step l is followed by
/// rewards[l - 1], rewards[l], ...
struct VisitSchedule {
  std::size_t horizon = 0;
  /// Sorted, each in [1, horizon].
  std::vector<std::size_t> visits;
  std::vector<double> rewards;
};

/// Every invariant violation; empty iff well formed.
std::vector<std::string> validate(const VisitSchedule& schedule);

/// G(t1:t2, chi) = sum_{k=0}^{t2-t1} chi^k rewards[t1 + k]. An empty range
/// (t1 == t2 + 1) gives 0. Throws std::out_of_range when t2 >= rewards.size()
/// or t1 > t2 + 1.
double truncated_return(std::span<const double> rewards, std::size_t t1, std::size_t t2,
                        double chi);

struct GlowSetting {
  GlowVariant variant = GlowVariant::replacing;
  double eta = 1.0;
  double gamma_damp = 0.0;
  double h0 = 0.0;
  double h_eq = 0.0;
  double order_s = 1.0;
};

/// gbar^T h0 + (1 - gbar^T) h_eq.
double rest_h(std::size_t steps, double gamma_damp, double h0, double h_eq);

/// Reward-driven part of h after `horizon` steps, as a sum of truncated
/// returns over visits. first_visit uses only the first visit and no damping.
double experience_h(const VisitSchedule& schedule, const GlowSetting& setting);

/// rest_h + experience_h. Throws std::invalid_argument on a malformed schedule.
double closed_form_h(const VisitSchedule& schedule, const GlowSetting& setting);

/// Replacing glow, summed step by step with the glow value
/// order_s * eta_bar^{k - l(k)} at each step k after the first visit.
double experience_h_by_step(const VisitSchedule& schedule, const GlowSetting& setting);

/// Replacing glow, regrouped so that every visit carries the return to the
/// horizon minus the part already credited to the previous visit. Requires
/// strictly increasing visit times.
double experience_h_regrouped(const VisitSchedule& schedule, const GlowSetting& setting);

/// rewards[k] = R_{k+1}, values[k] = v(S_k) for k < T = rewards.size().
/// G_{t:t+n} with bootstrap gamma^n values[t+n]; equals the full return G_t
/// when t + n >= T.
double n_step_return(std::span<const double> rewards, std::span<const double> values,
                     std::size_t t, std::size_t n, double gamma_dis);

/// Full discounted return G_t of an episode.
double full_return(std::span<const double> rewards, std::size_t t, double gamma_dis);

/// Episodic lambda-return:
/// (1 - lambda) sum_{n=1}^{T-t-1} lambda^{n-1} G_{t:t+n} + lambda^{T-t-1} G_t.
double lambda_return(std::span<const double> rewards, std::span<const double> values,
                     std::size_t t, double lambda_tra, double gamma_dis);

/// sum w x / sum w. Throws std::invalid_argument on negative or all-zero
/// weights and on a length mismatch.
double weighted_mean(std::span<const double> samples, std::span<const double> weights);

/// prev + alpha (sample - prev).
double weighted_mean_incremental(double prev_mean, double sample, double alpha);

/// Step size of the incremental mean under weights w^t:
/// (1 - 1/w) / (1 - w^{-t}), and 1/t for w == 1.
double exp_weight_alpha(double w, std::size_t t);

/// Ensemble average of the accumulating-glow experience term after t steps,
/// sum_{l=1}^{t} gbar^{t-l} G(l-1 : t-1, chi) p_l, with p[l-1] the
/// probability that the edge is taken at step l.
double ensemble_h_expected(std::span<const double> occupancy, std::span<const double> rewards,
                           double eta, double gamma_damp);

/// (1/N) sum_{l=1}^{t} gbar^{t-l} G(l-1 : t-1, chi).
double ensemble_h_normalized_sum(std::span<const double> rewards, double eta, double gamma_damp,
                                 double n_agents);

/// (1/N) gbar^t / (1 - eta_bar) [G(0:t, 1/gbar) - G(0:t, chi)] over the
/// reward list with a leading 0. Requires eta > 0 and gamma_damp < 1.
double ensemble_h_normalized_closed(std::span<const double> rewards, double eta,
                                    double gamma_damp, double n_agents);

}  // namespace psrl
