#include "psrl/returns_oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace psrl {

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    correction_ += (sum_ - t) + x;
  } else {
    correction_ += (x - t) + sum_;
  }
  sum_ = t;
}

double compensated_sum(std::span<const double> values) {
  CompensatedSum acc;
  for (double v : values) acc.add(v);
  return acc.value();
}

std::vector<std::string> validate(const VisitSchedule& schedule) {
  std::vector<std::string> out;
  if (schedule.rewards.size() != schedule.horizon) {
    out.push_back("rewards length " + std::to_string(schedule.rewards.size()) +
                  " != horizon " + std::to_string(schedule.horizon));
  }
  for (std::size_t j = 0; j < schedule.visits.size(); ++j) {
    const std::size_t l = schedule.visits[j];
    if (l < 1 || l > schedule.horizon) {
      out.push_back("visit time " + std::to_string(l) + " outside [1, horizon]");
    }
    if (j > 0 && l < schedule.visits[j - 1]) out.push_back("visit times not sorted");
  }
  return out;
}

double truncated_return(std::span<const double> rewards, std::size_t t1, std::size_t t2,
                        double chi) {
  if (t1 == t2 + 1) return 0.0;
  if (t1 > t2 || t2 >= rewards.size()) {
    throw std::out_of_range("truncated_return: range " + std::to_string(t1) + ":" +
                            std::to_string(t2) + " outside reward list of length " +
                            std::to_string(rewards.size()));
  }
  CompensatedSum acc;
  double weight = 1.0;
  for (std::size_t k = 0; k <= t2 - t1; ++k) {
    acc.add(weight * rewards[t1 + k]);
    weight *= chi;
  }
  return acc.value();
}

double rest_h(std::size_t steps, double gamma_damp, double h0, double h_eq) {
  const double decay = std::pow(1.0 - gamma_damp, static_cast<double>(steps));
  return decay * h0 + (1.0 - decay) * h_eq;
}

namespace {

void require_valid(const VisitSchedule& schedule) {
  const auto violations = validate(schedule);
  if (!violations.empty()) throw std::invalid_argument("invalid schedule: " + violations.front());
}

double effective_damping(const GlowSetting& setting) {
  return setting.variant == GlowVariant::first_visit ? 0.0 : setting.gamma_damp;
}

// Glow of the edge right after the visit update of step k, for damping-free
// evaluation of the last step when gbar == 0.
double glow_at(const VisitSchedule& schedule, const GlowSetting& setting, std::size_t k) {
  const double eta_bar = 1.0 - setting.eta;
  double g = 0.0;
  for (std::size_t l : schedule.visits) {
    if (l > k) break;
    const double tail = std::pow(eta_bar, static_cast<double>(k - l));
    if (setting.variant == GlowVariant::accumulating) {
      g += setting.order_s * tail;
    } else {
      g = setting.order_s * tail;
    }
    if (setting.variant == GlowVariant::first_visit) break;
  }
  return g;
}

}  // namespace

double experience_h(const VisitSchedule& schedule, const GlowSetting& setting) {
  require_valid(schedule);
  const std::size_t T = schedule.horizon;
  const auto& visits = schedule.visits;
  if (visits.empty()) return 0.0;
  const double gbar = 1.0 - effective_damping(setting);
  if (gbar == 0.0) return glow_at(schedule, setting, T) * schedule.rewards[T - 1];

  const double chi = (1.0 - setting.eta) / gbar;
  const std::span<const double> r(schedule.rewards);
  CompensatedSum acc;
  switch (setting.variant) {
    case GlowVariant::replacing:
      for (std::size_t j = 0; j < visits.size(); ++j) {
        const std::size_t end = j + 1 < visits.size() ? std::min(visits[j + 1] - 1, T) : T;
        if (end < visits[j]) continue;
        acc.add(std::pow(gbar, static_cast<double>(T - visits[j])) *
                truncated_return(r, visits[j] - 1, end - 1, chi));
      }
      break;
    case GlowVariant::accumulating:
      for (std::size_t l : visits) {
        acc.add(std::pow(gbar, static_cast<double>(T - l)) * truncated_return(r, l - 1, T - 1, chi));
      }
      break;
    case GlowVariant::first_visit:
      acc.add(std::pow(gbar, static_cast<double>(T - visits.front())) *
              truncated_return(r, visits.front() - 1, T - 1, chi));
      break;
  }
  return setting.order_s * acc.value();
}

double closed_form_h(const VisitSchedule& schedule, const GlowSetting& setting) {
  const double damp = effective_damping(setting);
  return rest_h(schedule.horizon, damp, setting.h0, setting.h_eq) +
         experience_h(schedule, setting);
}

double experience_h_by_step(const VisitSchedule& schedule, const GlowSetting& setting) {
  require_valid(schedule);
  const std::size_t T = schedule.horizon;
  if (schedule.visits.empty()) return 0.0;
  const double gbar = 1.0 - setting.gamma_damp;
  const double eta_bar = 1.0 - setting.eta;
  CompensatedSum acc;
  std::size_t next = 0;
  std::size_t last = 0;
  for (std::size_t k = schedule.visits.front(); k <= T; ++k) {
    while (next < schedule.visits.size() && schedule.visits[next] <= k) last = schedule.visits[next++];
    acc.add(std::pow(gbar, static_cast<double>(T - k)) *
            std::pow(eta_bar, static_cast<double>(k - last)) * schedule.rewards[k - 1]);
  }
  return setting.order_s * acc.value();
}

double experience_h_regrouped(const VisitSchedule& schedule, const GlowSetting& setting) {
  require_valid(schedule);
  const auto& visits = schedule.visits;
  for (std::size_t j = 1; j < visits.size(); ++j) {
    if (visits[j] == visits[j - 1]) {
      throw std::invalid_argument("regrouped form needs distinct visit times");
    }
  }
  const std::size_t T = schedule.horizon;
  if (visits.empty()) return 0.0;
  const double gbar = 1.0 - setting.gamma_damp;
  if (gbar == 0.0) return glow_at(schedule, setting, T) * schedule.rewards[T - 1];
  const double eta_bar = 1.0 - setting.eta;
  const double chi = eta_bar / gbar;
  const std::span<const double> r(schedule.rewards);
  CompensatedSum acc;
  for (std::size_t j = 0; j < visits.size(); ++j) {
    double weight = std::pow(gbar, static_cast<double>(T - visits[j]));
    if (j > 0) {
      weight -= std::pow(gbar, static_cast<double>(T - visits[j])) *
                std::pow(eta_bar, static_cast<double>(visits[j] - visits[j - 1]));
    }
    acc.add(weight * truncated_return(r, visits[j] - 1, T - 1, chi));
  }
  return setting.order_s * acc.value();
}

double full_return(std::span<const double> rewards, std::size_t t, double gamma_dis) {
  if (t >= rewards.size()) return 0.0;
  return truncated_return(rewards, t, rewards.size() - 1, gamma_dis);
}

double n_step_return(std::span<const double> rewards, std::span<const double> values,
                     std::size_t t, std::size_t n, double gamma_dis) {
  if (n == 0) throw std::invalid_argument("n_step_return: n must be at least 1");
  const std::size_t T = rewards.size();
  if (t + n >= T) return full_return(rewards, t, gamma_dis);
  if (values.size() <= t + n) throw std::out_of_range("n_step_return: missing value estimate");
  CompensatedSum acc;
  acc.add(truncated_return(rewards, t, t + n - 1, gamma_dis));
  acc.add(std::pow(gamma_dis, static_cast<double>(n)) * values[t + n]);
  return acc.value();
}

double lambda_return(std::span<const double> rewards, std::span<const double> values,
                     std::size_t t, double lambda_tra, double gamma_dis) {
  const std::size_t T = rewards.size();
  if (t >= T) return 0.0;
  const std::size_t tail = T - t - 1;
  CompensatedSum acc;
  double weight = 1.0 - lambda_tra;
  for (std::size_t n = 1; n <= tail; ++n) {
    acc.add(weight * n_step_return(rewards, values, t, n, gamma_dis));
    weight *= lambda_tra;
  }
  acc.add(std::pow(lambda_tra, static_cast<double>(tail)) * full_return(rewards, t, gamma_dis));
  return acc.value();
}

double weighted_mean(std::span<const double> samples, std::span<const double> weights) {
  if (samples.size() != weights.size()) {
    throw std::invalid_argument("weighted_mean: samples and weights differ in length");
  }
  CompensatedSum num;
  CompensatedSum den;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (weights[i] < 0.0) throw std::invalid_argument("weighted_mean: negative weight");
    num.add(weights[i] * samples[i]);
    den.add(weights[i]);
  }
  if (den.value() == 0.0) throw std::invalid_argument("weighted_mean: all weights are zero");
  return num.value() / den.value();
}

double weighted_mean_incremental(double prev_mean, double sample, double alpha) {
  return prev_mean + alpha * (sample - prev_mean);
}

double exp_weight_alpha(double w, std::size_t t) {
  if (!(w > 0.0)) throw std::invalid_argument("exp_weight_alpha: w must be positive");
  if (t == 0) throw std::invalid_argument("exp_weight_alpha: t starts at 1");
  if (w == 1.0) return 1.0 / static_cast<double>(t);
  return (1.0 - 1.0 / w) / (1.0 - std::pow(w, -static_cast<double>(t)));
}

namespace {

// gbar^{t-l} G(l-1 : t-1, chi) for l = 1..t.
std::vector<double> discounted_tail_returns(std::span<const double> rewards, double eta,
                                            double gamma_damp) {
  const std::size_t t = rewards.size();
  const double gbar = 1.0 - gamma_damp;
  const double eta_bar = 1.0 - eta;
  std::vector<double> out(t, 0.0);
  for (std::size_t l = 1; l <= t; ++l) {
    // Weight of rewards[k - 1] is gbar^{t-k} eta_bar^{k-l}.
    CompensatedSum acc;
    for (std::size_t k = l; k <= t; ++k) {
      acc.add(std::pow(gbar, static_cast<double>(t - k)) *
              std::pow(eta_bar, static_cast<double>(k - l)) * rewards[k - 1]);
    }
    out[l - 1] = acc.value();
  }
  return out;
}

}  // namespace

double ensemble_h_expected(std::span<const double> occupancy, std::span<const double> rewards,
                           double eta, double gamma_damp) {
  if (occupancy.size() != rewards.size()) {
    throw std::invalid_argument("ensemble_h_expected: occupancy and rewards differ in length");
  }
  const auto tails = discounted_tail_returns(rewards, eta, gamma_damp);
  CompensatedSum acc;
  for (std::size_t l = 0; l < tails.size(); ++l) {
    if (occupancy[l] < 0.0 || occupancy[l] > 1.0) {
      throw std::invalid_argument("ensemble_h_expected: occupancy outside [0, 1]");
    }
    acc.add(tails[l] * occupancy[l]);
  }
  return acc.value();
}

double ensemble_h_normalized_sum(std::span<const double> rewards, double eta, double gamma_damp,
                                 double n_agents) {
  const auto tails = discounted_tail_returns(rewards, eta, gamma_damp);
  return compensated_sum(tails) / n_agents;
}

double ensemble_h_normalized_closed(std::span<const double> rewards, double eta,
                                    double gamma_damp, double n_agents) {
  if (!(eta > 0.0)) throw std::invalid_argument("closed ensemble form needs eta > 0");
  if (!(gamma_damp < 1.0)) throw std::invalid_argument("closed ensemble form needs gamma_damp < 1");
  const double gbar = 1.0 - gamma_damp;
  const double chi = (1.0 - eta) / gbar;
  std::vector<double> shifted;
  shifted.reserve(rewards.size() + 1);
  shifted.push_back(0.0);
  shifted.insert(shifted.end(), rewards.begin(), rewards.end());
  const std::size_t t = rewards.size();
  const double difference =
      truncated_return(shifted, 0, t, 1.0 / gbar) - truncated_return(shifted, 0, t, chi);
  return std::pow(gbar, static_cast<double>(t)) / eta * difference / n_agents;
}

}  // namespace psrl
