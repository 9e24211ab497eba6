#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "destin/filter_bank.hpp"
#include "destin/intent_grid.hpp"
#include "destin/numerics.hpp"

namespace destin {

enum class Decision { Returning, NotReturning, Undecided };

inline std::string to_string(Decision d) {
  switch (d) {
    case Decision::Returning: return "returning";
    case Decision::NotReturning: return "not_returning";
    default: return "undecided";
  }
}

inline Decision decision_from_string(const std::string& s) {
  if (s == "returning") return Decision::Returning;
  if (s == "not_returning") return Decision::NotReturning;
  if (s == "undecided") return Decision::Undecided;
  throw std::invalid_argument("unknown decision: " + s);
}

/// Per-timestep inference output.
struct IntentReport {
  double t = 0.0;
  double p_return = 0.0;
  double p_not = 0.0;
  std::vector<double> arrival_weights;
  double T_map = 0.0;
  double T_std = 0.0;
  Decision decision = Decision::Undecided;
};

/// Density of the arrival-time prior p(T | returning).
using ArrivalPrior = std::function<double(double)>;

inline ArrivalPrior uniform_arrival_prior(double t_a, double t_b) {
  if (!(t_b > t_a)) throw std::invalid_argument("uniform_arrival_prior: degenerate interval");
  const double density = 1.0 / (t_b - t_a);
  return [t_a, t_b, density](double T) { return (T >= t_a && T <= t_b) ? density : 0.0; };
}

namespace detail {

inline void check_bank_grid(const FilterBank& bank, const QuadratureGrid& grid) {
  if (bank.bridged.size() != grid.size()) {
    throw std::invalid_argument("bank and grid do not share quadrature points");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (std::abs(bank.bridged[i].arrival_time - grid.points[i]) > 1e-9) {
      throw std::invalid_argument("bank and grid do not share quadrature points");
    }
  }
}

}  // namespace detail

/// log p(y_{1:k} | returning): quadrature marginalization of the
/// arrival-time-conditioned likelihoods over the arrival prior,
///   log sum_i w_i exp(log_L_i) p(T_i),
/// in log space. Entries whose hypothesized arrival has already passed are
/// frozen mid-track with fewer PED factors than the live ones; they are not
/// comparable and are left out of the sum.
inline double marginal_likelihood_return(const FilterBank& bank, const QuadratureGrid& grid,
                                         const ArrivalPrior& arrival_prior) {
  detail::check_bank_grid(bank, grid);
  std::vector<double> terms;
  terms.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const BridgedEntry& e = bank.bridged[i];
    if (e.status != EntryStatus::Active) continue;
    const double prior = arrival_prior(grid.points[i]);
    if (!(prior > 0.0)) continue;
    terms.push_back(std::log(grid.weights[i]) + std::log(prior) + e.log_lik);
  }
  const double result = log_sum_exp(terms);
  if (!std::isfinite(result)) {
    throw NumericalError("marginal_likelihood_return: degenerate evidence");
  }
  return result;
}

/// Normalized two-hypothesis posterior from log evidences and the prior on
/// returning. p_not is the exact complement.
inline std::pair<double, double> hypothesis_posterior(double log_lik_not, double log_lik_return,
                                                      double prior_return) {
  if (!(prior_return > 0.0 && prior_return < 1.0)) {
    throw std::invalid_argument("hypothesis_posterior: prior must be in (0,1)");
  }
  const double score_return = log_lik_return + std::log(prior_return);
  const double score_not = log_lik_not + std::log(1.0 - prior_return);
  double p_return;
  if (score_return >= score_not) {
    p_return = 1.0 / (1.0 + std::exp(score_not - score_return));
  } else {
    const double r = std::exp(score_return - score_not);
    p_return = r / (1.0 + r);
  }
  return {p_return, 1.0 - p_return};
}

/// Discrete arrival-time posterior over the grid points:
/// w_i proportional to exp(log_L_i) p(T_i | returning), passed-arrival entries
/// excluded (their probability mass is zero once the track outlives them).
inline std::vector<double> arrival_posterior(const FilterBank& bank, const QuadratureGrid& grid,
                                             const ArrivalPrior& arrival_prior) {
  detail::check_bank_grid(bank, grid);
  std::vector<double> scores(grid.size(), kNegInf);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const BridgedEntry& e = bank.bridged[i];
    if (e.status != EntryStatus::Active) continue;
    const double prior = arrival_prior(grid.points[i]);
    if (!(prior > 0.0)) continue;
    scores[i] = std::log(prior) + e.log_lik;
  }
  const double norm = log_sum_exp(scores);
  if (!std::isfinite(norm)) {
    throw NumericalError("arrival_posterior: degenerate evidence");
  }
  std::vector<double> w(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (std::isfinite(scores[i])) w[i] = std::exp(scores[i] - norm);
  }
  return w;
}

/// MAP arrival time (ties broken toward the earliest point) and the posterior
/// standard deviation of T under the discrete weights.
inline std::pair<double, double> arrival_point_estimate(const std::vector<double>& w,
                                                        const QuadratureGrid& grid) {
  if (w.size() != grid.size() || w.empty()) {
    throw std::invalid_argument("arrival_point_estimate: weights do not match grid");
  }
  std::size_t best = 0;
  double mean = 0.0, second = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] > w[best]) best = i;
    mean += w[i] * grid.points[i];
    second += w[i] * grid.points[i] * grid.points[i];
  }
  const double var = std::max(0.0, second - mean * mean);
  return {grid.points[best], std::sqrt(var)};
}

/// Threshold rule: returning when p >= gamma, not returning when
/// p <= 1 - gamma, undecided in between. gamma = 0.5 is MAP selection.
inline Decision decide(double p_return, double gamma) {
  if (!(gamma >= 0.5 && gamma < 1.0)) {
    throw std::invalid_argument("decide: gamma must be in [0.5, 1)");
  }
  if (p_return >= gamma) return Decision::Returning;
  if (p_return <= 1.0 - gamma) return Decision::NotReturning;
  return Decision::Undecided;
}

}  // namespace destin
