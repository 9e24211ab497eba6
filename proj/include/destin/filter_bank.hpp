#pragma once

#include <algorithm>
#include <stdexcept>
#include <thread>
#include <vector>

#include "destin/bridge.hpp"
#include "destin/intent_grid.hpp"
#include "destin/lti.hpp"
#include "destin/numerics.hpp"

namespace destin {

/// Result of one predict-update cycle: the filtered posterior and the log of
/// the one-step-ahead predictive density of the observation (the PED factor).
struct KalmanStep {
  GaussianBelief posterior;
  double log_ped = 0.0;
};

/// Kalman predict-update against an arbitrary affine-Gaussian transition.
/// Covariance update uses the Joseph form; the innovation covariance is
/// factorized once and reused for the gain, the Mahalanobis term and the
/// log determinant.
inline KalmanStep kf_update(const GaussianBelief& prior, const Matrix& F, const Matrix& Q,
                            const Vector& M, const ObservationModel& obs, const Vector& y) {
  const auto s = prior.dim();
  if (F.rows() != s || F.cols() != s || Q.rows() != s || M.size() != s ||
      obs.state_dim() != s || y.size() != obs.obs_dim()) {
    throw std::invalid_argument("kf_update: dimension mismatch");
  }

  const Vector mean_pred = F * prior.mean + M;
  const Matrix cov_pred = symmetrize(F * prior.cov * F.transpose() + Q);

  const Vector innovation = y - obs.G * mean_pred;
  const Matrix S = symmetrize(obs.G * cov_pred * obs.G.transpose() + obs.V);
  Eigen::LLT<Matrix> llt(S);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("kf_update: innovation covariance not positive definite");
  }

  const double d = static_cast<double>(y.size());
  KalmanStep step;
  step.log_ped =
      -0.5 * (d * std::log(2.0 * M_PI) + log_det_from_llt(llt) + innovation.dot(llt.solve(innovation)));

  const Matrix gain = llt.solve(obs.G * cov_pred).transpose();  // P G' S^-1
  const Matrix closed = Matrix::Identity(s, s) - gain * obs.G;
  step.posterior.mean = mean_pred + gain * innovation;
  step.posterior.cov =
      symmetrize(closed * cov_pred * closed.transpose() + gain * obs.V * gain.transpose());
  step.posterior.time = prior.time;
  return step;
}

inline KalmanStep kf_update(const GaussianBelief& prior, const Transition& t,
                            const ObservationModel& obs, const Vector& y) {
  return kf_update(prior, t.F, t.Q, t.M, obs, y);
}

inline KalmanStep kf_update(const GaussianBelief& prior, const BridgedTransition& t,
                            const ObservationModel& obs, const Vector& y) {
  return kf_update(prior, t.R, t.U, t.m_ext, obs, y);
}

enum class EntryStatus { Active, Frozen };

/// One arrival-time-conditioned filter: extended belief over [x; x_T] plus the
/// accumulated log likelihood of all observations scored so far.
struct BridgedEntry {
  double arrival_time = 0.0;
  GaussianBelief belief;
  double log_lik = 0.0;
  EntryStatus status = EntryStatus::Active;
  bool degenerate = false;  // froze on a numerical failure, not on arrival
};

/// The unbridged filter plus q bridged filters, one per quadrature arrival
/// time, updated in lockstep as observations arrive. A plain value: copy,
/// move and hand between threads freely.
struct FilterBank {
  LtiModel model;
  ObservationModel obs;
  DestinationPrior dest;
  GaussianBelief h0;
  double h0_log_lik = 0.0;
  std::vector<BridgedEntry> bridged;
  double last_time = 0.0;

  std::size_t active_count() const {
    return static_cast<std::size_t>(
        std::count_if(bridged.begin(), bridged.end(),
                      [](const BridgedEntry& e) { return e.status == EntryStatus::Active; }));
  }
};

inline FilterBank bank_init(const LtiModel& model, const ObservationModel& obs,
                            const DestinationPrior& dest, const GaussianBelief& init,
                            const QuadratureGrid& grid) {
  model.validate();
  obs.validate();
  if (grid.points.empty()) throw std::invalid_argument("bank_init: empty quadrature grid");
  if (init.dim() != model.state_dim()) {
    throw std::invalid_argument("bank_init: init dimension does not match model");
  }
  FilterBank bank{model, obs, dest, init, 0.0, {}, init.time};
  const GaussianBelief z0 = extended_prior(init, dest);
  bank.bridged.reserve(grid.points.size());
  for (double T : grid.points) {
    if (T <= init.time + kBridgeEpsilon) {
      throw std::invalid_argument("bank_init: quadrature point not after init time");
    }
    bank.bridged.push_back(BridgedEntry{T, z0, 0.0, EntryStatus::Active, false});
  }
  return bank;
}

namespace detail {

inline void step_entry(BridgedEntry& e, const LtiModel& model, const ObservationModel& ext_obs,
                       const Vector& y, double h, double t_k) {
  if (e.status != EntryStatus::Active) return;
  const double h_tilde = e.arrival_time - t_k;
  if (h_tilde < kBridgeEpsilon) {
    // Hypothesized arrival has passed; the bridge is no longer defined.
    e.status = EntryStatus::Frozen;
    return;
  }
  try {
    const BridgedTransition t = extended_transition(model, h, h_tilde);
    const KalmanStep step = kf_update(e.belief, t, ext_obs, y);
    e.belief = step.posterior;
    e.belief.time = t_k;
    e.log_lik += step.log_ped;
  } catch (const NumericalError&) {
    e.status = EntryStatus::Frozen;
    e.degenerate = true;
  }
}

template <typename Fn>
inline void for_each_entry(std::vector<BridgedEntry>& entries, unsigned threads, Fn&& fn) {
  const std::size_t n = entries.size();
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(entries[i]);
    return;
  }
  const unsigned workers = std::min<unsigned>(threads, static_cast<unsigned>(n));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(entries[i]);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail

/// Advance every filter to t_k and accumulate the PED of observation y.
/// Entries whose arrival time has passed freeze and keep their accumulator;
/// a numerical failure freezes only the offending entry. The h0 update and
/// each bridged update touch disjoint state, so they may run on `threads`
/// workers with results identical to the sequential order.
inline FilterBank bank_step(FilterBank bank, const Vector& y, double t_k, unsigned threads = 1) {
  if (!(t_k > bank.last_time)) {
    throw std::invalid_argument("bank_step: timestamps must be strictly increasing");
  }
  const double h = t_k - bank.last_time;

  const Transition free_t = transition(bank.model, h);
  const KalmanStep h0_step = kf_update(bank.h0, free_t, bank.obs, y);
  bank.h0 = h0_step.posterior;
  bank.h0.time = t_k;
  bank.h0_log_lik += h0_step.log_ped;

  const ObservationModel ext_obs = extended_observation(bank.obs);
  detail::for_each_entry(bank.bridged, threads, [&](BridgedEntry& e) {
    detail::step_entry(e, bank.model, ext_obs, y, h, t_k);
  });

  bank.last_time = t_k;
  return bank;
}

}  // namespace destin
