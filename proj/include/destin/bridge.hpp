#pragma once

#include <stdexcept>

#include "destin/lti.hpp"
#include "destin/numerics.hpp"

namespace destin {

/// Minimum time-to-arrival the bridge is built for. Below this the endpoint
/// is treated as already reached (Q(h_tilde)^{-1} is too ill conditioned).
constexpr double kBridgeEpsilon = 1e-3;

/// Gaussian prior N(a_v, Sigma_v) of the destination, expressed in the full
/// state space of the motion model (velocity components free, not pinned).
struct DestinationPrior {
  Vector mean;
  Matrix cov;

  Eigen::Index dim() const { return mean.size(); }
};

/// Default spread of the arrival velocity when the destination is given as a
/// position prior only: the arrival speed is unconstrained.
constexpr double kDefaultArrivalVelocityStd = 100.0;

/// Lift a position-space destination (location + extent) into the model's
/// state space. CV states get free velocity components at the endpoint.
inline DestinationPrior make_destination(const LtiModel& model, const Vector& position,
                                         const Matrix& position_cov,
                                         double velocity_std = kDefaultArrivalVelocityStd) {
  model.validate();
  if (position.size() != model.dims || position_cov.rows() != model.dims ||
      position_cov.cols() != model.dims) {
    throw std::invalid_argument("make_destination: position prior must be dims-dimensional");
  }
  const int s = model.state_dim();
  DestinationPrior dest{Vector::Zero(s), Matrix::Zero(s, s)};
  for (int a = 0; a < model.dims; ++a) {
    const int ia = model.position_index(a);
    dest.mean(ia) = position(a);
    for (int b = 0; b < model.dims; ++b) {
      dest.cov(ia, model.position_index(b)) = position_cov(a, b);
    }
    if (model.axis_block() == 2) {
      dest.cov(ia + 1, ia + 1) = velocity_std * velocity_std;
    }
  }
  return dest;
}

/// One-step parameters of the Markov bridge: given the previous state and the
/// endpoint state at arrival, the current state is
///   x_k | x_{k-1}, x_T  ~  N(H [x_{k-1}; x_T] + m, C)
/// with h the elapsed step and h_tilde the remaining time to arrival.
struct BridgeParams {
  Matrix H;  // s x 2s
  Matrix C;  // s x s, symmetric PD
  Vector m;  // s
};

inline BridgeParams bridge_params(const LtiModel& model, double h, double h_tilde) {
  if (!(h > 0.0)) throw std::invalid_argument("bridge_params: h must be > 0");
  if (h_tilde < kBridgeEpsilon) {
    throw std::invalid_argument("bridge_params: h_tilde below bridge epsilon");
  }
  const Transition fwd = transition(model, h);
  const Transition rem = transition(model, h_tilde);
  const int s = model.state_dim();

  Eigen::LLT<Matrix> lq(symmetrize(fwd.Q));
  if (lq.info() != Eigen::Success) {
    throw BridgeDegenerateError("bridge_params: Q(h) not factorizable", h);
  }
  Eigen::LLT<Matrix> lqt(symmetrize(rem.Q));
  if (lqt.info() != Eigen::Success) {
    throw BridgeDegenerateError("bridge_params: Q(h_tilde) not factorizable", h_tilde);
  }

  // C = (Q(h)^-1 + F(ht)' Q(ht)^-1 F(ht))^-1, solves only, no explicit inverses.
  const Matrix qinv_f = lqt.solve(rem.F);                    // Q(ht)^-1 F(ht)
  const Matrix prec = lq.solve(Matrix::Identity(s, s)) + rem.F.transpose() * qinv_f;
  Eigen::LLT<Matrix> lprec(symmetrize(prec));
  if (lprec.info() != Eigen::Success) {
    throw BridgeDegenerateError("bridge_params: bridge precision not factorizable", h);
  }
  BridgeParams out;
  out.C = symmetrize(lprec.solve(Matrix::Identity(s, s)));
  out.H = Matrix(s, 2 * s);
  out.H.leftCols(s) = out.C * lq.solve(fwd.F);
  out.H.rightCols(s) = out.C * qinv_f.transpose();
  out.m = out.C * (lq.solve(fwd.M) - rem.F.transpose() * lqt.solve(rem.M));
  return out;
}

/// Transition of the extended state z = [x; x_T]:
///   z_k = R z_{k-1} + m_ext + gamma,  gamma ~ N(0, U),
/// where R stacks H over the endpoint carry-through [0 I], and U embeds C in
/// the top-left block (the endpoint row is noiseless).
struct BridgedTransition {
  Matrix R;      // 2s x 2s
  Vector m_ext;  // 2s
  Matrix U;      // 2s x 2s

  Eigen::Index state_dim() const { return R.rows() / 2; }
  auto H() const { return R.topRows(state_dim()); }
  auto C() const { return U.topLeftCorner(state_dim(), state_dim()); }
  auto m() const { return m_ext.head(state_dim()); }
};

inline BridgedTransition extended_transition(const LtiModel& model, double h, double h_tilde) {
  const BridgeParams p = bridge_params(model, h, h_tilde);
  const int s = model.state_dim();
  BridgedTransition t;
  t.R = Matrix::Zero(2 * s, 2 * s);
  t.R.topRows(s) = p.H;
  t.R.bottomRightCorner(s, s) = Matrix::Identity(s, s);
  t.m_ext = Vector::Zero(2 * s);
  t.m_ext.head(s) = p.m;
  t.U = Matrix::Zero(2 * s, 2 * s);
  t.U.topLeftCorner(s, s) = p.C;
  return t;
}

/// Zero-pad the observation matrix so the endpoint block is unobserved.
inline ObservationModel extended_observation(const ObservationModel& obs) {
  ObservationModel ext;
  ext.G = Matrix::Zero(obs.obs_dim(), 2 * obs.state_dim());
  ext.G.leftCols(obs.state_dim()) = obs.G;
  ext.V = obs.V;
  return ext;
}

/// Independent initial prior over [x_1; x_T]: block-diagonal stack of the
/// state prior and the destination prior.
inline GaussianBelief extended_prior(const GaussianBelief& init, const DestinationPrior& dest) {
  const auto s = init.dim();
  if (dest.dim() != s) {
    throw std::invalid_argument("extended_prior: destination dimension does not match state");
  }
  GaussianBelief z;
  z.mean = Vector::Zero(2 * s);
  z.mean.head(s) = init.mean;
  z.mean.tail(s) = dest.mean;
  z.cov = Matrix::Zero(2 * s, 2 * s);
  z.cov.topLeftCorner(s, s) = init.cov;
  z.cov.bottomRightCorner(s, s) = dest.cov;
  z.time = init.time;
  return z;
}

/// Marginal of the state at t_star under the bridge from init to the
/// destination at T. At t_star = T (within the bridge epsilon) this is the
/// destination prior itself.
inline GaussianBelief bridged_predictive(const GaussianBelief& init, const LtiModel& model,
                                         const DestinationPrior& dest, double T, double t_star) {
  if (!(init.time < t_star) || !(t_star <= T)) {
    throw std::invalid_argument("bridged_predictive: need init.time < t_star <= T");
  }
  const auto s = init.dim();
  if (T - t_star < kBridgeEpsilon) {
    return GaussianBelief{dest.mean, dest.cov, t_star};
  }
  const GaussianBelief z0 = extended_prior(init, dest);
  const BridgedTransition t = extended_transition(model, t_star - init.time, T - t_star);
  const Vector mean = t.R * z0.mean + t.m_ext;
  const Matrix cov = symmetrize(t.R * z0.cov * t.R.transpose() + t.U);
  return GaussianBelief{mean.head(s), cov.topLeftCorner(s, s), t_star};
}

}  // namespace destin
