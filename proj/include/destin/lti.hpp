#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "destin/numerics.hpp"

namespace destin {

enum class ModelFamily { BrownianMotion, ConstantVelocity, MeanReverting };

/// Gaussian belief over a motion state: N(mean, cov) at a given timestamp.
struct GaussianBelief {
  Vector mean;
  Matrix cov;
  double time = 0.0;

  Eigen::Index dim() const { return mean.size(); }
};

/// Closed-form transition of a Gaussian LTI model over one time step:
///   x_k = F x_{k-1} + M + eps,  eps ~ N(0, Q).
struct Transition {
  Matrix F;
  Matrix Q;
  Vector M;
};

/// Linear observation of the state: y = G x + nu, nu ~ N(0, V).
struct ObservationModel {
  Matrix G;
  Matrix V;

  Eigen::Index obs_dim() const { return G.rows(); }
  Eigen::Index state_dim() const { return G.cols(); }

  void validate() const {
    if (V.rows() != G.rows() || V.cols() != G.rows()) {
      throw std::invalid_argument("ObservationModel: V must be obs_dim square");
    }
    Eigen::LLT<Matrix> llt(0.5 * (V + V.transpose()));
    if (llt.info() != Eigen::Success) {
      throw std::invalid_argument("ObservationModel: V must be positive definite");
    }
    if (Eigen::ColPivHouseholderQR<Matrix>(G).rank() != G.rows()) {
      throw std::invalid_argument("ObservationModel: G must have full row rank");
    }
  }
};

/// A Gaussian LTI motion model family with identical, independent axes.
///
/// State layout is one block per spatial axis: BrownianMotion and
/// MeanReverting carry position only ([p1, p2, ...]), ConstantVelocity
/// interleaves position and velocity ([p1, v1, p2, v2, ...]).
struct LtiModel {
  ModelFamily family = ModelFamily::ConstantVelocity;
  double sigma = 1.0;  // process noise intensity per axis
  int dims = 2;        // spatial dimensions
  double reversion = 0.0;             // lambda, MeanReverting only
  std::optional<Vector> attractor{};  // a_v, MeanReverting only

  int state_dim() const {
    return family == ModelFamily::ConstantVelocity ? 2 * dims : dims;
  }
  int axis_block() const { return family == ModelFamily::ConstantVelocity ? 2 : 1; }
  /// Index of the position component of a given axis within the state vector.
  int position_index(int axis) const { return axis * axis_block(); }

  void validate() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("LtiModel: sigma must be > 0");
    if (dims < 1) throw std::invalid_argument("LtiModel: dims must be >= 1");
    if (family == ModelFamily::MeanReverting) {
      if (!(reversion > 0.0)) {
        throw std::invalid_argument("LtiModel: MeanReverting needs reversion > 0");
      }
      if (!attractor || attractor->size() != dims) {
        throw std::invalid_argument("LtiModel: MeanReverting needs a dims-length attractor");
      }
    }
  }
};

inline LtiModel brownian_model(double sigma, int dims) {
  LtiModel m{ModelFamily::BrownianMotion, sigma, dims};
  m.validate();
  return m;
}

inline LtiModel constant_velocity_model(double sigma, int dims) {
  LtiModel m{ModelFamily::ConstantVelocity, sigma, dims};
  m.validate();
  return m;
}

inline LtiModel mean_reverting_model(double sigma, int dims, double lambda,
                                     const Vector& attractor) {
  LtiModel m{ModelFamily::MeanReverting, sigma, dims, lambda, attractor};
  m.validate();
  return m;
}

/// (F(h), Q(h), M(h)) for a step of length h >= 0.
///
/// BM:  F = I, Q = sigma^2 h I, M = 0.
/// CV:  per axis F = [[1,h],[0,1]], Q = sigma^2 [[h^3/3, h^2/2],[h^2/2, h]]
///      (integrated white-noise acceleration).
/// OU:  per axis F = e^{-lambda h}, Q = sigma^2/(2 lambda)(1 - e^{-2 lambda h}),
///      M = (1 - e^{-lambda h}) a_v.
inline Transition transition(const LtiModel& model, double h) {
  model.validate();
  if (h < 0.0) throw std::invalid_argument("transition: negative time step");
  const int s = model.state_dim();
  Transition t{Matrix::Identity(s, s), Matrix::Zero(s, s), Vector::Zero(s)};
  const double s2 = model.sigma * model.sigma;

  switch (model.family) {
    case ModelFamily::BrownianMotion:
      t.Q = s2 * h * Matrix::Identity(s, s);
      break;
    case ModelFamily::ConstantVelocity:
      for (int a = 0; a < model.dims; ++a) {
        const int i = 2 * a;
        t.F(i, i + 1) = h;
        t.Q(i, i) = s2 * h * h * h / 3.0;
        t.Q(i, i + 1) = t.Q(i + 1, i) = s2 * h * h / 2.0;
        t.Q(i + 1, i + 1) = s2 * h;
      }
      break;
    case ModelFamily::MeanReverting: {
      const double lam = model.reversion;
      const double f = std::exp(-lam * h);
      const double q = s2 / (2.0 * lam) * (1.0 - f * f);
      for (int a = 0; a < model.dims; ++a) {
        t.F(a, a) = f;
        t.Q(a, a) = q;
        t.M(a) = (1.0 - f) * (*model.attractor)(a);
      }
      break;
    }
  }
  return t;
}

/// Push a belief through the dynamics: mean' = F mean + M, cov' = F cov F' + Q.
inline GaussianBelief predict(const GaussianBelief& belief, const LtiModel& model, double h) {
  if (belief.dim() != model.state_dim()) {
    throw std::invalid_argument("predict: belief dimension does not match model");
  }
  const Transition t = transition(model, h);
  GaussianBelief out;
  out.mean = t.F * belief.mean + t.M;
  out.cov = symmetrize(t.F * belief.cov * t.F.transpose() + t.Q);
  out.time = belief.time + h;
  return out;
}

/// Position-selector observation with isotropic noise: G picks the position
/// component of each axis, V = noise_std^2 I.
inline ObservationModel default_observation(int dims, const LtiModel& model, double noise_std) {
  if (dims != model.dims) {
    throw std::invalid_argument("default_observation: dims does not match model");
  }
  if (!(noise_std > 0.0)) {
    throw std::invalid_argument("default_observation: noise_std must be > 0");
  }
  ObservationModel obs;
  obs.G = Matrix::Zero(dims, model.state_dim());
  for (int a = 0; a < dims; ++a) obs.G(a, model.position_index(a)) = 1.0;
  obs.V = noise_std * noise_std * Matrix::Identity(dims, dims);
  return obs;
}

}  // namespace destin
