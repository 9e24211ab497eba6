#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "destin/bridge.hpp"
#include "destin/lti.hpp"
#include "destin/trajectory.hpp"

namespace destin {

/// Synthetic walking scenario: free dynamics, or a path bridged to the
/// destination at T_true and held there afterwards.
struct SimScenario {
  LtiModel model;
  DestinationPrior dest;
  bool bridged = false;
  double T_true = 0.0;        // arrival time, bridged only
  double rate = 1.0;          // observations per second
  double obs_noise_std = 1.0; // meters
  double duration = 120.0;    // seconds
  std::uint64_t seed = 0;
  Vector start_position;      // dims; defaults to the origin
  Vector start_velocity;      // dims; CV only, defaults to rest
  double time_jitter = 0.1;   // timestamp jitter as a fraction of the period

  void validate() const {
    model.validate();
    if (!(rate > 0.0)) throw std::invalid_argument("SimScenario: rate must be > 0");
    if (!(duration > 0.0)) throw std::invalid_argument("SimScenario: duration must be > 0");
    if (!(obs_noise_std >= 0.0)) throw std::invalid_argument("SimScenario: negative noise");
    if (bridged && !(T_true > 0.0 && T_true <= duration)) {
      throw std::invalid_argument("SimScenario: bridged requires 0 < T_true <= duration");
    }
    if (dest.dim() != model.state_dim()) {
      throw std::invalid_argument("SimScenario: destination does not match model state");
    }
  }
};

struct SimResult {
  Track track;
  std::vector<Vector> states;  // true state at each sample time
  bool bridged = false;
  double T_true = 0.0;
};

namespace detail {

inline Vector start_state(const SimScenario& sc) {
  const int s = sc.model.state_dim();
  Vector x = Vector::Zero(s);
  for (int a = 0; a < sc.model.dims; ++a) {
    const int ia = sc.model.position_index(a);
    if (sc.start_position.size() == sc.model.dims) x(ia) = sc.start_position(a);
    if (sc.model.axis_block() == 2 && sc.start_velocity.size() == sc.model.dims) {
      x(ia + 1) = sc.start_velocity(a);
    }
  }
  return x;
}

inline Vector gaussian_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = gauss(rng);
  return v;
}

/// Draw from N(mean, cov) with a PSD cov (rank-deficient allowed).
inline Vector sample_gaussian(const Vector& mean, const Matrix& cov, std::mt19937_64& rng) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(cov));
  Vector scale = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return mean + es.eigenvectors() * scale.asDiagonal() * gaussian_vector(mean.size(), rng);
}

}  // namespace detail

/// Generate a track. Timestamps are the nominal 1/rate lattice with uniform
/// jitter so irregular spacing is exercised; observations are the position
/// components plus isotropic noise.
inline SimResult simulate(const SimScenario& sc) {
  sc.validate();
  std::mt19937_64 rng(sc.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);

  const double period = 1.0 / sc.rate;
  std::vector<double> times;
  const int count = static_cast<int>(std::floor(sc.duration * sc.rate)) + 1;
  times.reserve(count);
  for (int k = 0; k < count; ++k) {
    double t = k * period;
    if (k > 0) t += uni(rng) * sc.time_jitter * period;
    times.push_back(t);
  }

  Vector x = detail::start_state(sc);
  Vector x_arrival;
  if (sc.bridged) x_arrival = detail::sample_gaussian(sc.dest.mean, sc.dest.cov, rng);

  SimResult result;
  result.bridged = sc.bridged;
  result.T_true = sc.T_true;
  result.states.reserve(times.size());

  bool arrived = false;
  double t_prev = times.front();
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t_k = times[k];
    if (k > 0) {
      const double h = t_k - t_prev;
      if (sc.bridged && !arrived) {
        const double h_tilde = sc.T_true - t_k;
        if (h_tilde < kBridgeEpsilon) {
          x = x_arrival;  // endpoint reached; pin exactly
          arrived = true;
        } else {
          const BridgeParams p = bridge_params(sc.model, h, h_tilde);
          Vector joint(2 * x.size());
          joint << x, x_arrival;
          x = detail::sample_gaussian(p.H * joint + p.m, p.C, rng);
        }
      } else if (!sc.bridged) {
        const Transition tr = transition(sc.model, h);
        x = detail::sample_gaussian(tr.F * x + tr.M, tr.Q, rng);
      }
      // after arrival the walker stays put at the endpoint
    }
    result.states.push_back(x);

    TrackSample s;
    s.t = t_k;
    s.x = x(sc.model.position_index(0));
    s.y = sc.model.dims > 1 ? x(sc.model.position_index(1)) : 0.0;
    if (sc.obs_noise_std > 0.0) {
      std::normal_distribution<double> gauss(0.0, sc.obs_noise_std);
      s.x += gauss(rng);
      s.y += sc.model.dims > 1 ? gauss(rng) : 0.0;
    }
    result.track.samples.push_back(s);
    t_prev = t_k;
  }
  return result;
}

/// Write a track as the CSV consumed by parse_track.
inline void emit_track(const Track& track, std::ostream& out) {
  out << (track.geodetic ? "t,lat,lon" : "t,x,y") << "\n";
  for (const auto& s : track.samples) {
    out << detail::format_number(s.t) << ',' << detail::format_number(s.x) << ','
        << detail::format_number(s.y) << "\n";
  }
}

}  // namespace destin
