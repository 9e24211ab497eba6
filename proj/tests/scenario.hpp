// Canonical experiment setups shared by the integration and acceptance
// suites. The walk-past script here must stay in sync with the CSV shipped
// under data/ (test_pipeline checks that).
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "destin/pipeline.hpp"

namespace scenario {

using destin::Matrix;
using destin::RunConfig;
using destin::Track;
using destin::TrackSample;
using destin::Vector;

// 200-trial synthetic suite: CV sigma=1, 1 Hz, 1 m noise, 120 s tracks,
// arrival at 100 s, vehicle 75 m away with a 2 m extent.
inline RunConfig detection_config() {
  RunConfig cfg;
  cfg.model = destin::constant_velocity_model(1.0, 2);
  cfg.vehicle_position = Vector(2);
  cfg.vehicle_position << 60.0, 45.0;
  cfg.vehicle_extent_std = Vector::Constant(2, 2.0);
  cfg.obs_noise_std = 1.0;
  cfg.window_start = 5.0;
  cfg.window_end = 150.0;
  cfg.q = 40;
  cfg.dest_velocity_std = 3.0;
  cfg.sim.bridged = true;
  cfg.sim.arrival = 100.0;
  cfg.sim.rate = 1.0;
  cfg.sim.duration = 120.0;
  cfg.sim.seed = 1;
  return cfg;
}

// Scripted walk-past: approach the vehicle at 1.25 m/s, decelerate over the
// last 5 m, pause 8 s at the car, then leave at 1.45 m/s along the same line.
constexpr double kWalkPastArrive = 44.0;
constexpr double kWalkPastDepart = 52.0;
constexpr double kWalkPastDuration = 85.0;

inline Track walk_past_track() {
  const double dirx = 0.8, diry = 0.6;  // unit vector from start to the car
  const double dist = 50.0;
  const double speed = 1.25, depart_speed = 1.45;
  const double t_decel = kWalkPastArrive - 8.0;

  Track track;
  for (int k = 0; k <= static_cast<int>(kWalkPastDuration); ++k) {
    const double t = k;
    double along;
    if (t <= t_decel) {
      along = speed * t;
    } else if (t <= kWalkPastArrive) {
      const double u = t - t_decel;  // speed ramps linearly down to zero
      along = speed * t_decel + speed * (u - u * u / 16.0);
    } else if (t <= kWalkPastDepart) {
      along = dist;
    } else {
      const double u = t - kWalkPastDepart;  // ramp back up over 4 s
      const double ramp = std::min(u, 4.0);
      along = dist + depart_speed * ramp * ramp / 8.0 + depart_speed * std::max(0.0, u - 4.0);
    }
    track.samples.push_back(TrackSample{t, along * dirx, along * diry});
  }
  return track;
}

inline RunConfig walk_past_config() {
  RunConfig cfg;
  cfg.model = destin::constant_velocity_model(0.25, 2);
  cfg.vehicle_position = Vector(2);
  cfg.vehicle_position << 40.0, 30.0;
  cfg.vehicle_extent_std = Vector::Constant(2, 2.0);
  cfg.obs_noise_std = 1.0;
  cfg.window_start = 5.0;
  cfg.window_end = 95.0;
  cfg.q = 40;
  cfg.dest_velocity_std = 3.0;
  return cfg;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace scenario
