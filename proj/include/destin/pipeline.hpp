#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "destin/bridge.hpp"
#include "destin/filter_bank.hpp"
#include "destin/intent.hpp"
#include "destin/lti.hpp"
#include "destin/simulate.hpp"
#include "destin/trajectory.hpp"

namespace destin {

/// Scenario knobs for `simulate` and `eval`.
struct SimOptions {
  bool bridged = false;
  double arrival = 100.0;   // T_true, seconds after track start
  double rate = 1.0;        // Hz
  double duration = 120.0;  // seconds
  Vector start;             // start position, dims; defaults to the origin
  Vector start_velocity;    // dims; CV only
  std::uint64_t seed = 1;
  double arrival_speed_std = 0.5;     // simulated arrival velocity spread, m/s
  double time_jitter = 0.1;           // fraction of the nominal period
  std::optional<double> noise_std{};  // generator noise; defaults to obs_noise_std
};

/// Full run configuration: motion model, vehicle prior, inference parameters
/// and scenario options. Loadable from JSON with flag overrides on top.
struct RunConfig {
  LtiModel model = constant_velocity_model(1.0, 2);
  Vector vehicle_position = Vector::Zero(2);  // local meters, or (lat, lon) for geodetic tracks
  Vector vehicle_extent_std = Vector::Constant(2, 2.0);
  double obs_noise_std = 1.0;
  double prior_return = 0.5;
  double gamma = 0.5;
  double window_start = 5.0;   // arrival window relative to the first fix
  double window_end = 600.0;
  int q = 40;
  double init_velocity_std = 5.0;
  // at-arrival speed prior; walking scale by default (a very broad value here
  // widens every bridged predictive and washes out the evidence)
  double dest_velocity_std = 3.0;
  unsigned threads = 1;
  SimOptions sim;
  int trials = 100;
  std::string input = "-";
  std::string output = "-";
  ReportFormat format = ReportFormat::Csv;

  void validate() const {
    model.validate();
    if (vehicle_position.size() != model.dims || vehicle_extent_std.size() != model.dims) {
      throw std::invalid_argument("config: vehicle position/extent must match model dims");
    }
    for (int a = 0; a < model.dims; ++a) {
      if (!(vehicle_extent_std(a) >= 0.0)) {
        throw std::invalid_argument("config: vehicle extent std must be >= 0");
      }
    }
    if (!(obs_noise_std > 0.0)) throw std::invalid_argument("config: obs_noise_std must be > 0");
    if (!(prior_return > 0.0 && prior_return < 1.0)) {
      throw std::invalid_argument("config: prior_return must be in (0,1)");
    }
    if (!(gamma >= 0.5 && gamma < 1.0)) {
      throw std::invalid_argument("config: gamma must be in [0.5,1)");
    }
    if (!(window_end > window_start) || !(window_start > 0.0)) {
      throw std::invalid_argument("config: arrival window must satisfy 0 < start < end");
    }
    if (q < 3) throw std::invalid_argument("config: q must be >= 3");
    if (!(init_velocity_std > 0.0) || !(dest_velocity_std > 0.0)) {
      throw std::invalid_argument("config: velocity stds must be > 0");
    }
    if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  }

  /// Destination prior used for inference.
  DestinationPrior inference_destination(const Vector& vehicle_local) const {
    Matrix pos_cov = Matrix::Zero(model.dims, model.dims);
    for (int a = 0; a < model.dims; ++a) {
      pos_cov(a, a) = vehicle_extent_std(a) * vehicle_extent_std(a);
    }
    return make_destination(model, vehicle_local, pos_cov, dest_velocity_std);
  }

  /// Scenario for the simulator (arrival velocity spread kept walk-sized).
  SimScenario scenario(bool bridged_override) const {
    Matrix pos_cov = Matrix::Zero(model.dims, model.dims);
    for (int a = 0; a < model.dims; ++a) {
      pos_cov(a, a) = vehicle_extent_std(a) * vehicle_extent_std(a);
    }
    SimScenario sc;
    sc.model = model;
    sc.dest = make_destination(model, vehicle_position, pos_cov,
                               std::max(sim.arrival_speed_std, 1e-6));
    sc.bridged = bridged_override;
    sc.T_true = sim.arrival;
    sc.rate = sim.rate;
    sc.duration = sim.duration;
    sc.obs_noise_std = sim.noise_std.value_or(obs_noise_std);
    sc.seed = sim.seed;
    sc.start_position = sim.start.size() == model.dims ? sim.start : Vector::Zero(model.dims);
    sc.start_velocity =
        sim.start_velocity.size() == model.dims ? sim.start_velocity : Vector::Zero(model.dims);
    sc.time_jitter = sim.time_jitter;
    return sc;
  }
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& j, std::initializer_list<const char*> allowed,
                       const std::string& context) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) { known = true; break; }
    }
    if (!known) throw ParseError("config: unknown key '" + it.key() + "' in " + context);
  }
}

inline Vector vector_from_json(const json& j, const std::string& context) {
  if (!j.is_array()) throw ParseError("config: " + context + " must be an array");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ParseError("config: " + context + " must be numeric");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

inline ModelFamily family_from_string(const std::string& s) {
  if (s == "bm" || s == "brownian") return ModelFamily::BrownianMotion;
  if (s == "cv" || s == "constant_velocity") return ModelFamily::ConstantVelocity;
  if (s == "ou" || s == "mean_reverting") return ModelFamily::MeanReverting;
  throw ParseError("config: unknown model family '" + s + "'");
}

}  // namespace detail

inline ReportFormat format_from_string(const std::string& s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  throw ParseError("config: unknown format '" + s + "'");
}

/// Parse a config JSON object. Unknown keys are rejected outright.
inline RunConfig parse_config(const nlohmann::json& j) {
  using detail::check_keys;
  using detail::vector_from_json;
  RunConfig cfg;
  check_keys(j, {"model", "vehicle", "obs_noise_std", "prior_return", "gamma", "arrival_window",
                 "q", "init_velocity_std", "dest_velocity_std", "threads", "sim", "trials",
                 "input", "output", "format"},
             "top level");

  if (j.contains("model")) {
    const auto& m = j.at("model");
    check_keys(m, {"family", "sigma", "dims", "lambda", "attractor"}, "model");
    LtiModel model;
    model.family = detail::family_from_string(m.value("family", "cv"));
    model.sigma = m.value("sigma", 1.0);
    model.dims = m.value("dims", 2);
    if (m.contains("lambda")) model.reversion = m.at("lambda").get<double>();
    if (m.contains("attractor")) model.attractor = vector_from_json(m.at("attractor"), "attractor");
    cfg.model = model;
  }
  if (j.contains("vehicle")) {
    const auto& v = j.at("vehicle");
    check_keys(v, {"position", "extent_std"}, "vehicle");
    if (v.contains("position")) cfg.vehicle_position = vector_from_json(v.at("position"), "vehicle.position");
    if (v.contains("extent_std")) cfg.vehicle_extent_std = vector_from_json(v.at("extent_std"), "vehicle.extent_std");
  } else {
    cfg.vehicle_position = Vector::Zero(cfg.model.dims);
    cfg.vehicle_extent_std = Vector::Constant(cfg.model.dims, 2.0);
  }
  if (cfg.vehicle_position.size() != cfg.model.dims) {
    cfg.vehicle_position = Vector::Zero(cfg.model.dims);
  }
  if (cfg.vehicle_extent_std.size() != cfg.model.dims) {
    cfg.vehicle_extent_std = Vector::Constant(cfg.model.dims, 2.0);
  }

  cfg.obs_noise_std = j.value("obs_noise_std", cfg.obs_noise_std);
  cfg.prior_return = j.value("prior_return", cfg.prior_return);
  cfg.gamma = j.value("gamma", cfg.gamma);
  if (j.contains("arrival_window")) {
    const Vector w = vector_from_json(j.at("arrival_window"), "arrival_window");
    if (w.size() != 2) throw ParseError("config: arrival_window must be [start, end]");
    cfg.window_start = w(0);
    cfg.window_end = w(1);
  }
  cfg.q = j.value("q", cfg.q);
  cfg.init_velocity_std = j.value("init_velocity_std", cfg.init_velocity_std);
  cfg.dest_velocity_std = j.value("dest_velocity_std", cfg.dest_velocity_std);
  cfg.threads = j.value("threads", cfg.threads);
  cfg.trials = j.value("trials", cfg.trials);
  cfg.input = j.value("input", cfg.input);
  cfg.output = j.value("output", cfg.output);
  if (j.contains("format")) cfg.format = format_from_string(j.at("format").get<std::string>());

  if (j.contains("sim")) {
    const auto& s = j.at("sim");
    detail::check_keys(s, {"bridged", "arrival", "rate", "duration", "start", "start_velocity",
                           "seed", "arrival_speed_std", "time_jitter", "noise_std"},
                       "sim");
    cfg.sim.bridged = s.value("bridged", cfg.sim.bridged);
    cfg.sim.arrival = s.value("arrival", cfg.sim.arrival);
    cfg.sim.rate = s.value("rate", cfg.sim.rate);
    cfg.sim.duration = s.value("duration", cfg.sim.duration);
    if (s.contains("start")) cfg.sim.start = vector_from_json(s.at("start"), "sim.start");
    if (s.contains("start_velocity")) {
      cfg.sim.start_velocity = vector_from_json(s.at("start_velocity"), "sim.start_velocity");
    }
    cfg.sim.seed = s.value("seed", cfg.sim.seed);
    cfg.sim.arrival_speed_std = s.value("arrival_speed_std", cfg.sim.arrival_speed_std);
    cfg.sim.time_jitter = s.value("time_jitter", cfg.sim.time_jitter);
    if (s.contains("noise_std")) {
      cfg.sim.noise_std = s.at("noise_std").get<double>();
      if (*cfg.sim.noise_std < 0.0) throw ParseError("config: sim.noise_std must be >= 0");
    }
  }

  cfg.validate();
  return cfg;
}

inline RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return parse_config(j);
}

/// Stateful per-track inference: seeds the filter bank from the first fix and
/// turns every subsequent fix into an IntentReport.
///
/// The first fix initializes the state prior (position at the fix with the
/// observation noise as spread, velocity at rest with a broad prior) and is
/// not scored; its report carries the configured priors.
class IntentTracker {
 public:
  IntentTracker(const RunConfig& cfg, const Vector& vehicle_local) : cfg_(cfg) {
    cfg_.validate();
    obs_ = default_observation(cfg_.model.dims, cfg_.model, cfg_.obs_noise_std);
    dest_ = cfg_.inference_destination(vehicle_local);
  }

  IntentReport step(const TrackSample& fix) {
    const Vector y = fix_vector(fix);
    IntentReport report;
    report.t = fix.t;

    if (!started_) {
      start(fix);
      report.p_return = cfg_.prior_return;
      report.p_not = 1.0 - cfg_.prior_return;
      report.arrival_weights = arrival_posterior(bank_, grid_, arrival_prior_);
    } else {
      bank_ = bank_step(std::move(bank_), y, fix.t, cfg_.threads);
      const double log_lik_return = marginal_likelihood_return(bank_, grid_, arrival_prior_);
      const auto [p_return, p_not] =
          hypothesis_posterior(bank_.h0_log_lik, log_lik_return, cfg_.prior_return);
      report.p_return = p_return;
      report.p_not = p_not;
      report.arrival_weights = arrival_posterior(bank_, grid_, arrival_prior_);
    }
    const auto [t_map, t_std] = arrival_point_estimate(report.arrival_weights, grid_);
    report.T_map = t_map;
    report.T_std = t_std;
    report.decision = decide(report.p_return, cfg_.gamma);
    return report;
  }

  const FilterBank& bank() const { return bank_; }
  const QuadratureGrid& grid() const { return grid_; }

 private:
  Vector fix_vector(const TrackSample& fix) const {
    Vector y(cfg_.model.dims);
    y(0) = fix.x;
    if (cfg_.model.dims > 1) y(1) = fix.y;
    return y;
  }

  void start(const TrackSample& fix) {
    const int s = cfg_.model.state_dim();
    GaussianBelief init{Vector::Zero(s), Matrix::Zero(s, s), fix.t};
    const Vector y = fix_vector(fix);
    for (int a = 0; a < cfg_.model.dims; ++a) {
      const int ia = cfg_.model.position_index(a);
      init.mean(ia) = y(a);
      init.cov(ia, ia) = cfg_.obs_noise_std * cfg_.obs_noise_std;
      if (cfg_.model.axis_block() == 2) {
        init.cov(ia + 1, ia + 1) = cfg_.init_velocity_std * cfg_.init_velocity_std;
      }
    }
    grid_ = make_grid(fix.t + cfg_.window_start, fix.t + cfg_.window_end, cfg_.q);
    arrival_prior_ = uniform_arrival_prior(grid_.t_a, grid_.t_b);
    bank_ = bank_init(cfg_.model, obs_, dest_, init, grid_);
    started_ = true;
  }

  RunConfig cfg_;
  ObservationModel obs_;
  DestinationPrior dest_;
  QuadratureGrid grid_;
  ArrivalPrior arrival_prior_;
  FilterBank bank_;
  bool started_ = false;
};

/// Tags numerical failures with the timestep they occurred at.
inline IntentReport step_or_rethrow(IntentTracker& tracker, const TrackSample& fix) {
  try {
    return tracker.step(fix);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(e.what()) + " at t=" + detail::format_number(fix.t));
  }
}

/// Run the full inference pipeline over an in-memory track. Geodetic tracks
/// are projected about the vehicle location (which is then the local origin).
inline std::vector<IntentReport> infer_track(const RunConfig& cfg, const Track& track) {
  if (track.samples.empty()) throw ParseError("empty track");
  std::vector<TrackSample> samples = track.samples;
  Vector vehicle_local = cfg.vehicle_position;
  if (track.geodetic) {
    if (cfg.model.dims != 2) throw std::invalid_argument("geodetic tracks require a 2-D model");
    samples = latlon_to_local(samples, cfg.vehicle_position(0), cfg.vehicle_position(1));
    vehicle_local = Vector::Zero(2);
  }
  IntentTracker tracker(cfg, vehicle_local);
  std::vector<IntentReport> reports;
  reports.reserve(samples.size());
  for (const auto& s : samples) reports.push_back(step_or_rethrow(tracker, s));
  return reports;
}

/// Streaming inference: reads track CSV from `in`, writes one report per fix.
/// CSV output is flushed per observation so live replay over a pipe works.
inline void run_infer(const RunConfig& cfg, std::istream& in, std::ostream& out) {
  std::string line;
  long line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty track: missing header", 1);
  ++line_no;
  Track header_probe;
  {
    std::istringstream probe(line + "\n");
    header_probe = parse_track(probe);  // validates the header, no samples yet
  }
  const bool geodetic = header_probe.geodetic;
  Vector vehicle_local = cfg.vehicle_position;
  if (geodetic && cfg.model.dims != 2) {
    throw std::invalid_argument("geodetic tracks require a 2-D model");
  }
  if (geodetic) vehicle_local = Vector::Zero(2);

  std::optional<IntentTracker> tracker;
  std::vector<IntentReport> buffered;
  double last_t = 0.0;
  bool any = false;

  if (cfg.format == ReportFormat::Csv) out << kReportCsvHeader << "\n";
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv(line);
    if (fields.size() != 3) throw ParseError("expected 3 fields", line_no);
    TrackSample s;
    s.t = detail::parse_number(fields[0], line_no);
    s.x = detail::parse_number(fields[1], line_no);
    s.y = detail::parse_number(fields[2], line_no);
    if (any && s.t <= last_t) {
      throw ParseError("timestamps must be strictly increasing", line_no);
    }
    last_t = s.t;
    any = true;
    if (geodetic) {
      s = latlon_to_local({s}, cfg.vehicle_position(0), cfg.vehicle_position(1)).front();
    }
    if (!tracker) tracker.emplace(cfg, vehicle_local);
    const IntentReport r = step_or_rethrow(*tracker, s);
    if (cfg.format == ReportFormat::Csv) {
      out << detail::format_number(r.t) << ',' << detail::format_number(r.p_return) << ','
          << detail::format_number(r.p_not) << ',' << detail::format_number(r.T_map) << ','
          << detail::format_number(r.T_std) << ',' << to_string(r.decision) << "\n";
      out.flush();
    } else {
      buffered.push_back(r);
    }
  }
  if (!any) throw ParseError("empty track: no samples");
  if (cfg.format == ReportFormat::Json) emit_report(buffered, ReportFormat::Json, out);
}

/// Generate a synthetic track per the config's sim options.
inline void run_simulate(const RunConfig& cfg, std::ostream& out) {
  cfg.validate();
  const SimResult result = simulate(cfg.scenario(cfg.sim.bridged));
  emit_track(result.track, out);
}

/// Per-trial summary used by the evaluation harness.
struct TrialMetrics {
  bool final_correct = false;
  bool detected = false;
  double latency = 0.0;  // seconds from track start until the decision sticks
  double tmap_err_50 = 0.0, tmap_err_75 = 0.0, tmap_err_100 = 0.0;
};

inline TrialMetrics evaluate_reports(const std::vector<IntentReport>& reports, bool bridged,
                                     double t_true_abs, double gamma) {
  TrialMetrics m;
  const double t0 = reports.front().t;
  const bool final_return = reports.back().p_return >= 0.5;
  m.final_correct = bridged ? final_return : !final_return;

  // first time the correct side of the threshold is reached and kept
  std::size_t sticky = reports.size();
  for (std::size_t i = reports.size(); i-- > 0;) {
    const double p = reports[i].p_return;
    const bool good = bridged ? p >= gamma : p <= 1.0 - gamma;
    if (!good) break;
    sticky = i;
  }
  if (sticky < reports.size()) {
    m.detected = true;
    m.latency = reports[sticky].t - t0;
  }

  auto err_at = [&](double frac) {
    const std::size_t idx =
        std::min(reports.size() - 1,
                 static_cast<std::size_t>(std::llround(frac * (reports.size() - 1))));
    return std::abs(reports[idx].T_map - t_true_abs);
  };
  if (bridged) {
    m.tmap_err_50 = err_at(0.50);
    m.tmap_err_75 = err_at(0.75);
    m.tmap_err_100 = err_at(1.00);
  }
  return m;
}

constexpr const char* kEvalCsvHeader =
    "scenario,trials,final_accuracy,detection_rate,mean_detection_latency,"
    "mean_abs_tmap_err_50,mean_abs_tmap_err_75,mean_abs_tmap_err_100";

/// Monte-Carlo evaluation over paired bridged/free scenarios; one CSV row per
/// scenario configuration.
inline void run_eval(const RunConfig& cfg, std::ostream& out) {
  cfg.validate();
  out << kEvalCsvHeader << "\n";
  for (const bool bridged : {true, false}) {
    int correct = 0, detected = 0;
    double latency_sum = 0.0;
    double err50 = 0.0, err75 = 0.0, err100 = 0.0;
    for (int trial = 0; trial < cfg.trials; ++trial) {
      SimScenario sc = cfg.scenario(bridged);
      sc.seed = cfg.sim.seed + static_cast<std::uint64_t>(trial);
      const SimResult sim = simulate(sc);
      const auto reports = infer_track(cfg, sim.track);
      const double t_true_abs = sim.track.samples.front().t + cfg.sim.arrival;
      const TrialMetrics m = evaluate_reports(reports, bridged, t_true_abs, cfg.gamma);
      correct += m.final_correct ? 1 : 0;
      if (m.detected) {
        ++detected;
        latency_sum += m.latency;
      }
      err50 += m.tmap_err_50;
      err75 += m.tmap_err_75;
      err100 += m.tmap_err_100;
    }
    const double n = static_cast<double>(cfg.trials);
    out << (bridged ? "bridged" : "free") << ',' << cfg.trials << ','
        << detail::format_number(correct / n) << ',' << detail::format_number(detected / n) << ','
        << detail::format_number(detected > 0 ? latency_sum / detected : std::nan("")) << ',';
    if (bridged) {
      out << detail::format_number(err50 / n) << ',' << detail::format_number(err75 / n) << ','
          << detail::format_number(err100 / n) << "\n";
    } else {
      out << "nan,nan,nan\n";
    }
  }
}

}  // namespace destin
