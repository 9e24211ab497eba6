// Command-line front end: `infer` runs the returning-to-vehicle estimator over
// a track, `simulate` generates synthetic tracks, `eval` runs the Monte-Carlo
// harness. Exit codes: 0 ok, 2 input/config error, 3 numerical failure.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "destin/destin.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> input, output, format;
  std::optional<std::uint64_t> seed;
  std::optional<int> q, trials;
  std::optional<double> gamma, arrival, rate, duration;
  bool bridged = false;
};

destin::RunConfig resolve(const Flags& f) {
  destin::RunConfig cfg =
      f.config.empty() ? destin::RunConfig{} : destin::load_config_file(f.config);
  if (f.input) cfg.input = *f.input;
  if (f.output) cfg.output = *f.output;
  if (f.format) cfg.format = destin::format_from_string(*f.format);
  if (f.seed) cfg.sim.seed = *f.seed;
  if (f.q) cfg.q = *f.q;
  if (f.gamma) cfg.gamma = *f.gamma;
  if (f.bridged) cfg.sim.bridged = true;
  if (f.arrival) cfg.sim.arrival = *f.arrival;
  if (f.rate) cfg.sim.rate = *f.rate;
  if (f.duration) cfg.sim.duration = *f.duration;
  if (f.trials) cfg.trials = *f.trials;
  cfg.validate();
  return cfg;
}

std::unique_ptr<std::istream> open_input(const std::string& path) {
  if (path == "-") return nullptr;  // caller falls back to std::cin
  auto in = std::make_unique<std::ifstream>(path);
  if (!*in) throw destin::ParseError("cannot open input '" + path + "'");
  return in;
}

std::unique_ptr<std::ostream> open_output(const std::string& path) {
  if (path == "-") return nullptr;
  auto out = std::make_unique<std::ofstream>(path);
  if (!*out) throw destin::ParseError("cannot open output '" + path + "'");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Returning-to-vehicle intent and arrival-time inference"};
  app.require_subcommand(1);

  Flags flags;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", flags.config, "JSON config file");
    cmd->add_option("--input", flags.input, "track CSV path, or - for stdin");
    cmd->add_option("--output", flags.output, "output path, or - for stdout");
    cmd->add_option("--format", flags.format, "report format: csv|json");
    cmd->add_option("--seed", flags.seed, "simulation seed");
    cmd->add_option("--q", flags.q, "quadrature points");
    cmd->add_option("--gamma", flags.gamma, "decision threshold");
    cmd->add_flag("--bridged", flags.bridged, "simulate a returning track");
    cmd->add_option("--arrival", flags.arrival, "simulated arrival time (s)");
    cmd->add_option("--rate", flags.rate, "observation rate (Hz)");
    cmd->add_option("--duration", flags.duration, "track duration (s)");
    cmd->add_option("--trials", flags.trials, "Monte-Carlo trials");
  };

  CLI::App* infer = app.add_subcommand("infer", "run inference over a track");
  CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic track");
  CLI::App* eval = app.add_subcommand("eval", "Monte-Carlo evaluation metrics");
  add_common(infer);
  add_common(simulate);
  add_common(eval);

  CLI11_PARSE(app, argc, argv);

  try {
    const destin::RunConfig cfg = resolve(flags);
    auto in_file = open_input(cfg.input);
    auto out_file = open_output(cfg.output);
    std::istream& in = in_file ? *in_file : std::cin;
    std::ostream& out = out_file ? *out_file : std::cout;

    if (infer->parsed()) {
      destin::run_infer(cfg, in, out);
    } else if (simulate->parsed()) {
      destin::run_simulate(cfg, out);
    } else if (eval->parsed()) {
      destin::run_eval(cfg, out);
    }
  } catch (const destin::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const destin::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
