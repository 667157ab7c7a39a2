#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qwalk/annealing.hpp"
#include "qwalk/classical_walk.hpp"
#include "qwalk/experiment.hpp"
#include "qwalk/resources.hpp"

namespace {

using nlohmann::json;

int do_run(const std::string& config_path, std::optional<std::uint64_t> seed, std::optional<std::size_t> workers,
           const std::string& out) {
  std::ifstream in(config_path);
  if (!in) throw std::runtime_error("cannot read config '" + config_path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument("config '" + config_path + "': " + e.what());
  }
  auto cfg = qwalk::config_from_json(j);
  if (seed) cfg.master_seed = *seed;
  if (workers) cfg.workers = *workers;
  if (!out.empty()) cfg.output_dir = out;
  const auto outcome = qwalk::run_experiment(cfg);
  std::cerr << "qwalk: " << qwalk::to_string(cfg.kind) << " wrote " << cfg.output_dir.string() << " ("
            << outcome.rows.size() << " rows, " << outcome.errors.size() << " errors, " << outcome.resumed
            << " resumed)\n";
  std::cout << outcome.summary.dump(2) << '\n';
  return outcome.errors.empty() ? 0 : 2;
}

qwalk::IsingModel cli_model(const std::string& kind, std::size_t n, std::uint64_t seed) {
  if (kind == "chain") return qwalk::build_chain(n);
  if (kind == "random") return qwalk::build_random_sparse(n, qwalk::default_pair_count(n), seed);
  if (kind == "complete") return qwalk::build_complete_binary(n, seed);
  throw std::invalid_argument("unknown model '" + kind + "'");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum walk annealing experiments"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::string out;

  auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
  std::string config_path;
  run->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Master seed override");
  run->add_option("--workers", workers, "Concurrent instances")->check(CLI::PositiveNumber);
  run->add_option("--out", out, "Output directory override");

  auto* spec = app.add_subcommand("spectrum", "Spectral gap and phase gap of one walk");
  std::size_t n = 6;
  std::string model = "chain", rule = "metropolis", method = "automatic";
  double beta = 1.0;
  bool unpadded = false;
  std::uint64_t spectrum_seed = 1;
  spec->add_option("--n", n, "Spins")->check(CLI::Range(2, 20));
  spec->add_option("--model", model, "chain, random or complete")->check(CLI::IsMember({"chain", "random", "complete"}));
  spec->add_option("--beta", beta, "Inverse temperature")->check(CLI::NonNegativeNumber);
  spec->add_option("--rule", rule, "metropolis or glauber")->check(CLI::IsMember({"metropolis", "glauber"}));
  spec->add_option("--method", method, "automatic, dense or iterative")
      ->check(CLI::IsMember({"automatic", "dense", "iterative"}));
  spec->add_flag("--unpadded", unpadded, "Use the unpadded walk");
  spec->add_option("--seed", spectrum_seed, "Model seed");

  auto* cost = app.add_subcommand("cost", "Per-component circuit costs of one walk step");
  std::uint64_t cost_n = 512000, cost_moves = 0, degree = 6;
  double epsilon = 1e-16;
  cost->add_option("--n", cost_n, "Spins")->check(CLI::PositiveNumber);
  cost->add_option("--moves", cost_moves, "Moves N (default n)");
  cost->add_option("--degree", degree, "Degree bound d");
  cost->add_option("--epsilon", epsilon, "Rotation synthesis accuracy")->check(CLI::Range(0.0, 1.0));

  auto* scen = app.add_subcommand("scenario", "Logical gate time needed to beat a classical machine");
  qwalk::ScenarioInputs si;
  scen->add_option("--alpha", si.alpha, "Speedup exponent")->check(CLI::PositiveNumber);
  scen->add_option("--rate", si.classical_rate, "Classical spin updates per second")->check(CLI::PositiveNumber);
  scen->add_option("--duration", si.duration_s, "Wall time in seconds")->check(CLI::PositiveNumber);
  scen->add_option("--depth", si.per_step_depth, "Logical depth per walk step")->check(CLI::PositiveNumber);
  scen->add_option("--synthesis", si.synthesis_factor, "T gates per rotation")->check(CLI::PositiveNumber);

  auto* plot = app.add_subcommand("plot-data", "Plot files for a finished run directory");
  std::string run_dir;
  plot->add_option("run_dir", run_dir, "Directory written by run")->required()->check(CLI::ExistingDirectory);
  plot->add_option("--out", out, "Output directory (default <run_dir>/plot)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return do_run(config_path, seed, workers, out);
    if (*spec) {
      auto table = qwalk::make_walk_table(cli_model(model, n, spectrum_seed), qwalk::MoveSet::single_spin_flips(n));
      qwalk::WalkSpec ws{table, beta, qwalk::acceptance_rule_from_string(rule), !unpadded};
      const auto m = method == "dense"       ? qwalk::SpectralMethod::dense
                     : method == "iterative" ? qwalk::SpectralMethod::iterative
                                             : qwalk::SpectralMethod::automatic;
      const auto r = qwalk::spectral(ws, m);
      std::cout << json{{"n", n},
                        {"model", model},
                        {"beta", beta},
                        {"rule", rule},
                        {"padded", !unpadded},
                        {"lambda1", r.lambda1},
                        {"gap", r.gap},
                        {"phase_gap", r.phase_gap},
                        {"sqrt_gap", std::sqrt(std::max(0.0, r.gap))},
                        {"method", r.method},
                        {"residual", r.residual},
                        {"iterations", r.iterations}}
                       .dump(2)
                << '\n';
      return 0;
    }
    if (*cost) {
      const auto report = qwalk::component_costs(cost_n, cost_moves ? cost_moves : cost_n, degree, epsilon);
      json j = qwalk::to_json(report);
      j["synthesis_count"] = qwalk::synthesis_count(epsilon);
      std::cout << j.dump(2) << '\n';
      return 0;
    }
    if (*scen) {
      std::cout << qwalk::to_json(qwalk::scenario(si)).dump(2) << '\n';
      return 0;
    }
    if (*plot) {
      qwalk::emit_plot_data(run_dir, out.empty() ? std::filesystem::path(run_dir) / "plot" : std::filesystem::path(out));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "qwalk: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
