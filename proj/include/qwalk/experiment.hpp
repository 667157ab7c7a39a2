#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qwalk/annealing.hpp"
#include "qwalk/resources.hpp"

namespace qwalk {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kResultSchema = 1;

enum class ExperimentKind { fig1_chain, fig2_random, fig3_parallel, spectrum_suite, cost_report };

std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

struct Fig3Options {
  std::size_t n = 500;
  double beta = 3.0;
  std::vector<double> qs{0.5, 0.25, 0.125};
  std::uint64_t budget = 1'500'000;
  std::size_t seeds = 5;
  std::uint64_t sample_stride = 5000;  // rounded up to a multiple of n so all series share sample points
  bool ordered_pairs = false;          // see build_complete_binary
};

struct SpectrumOptions {
  std::vector<double> betas{0.0, 0.5, 1.0, 2.0};
  std::vector<AcceptanceRule> rules{AcceptanceRule::metropolis, AcceptanceRule::glauber};
  bool padded = true;
  std::string model = "random";  // chain or random
};

struct CostOptions {
  std::uint64_t n = 512000;
  std::uint64_t moves = 512000;
  std::uint64_t degree = 6;
  double epsilon = 1e-16;
  std::vector<double> alphas{0.75, 0.5, 0.42};
  ScenarioInputs scenario;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::fig1_chain;
  std::optional<std::uint64_t> master_seed;
  std::vector<std::size_t> sizes;
  std::size_t instances_per_size = 1;
  std::optional<std::size_t> pair_count;  // random models; default min(n(n-1)/2, round(3.5 n))
  std::vector<std::string> methods{"classical", "zeno", "zeno_rewind", "unitary"};
  HeuristicConfig heuristics;
  Fig3Options fig3;
  SpectrumOptions spectrum;
  CostOptions cost;
  std::filesystem::path output_dir = "results";
  std::size_t workers = 1;

  /// Throws std::invalid_argument describing the first problem found.
  void validate() const;
};

/// Parses; unknown keys and ill-typed values are rejected. Range checks live in validate(),
/// which run_experiment calls, so command-line overrides can fill in missing fields first.
ExperimentConfig config_from_json(const nlohmann::json& j);
/// Full configuration with every default filled in.
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Flags that change what the numbers mean, embedded in every output file.
nlohmann::json design_flags(const ExperimentConfig& cfg);

std::uint64_t instance_seed(std::uint64_t master, std::uint64_t size, std::uint64_t index);

struct ResultRow {
  std::string instance_id;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string method;
  double min_tts = 0.0;
  double argmin_duration = 0.0;
  double success_prob = 0.0;
  double wall_time_s = 0.0;
};

struct ErrorRow {
  std::string instance_id;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string method;
  std::string message;
};

struct RunOutcome {
  std::vector<ResultRow> rows;
  std::vector<ErrorRow> errors;
  std::size_t resumed = 0;  // instances loaded from a previous run
  nlohmann::json summary;
};

/// Runs the configured experiment and writes its files under cfg.output_dir.
RunOutcome run_experiment(const ExperimentConfig& cfg);

/// Scatter, fitted-line and x=y files for each quantum method against the classical baseline.
/// Returns the fit per method.
std::map<std::string, SpeedupFit> emit_plot_data(const std::vector<ResultRow>& rows,
                                                 const std::filesystem::path& out_dir);

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);

/// Plot files for a finished run directory: scatter data from results.csv or overlaid series from traces.csv.
void emit_plot_data(const std::filesystem::path& run_dir, const std::filesystem::path& out_dir);

} // namespace qwalk
