#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qwalk/classical_walk.hpp"
#include "qwalk/szegedy.hpp"

namespace qwalk {

/// Linear ramp beta_j = (j / L) beta_final, j = 1..L.
struct Schedule {
  double beta_final = 0.0;
  std::size_t steps = 0;

  double beta(std::size_t j) const { return steps ? beta_final * double(j) / double(steps) : 0.0; }
  std::vector<double> betas() const;
};

/// Which ground states count as a solution.
enum class TargetMode {
  single,  // the lowest-index ground state only
  all,     // every degenerate ground state
};

std::string to_string(TargetMode m);
TargetMode target_mode_from_string(const std::string& s);

/// Configurations at the global energy minimum.
struct TargetSet {
  std::vector<std::uint64_t> configs;
  double min_energy = 0.0;

  double mass(std::span<const double> p) const;
};

/// Brute-force ground states; energies within 1e-9 (relative to max(1, |E_min|)) count as degenerate.
TargetSet find_target_set(std::span<const double> energies, TargetMode mode = TargetMode::single);

struct TTSRow {
  double duration = 0.0;
  double success_prob = 0.0;
  double tts = 0.0;
};

struct TTSCurve {
  std::vector<TTSRow> rows;  // ascending duration
  std::size_t argmin = 0;

  const TTSRow& best() const { return rows.at(argmin); }
};

/// duration * max(1, log(1 - confidence) / log(1 - p)); +inf when p = 0.
double tts(double duration_cost, double p, double confidence);

/// Grid used by every min-TTS scan: geometric from 1 (ratio `growth`) until TTS has risen
/// `stop_factor` above its running minimum, then refined within +-`refine_fraction` of the argmin.
struct ScanOptions {
  double growth = 1.25;
  double stop_factor = 2.0;
  double refine_fraction = 0.2;
  std::size_t refine_points = 64;      // integer spacing widened so the refinement uses at most this many points
  std::size_t max_duration = 1u << 20;  // hard stop for curves that never turn up
};

using DurationEvaluator = std::function<TTSRow(std::size_t)>;

TTSCurve scan_min_tts(const DurationEvaluator& eval, const ScanOptions& options = {});

/// Duration charged to an L-step unitary run.
enum class UnitaryDuration {
  walk_steps,  // L walk-operator applications
  unit,        // repetitions only
};

std::string to_string(UnitaryDuration d);
UnitaryDuration unitary_duration_from_string(const std::string& s);

/// Conventions shared by the three heuristics.
struct HeuristicConfig {
  double beta_final = 2.0;
  double confidence = 0.99;
  AcceptanceRule rule = AcceptanceRule::metropolis;
  TargetMode target = TargetMode::single;
  bool classical_padded = false;
  VCompletion completion = VCompletion::householder;
  UnitaryDuration unitary_duration = UnitaryDuration::walk_steps;
  ScanOptions scan;
};

/// Success probability of the t-step classical ramp started from the uniform distribution.
double classical_success_prob(const WalkTablePtr& table, const TargetSet& target, const HeuristicConfig& cfg,
                              std::size_t t);

TTSCurve classical_min_tts(const WalkTablePtr& table, const HeuristicConfig& cfg);

/// Expected cost of one rewound level transition: E_a of the three-outcome absorbing chain.
/// `f_squared` = F_j^2, `cost_prev` = 1/delta_{j-1}, `cost_cur` = 1/delta_j.
double rewind_level_cost(double f_squared, double cost_prev, double cost_cur);

/// Zeno preparation along the ramp with measurement cost 1/delta_j per level.
/// Caches phase gaps by beta so scans over L reuse them.
class ZenoEvaluator {
public:
  ZenoEvaluator(WalkTablePtr table, HeuristicConfig cfg);

  struct Result {
    double tts = 0.0;
    double cost = 0.0;          // sum of per-level costs
    double success_prob = 0.0;  // probability that one attempt succeeds
  };

  Result evaluate(std::size_t levels, bool rewind);

  /// delta of the padded walk at beta.
  double phase_gap(double beta);
  const TargetSet& target() const noexcept { return target_; }

private:
  WalkTablePtr table_;
  HeuristicConfig cfg_;
  TargetSet target_;
  std::map<double, double> gaps_;
};

/// Fidelity sum_x sqrt(pi_a(x) pi_b(x)) between two Boltzmann distributions.
double boltzmann_overlap(std::span<const double> energies, double beta_a, double beta_b);

double zeno_tts(const WalkTablePtr& table, const HeuristicConfig& cfg, std::size_t levels, bool rewind);

TTSCurve zeno_min_tts(const WalkTablePtr& table, const HeuristicConfig& cfg, bool rewind);

/// Target mass after applying the padded walk operators for `betas` in order to sqrt(p0).
double unitary_sequence_success(const WalkTablePtr& table, std::span<const double> betas, std::span<const double> p0,
                                const TargetSet& target, AcceptanceRule rule,
                                VCompletion completion = VCompletion::householder);

double unitary_success_prob(const WalkTablePtr& table, const HeuristicConfig& cfg, std::size_t levels);

TTSCurve unitary_min_tts(const WalkTablePtr& table, const HeuristicConfig& cfg);

struct SpeedupFit {
  std::vector<std::pair<double, double>> pairs;  // (classical, quantum)
  double exponent = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS of log-space residuals
};

/// Least-squares slope of log(quantum) against log(classical).
SpeedupFit fit_speedup(std::vector<std::pair<double, double>> pairs);

} // namespace qwalk
