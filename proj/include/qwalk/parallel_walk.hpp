#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qwalk/ising_model.hpp"

namespace qwalk {

/// Irreversible sweep walk: every spin is proposed with probability q and accepted with the
/// Metropolis probability evaluated against the configuration at the start of the sweep.
struct ParallelWalkConfig {
  double q = 0.5;
  double beta = 1.0;

  void validate() const;
};

struct ParallelStepStats {
  std::uint64_t proposed = 0;
  std::uint64_t accepted = 0;
  /// Proposals made after a spin sharing a term with the proposed spin had already flipped
  /// in the same sweep. Only these can differ between frozen and sequential acceptance.
  std::uint64_t stale_proposals = 0;
};

enum class AcceptanceReference {
  sweep_start,  // the parallel walk
  current,      // ordinary sequential Metropolis over the same proposals
};

/// Spins plus cached local fields for single-spin-flip dynamics on a model with terms of arity <= 2.
class SpinSystem {
public:
  SpinSystem(const IsingModel& model, SpinConfig x);

  const SpinConfig& config() const noexcept { return x_; }
  double energy() const noexcept { return energy_; }
  std::size_t num_spins() const noexcept { return x_.size(); }

  /// E(x with spin i flipped) - E(x).
  double flip_delta(std::size_t i) const noexcept { return -2.0 * x_.spin(i) * field_[i]; }
  void flip(std::size_t i);

  /// Recompute fields and energy from scratch; returns the largest discrepancy found.
  double resync();

  bool interacts(std::size_t i, std::size_t k) const;

private:
  const IsingModel* model_;
  SpinConfig x_;
  std::vector<double> field_;  // dE/dx_i
  double energy_ = 0.0;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> neighbors_;
  std::vector<double> onsite_;
};

/// Per-spin flip probabilities q * B_i(x) for a sweep starting at x.
std::vector<double> sweep_flip_probabilities(const IsingModel& model, const SpinConfig& x,
                                             const ParallelWalkConfig& cfg);

/// One sweep in ascending spin order.
void parallel_step(SpinSystem& system, const ParallelWalkConfig& cfg, std::mt19937_64& rng,
                   ParallelStepStats* stats = nullptr,
                   AcceptanceReference reference = AcceptanceReference::sweep_start);

SpinConfig parallel_step(const IsingModel& model, const SpinConfig& x, const ParallelWalkConfig& cfg,
                         std::mt19937_64& rng);

/// Exact one-sweep outcome distribution from x, by enumerating the sweep's branches (n <= 16).
std::vector<double> parallel_sweep_distribution(const IsingModel& model, const SpinConfig& x,
                                                const ParallelWalkConfig& cfg);

/// Dense column-stochastic transition matrix of the sweep walk (n <= 10).
Eigen::MatrixXd parallel_transition_matrix(const IsingModel& model, const ParallelWalkConfig& cfg);

struct ReversibilityReport {
  std::vector<double> stationary;
  double detailed_balance_residual = 0.0;
};

/// Stationary distribution of the sweep walk and its detailed-balance residual; n <= 4.
ReversibilityReport parallel_reversibility(const IsingModel& model, const ParallelWalkConfig& cfg);

enum class WalkKind { standard, parallel };

struct EnergyTracePoint {
  double normalized_step = 0.0;
  double energy = 0.0;
};

struct EnergyTrace {
  WalkKind kind = WalkKind::standard;
  double q = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::vector<EnergyTracePoint> points;
  double min_energy = 0.0;         // lowest energy visited, including between samples
  double max_resync_error = 0.0;   // largest cached-field discrepancy seen at resyncs

  double final_energy() const { return points.empty() ? 0.0 : points.back().energy; }
};

/// Runs `budget` normalized steps from a seeded uniformly random start. The standard walk performs
/// one single-spin Metropolis update per step; the parallel walk one sweep per n steps.
/// A point is recorded every `sample_stride` normalized steps and at the end.
EnergyTrace energy_trace(const IsingModel& model, WalkKind kind, double q, double beta, std::uint64_t budget,
                         std::uint64_t seed, std::uint64_t sample_stride);

std::string to_string(WalkKind k);

} // namespace qwalk
