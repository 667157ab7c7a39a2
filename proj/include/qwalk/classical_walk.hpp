#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qwalk/ising_model.hpp"

namespace qwalk {

enum class AcceptanceRule { metropolis, glauber };

std::string to_string(AcceptanceRule rule);
AcceptanceRule acceptance_rule_from_string(const std::string& s);

/// Metropolis min(1, e^{-beta dE}) or Glauber 1/(1 + e^{beta dE}); saturates instead of overflowing.
double acceptance(AcceptanceRule rule, double delta_energy, double beta);

/// Probability vector over the 2^n configurations, indexed by SpinConfig::to_index.
using DistVec = std::vector<double>;

/// Model, move set, and every beta-independent quantity the walks need:
/// energies of all configurations and E(x * z_j) - E(x) for every (x, j).
class WalkTable {
public:
  /// Largest 2^n * N the table will enumerate.
  static constexpr std::uint64_t kMaxEntries = std::uint64_t{1} << 28;

  WalkTable(IsingModel model, MoveSet moves);

  const IsingModel& model() const noexcept { return model_; }
  const MoveSet& moves() const noexcept { return moves_; }
  std::size_t num_spins() const noexcept { return model_.num_spins(); }
  std::size_t num_moves() const noexcept { return moves_.size(); }
  std::uint64_t dim() const noexcept { return dim_; }
  std::uint64_t mask(std::size_t j) const noexcept { return masks_[j]; }
  std::span<const std::uint64_t> masks() const noexcept { return masks_; }
  std::span<const double> energies() const noexcept { return energies_; }
  double delta(std::uint64_t x, std::size_t j) const noexcept { return deltas_[x * masks_.size() + j]; }
  std::span<const double> deltas() const noexcept { return deltas_; }

private:
  IsingModel model_;
  MoveSet moves_;
  std::uint64_t dim_ = 0;
  std::vector<std::uint64_t> masks_;
  std::vector<double> energies_;
  std::vector<double> deltas_;
};

using WalkTablePtr = std::shared_ptr<const WalkTable>;

WalkTablePtr make_walk_table(IsingModel model, MoveSet moves);

/// Everything that fixes one Metropolis-Hastings walk (classical matrix and quantum operator alike).
struct WalkSpec {
  WalkTablePtr table;
  double beta = 0.0;
  AcceptanceRule rule = AcceptanceRule::metropolis;
  bool padded = false;

  /// 2^ceil(log2 N) when padded, N otherwise.
  std::size_t move_slots() const;
  void validate() const;
};

/// Column-stochastic W stored per column x as W_{x*z_j, x} for each move j plus W_xx.
class TransitionMatrix {
public:
  TransitionMatrix() = default;
  explicit TransitionMatrix(const WalkSpec& spec);

  /// Refill for a new beta/rule without reallocating.
  void rebuild(const WalkSpec& spec);

  std::uint64_t dim() const noexcept { return dim_; }
  std::size_t num_moves() const noexcept { return masks_.size(); }
  std::uint64_t mask(std::size_t j) const noexcept { return masks_[j]; }
  /// W_{x * z_j, x}.
  double off_diagonal(std::uint64_t x, std::size_t j) const noexcept { return off_[x * masks_.size() + j]; }
  double diagonal(std::uint64_t x) const noexcept { return diag_[x]; }
  double entry(std::uint64_t y, std::uint64_t x) const;

  /// out = W * in.
  void apply(std::span<const double> in, std::span<double> out) const;
  Eigen::MatrixXd to_dense() const;

  /// Largest |1 - column sum|.
  double stochasticity_error() const;

private:
  std::uint64_t dim_ = 0;
  std::vector<std::uint64_t> masks_;
  std::vector<double> off_;
  std::vector<double> diag_;
};

/// Boltzmann distribution e^{-beta E}/Z, shifted by the minimum energy for stability.
DistVec boltzmann(const IsingModel& model, double beta);
DistVec boltzmann(const WalkTable& table, double beta);
DistVec boltzmann_from_energies(std::span<const double> energies, double beta);

DistVec uniform_distribution(std::uint64_t dim);

/// max over stored (x, y) of |W_yx pi_x - W_xy pi_y|.
double check_detailed_balance(const TransitionMatrix& w, std::span<const double> pi);
/// Same check for an arbitrary dense column-stochastic matrix.
double check_detailed_balance(const Eigen::MatrixXd& w, std::span<const double> pi);

enum class SpectralMethod { automatic, dense, iterative };

struct SpectralReport {
  double lambda1 = 0.0;  // second-largest eigenvalue of W
  double gap = 0.0;      // Delta = 1 - lambda1
  double phase_gap = 0.0;  // delta = arccos(lambda1)
  std::string method;
  double residual = 0.0;
  std::size_t iterations = 0;
};

/// Second-largest eigenvalue of W via its symmetrization S = D(pi)^{-1/2} W D(pi)^{1/2}.
/// Dense for n <= 8 unless `method` says otherwise.
SpectralReport spectral(const WalkSpec& spec, SpectralMethod method = SpectralMethod::automatic);

/// Dense symmetric S with entries sqrt(W_xy W_yx) off the diagonal.
Eigen::MatrixXd symmetrized_dense(const TransitionMatrix& w);

struct EvolveResult {
  DistVec p;
  double drift = 0.0;  // cumulative |1 - sum| removed by renormalization
};

/// Applies the schedule's matrices in order to p0.
EvolveResult evolve(std::span<const WalkSpec> schedule, DistVec p0);

struct Trajectory {
  SpinConfig final_config;
  std::vector<double> energies;  // energy after each step
  std::uint64_t accepted = 0;
  double max_resync_error = 0.0;
};

/// Stochastic Metropolis-Hastings run, one step per schedule entry.
Trajectory sample_trajectory(std::span<const WalkSpec> schedule, SpinConfig x0, std::uint64_t seed);

/// Linear ramp beta_j = (j/L) * beta_final for j = 1..L.
std::vector<WalkSpec> linear_schedule(const WalkTablePtr& table, double beta_final, std::size_t steps,
                                      AcceptanceRule rule, bool padded);

} // namespace qwalk
