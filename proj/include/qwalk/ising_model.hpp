#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace qwalk {

/// One coupling term J * prod_{s in support} x_s.
struct Term {
  double coupling = 0.0;
  std::vector<std::uint32_t> support;  // sorted, unique
};

/// Configuration of n Ising spins, bit-packed. A set bit means spin -1.
class SpinConfig {
public:
  SpinConfig() = default;
  explicit SpinConfig(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}

  /// Low n bits of `index` give the spins (bit set = -1); requires n <= 64.
  static SpinConfig from_index(std::uint64_t index, std::size_t n);
  /// Inverse of from_index; requires n <= 64.
  std::uint64_t to_index() const;

  std::size_t size() const noexcept { return n_; }
  int spin(std::size_t i) const noexcept { return bit(i) ? -1 : +1; }
  bool bit(std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void flip(std::size_t i) noexcept { words_[i >> 6] ^= (std::uint64_t{1} << (i & 63)); }
  void set(std::size_t i, int value) noexcept {
    if ((value < 0) != bit(i)) flip(i);
  }
  void flip_all(std::span<const std::uint32_t> spins) noexcept {
    for (auto s : spins) flip(s);
  }

  bool operator==(const SpinConfig&) const = default;

private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Energy function E(x) = sum_l J_l prod_{s in Omega_l} x_s on n spins.
///
/// Terms with identical supports are merged by summing couplings. `arity` (k)
/// and `degree_bound` (d) are recomputed from the terms.
class IsingModel {
public:
  IsingModel() = default;
  IsingModel(std::size_t n, std::vector<Term> terms);

  std::size_t num_spins() const noexcept { return n_; }
  const std::vector<Term>& terms() const noexcept { return terms_; }
  std::size_t arity() const noexcept { return arity_; }
  std::size_t degree_bound() const noexcept { return degree_bound_; }
  /// Indices of the terms whose support contains spin i.
  std::span<const std::uint32_t> incident_terms(std::size_t i) const noexcept {
    return {incident_.data() + incident_offset_[i], incident_.data() + incident_offset_[i + 1]};
  }

  /// Generator provenance; recorded when serialized.
  std::optional<std::uint64_t> seed;
  std::string generator;

private:
  std::size_t n_ = 0;
  std::vector<Term> terms_;
  std::size_t arity_ = 0;
  std::size_t degree_bound_ = 0;
  std::vector<std::uint32_t> incident_;
  std::vector<std::size_t> incident_offset_;
};

/// A set of non-empty, pairwise distinct spin-flip moves z_1..z_N.
class MoveSet {
public:
  MoveSet() = default;
  MoveSet(std::size_t n, std::vector<std::vector<std::uint32_t>> moves);

  static MoveSet single_spin_flips(std::size_t n);

  std::size_t size() const noexcept { return moves_.size(); }
  std::size_t num_spins() const noexcept { return n_; }
  const std::vector<std::uint32_t>& move(std::size_t j) const { return moves_[j]; }
  const std::vector<std::vector<std::uint32_t>>& moves() const noexcept { return moves_; }
  /// c: the largest number of spins flipped by one move.
  std::size_t max_flip() const noexcept { return max_flip_; }
  std::size_t membership_bound() const noexcept { return membership_bound_; }
  /// Move j as a bit mask over configuration indices; requires n <= 64.
  std::uint64_t mask(std::size_t j) const;

private:
  std::size_t n_ = 0;
  std::vector<std::vector<std::uint32_t>> moves_;
  std::size_t max_flip_ = 0;
  std::size_t membership_bound_ = 0;
};

/// Open ferromagnetic chain, J = -1 on every bond (i, i+1).
IsingModel build_chain(std::size_t n);

std::size_t default_pair_count(std::size_t n);

/// `pair_count` distinct pairs drawn without replacement, couplings N(0, 1).
IsingModel build_random_sparse(std::size_t n, std::size_t pair_count, std::uint64_t seed);

/// Complete graph with couplings drawn uniformly from {+1, -1}.
/// With `ordered_pairs` the energy is sum over i != j of J_ij x_i x_j with J_ij and J_ji drawn
/// independently, so each pair carries J_ij + J_ji in {-2, 0, 2}; zero pairs are omitted.
IsingModel build_complete_binary(std::size_t n, std::uint64_t seed, bool ordered_pairs = false);

double energy(const IsingModel& model, const SpinConfig& x);

/// E(x * z) - E(x), touching only terms that intersect z.
double energy_delta(const IsingModel& model, const SpinConfig& x, std::span<const std::uint32_t> move);

/// Union of the supports of all terms that intersect the move.
std::vector<std::uint32_t> neighborhood(const IsingModel& model, std::span<const std::uint32_t> move);

/// Energies of all 2^n configurations, indexed by SpinConfig::to_index.
std::vector<double> all_energies(const IsingModel& model);

nlohmann::json to_json(const IsingModel& model);
IsingModel model_from_json(const nlohmann::json& j);

} // namespace qwalk
