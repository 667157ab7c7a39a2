#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qwalk/classical_walk.hpp"

namespace qwalk {

/// How the move-preparation unitary V is completed beyond its action on the null slot.
enum class VCompletion {
  householder,    // real reflection through (e_null - u); V = V^T = V^{-1}
  rotation_tree,  // null <-> slot 1 swap followed by a binary tree of 45-degree rotations
};

std::string to_string(VCompletion v);
VCompletion v_completion_from_string(const std::string& s);

/// Amplitudes over (configuration x, move slot m, coin c); slot 0 is the empty move register,
/// slots 1..M are the one-hot states of the unary register.
class QState {
public:
  using amplitude = std::complex<double>;

  QState(std::uint64_t num_configs, std::size_t move_slots);

  std::uint64_t num_configs() const noexcept { return configs_; }
  /// M (padded move count); the register has M + 1 basis states.
  std::size_t move_slots() const noexcept { return slots_ - 1; }
  std::size_t size() const noexcept { return amps_.size(); }

  std::size_t index(std::uint64_t x, std::size_t m, int c) const noexcept {
    return (static_cast<std::size_t>(x) * slots_ + m) * 2 + static_cast<std::size_t>(c);
  }
  amplitude& at(std::uint64_t x, std::size_t m, int c) noexcept { return amps_[index(x, m, c)]; }
  const amplitude& at(std::uint64_t x, std::size_t m, int c) const noexcept { return amps_[index(x, m, c)]; }

  std::span<amplitude> amplitudes() noexcept { return amps_; }
  std::span<const amplitude> amplitudes() const noexcept { return amps_; }

  double norm() const;
  /// || this - other ||.
  double distance(const QState& other) const;

private:
  std::uint64_t configs_;
  std::size_t slots_;
  std::vector<amplitude> amps_;
};

enum class Component { V, V_dagger, B, B_dagger, F, R };

Component component_from_string(const std::string& s);

/// Precomputed walk operator R V^T B^T F B V for one walk spec.
class WalkOperator {
public:
  explicit WalkOperator(WalkSpec spec, VCompletion completion = VCompletion::householder);

  const WalkSpec& spec() const noexcept { return spec_; }
  VCompletion completion() const noexcept { return completion_; }
  std::uint64_t num_configs() const noexcept { return spec_.table->dim(); }
  std::size_t num_moves() const noexcept { return spec_.table->num_moves(); }
  std::size_t move_slots() const noexcept { return slots_; }

  /// sqrt(1 - A) and sqrt(A) for the proposal of move j from configuration x.
  double reject_amplitude(std::uint64_t x, std::size_t j) const noexcept { return reject_[x * num_moves() + j]; }
  double accept_amplitude(std::uint64_t x, std::size_t j) const noexcept { return accept_[x * num_moves() + j]; }

  /// The (M+1) x (M+1) real orthogonal move-preparation matrix.
  const Eigen::MatrixXd& move_preparation() const noexcept { return v_; }

  QState make_state() const { return QState(num_configs(), slots_); }

private:
  friend void apply_component(QState&, Component, const WalkOperator&);

  void apply_v(QState& s, bool transpose) const;
  void apply_b(QState& s, bool transpose) const;
  void apply_f(QState& s) const;
  void apply_r(QState& s) const;

  WalkSpec spec_;
  VCompletion completion_;
  std::size_t slots_;
  std::vector<double> reject_;
  std::vector<double> accept_;
  Eigen::MatrixXd v_;
};

/// sqrt(p_x) on (x, null, 0).
QState init_state(const WalkOperator& op, std::span<const double> p);
/// Basis state (x, null, 0).
QState init_state(const WalkOperator& op, const SpinConfig& x);

/// In-place application of one circuit component.
void apply_component(QState& state, Component which, const WalkOperator& op);

/// In-place application of R V^T B^T F B V.
void apply_walk(QState& state, const WalkOperator& op);

/// The operator restricted to the (null, 0) slice: column x is V^T B^T F B V |x, null, 0> read on that slice.
Eigen::MatrixXd extract_X(const WalkOperator& op);

/// Eigenphases in [0, pi] of the full compact walk operator, ascending.
std::vector<double> eigenphases_small(const WalkOperator& op);

/// Dense matrix of the compact walk operator; small systems only.
Eigen::MatrixXd dense_walk_operator(const WalkOperator& op);

/// p(x) = sum over move slot and coin of |amplitude|^2.
DistVec measure_system_marginal(const QState& state);

} // namespace qwalk
