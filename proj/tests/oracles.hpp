#pragma once

// Independent reference implementations used by the tests. They share no code with the library
// beyond the model's term list and the basis-ordering conventions (bit i set = spin i is -1;
// compact quantum index (x * (M + 1) + m) * 2 + c).

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "qwalk/ising_model.hpp"

namespace oracle {

inline std::vector<int> spins_of(std::uint64_t x, std::size_t n) {
  std::vector<int> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = (x >> i) & 1 ? -1 : 1;
  return s;
}

inline double naive_energy(const qwalk::IsingModel& m, const std::vector<int>& s) {
  double e = 0.0;
  for (const auto& t : m.terms()) {
    double prod = t.coupling;
    for (auto k : t.support) prod *= s[k];
    e += prod;
  }
  return e;
}

inline double naive_energy(const qwalk::IsingModel& m, std::uint64_t x) {
  return naive_energy(m, spins_of(x, m.num_spins()));
}

inline std::vector<double> naive_energies(const qwalk::IsingModel& m) {
  std::vector<double> e(std::size_t{1} << m.num_spins());
  for (std::uint64_t x = 0; x < e.size(); ++x) e[x] = naive_energy(m, x);
  return e;
}

inline double metropolis(double de, double beta) { return de <= 0 ? 1.0 : std::exp(-beta * de); }
inline double glauber(double de, double beta) { return 1.0 / (1.0 + std::exp(beta * de)); }

inline std::size_t padded_slots(std::size_t moves, bool padded) {
  if (!padded) return moves;
  std::size_t m = 1;
  while (m < moves) m *= 2;
  return m;
}

/// Dense column-stochastic Metropolis-Hastings matrix for single-spin flips.
inline Eigen::MatrixXd dense_walk(const qwalk::IsingModel& m, double beta, bool glauber_rule, bool padded) {
  const std::size_t n = m.num_spins();
  const std::size_t dim = std::size_t{1} << n;
  const double f = 1.0 / double(padded_slots(n, padded));
  const auto e = naive_energies(m);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t x = 0; x < dim; ++x) {
    double out = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t y = x ^ (std::size_t{1} << i);
      const double de = e[y] - e[x];
      const double a = f * (glauber_rule ? glauber(de, beta) : metropolis(de, beta));
      w(y, x) += a;
      out += a;
    }
    w(x, x) += 1.0 - out;
  }
  return w;
}

inline std::vector<double> dense_boltzmann(const qwalk::IsingModel& m, double beta) {
  const auto e = naive_energies(m);
  std::vector<double> p(e.size());
  double z = 0.0;
  for (std::size_t x = 0; x < e.size(); ++x) z += p[x] = std::exp(-beta * e[x]);
  for (auto& v : p) v /= z;
  return p;
}

/// D(pi)^{-1/2} W D(pi)^{1/2}.
inline Eigen::MatrixXd similarity_transform(const Eigen::MatrixXd& w, const std::vector<double>& pi) {
  Eigen::MatrixXd s = w;
  for (Eigen::Index y = 0; y < w.rows(); ++y)
    for (Eigen::Index x = 0; x < w.cols(); ++x) s(y, x) = w(y, x) * std::sqrt(pi[x] / pi[y]);
  return s;
}

/// Dense compact walk operator R V^T B^T F B V for single-spin flips, assembled from its components.
struct DenseWalk {
  Eigen::MatrixXd V, B, F, R, U;
  std::size_t slots;  // M
  std::size_t dim;
};

inline std::size_t qindex(std::size_t x, std::size_t m, int c, std::size_t slots) {
  return (x * (slots + 1) + m) * 2 + std::size_t(c);
}

inline DenseWalk dense_quantum_walk(const qwalk::IsingModel& model, double beta, bool glauber_rule) {
  const std::size_t n = model.num_spins();
  const std::size_t configs = std::size_t{1} << n;
  const std::size_t M = padded_slots(n, true);
  const std::size_t D = configs * (M + 1) * 2;
  const auto e = naive_energies(model);

  // Householder reflection with first column (0, 1/sqrt(M), ..., 1/sqrt(M)).
  Eigen::VectorXd u = Eigen::VectorXd::Zero(M + 1);
  u.tail(M).setConstant(1.0 / std::sqrt(double(M)));
  Eigen::VectorXd w = Eigen::VectorXd::Unit(M + 1, 0) - u;
  w.normalize();
  const Eigen::MatrixXd vm = Eigen::MatrixXd::Identity(M + 1, M + 1) - 2.0 * w * w.transpose();

  DenseWalk d;
  d.slots = M;
  d.dim = D;
  d.V = Eigen::MatrixXd::Zero(D, D);
  d.B = Eigen::MatrixXd::Zero(D, D);
  d.F = Eigen::MatrixXd::Zero(D, D);
  d.R = Eigen::MatrixXd::Zero(D, D);
  for (std::size_t x = 0; x < configs; ++x)
    for (int c = 0; c < 2; ++c) {
      for (std::size_t a = 0; a <= M; ++a)
        for (std::size_t b = 0; b <= M; ++b) d.V(qindex(x, a, c, M), qindex(x, b, c, M)) = vm(a, b);
    }
  for (std::size_t x = 0; x < configs; ++x)
    for (std::size_t m = 0; m <= M; ++m) {
      const std::size_t i0 = qindex(x, m, 0, M), i1 = qindex(x, m, 1, M);
      if (m == 0 || m > n) {
        d.B(i0, i0) = d.B(i1, i1) = 1.0;
      } else {
        const std::size_t y = x ^ (std::size_t{1} << (m - 1));
        const double acc = glauber_rule ? glauber(e[y] - e[x], beta) : metropolis(e[y] - e[x], beta);
        const double a = std::sqrt(1.0 - acc), b = std::sqrt(acc);
        d.B(i0, i0) = a;
        d.B(i1, i0) = b;
        d.B(i0, i1) = -b;
        d.B(i1, i1) = a;
      }
      for (int c = 0; c < 2; ++c) {
        const std::size_t i = qindex(x, m, c, M);
        if (c == 1 && m >= 1 && m <= n) {
          const std::size_t y = x ^ (std::size_t{1} << (m - 1));
          d.F(qindex(y, m, 1, M), i) = 1.0;
        } else {
          d.F(i, i) = 1.0;
        }
        d.R(i, i) = (m == 0 && c == 0) ? 1.0 : -1.0;
      }
    }
  d.U = d.R * d.V.transpose() * d.B.transpose() * d.F * d.B * d.V;
  return d;
}

/// Target mass after applying the dense walks for `betas` to sqrt(p0) on the (null, 0) slice.
inline double dense_unitary_success(const qwalk::IsingModel& model, const std::vector<double>& betas,
                                    const std::vector<double>& p0, const std::vector<std::uint64_t>& target,
                                    bool glauber_rule) {
  const std::size_t configs = p0.size();
  std::size_t M = padded_slots(model.num_spins(), true);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(configs * (M + 1) * 2);
  for (std::size_t x = 0; x < configs; ++x) s(qindex(x, 0, 0, M)) = std::sqrt(p0[x]);
  for (double b : betas) s = dense_quantum_walk(model, b, glauber_rule).U * s;
  double mass = 0.0;
  for (auto x : target)
    for (std::size_t m = 0; m <= M; ++m)
      for (int c = 0; c < 2; ++c) mass += s(qindex(x, m, c, M)) * s(qindex(x, m, c, M));
  return mass;
}

/// Whether some phase equals arccos(lambda). Near lambda = +-1 arccos amplifies rounding in lambda
/// to sqrt(eps), so there the comparison is made on cos(phase) instead.
inline bool phase_matches(const std::vector<double>& phases, double lambda, double tol) {
  for (double p : phases) {
    const bool edge = std::abs(lambda) > 1.0 - 1e-6;
    const double d = edge ? std::abs(std::cos(p) - lambda) : std::abs(p - std::acos(lambda));
    if (d <= tol) return true;
  }
  return false;
}

inline qwalk::IsingModel random_model(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::bernoulli_distribution keep(0.6);
  std::vector<qwalk::Term> terms;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (keep(rng)) terms.push_back({g(rng), {i}});
    for (std::uint32_t j = i + 1; j < n; ++j)
      if (keep(rng)) terms.push_back({g(rng), {i, j}});
  }
  if (n >= 3 && keep(rng)) terms.push_back({g(rng), {0, 1, 2}});
  return qwalk::IsingModel(n, std::move(terms));
}

} // namespace oracle
