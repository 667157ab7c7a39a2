#include "qwalk/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

namespace qwalk {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void project_out(std::span<const std::vector<double>> basis, std::span<double> v) {
  for (const auto& b : basis) axpy(-dot(b, v), b, v);
}

} // namespace

EigenPair lanczos_largest(const SymmetricOperator& op, std::size_t dim,
                          std::span<const std::vector<double>> deflate, const LanczosOptions& options) {
  if (dim <= deflate.size()) throw std::invalid_argument("lanczos_largest: nothing left after deflation");
  const std::size_t max_iter = options.max_iterations
                                   ? options.max_iterations
                                   : static_cast<std::size_t>(50.0 * std::sqrt(double(dim))) + 2000;
  const std::size_t basis_cap = std::min<std::size_t>(options.max_basis, dim - deflate.size());

  std::vector<double> start(dim);
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss;
  for (auto& v : start) v = gauss(rng);

  EigenPair best;
  best.residual = INFINITY;
  std::size_t total = 0;
  std::vector<std::vector<double>> q;
  std::vector<double> w(dim);

  while (total < max_iter) {
    project_out(deflate, start);
    const double s0 = norm(start);
    if (s0 == 0.0) throw std::runtime_error("lanczos_largest: start vector vanished after deflation");
    for (auto& v : start) v /= s0;

    q.clear();
    q.push_back(start);
    std::vector<double> alpha, beta;
    Eigen::VectorXd ritz;

    for (std::size_t k = 0; k < basis_cap && total < max_iter; ++k, ++total) {
      op(q[k], w);
      const double a = dot(q[k], w);
      alpha.push_back(a);
      // Full reorthogonalization (twice) against the basis and the deflated space.
      for (int pass = 0; pass < 2; ++pass) {
        project_out(deflate, w);
        for (const auto& qi : q) axpy(-dot(qi, w), qi, w);
      }
      const double b = norm(w);

      const auto m = static_cast<Eigen::Index>(alpha.size());
      Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
      Eigen::VectorXd sub = m > 1 ? Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(beta.data(), m - 1))
                                  : Eigen::VectorXd();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
      es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      ritz = es.eigenvectors().col(m - 1);
      const double resid = std::abs(b * ritz(m - 1));

      const bool exhausted = b < 1e-14 || q.size() == dim - deflate.size();
      if (resid <= options.tolerance || exhausted) {
        ++total;
        break;
      }
      beta.push_back(b);
      std::vector<double> next(dim);
      for (std::size_t i = 0; i < dim; ++i) next[i] = w[i] / b;
      q.push_back(std::move(next));
    }

    std::vector<double> y(dim, 0.0);
    for (Eigen::Index i = 0; i < ritz.size(); ++i) axpy(ritz(i), q[i], y);
    const double yn = norm(y);
    for (auto& v : y) v /= yn;
    // Verify the residual explicitly rather than trusting the recurrence.
    op(y, w);
    project_out(deflate, w);
    const double rq = dot(y, w);
    axpy(-rq, y, w);
    const double true_resid = norm(w);
    if (true_resid < best.residual) {
      best.value = rq;
      best.vector = y;
      best.residual = true_resid;
    }
    best.iterations = total;
    if (true_resid <= options.tolerance) {
      best.converged = true;
      return best;
    }
    start = y;
  }
  best.iterations = total;
  return best;
}

} // namespace qwalk
