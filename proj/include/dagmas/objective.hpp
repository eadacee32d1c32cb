#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "dagmas/graph.hpp"

namespace dagmas {

// Samples plus the cached Gram matrix X^T X. Solvers touch only `gram` after
// construction, so their per-iteration cost is independent of n.
struct Dataset {
  Matrix X;           // n x d
  Eigen::Index n = 0;
  Matrix gram;        // d x d, X^T X

  Eigen::Index dim() const { return gram.rows(); }
};

inline Dataset make_dataset(Matrix X) {
  if (!X.allFinite()) throw std::invalid_argument("make_dataset: X has non-finite entries");
  Dataset data;
  data.n = X.rows();
  // rank update + mirror keeps the gram bitwise symmetric
  data.gram = Matrix::Zero(X.cols(), X.cols());
  data.gram.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
  data.gram.triangularView<Eigen::StrictlyUpper>() = data.gram.transpose();
  data.X = std::move(X);
  return data;
}

namespace detail {
inline void check_dims(const Dataset& data, const Matrix& W, const char* who) {
  if (W.rows() != W.cols() || W.rows() != data.dim()) {
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
  }
}
}  // namespace detail

// (1/2n) ||XW - X||_F^2 via the trace identity on the Gram matrix.
inline double sem_loss(const Dataset& data, const Matrix& W) {
  detail::check_dims(data, W, "sem_loss");
  if (data.n <= 0) throw std::invalid_argument("sem_loss: empty dataset");
  const Matrix M = W - Matrix::Identity(W.rows(), W.cols());
  return (data.gram * M).cwiseProduct(M).sum() / (2.0 * static_cast<double>(data.n));
}

// Same quantity computed from X directly; agrees with sem_loss to rounding.
inline double sem_loss_direct(const Dataset& data, const Matrix& W) {
  detail::check_dims(data, W, "sem_loss_direct");
  if (data.n <= 0) throw std::invalid_argument("sem_loss_direct: empty dataset");
  return (data.X * W - data.X).squaredNorm() / (2.0 * static_cast<double>(data.n));
}

inline double l1_norm(const Matrix& W) { return W.array().abs().sum(); }

// sem_loss + lambda1 ||W||_1, the quantity candidate solutions are ranked by.
inline double full_objective(const Dataset& data, const Matrix& W, double lambda1) {
  if (lambda1 < 0.0) throw std::invalid_argument("full_objective: lambda1 must be >= 0");
  return sem_loss(data, W) + lambda1 * l1_norm(W);
}

// Smooth penalized objective parameters: sparsity weight, proximity weight,
// and the acyclic anchor the iterate is pulled toward.
struct PenaltyContext {
  double lambda1 = 0.1;
  double lambda2 = 20.0;
  Matrix anchor;
};

// Gradient of the smooth part: (1/n) X^T X (W - I) + lambda2 (W - anchor).
// The L1 term is handled by the prox (ProxiMAS) or a subgradient (OptiMAS).
inline Matrix penalized_gradient(const Dataset& data, const Matrix& W, const PenaltyContext& ctx) {
  detail::check_dims(data, W, "penalized_gradient");
  if (ctx.anchor.rows() != W.rows() || ctx.anchor.cols() != W.cols()) {
    throw std::invalid_argument("penalized_gradient: anchor dimension mismatch");
  }
  const double inv_n = 1.0 / static_cast<double>(data.n);
  Matrix grad = inv_n * (data.gram * (W - Matrix::Identity(W.rows(), W.cols())));
  if (ctx.lambda2 != 0.0) grad += ctx.lambda2 * (W - ctx.anchor);
  return grad;
}

// Full penalized objective phi = sem_loss + (lambda2/2)||W - anchor||_F^2 + lambda1 ||W||_1.
inline double penalized_objective(const Dataset& data, const Matrix& W, const PenaltyContext& ctx) {
  double value = full_objective(data, W, ctx.lambda1);
  if (ctx.lambda2 != 0.0) value += 0.5 * ctx.lambda2 * (W - ctx.anchor).squaredNorm();
  return value;
}

// Upper bound on the Lipschitz constant of the smooth gradient:
// (1/n) sigma_max(X^T X + n lambda2 I), estimated by power iteration from the
// all-ones vector (relative tolerance 1e-6, at most 1000 iterations) and
// inflated by a 1.01 safety factor. A non-converged run reports its last
// estimate through `converged`.
inline double lipschitz_bound(const Dataset& data, double lambda2, bool* converged = nullptr) {
  if (lambda2 < 0.0) throw std::invalid_argument("lipschitz_bound: lambda2 must be >= 0");
  if (data.n <= 0) throw std::invalid_argument("lipschitz_bound: empty dataset");
  const Eigen::Index d = data.dim();
  const double shift = static_cast<double>(data.n) * lambda2;

  if (converged) *converged = true;
  if (d == 0) return 0.0;

  Eigen::VectorXd v = Eigen::VectorXd::Ones(d);
  v /= v.norm();
  double eig = 0.0;
  bool ok = false;
  for (int it = 0; it < 1000; ++it) {
    Eigen::VectorXd w = data.gram * v + shift * v;
    const double eig_new = v.dot(w);
    const double nrm = w.norm();
    if (nrm == 0.0) {  // operator annihilates v: spectral norm 0 on this path
      eig = 0.0;
      ok = true;
      break;
    }
    v = w / nrm;
    if (it > 0 && std::abs(eig_new - eig) <= 1e-6 * std::abs(eig_new)) {
      eig = eig_new;
      ok = true;
      break;
    }
    eig = eig_new;
  }
  if (converged) *converged = ok;
  return 1.01 * eig / static_cast<double>(data.n);
}

// Entrywise sign(w) max(|w| - tau, 0); the prox of tau ||.||_1. Diagonal
// forced to zero.
inline Matrix soft_threshold(Matrix W, double tau) {
  if (!(tau >= 0.0)) throw std::invalid_argument("soft_threshold: tau must be >= 0");
  W = (W.array().sign() * (W.array().abs() - tau).max(0.0)).matrix();
  W.diagonal().setZero();
  return W;
}

}  // namespace dagmas
