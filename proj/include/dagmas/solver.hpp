#pragma once

#include <Eigen/Core>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dagmas/graph.hpp"
#include "dagmas/mas.hpp"
#include "dagmas/objective.hpp"

namespace dagmas {

struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Method { proximas, optimas };

inline const char* method_name(Method m) {
  return m == Method::proximas ? "proximas" : "optimas";
}

struct Snapshot {
  int iteration = 0;
  double wall_time = 0.0;  // seconds since fit start
  double objective = 0.0;  // full_objective of the snapshot matrix
  bool acyclic = false;
};

struct FitConfig {
  Method method = Method::proximas;
  double lambda1 = 0.1;
  double lambda2 = 20.0;
  int max_iterations = 1000;
  std::optional<double> time_budget;  // seconds; the iteration in flight completes
  double warmstart_fraction = 0.8;    // fraction of the budget run without acyclicity
  double learning_rate = 0.001;       // optimas only
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int snapshot_every = 100;           // the final iteration is always snapshotted
  std::uint64_t seed = 0;
  std::optional<Matrix> init;         // zero matrix when absent

  // Called on every snapshot with the snapshot matrix (the acyclic anchor
  // once acyclicity is active, the raw iterate before that). Invoked
  // synchronously on the fitting thread.
  std::function<void(const Snapshot&, const Matrix&)> on_snapshot;
};

struct FitResult {
  Matrix best;             // acyclic candidate with the smallest full_objective
  double best_objective = std::numeric_limits<double>::infinity();
  int best_iteration = 0;
  std::vector<Snapshot> history;
  int total_iterations = 0;
  double total_time = 0.0;  // seconds, including setup
  double setup_time = 0.0;  // Lipschitz estimation before the first iteration
  Matrix final_iterate;     // last unprojected iterate
};

/// Returns the candidate with the minimum objective; ties go to the earliest
/// entry. Throws on an empty list.
inline const Matrix& select_best(const std::vector<std::pair<Matrix, double>>& candidates) {
  if (candidates.empty()) throw std::invalid_argument("select_best: empty candidate list");
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (candidates[i].second < candidates[best].second) best = i;
  }
  return candidates[best].first;
}

namespace detail {

inline void validate_config(const Dataset& data, const FitConfig& cfg) {
  if (data.n <= 0 || data.dim() <= 0) throw std::invalid_argument("fit: empty dataset");
  if (cfg.lambda1 < 0.0 || cfg.lambda2 < 0.0) {
    throw std::invalid_argument("fit: lambda1 and lambda2 must be >= 0");
  }
  if (cfg.max_iterations < 1) throw std::invalid_argument("fit: max_iterations must be >= 1");
  if (cfg.warmstart_fraction < 0.0 || cfg.warmstart_fraction > 1.0) {
    throw std::invalid_argument("fit: warmstart_fraction must lie in [0, 1]");
  }
  if (cfg.init) {
    if (cfg.init->rows() != data.dim() || cfg.init->cols() != data.dim()) {
      throw std::invalid_argument("fit: init has wrong shape");
    }
    if (!is_valid_weights(*cfg.init)) {
      throw std::invalid_argument("fit: init must be finite with a zero diagonal");
    }
  }
}

}  // namespace detail

/// Alternates unconstrained steps on the penalized SEM objective with greedy
/// MAS projections and returns the acyclic candidate with the smallest
/// full_objective.
///
/// Each iteration k builds the smooth objective around the previous acyclic
/// anchor, takes one optimizer step (an accelerated proximal step for
/// proximas, an adaptive-moment subgradient step for optimas), and, once
/// acyclicity is active, re-anchors on the greedy MAS projection of the new
/// iterate. For the first warmstart_fraction of the budget the proximity
/// term is dropped (lambda2 treated as 0) and no projection is persisted;
/// snapshots taken during that phase evaluate a throwaway projection so the
/// best candidate is always acyclic. The step size 1/L is recomputed once
/// when acyclicity activates, since L depends on lambda2.
inline FitResult fit(const Dataset& data, const FitConfig& cfg) {
  using clock = std::chrono::steady_clock;
  detail::validate_config(data, cfg);

  const auto t0 = clock::now();
  const auto elapsed = [&t0] {
    return std::chrono::duration<double>(clock::now() - t0).count();
  };

  const Eigen::Index d = data.dim();
  const int K = cfg.max_iterations;
  const double warm_iters = cfg.warmstart_fraction * static_cast<double>(K);

  Matrix W = cfg.init ? *cfg.init : Matrix::Zero(d, d);
  Matrix anchor = W;          // last acyclic projection once active, else last iterate
  Matrix momentum_point = W;  // FISTA auxiliary point
  Matrix W_prev = W;
  double t = 1.0;

  Eigen::ArrayXXd adam_m, adam_v;
  if (cfg.method == Method::optimas) {
    adam_m = Eigen::ArrayXXd::Zero(d, d);
    adam_v = Eigen::ArrayXXd::Zero(d, d);
  }

  bool active = false;
  double L = 1.0;
  // A finite X whose squares overflow yields a non-finite Gram matrix; the
  // power iteration then reports inf/nan, which must surface as a numerical
  // failure rather than leak into the step size.
  const auto lipschitz_or_throw = [&](double lambda2) {
    const double bound = lipschitz_bound(data, lambda2);
    if (!std::isfinite(bound)) {
      throw numerical_error("fit: Lipschitz estimate diverged");
    }
    return std::max(bound, 1e-12);
  };
  if (cfg.method == Method::proximas) {
    L = lipschitz_or_throw(0.0);
  }

  FitResult res;
  res.best = Matrix::Zero(d, d);
  res.setup_time = elapsed();

  const auto track_candidate = [&](const Matrix& candidate, double objective, int iteration) {
    if (!std::isfinite(objective)) {
      throw numerical_error("fit: objective diverged at iteration " + std::to_string(iteration));
    }
    if (objective < res.best_objective) {
      res.best = candidate;
      res.best_objective = objective;
      res.best_iteration = iteration;
    }
  };

  int k = 0;
  while (k < K) {
    if (cfg.time_budget && elapsed() > *cfg.time_budget) break;
    ++k;

    const bool now_active =
        static_cast<double>(k) > warm_iters ||
        (cfg.time_budget && elapsed() > cfg.warmstart_fraction * *cfg.time_budget);
    if (now_active && !active) {
      active = true;
      // the warm-start iterate is generally cyclic; project it so every
      // gradient evaluation sees an acyclic anchor
      anchor = greedy_mas(W).projected;
      track_candidate(anchor, full_objective(data, anchor, cfg.lambda1), k - 1);
      if (cfg.method == Method::proximas) {
        L = lipschitz_or_throw(cfg.lambda2);
      }
    }
    const double lambda2_eff = active ? cfg.lambda2 : 0.0;
    const PenaltyContext ctx{cfg.lambda1, lambda2_eff, anchor};

    if (cfg.method == Method::proximas) {
      const Matrix grad = penalized_gradient(data, momentum_point, ctx);
      Matrix W_new = soft_threshold(momentum_point - grad / L, cfg.lambda1 / L);
      const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      momentum_point = W_new + ((t - 1.0) / t_new) * (W_new - W_prev);
      W_prev = std::move(W_new);
      t = t_new;
      W = W_prev;
    } else {
      Matrix grad = penalized_gradient(data, W, ctx);
      grad.array() += cfg.lambda1 * W.array().sign();
      grad.diagonal().setZero();
      adam_m = cfg.adam_beta1 * adam_m + (1.0 - cfg.adam_beta1) * grad.array();
      adam_v = cfg.adam_beta2 * adam_v + (1.0 - cfg.adam_beta2) * grad.array().square();
      const double bc1 = 1.0 - std::pow(cfg.adam_beta1, k);
      const double bc2 = 1.0 - std::pow(cfg.adam_beta2, k);
      W.array() -= cfg.learning_rate * (adam_m / bc1) / ((adam_v / bc2).sqrt() + cfg.adam_epsilon);
      W.diagonal().setZero();
    }
    if (!W.allFinite()) {
      throw numerical_error("fit: iterate diverged at iteration " + std::to_string(k));
    }

    double candidate_objective = 0.0;
    if (active) {
      anchor = greedy_mas(W).projected;
      candidate_objective = full_objective(data, anchor, cfg.lambda1);
      track_candidate(anchor, candidate_objective, k);
    } else {
      anchor = W;
    }

    if ((cfg.snapshot_every > 0 && k % cfg.snapshot_every == 0) || k == K) {
      Snapshot snap;
      snap.iteration = k;
      snap.acyclic = active;
      if (active) {
        snap.objective = candidate_objective;
      } else {
        snap.objective = full_objective(data, W, cfg.lambda1);
        // throwaway projection: evaluated for best tracking, never persisted
        const Matrix projected = greedy_mas(W).projected;
        track_candidate(projected, full_objective(data, projected, cfg.lambda1), k);
      }
      if (!std::isfinite(snap.objective)) {
        throw numerical_error("fit: objective diverged at iteration " + std::to_string(k));
      }
      snap.wall_time = elapsed();
      res.history.push_back(snap);
      if (cfg.on_snapshot) cfg.on_snapshot(snap, active ? anchor : W);
    }
  }

  if (!std::isfinite(res.best_objective)) {
    // degenerate schedule (e.g. budget exhausted before any snapshot):
    // guarantee an acyclic result with one final projection
    const Matrix projected = greedy_mas(W).projected;
    track_candidate(projected, full_objective(data, projected, cfg.lambda1), k);
  }

  res.total_iterations = k;
  res.final_iterate = std::move(W);
  res.total_time = elapsed();
  return res;
}

}  // namespace dagmas
