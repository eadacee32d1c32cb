#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dagmas/graph.hpp"
#include "dagmas/objective.hpp"

namespace dagmas {

struct Confusion {
  double fnr_dir = 0.0;
  double fpr_dir = 0.0;
  double fnr_undir = 0.0;
  double fpr_undir = 0.0;
};

struct Shd {
  double directed = 0.0;
  double undirected = 0.0;
};

struct MetricsRow {
  double threshold = 0.0;
  double fnr_dir = 0.0;
  double fpr_dir = 0.0;
  double shd_norm_dir = 0.0;
  double fnr_undir = 0.0;
  double fpr_undir = 0.0;
  double shd_norm_undir = 0.0;
};

struct EvalSummary {
  double average_precision = 0.0;
  double gaussian_nll = 0.0;
  std::vector<MetricsRow> rows;
};

namespace detail {

inline void check_same_shape(const Mask& pred, const Mask& truth, const char* who) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols() || pred.rows() != pred.cols()) {
    throw std::invalid_argument(std::string(who) + ": masks must be square and of equal size");
  }
}

inline double rate(long numer, long denom) { return denom == 0 ? 0.0 : static_cast<double>(numer) / denom; }

}  // namespace detail

/// FNR/FPR over the d(d-1) off-diagonal cells (directed) and over the
/// d(d-1)/2 unordered pairs (undirected; a pair is positive when either
/// direction is present). An empty positive class yields fnr = 0, an empty
/// negative class fpr = 0.
inline Confusion confusion_rates(const Mask& pred, const Mask& truth) {
  detail::check_same_shape(pred, truth, "confusion_rates");
  const Eigen::Index d = pred.rows();
  long tp = 0, fn = 0, fp = 0, tn = 0;
  long utp = 0, ufn = 0, ufp = 0, utn = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (i == j) continue;
      const bool p = pred(i, j), t = truth(i, j);
      tp += p && t;
      fn += !p && t;
      fp += p && !t;
      tn += !p && !t;
      if (i < j) {
        const bool up = pred(i, j) || pred(j, i);
        const bool ut = truth(i, j) || truth(j, i);
        utp += up && ut;
        ufn += !up && ut;
        ufp += up && !ut;
        utn += !up && !ut;
      }
    }
  }
  Confusion c;
  c.fnr_dir = detail::rate(fn, tp + fn);
  c.fpr_dir = detail::rate(fp, fp + tn);
  c.fnr_undir = detail::rate(ufn, utp + ufn);
  c.fpr_undir = detail::rate(ufp, ufp + utn);
  return c;
}

/// Structural Hamming distance, normalized by the number of true arcs
/// (true pairs in the undirected view); a zero-arc truth divides by 1. In
/// the directed view a pure reversal within a pair counts once rather than
/// as a miss plus an extra.
inline Shd shd_normalized(const Mask& pred, const Mask& truth) {
  detail::check_same_shape(pred, truth, "shd_normalized");
  const Eigen::Index d = pred.rows();
  long dir = 0, undir = 0, true_arcs = 0, true_pairs = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      const int miss = (truth(i, j) && !pred(i, j)) + (truth(j, i) && !pred(j, i));
      const int extra = (pred(i, j) && !truth(i, j)) + (pred(j, i) && !truth(j, i));
      dir += (miss == 1 && extra == 1) ? 1 : miss + extra;
      const bool up = pred(i, j) || pred(j, i);
      const bool ut = truth(i, j) || truth(j, i);
      undir += up != ut;
      true_arcs += truth(i, j) + truth(j, i);
      true_pairs += ut;
    }
  }
  Shd s;
  s.directed = static_cast<double>(dir) / std::max<long>(true_arcs, 1);
  s.undirected = static_cast<double>(undir) / std::max<long>(true_pairs, 1);
  return s;
}

/// Average precision of ranking the off-diagonal cells by |W|, with the
/// ground-truth arcs as positives: AP = Σ_b (R_b − R_{b−1})·P_b over blocks
/// of tied scores in descending order, each block scored at its block-end
/// precision. Requires at least one positive.
inline double average_precision(const Matrix& W, const Mask& truth) {
  if (W.rows() != truth.rows() || W.cols() != truth.cols() || W.rows() != W.cols()) {
    throw std::invalid_argument("average_precision: W and truth must be square and of equal size");
  }
  const Eigen::Index d = W.rows();
  std::vector<std::pair<double, bool>> cells;
  cells.reserve(static_cast<std::size_t>(d * (d - 1)));
  long positives = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (i == j) continue;
      cells.emplace_back(std::abs(W(i, j)), truth(i, j));
      positives += truth(i, j);
    }
  }
  if (positives == 0) throw std::invalid_argument("average_precision: truth has no arcs");

  std::sort(cells.begin(), cells.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  double ap = 0.0;
  double prev_recall = 0.0;
  long seen = 0, hits = 0;
  for (std::size_t b = 0; b < cells.size();) {
    std::size_t e = b;
    while (e < cells.size() && cells[e].first == cells[b].first) {
      ++seen;
      hits += cells[e].second;
      ++e;
    }
    const double recall = static_cast<double>(hits) / positives;
    const double precision = static_cast<double>(hits) / seen;
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    b = e;
  }
  return ap;
}

/// Per-sample profile Gaussian NLL on held-out data: residual R = XW − X,
/// per-variable variance σ̂_j² = mean of squared residuals floored at 1e-12,
/// NLL = (1/2) Σ_j (log(2π σ̂_j²) + 1).
inline double gaussian_nll(const Dataset& val, const Matrix& W) {
  if (W.rows() != W.cols() || W.rows() != val.X.cols()) {
    throw std::invalid_argument("gaussian_nll: dimension mismatch between data and weights");
  }
  if (val.n < 2) throw std::invalid_argument("gaussian_nll: need at least 2 validation samples");
  const Matrix R = val.X * W - val.X;
  double nll = 0.0;
  for (Eigen::Index j = 0; j < R.cols(); ++j) {
    const double var = std::max(R.col(j).squaredNorm() / static_cast<double>(val.n), 1e-12);
    nll += std::log(2.0 * std::numbers::pi * var) + 1.0;
  }
  return 0.5 * nll;
}

inline std::vector<MetricsRow> threshold_sweep(const Matrix& W, const Mask& truth,
                                               const std::vector<double>& thresholds) {
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    if (thresholds[t] < 0.0 || (t > 0 && thresholds[t] < thresholds[t - 1])) {
      throw std::invalid_argument("threshold_sweep: thresholds must be nonnegative and ascending");
    }
  }
  std::vector<MetricsRow> rows;
  rows.reserve(thresholds.size());
  for (double tau : thresholds) {
    const Mask pred = threshold(W, tau);
    const Confusion c = confusion_rates(pred, truth);
    const Shd s = shd_normalized(pred, truth);
    rows.push_back({tau, c.fnr_dir, c.fpr_dir, s.directed, c.fnr_undir, c.fpr_undir, s.undirected});
  }
  return rows;
}

// {0} plus a 20-point geometric grid from 0.01 to 1.0 plus the conventional
// 0.3 reporting point, sorted ascending.
inline std::vector<double> default_thresholds() {
  std::vector<double> grid;
  grid.push_back(0.0);
  for (int i = 0; i < 20; ++i) grid.push_back(0.01 * std::pow(100.0, i / 19.0));
  grid.push_back(0.3);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

}  // namespace dagmas
