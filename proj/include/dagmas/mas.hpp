#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "dagmas/graph.hpp"

namespace dagmas {

struct MasResult {
  Matrix projected;        // acyclic weight matrix
  NodeOrder order;         // arcs kept run from later to earlier positions
  double retained_weight;  // sum of squared entries kept
  double removed_weight;   // sum of squared entries dropped
};

/// Greedy maximum-acyclic-subgraph extraction on squared weights.
///
/// Scores each node by its incoming squared weight; d times, the node with
/// the smallest score among unplaced nodes is placed last (keeping its
/// outgoing arcs, dropping incoming arcs from unplaced nodes), its score is
/// parked at a sentinel above every reachable value, and its outgoing row is
/// subtracted from the remaining scores. Ties at the argmin go to the
/// smallest node index. Already-acyclic inputs come back unchanged.
inline MasResult greedy_mas(const Matrix& W_tilde) {
  if (W_tilde.rows() != W_tilde.cols()) {
    throw std::invalid_argument("greedy_mas: W must be square");
  }
  const int d = static_cast<int>(W_tilde.rows());

  const Eigen::ArrayXXd squared = W_tilde.array().square();
  Eigen::ArrayXd scores = squared.colwise().sum().transpose();
  // +1 keeps the sentinel strictly above live scores even for the zero matrix
  const double ub = (d + 1) * scores.maxCoeff() + 1.0;

  std::vector<int> order(static_cast<std::size_t>(d), 0);
  for (int i = 0; i < d; ++i) {
    int node = 0;
    for (int v = 1; v < d; ++v) {
      if (scores(v) < scores(node)) node = v;
    }
    order[static_cast<std::size_t>(d - 1 - i)] = node;
    scores(node) = ub;
    scores -= squared.row(node).transpose();
  }

  MasResult res{Matrix(), NodeOrder::from_order(std::move(order)), 0.0, 0.0};
  res.projected = triangular_project(W_tilde, res.order);
  res.retained_weight = res.projected.squaredNorm();
  res.removed_weight = W_tilde.squaredNorm() - res.retained_weight;
  return res;
}

/// Exhaustive MAS oracle: scans all d! node orders and returns the one with
/// maximal retained squared weight, breaking ties toward the
/// lexicographically smallest order. Rejects d > 9.
inline MasResult exact_mas(const Matrix& W_tilde) {
  if (W_tilde.rows() != W_tilde.cols()) {
    throw std::invalid_argument("exact_mas: W must be square");
  }
  const int d = static_cast<int>(W_tilde.rows());
  if (d > 9) throw std::invalid_argument("exact_mas: d must be <= 9");

  const Eigen::ArrayXXd squared = W_tilde.array().square();

  std::vector<int> perm(static_cast<std::size_t>(d));
  std::iota(perm.begin(), perm.end(), 0);

  std::vector<int> best_order = perm;
  double best_retained = -1.0;
  do {
    double retained = 0.0;
    for (int a = 1; a < d; ++a) {
      for (int b = 0; b < a; ++b) {
        retained += squared(perm[static_cast<std::size_t>(a)], perm[static_cast<std::size_t>(b)]);
      }
    }
    // strict improvement keeps the lexicographically smallest order on ties
    if (retained > best_retained) {
      best_retained = retained;
      best_order = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  MasResult res{Matrix(), NodeOrder::from_order(std::move(best_order)), 0.0, 0.0};
  res.projected = triangular_project(W_tilde, res.order);
  res.retained_weight = res.projected.squaredNorm();
  res.removed_weight = W_tilde.squaredNorm() - res.retained_weight;
  return res;
}

}  // namespace dagmas
