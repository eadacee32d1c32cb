#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dagmas {

// Edge-weight matrix: entry (i, j) is the weight of arc i -> j, so data obeys
// x = x W (row index = source). Diagonals stay at exactly zero everywhere.
using Matrix = Eigen::MatrixXd;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

inline bool has_zero_diagonal(const Matrix& W) {
  for (Eigen::Index i = 0; i < W.rows(); ++i) {
    if (W(i, i) != 0.0) return false;
  }
  return true;
}

inline bool is_valid_weights(const Matrix& W) {
  return W.rows() == W.cols() && W.allFinite() && has_zero_diagonal(W);
}

// A permutation of {0,...,d-1} plus its inverse (inverse[order[p]] = p).
struct NodeOrder {
  std::vector<int> order;
  std::vector<int> inverse;

  int size() const { return static_cast<int>(order.size()); }

  int position_of(int node) const { return inverse[static_cast<std::size_t>(node)]; }

  static NodeOrder from_order(std::vector<int> order) {
    const int d = static_cast<int>(order.size());
    std::vector<int> inverse(order.size(), -1);
    for (int p = 0; p < d; ++p) {
      const int node = order[static_cast<std::size_t>(p)];
      if (node < 0 || node >= d || inverse[static_cast<std::size_t>(node)] != -1) {
        throw std::invalid_argument("NodeOrder: not a permutation of {0,...,d-1}");
      }
      inverse[static_cast<std::size_t>(node)] = p;
    }
    return NodeOrder{std::move(order), std::move(inverse)};
  }

  static NodeOrder identity(int d) {
    std::vector<int> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    std::vector<int> inverse = order;
    return NodeOrder{std::move(order), std::move(inverse)};
  }

  NodeOrder reversed() const {
    std::vector<int> rev(order.rbegin(), order.rend());
    return from_order(std::move(rev));
  }
};

// Kahn source elimination. Returns a topological order (arcs run from earlier
// to later positions), or nullopt when the graph has a cycle.
inline std::optional<NodeOrder> topological_order(const Mask& mask) {
  if (mask.rows() != mask.cols()) {
    throw std::invalid_argument("topological_order: mask must be square");
  }
  const int d = static_cast<int>(mask.rows());
  std::vector<int> in_degree(static_cast<std::size_t>(d), 0);
  for (int j = 0; j < d; ++j) {
    int deg = 0;
    for (int i = 0; i < d; ++i) deg += mask(i, j) ? 1 : 0;
    in_degree[static_cast<std::size_t>(j)] = deg;
  }

  std::vector<int> stack;
  stack.reserve(static_cast<std::size_t>(d));
  for (int v = 0; v < d; ++v) {
    if (in_degree[static_cast<std::size_t>(v)] == 0) stack.push_back(v);
  }

  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(d));
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    order.push_back(v);
    for (int j = 0; j < d; ++j) {
      if (mask(v, j) && --in_degree[static_cast<std::size_t>(j)] == 0) {
        stack.push_back(j);
      }
    }
  }

  if (static_cast<int>(order.size()) != d) return std::nullopt;
  return NodeOrder::from_order(std::move(order));
}

inline bool is_acyclic(const Mask& mask) { return topological_order(mask).has_value(); }

// Keeps W(i, j) iff the source i sits strictly later in `order` than the
// target j; equivalent to permuting by `order`, taking the strictly lower
// triangle, and permuting back. The result is acyclic for any order.
inline Matrix triangular_project(const Matrix& W, const NodeOrder& order) {
  if (W.rows() != W.cols() || order.size() != static_cast<int>(W.rows())) {
    throw std::invalid_argument("triangular_project: dimension mismatch");
  }
  const int d = order.size();
  Matrix out = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (order.inverse[static_cast<std::size_t>(i)] > order.inverse[static_cast<std::size_t>(j)]) {
        out(i, j) = W(i, j);
      }
    }
  }
  return out;
}

// mask(i, j) = |W(i, j)| > tau for i != j; strict, so tau = 0 drops exact zeros only.
inline Mask threshold(const Matrix& W, double tau) {
  if (W.rows() != W.cols()) throw std::invalid_argument("threshold: W must be square");
  if (!(tau >= 0.0)) throw std::invalid_argument("threshold: tau must be >= 0");
  const Eigen::Index d = W.rows();
  Mask mask = Mask::Constant(d, d, false);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (i != j && std::abs(W(i, j)) > tau) mask(i, j) = true;
    }
  }
  return mask;
}

}  // namespace dagmas
