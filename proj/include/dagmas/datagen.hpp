#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "dagmas/graph.hpp"
#include "dagmas/objective.hpp"

namespace dagmas {

enum class GraphModel { er, sf };
enum class NoiseFamily { gaussian, exponential, gumbel };
enum class ScaleMode { ev, nv };

// Arc orientation for scale-free graphs: hubs upstream (existing node feeds
// the newly attached one) or the reverse.
enum class SfDirection { existing_to_new, new_to_existing };

struct GraphSpec {
  int d = 2;
  int k = 1;  // density multiplier: roughly k*d arcs
  GraphModel model = GraphModel::er;
  SfDirection sf_direction = SfDirection::existing_to_new;
};

struct NoiseSpec {
  NoiseFamily family = NoiseFamily::gaussian;
  ScaleMode scale_mode = ScaleMode::ev;
  Eigen::VectorXd scales;  // per-node; all 1.0 under EV, uniform [0.5, 1.5] under NV
};

struct GroundTruth {
  Matrix W_true;
  Mask mask_true;
  NodeOrder order_true;  // topological: arcs run from earlier to later positions
};

using Rng = std::mt19937_64;

namespace detail {

inline std::vector<int> random_permutation(int d, Rng& rng) {
  std::vector<int> perm(static_cast<std::size_t>(d));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

}  // namespace detail

/// Draws a random DAG skeleton (weights all zero).
///
/// ER: a uniformly random node order, then each order-respecting pair kept
/// independently with probability 2k/(d-1), for kd arcs in expectation.
/// SF: preferential attachment over a random insertion order; the first k+1
/// nodes form a seed path and every later node attaches to k distinct
/// predecessors drawn with probability proportional to degree + 1, giving
/// exactly k(d-k) arcs.
inline GroundTruth sample_dag(const GraphSpec& spec, Rng& rng) {
  if (spec.d < 2) throw std::invalid_argument("sample_dag: d must be >= 2");
  if (spec.k < 1) throw std::invalid_argument("sample_dag: k must be >= 1");
  if (spec.k >= spec.d) throw std::invalid_argument("sample_dag: density k must be < d");

  const int d = spec.d;
  const int k = spec.k;
  GroundTruth truth;
  truth.W_true = Matrix::Zero(d, d);
  truth.mask_true = Mask::Constant(d, d, false);
  std::vector<int> order = detail::random_permutation(d, rng);

  if (spec.model == GraphModel::er) {
    const double p = std::min(1.0, 2.0 * k / static_cast<double>(d - 1));
    std::bernoulli_distribution keep(p);
    for (int a = 0; a < d; ++a) {
      for (int b = a + 1; b < d; ++b) {
        if (keep(rng)) {
          truth.mask_true(order[static_cast<std::size_t>(a)], order[static_cast<std::size_t>(b)]) = true;
        }
      }
    }
  } else {
    // degree-weighted sampling of k distinct targets, without replacement
    std::vector<int> degree(static_cast<std::size_t>(d), 0);
    const auto add_arc = [&](int pos_from, int pos_to) {
      const int u = order[static_cast<std::size_t>(pos_from)];
      const int v = order[static_cast<std::size_t>(pos_to)];
      truth.mask_true(u, v) = true;
      ++degree[static_cast<std::size_t>(pos_from)];
      ++degree[static_cast<std::size_t>(pos_to)];
    };
    for (int p = 0; p < k; ++p) add_arc(p, p + 1);  // seed path
    std::vector<char> taken(static_cast<std::size_t>(d), 0);
    for (int t = k + 1; t < d; ++t) {
      std::fill(taken.begin(), taken.begin() + t, 0);
      for (int pick = 0; pick < k; ++pick) {
        double total = 0.0;
        for (int p = 0; p < t; ++p) {
          if (!taken[static_cast<std::size_t>(p)]) total += degree[static_cast<std::size_t>(p)] + 1.0;
        }
        std::uniform_real_distribution<double> unif(0.0, total);
        const double u = unif(rng);
        double acc = 0.0;
        int chosen = -1;
        for (int p = 0; p < t; ++p) {
          if (taken[static_cast<std::size_t>(p)]) continue;
          acc += degree[static_cast<std::size_t>(p)] + 1.0;
          if (u < acc) {
            chosen = p;
            break;
          }
        }
        if (chosen < 0) {  // u landed on the upper boundary
          for (int p = t - 1; p >= 0; --p) {
            if (!taken[static_cast<std::size_t>(p)]) {
              chosen = p;
              break;
            }
          }
        }
        taken[static_cast<std::size_t>(chosen)] = 1;
        add_arc(chosen, t);
      }
    }
    if (spec.sf_direction == SfDirection::new_to_existing) {
      truth.mask_true = truth.mask_true.transpose().eval();
      std::reverse(order.begin(), order.end());
    }
  }

  truth.order_true = NodeOrder::from_order(std::move(order));
  return truth;
}

// Every true arc gets a weight u*s with u ~ Uniform[0.5, 2] and a fair sign.
inline void assign_weights(GroundTruth& truth, Rng& rng) {
  const Eigen::Index d = truth.mask_true.rows();
  std::uniform_real_distribution<double> magnitude(0.5, 2.0);
  std::bernoulli_distribution negative(0.5);
  truth.W_true = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (truth.mask_true(i, j)) {
        const double u = magnitude(rng);
        truth.W_true(i, j) = negative(rng) ? -u : u;
      }
    }
  }
}

inline NoiseSpec make_noise_spec(NoiseFamily family, ScaleMode mode, int d, Rng& rng) {
  NoiseSpec spec;
  spec.family = family;
  spec.scale_mode = mode;
  if (mode == ScaleMode::ev) {
    spec.scales = Eigen::VectorXd::Ones(d);
  } else {
    spec.scales.resize(d);
    std::uniform_real_distribution<double> unif(0.5, 1.5);
    for (int j = 0; j < d; ++j) spec.scales(j) = unif(rng);
  }
  return spec;
}

// n x d i.i.d. noise, centered to mean zero in every family. The exponential
// draw (mean = scale) is shifted by -scale; the Gumbel draw (location 0,
// scale b) is shifted by -b*gamma with gamma the Euler-Mascheroni constant.
inline Matrix sample_noise(const NoiseSpec& noise, int n, Rng& rng) {
  constexpr double euler_gamma = 0.57721566490153286;
  const int d = static_cast<int>(noise.scales.size());
  Matrix E(n, d);
  for (int j = 0; j < d; ++j) {
    const double scale = noise.scales(j);
    switch (noise.family) {
      case NoiseFamily::gaussian: {
        std::normal_distribution<double> dist(0.0, scale);
        for (int i = 0; i < n; ++i) E(i, j) = dist(rng);
        break;
      }
      case NoiseFamily::exponential: {
        std::exponential_distribution<double> dist(1.0 / scale);
        for (int i = 0; i < n; ++i) E(i, j) = dist(rng) - scale;
        break;
      }
      case NoiseFamily::gumbel: {
        std::extreme_value_distribution<double> dist(0.0, scale);
        const double mean = scale * euler_gamma;
        for (int i = 0; i < n; ++i) E(i, j) = dist(rng) - mean;
        break;
      }
    }
  }
  return E;
}

/// Samples X solving x (I - W) = e by forward propagation along the
/// topological order: x_j = e_j + sum_i x_i W(i, j), parents first. No
/// matrix inverse is ever formed.
inline Dataset sample_data(const GroundTruth& truth, const NoiseSpec& noise, int n, Rng& rng) {
  const Eigen::Index d = truth.W_true.rows();
  if (!is_valid_weights(truth.W_true) || !is_acyclic(threshold(truth.W_true, 0.0))) {
    throw std::invalid_argument("sample_data: W_true must be a finite acyclic weight matrix");
  }
  if (noise.scales.size() != d) throw std::invalid_argument("sample_data: noise dimension mismatch");
  if (n < 1) throw std::invalid_argument("sample_data: n must be >= 1");

  Matrix E = sample_noise(noise, n, rng);
  Matrix X = Matrix::Zero(n, d);
  for (int p = 0; p < truth.order_true.size(); ++p) {
    const int j = truth.order_true.order[static_cast<std::size_t>(p)];
    X.col(j) = E.col(j);
    for (Eigen::Index i = 0; i < d; ++i) {
      if (truth.W_true(i, j) != 0.0) X.col(j) += truth.W_true(i, j) * X.col(i);
    }
  }
  return make_dataset(std::move(X));
}

}  // namespace dagmas
