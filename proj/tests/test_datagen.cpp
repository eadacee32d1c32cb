// Synthetic benchmark generator: graph skeletons, weights, noise, sampling.
#include <catch2/catch_amalgamated.hpp>

#include <dagmas/datagen.hpp>
#include <dagmas/graph.hpp>
#include <dagmas/mas.hpp>

#include <cmath>
#include <vector>

#include "oracles.hpp"

using dagmas::GraphModel;
using dagmas::GraphSpec;
using dagmas::GroundTruth;
using dagmas::Mask;
using dagmas::Matrix;
using dagmas::NoiseFamily;
using dagmas::NoiseSpec;
using dagmas::Rng;
using dagmas::ScaleMode;
using dagmas::SfDirection;

namespace {

int arc_count(const Mask& mask) {
  int count = 0;
  for (Eigen::Index i = 0; i < mask.rows(); ++i)
    for (Eigen::Index j = 0; j < mask.cols(); ++j)
      if (mask(i, j)) ++count;
  return count;
}

bool order_is_topological(const GroundTruth& truth) {
  const Eigen::Index d = truth.mask_true.rows();
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (truth.mask_true(i, j) &&
          truth.order_true.position_of(static_cast<int>(i)) >=
              truth.order_true.position_of(static_cast<int>(j))) {
        return false;
      }
    }
  }
  return true;
}

// Two-node chain 0 -> 1 with unit weight, for hand-computable moments.
GroundTruth unit_chain() {
  GroundTruth truth;
  truth.W_true = Matrix::Zero(2, 2);
  truth.W_true(0, 1) = 1.0;
  truth.mask_true = Mask::Constant(2, 2, false);
  truth.mask_true(0, 1) = true;
  truth.order_true = dagmas::NodeOrder::identity(2);
  return truth;
}

}  // namespace

TEST_CASE("sample_dag rejects degenerate specs", "[datagen]") {
  Rng rng(1);
  REQUIRE_THROWS_AS(dagmas::sample_dag({1, 1, GraphModel::er, {}}, rng), std::invalid_argument);
  REQUIRE_THROWS_AS(dagmas::sample_dag({4, 0, GraphModel::er, {}}, rng), std::invalid_argument);
  REQUIRE_THROWS_AS(dagmas::sample_dag({4, 4, GraphModel::er, {}}, rng), std::invalid_argument);
  REQUIRE_THROWS_AS(dagmas::sample_dag({3, 5, GraphModel::sf, {}}, rng), std::invalid_argument);
}

TEST_CASE("ER skeletons average k*d arcs", "[datagen]") {
  // d=4, k=1: 6 order-respecting pairs each kept with p = 2/3, so 4 arcs in
  // expectation. The mean over 10000 draws has standard error ~0.012.
  Rng rng(20240401);
  const GraphSpec spec{4, 1, GraphModel::er, {}};
  long total = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    total += arc_count(dagmas::sample_dag(spec, rng).mask_true);
  }
  const double mean = static_cast<double>(total) / 10000.0;
  REQUIRE(mean == Catch::Approx(4.0).margin(0.1));
}

TEST_CASE("ER keep probability saturates at one", "[datagen]") {
  // d=3, k=2 gives 2k/(d-1) = 2, clamped to 1: every draw is the complete
  // DAG on three nodes.
  Rng rng(7);
  const GraphSpec spec{3, 2, GraphModel::er, {}};
  for (int trial = 0; trial < 50; ++trial) {
    REQUIRE(arc_count(dagmas::sample_dag(spec, rng).mask_true) == 3);
  }
}

TEST_CASE("scale-free skeletons have exactly k*(d-k) arcs", "[datagen]") {
  Rng rng(99);
  REQUIRE(arc_count(dagmas::sample_dag({10, 1, GraphModel::sf, {}}, rng).mask_true) == 9);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 4 + static_cast<int>(rng() % 12);
    const int k = 1 + static_cast<int>(rng() % static_cast<unsigned>(d - 1));
    const auto truth = dagmas::sample_dag({d, k, GraphModel::sf, {}}, rng);
    REQUIRE(arc_count(truth.mask_true) == k * (d - k));
  }
}

TEST_CASE("scale-free direction controls which side of a new arc is new", "[datagen]") {
  // Hubs upstream: every node receives at most k arcs (the newly attached
  // node gets exactly k, seed-path nodes one). Flipped: at most k leave.
  Rng rng(4242);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 6 + static_cast<int>(rng() % 10);
    const int k = 1 + static_cast<int>(rng() % 3u);
    if (k >= d) continue;

    const auto forward =
        dagmas::sample_dag({d, k, GraphModel::sf, SfDirection::existing_to_new}, rng);
    for (Eigen::Index j = 0; j < d; ++j) {
      REQUIRE(forward.mask_true.col(j).count() <= k);
    }

    const auto flipped =
        dagmas::sample_dag({d, k, GraphModel::sf, SfDirection::new_to_existing}, rng);
    REQUIRE(arc_count(flipped.mask_true) == k * (d - k));
    for (Eigen::Index i = 0; i < d; ++i) {
      REQUIRE(flipped.mask_true.row(i).count() <= k);
    }
  }
}

TEST_CASE("sampled skeletons are acyclic with a consistent topological order", "[datagen]") {
  Rng rng(314159);
  for (int trial = 0; trial < 300; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 14);
    const int k = 1 + static_cast<int>(rng() % static_cast<unsigned>(d - 1));
    const GraphModel model = (trial % 2 == 0) ? GraphModel::er : GraphModel::sf;
    const SfDirection dir =
        (trial % 4 < 2) ? SfDirection::existing_to_new : SfDirection::new_to_existing;
    const auto truth = dagmas::sample_dag({d, k, model, dir}, rng);
    REQUIRE(oracle::is_acyclic_dfs(truth.mask_true));
    REQUIRE(order_is_topological(truth));
    REQUIRE(truth.W_true.isZero(0.0));  // skeleton only; weights come later
  }
}

TEST_CASE("assign_weights draws magnitudes in [0.5, 2] with balanced signs", "[datagen]") {
  Rng rng(555);
  long arcs = 0;
  long negatives = 0;
  for (int trial = 0; trial < 800; ++trial) {
    auto truth = dagmas::sample_dag({8, 2, GraphModel::er, {}}, rng);
    dagmas::assign_weights(truth, rng);
    for (Eigen::Index i = 0; i < 8; ++i) {
      for (Eigen::Index j = 0; j < 8; ++j) {
        if (truth.mask_true(i, j)) {
          const double w = truth.W_true(i, j);
          REQUIRE(std::abs(w) >= 0.5);
          REQUIRE(std::abs(w) <= 2.0);
          ++arcs;
          if (w < 0.0) ++negatives;
        } else {
          REQUIRE(truth.W_true(i, j) == 0.0);
        }
      }
    }
  }
  REQUIRE(arcs > 10000);
  const double fraction = static_cast<double>(negatives) / static_cast<double>(arcs);
  REQUIRE(fraction == Catch::Approx(0.5).margin(0.02));
}

TEST_CASE("assign_weights leaves an empty skeleton at zero", "[datagen]") {
  GroundTruth truth;
  truth.W_true = Matrix::Zero(3, 3);
  truth.mask_true = Mask::Constant(3, 3, false);
  truth.order_true = dagmas::NodeOrder::identity(3);
  Rng rng(1);
  dagmas::assign_weights(truth, rng);
  REQUIRE(truth.W_true.isZero(0.0));
}

TEST_CASE("noise scales are ones under EV and uniform in [0.5, 1.5] under NV", "[datagen]") {
  Rng rng(31);
  const auto ev = dagmas::make_noise_spec(NoiseFamily::gaussian, ScaleMode::ev, 20, rng);
  REQUIRE(ev.scales.size() == 20);
  REQUIRE((ev.scales.array() == 1.0).all());

  const auto nv = dagmas::make_noise_spec(NoiseFamily::gumbel, ScaleMode::nv, 20, rng);
  REQUIRE(nv.scales.size() == 20);
  REQUIRE((nv.scales.array() >= 0.5).all());
  REQUIRE((nv.scales.array() <= 1.5).all());
  REQUIRE(nv.scales.minCoeff() < nv.scales.maxCoeff());
}

TEST_CASE("every noise family is centered with the advertised spread", "[datagen]") {
  // Sample means must sit within 4 standard errors of zero and the sample
  // variances within 5% of sigma^2 (gaussian, exponential) respectively
  // pi^2 s^2 / 6 (gumbel); n = 100000 keeps both bounds loose.
  const int n = 100000;
  NoiseSpec spec;
  spec.scale_mode = ScaleMode::nv;
  spec.scales.resize(2);
  spec.scales << 1.0, 1.7;

  struct FamilyCase {
    NoiseFamily family;
    double sd_factor;  // standard deviation as a multiple of the scale
  };
  const FamilyCase cases[] = {
      {NoiseFamily::gaussian, 1.0},
      {NoiseFamily::exponential, 1.0},
      {NoiseFamily::gumbel, M_PI / std::sqrt(6.0)},
  };

  Rng rng(777);
  for (const auto& fc : cases) {
    spec.family = fc.family;
    const Matrix E = dagmas::sample_noise(spec, n, rng);
    for (int j = 0; j < 2; ++j) {
      const double sd = fc.sd_factor * spec.scales(j);
      const double mean = E.col(j).mean();
      REQUIRE(std::abs(mean) <= 4.0 * sd / std::sqrt(static_cast<double>(n)));
      const double var = (E.col(j).array() - mean).square().sum() / static_cast<double>(n);
      REQUIRE(var == Catch::Approx(sd * sd).epsilon(0.05));
    }
  }
}

TEST_CASE("exponential noise is skewed right after centering", "[datagen]") {
  NoiseSpec spec;
  spec.family = NoiseFamily::exponential;
  spec.scales = Eigen::VectorXd::Ones(1);
  Rng rng(12);
  const Matrix E = dagmas::sample_noise(spec, 50000, rng);
  // A centered exponential is bounded below by -scale and has median below 0.
  REQUIRE(E.minCoeff() >= -1.0);
  const double below = static_cast<double>((E.array() < 0.0).count()) / 50000.0;
  REQUIRE(below > 0.55);
}

TEST_CASE("a unit chain doubles the variance of the downstream node", "[datagen]") {
  // x1 = x0 + e1 with independent unit-variance terms: Var(x1) = 2.
  const auto truth = unit_chain();
  NoiseSpec noise;
  noise.scales = Eigen::VectorXd::Ones(2);
  Rng rng(2024);
  const auto data = dagmas::sample_data(truth, noise, 100000, rng);
  const auto col = data.X.col(1);
  const double mean = col.mean();
  const double var = (col.array() - mean).square().sum() / 100000.0;
  REQUIRE(var == Catch::Approx(2.0).margin(0.05));
  REQUIRE(data.n == 100000);
  REQUIRE(data.gram.rows() == 2);
}

TEST_CASE("forward propagation matches a dense linear solve", "[datagen]") {
  Rng rng(606060);
  for (int trial = 0; trial < 40; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 19);
    const int k = 1 + static_cast<int>(rng() % static_cast<unsigned>(d - 1));
    const GraphModel model = (trial % 2 == 0) ? GraphModel::er : GraphModel::sf;
    auto truth = dagmas::sample_dag({d, k, model, {}}, rng);
    dagmas::assign_weights(truth, rng);
    const auto noise = dagmas::make_noise_spec(NoiseFamily::gaussian, ScaleMode::nv, d, rng);

    // sample_data consumes the generator exactly as sample_noise does, so a
    // copy reproduces the noise matrix the sampler saw.
    Rng replay = rng;
    const Matrix E = dagmas::sample_noise(noise, 50, replay);
    const auto data = dagmas::sample_data(truth, noise, 50, rng);

    const Matrix reference = oracle::dense_sem_solve(E, truth.W_true);
    // weight chains amplify magnitudes, so compare relative to the data scale
    const double scale = std::max(1.0, reference.cwiseAbs().maxCoeff());
    REQUIRE((data.X - reference).cwiseAbs().maxCoeff() <= 1e-10 * scale);
  }
}

TEST_CASE("sample_data validates its inputs", "[datagen]") {
  GroundTruth cyclic;
  cyclic.W_true = Matrix::Zero(2, 2);
  cyclic.W_true(0, 1) = 1.0;
  cyclic.W_true(1, 0) = 1.0;
  cyclic.mask_true = Mask::Constant(2, 2, true);
  cyclic.order_true = dagmas::NodeOrder::identity(2);
  NoiseSpec noise;
  noise.scales = Eigen::VectorXd::Ones(2);
  Rng rng(3);
  REQUIRE_THROWS_AS(dagmas::sample_data(cyclic, noise, 10, rng), std::invalid_argument);

  const auto truth = unit_chain();
  NoiseSpec mismatched;
  mismatched.scales = Eigen::VectorXd::Ones(3);
  REQUIRE_THROWS_AS(dagmas::sample_data(truth, mismatched, 10, rng), std::invalid_argument);
  REQUIRE_THROWS_AS(dagmas::sample_data(truth, noise, 0, rng), std::invalid_argument);
}

TEST_CASE("empirical second moments match the implied covariance", "[datagen]") {
  // E[x x^t] = (I - W)^{-t} diag(var) (I - W)^{-1}; compare the mean of
  // products against it entrywise within 3 empirical standard errors.
  Rng rng(481516);
  auto truth = dagmas::sample_dag({4, 1, GraphModel::er, {}}, rng);
  dagmas::assign_weights(truth, rng);
  const auto noise = dagmas::make_noise_spec(NoiseFamily::exponential, ScaleMode::nv, 4, rng);

  const int n = 200000;
  const auto data = dagmas::sample_data(truth, noise, n, rng);

  // exponential noise with mean "scale" has variance scale^2
  const Eigen::VectorXd variances = noise.scales.array().square();
  const Matrix expected = oracle::sem_covariance(truth.W_true, variances);

  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      const Eigen::ArrayXd products = data.X.col(a).array() * data.X.col(b).array();
      const double mean = products.mean();
      const double se = std::sqrt((products - mean).square().sum() / n / n);
      REQUIRE(std::abs(mean - expected(a, b)) <= 3.0 * se + 1e-12);
    }
  }
}

TEST_CASE("the generator is bitwise reproducible from its seed", "[datagen]") {
  const auto draw = [](std::uint64_t seed) {
    Rng rng(seed);
    auto truth = dagmas::sample_dag({12, 2, GraphModel::sf, {}}, rng);
    dagmas::assign_weights(truth, rng);
    const auto noise = dagmas::make_noise_spec(NoiseFamily::gumbel, ScaleMode::nv, 12, rng);
    return dagmas::sample_data(truth, noise, 64, rng);
  };
  const auto a = draw(9001);
  const auto b = draw(9001);
  REQUIRE(a.X == b.X);
  REQUIRE(a.gram == b.gram);
  const auto c = draw(9002);
  REQUIRE(a.X != c.X);
}
