#pragma once

// Hand-rolled random-input generators for property-style tests. Every test
// seeds its own engine so failures reproduce exactly.

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dagmas/graph.hpp"

namespace testutil {

// Fresh scratch directory per test, removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    const auto base = std::filesystem::temp_directory_path();
    path_ = base / ("dagmas_test_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void spit(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

inline dagmas::Matrix random_weights(int d, std::mt19937& rng, double density = 1.0) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::bernoulli_distribution keep(density);
  dagmas::Matrix W = dagmas::Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (i != j && keep(rng)) W(i, j) = gauss(rng);
  return W;
}

inline dagmas::NodeOrder random_order(int d, std::mt19937& rng) {
  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  return dagmas::NodeOrder::from_order(std::move(order));
}

inline dagmas::Mask random_mask(int d, double p, std::mt19937& rng) {
  std::bernoulli_distribution keep(p);
  dagmas::Mask mask = dagmas::Mask::Constant(d, d, false);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (i != j) mask(i, j) = keep(rng);
  return mask;
}

// Random weights supported on an order-respecting (hence acyclic) arc set.
inline dagmas::Matrix random_dag_weights(int d, double p, std::mt19937& rng) {
  const dagmas::NodeOrder order = random_order(d, rng);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::bernoulli_distribution keep(p);
  dagmas::Matrix W = dagmas::Matrix::Zero(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b)
      if (keep(rng)) W(order.order[static_cast<std::size_t>(a)],
                       order.order[static_cast<std::size_t>(b)]) = gauss(rng);
  return W;
}

inline dagmas::Matrix random_data(int n, int d, std::mt19937& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  dagmas::Matrix X(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) X(i, j) = gauss(rng);
  return X;
}

}  // namespace testutil
