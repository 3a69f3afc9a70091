#ifndef MARD_BENCHMARK_HPP_
#define MARD_BENCHMARK_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "mard/ard.hpp"
#include "mard/dataset.hpp"
#include "mard/mard.hpp"

namespace mard {

// Controlled ARD-versus-MARD comparison on generated data: p features with
// a sparse coefficient matrix, correlated bivariate noise, a grid of
// training sizes and a fixed-size test set.
struct SynthBenchConfig {
  std::vector<Eigen::Index> train_sizes{1000, 500, 100};
  Eigen::Index test_size = 1000;
  Eigen::Index p = 100;
  Eigen::Index k_nonzero = 20;
  Matrix k_inv = (Matrix(2, 2) << 100.0, 85.0, 85.0, 100.0).finished();
  std::uint64_t seed = 7;
  double level = 0.95;
  // Predictive draws per test point for the MARD credible rectangles; 0
  // skips the rectangle computation entirely.
  std::size_t predictive_draws = 500;
  ArdHyper ard_hyper;
  MardHyper mard_hyper = MardHyper::defaults();
  double tol = 1e-3;
};

struct SynthBenchRow {
  Eigen::Index n_train = 0;
  Eigen::Index n_test = 0;
  // Standard deviation of estimated-minus-true coefficients, pooled over
  // both responses.
  double ard_coef_sd = 0.0;
  double mard_coef_sd = 0.0;
  // Test RMSE pooled over both responses.
  double ard_rmse = 0.0;
  double mard_rmse = 0.0;
  // Test pairs inside the models' credible rectangles.
  std::size_t ard_region_hits = 0;
  std::size_t mard_region_hits = 0;
  bool regions_computed = false;
};

std::vector<SynthBenchRow> run_synth_benchmark(const SynthBenchConfig &config);

std::string format_bench_table(const std::vector<SynthBenchRow> &rows);

}  // namespace mard

#endif  // MARD_BENCHMARK_HPP_
