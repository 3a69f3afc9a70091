#include "mard/benchmark.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "mard/evaluation.hpp"

namespace mard {

namespace {

double coefficient_sd(const Matrix &estimate, const Matrix &truth) {
  const Matrix err = estimate - truth;
  return std::sqrt(err.squaredNorm() / static_cast<double>(err.size()));
}

}  // namespace

std::vector<SynthBenchRow> run_synth_benchmark(const SynthBenchConfig &config) {
  if (config.test_size < 1) throw ParameterError("benchmark: test_size must be >= 1");
  const SpdMatrix k_inv(config.k_inv);

  std::vector<SynthBenchRow> rows;
  rows.reserve(config.train_sizes.size());
  for (std::size_t grid = 0; grid < config.train_sizes.size(); ++grid) {
    const Eigen::Index n_train = config.train_sizes[grid];
    const SyntheticDataset synth = synthetic_dataset(
        n_train + config.test_size, config.p, config.k_nonzero, k_inv,
        config.seed + static_cast<std::uint64_t>(grid));
    const Dataset data =
        split_counts(synth.data, n_train, config.test_size,
                     config.seed + static_cast<std::uint64_t>(grid));
    const Matrix x_train = data.train_x();
    const Matrix y_train = data.train_y();
    const Matrix x_test = data.test_x();
    const Matrix y_test = data.test_y();

    SynthBenchRow row;
    row.n_train = n_train;
    row.n_test = config.test_size;

    // ARD: one independent fit per response on the same design.
    ArdOptions ard_opts;
    ard_opts.tol = config.tol;
    const ArdPosterior ard_a = fit_ard(x_train, y_train.col(0), config.ard_hyper, ard_opts);
    const ArdPosterior ard_v = fit_ard(x_train, y_train.col(1), config.ard_hyper, ard_opts);
    Matrix ard_coef(config.p, 2);
    ard_coef.col(0) = ard_a.beta_star;
    ard_coef.col(1) = ard_v.beta_star;
    row.ard_coef_sd = coefficient_sd(ard_coef, synth.b_true);

    MardOptions mard_opts;
    mard_opts.tol = config.tol;
    const MardPosterior mard_post = fit_mard(x_train, y_train, config.mard_hyper, mard_opts);
    row.mard_coef_sd = coefficient_sd(mard_post.coefficients(), synth.b_true);

    const Matrix ard_pred = x_test * ard_coef;
    const Matrix mard_pred = x_test * mard_post.coefficients();
    const auto pooled_rmse = [&](const Matrix &pred) {
      return std::sqrt((pred - y_test).squaredNorm() / static_cast<double>(y_test.size()));
    };
    row.ard_rmse = pooled_rmse(ard_pred);
    row.mard_rmse = pooled_rmse(mard_pred);

    if (config.predictive_draws > 0) {
      row.regions_computed = true;
      Rng rng = Rng(config.seed).split(1000 + grid);
      std::vector<CredibleRegion> ard_regions, mard_regions;
      ard_regions.reserve(static_cast<std::size_t>(config.test_size));
      mard_regions.reserve(static_cast<std::size_t>(config.test_size));
      for (Eigen::Index i = 0; i < config.test_size; ++i) {
        const Vector x_new = x_test.row(i).transpose();
        CredibleRegion ard_region;
        ard_region.arousal = predictive_interval(predict_ard(ard_a, x_new), config.level);
        ard_region.valence = predictive_interval(predict_ard(ard_v, x_new), config.level);
        ard_regions.push_back(ard_region);
        const auto draws =
            sample_predictive(mard_post, x_new, config.predictive_draws, rng);
        mard_regions.push_back(credible_region(draws, config.level));
      }
      row.ard_region_hits = region_hits(y_test.col(0), y_test.col(1), ard_regions);
      row.mard_region_hits = region_hits(y_test.col(0), y_test.col(1), mard_regions);
    }
    rows.push_back(row);
  }
  return rows;
}

std::string format_bench_table(const std::vector<SynthBenchRow> &rows) {
  std::ostringstream out;
  out << std::left << std::setw(8) << "n" << std::setw(14) << "ard_coef_sd" << std::setw(14)
      << "mard_coef_sd" << std::setw(12) << "ard_rmse" << std::setw(12) << "mard_rmse"
      << std::setw(12) << "ard_hits" << std::setw(12) << "mard_hits" << "\n";
  out << std::fixed << std::setprecision(4);
  for (const SynthBenchRow &row : rows) {
    out << std::left << std::setw(8) << row.n_train << std::setw(14) << row.ard_coef_sd
        << std::setw(14) << row.mard_coef_sd << std::setw(12) << row.ard_rmse << std::setw(12)
        << row.mard_rmse;
    if (row.regions_computed) {
      out << std::setw(12) << row.ard_region_hits << std::setw(12) << row.mard_region_hits;
    } else {
      out << std::setw(12) << "-" << std::setw(12) << "-";
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace mard
