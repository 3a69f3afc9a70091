#ifndef MARD_EVALUATION_HPP_
#define MARD_EVALUATION_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "mard/interval.hpp"
#include "mard/matrix_ops.hpp"

namespace mard {

// 1 - SS_res / SS_tot with SS_tot taken around the mean of y_true itself
// (also on held-out data, so test scores are comparable across runs).
double r_squared(const Vector &y_true, const Vector &y_pred);

double rmse(const Vector &y_true, const Vector &y_pred);

// Count of y_true_i inside [lo_i, hi_i], endpoints inclusive.
std::size_t interval_hits(const Vector &y_true, const std::vector<Interval> &intervals);

// Count of (a_i, v_i) pairs inside their rectangle; a hit requires both
// coordinate intervals to fire.
std::size_t region_hits(const Vector &a_true, const Vector &v_true,
                        const std::vector<CredibleRegion> &regions);

struct ResponseMetrics {
  std::string name;
  double train_r2 = 0.0;
  double test_r2 = 0.0;
  double rmse = 0.0;
  std::size_t interval_hits = 0;
};

struct MetricsReport {
  std::string model_name;
  std::vector<ResponseMetrics> responses;
  std::size_t region_hits = 0;
  bool has_regions = false;
  std::size_t n_test = 0;
};

// Aligned text rendering in the comparison-table layout.
std::string format_metrics_table(const std::vector<MetricsReport> &reports);

}  // namespace mard

#endif  // MARD_EVALUATION_HPP_
