#include "mard/evaluation.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "mard/errors.hpp"

namespace mard {

namespace {

void check_lengths(const Vector &y_true, const Vector &y_pred, const char *who) {
  if (y_true.size() != y_pred.size()) {
    throw ParameterError(std::string(who) + ": input lengths disagree");
  }
}

}  // namespace

double r_squared(const Vector &y_true, const Vector &y_pred) {
  check_lengths(y_true, y_pred, "r_squared");
  if (y_true.size() < 2) throw ParameterError("r_squared: need at least 2 observations");
  const double mean = y_true.mean();
  const double ss_tot = (y_true.array() - mean).square().sum();
  if (ss_tot <= 0.0) {
    throw NumericalError("r_squared: undefined for constant y_true");
  }
  const double ss_res = (y_true - y_pred).squaredNorm();
  return 1.0 - ss_res / ss_tot;
}

double rmse(const Vector &y_true, const Vector &y_pred) {
  check_lengths(y_true, y_pred, "rmse");
  if (y_true.size() == 0) throw ParameterError("rmse: empty input");
  return std::sqrt((y_true - y_pred).squaredNorm() / static_cast<double>(y_true.size()));
}

std::size_t interval_hits(const Vector &y_true, const std::vector<Interval> &intervals) {
  if (static_cast<std::size_t>(y_true.size()) != intervals.size()) {
    throw ParameterError("interval_hits: input lengths disagree");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (intervals[i].lo > intervals[i].hi) {
      throw ParameterError("interval_hits: malformed interval with lo > hi");
    }
    if (intervals[i].contains(y_true(static_cast<Eigen::Index>(i)))) ++hits;
  }
  return hits;
}

std::size_t region_hits(const Vector &a_true, const Vector &v_true,
                        const std::vector<CredibleRegion> &regions) {
  if (a_true.size() != v_true.size() ||
      static_cast<std::size_t>(a_true.size()) != regions.size()) {
    throw ParameterError("region_hits: input lengths disagree");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    if (regions[i].arousal.lo > regions[i].arousal.hi ||
        regions[i].valence.lo > regions[i].valence.hi) {
      throw ParameterError("region_hits: malformed region");
    }
    if (regions[i].contains(a_true(idx), v_true(idx))) ++hits;
  }
  return hits;
}

std::string format_metrics_table(const std::vector<MetricsReport> &reports) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  for (const MetricsReport &report : reports) {
    for (const ResponseMetrics &resp : report.responses) {
      out << std::left << std::setw(14) << report.model_name << std::setw(10) << resp.name
          << "  train R2 " << std::setw(9) << resp.train_r2 << "  test R2 " << std::setw(9)
          << resp.test_r2 << "  RMSE " << std::setw(9) << resp.rmse << "  interval hits "
          << resp.interval_hits << "/" << report.n_test << "\n";
    }
    if (report.has_regions) {
      out << std::left << std::setw(14) << report.model_name << std::setw(10) << "joint"
          << "  region hits " << report.region_hits << "/" << report.n_test << "\n";
    }
  }
  return out.str();
}

}  // namespace mard
