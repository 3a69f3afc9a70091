#ifndef MARD_ARD_HPP_
#define MARD_ARD_HPP_

#include <optional>
#include <vector>

#include "mard/distributions.hpp"
#include "mard/interval.hpp"
#include "mard/matrix_ops.hpp"

namespace mard {

// Gamma(a0, b0) prior on the observation precision tau and Gamma(c0, d0)
// priors on the per-coefficient relevance precisions alpha_j.
struct ArdHyper {
  double a0 = 0.01;
  double b0 = 0.01;
  double c0 = 0.01;
  double d0 = 0.01;

  void validate() const;
};

struct ArdOptions {
  double tol = 1e-3;
  std::size_t max_iter = 1000;
  // Prepend a constant-one column whose relevance precision is clamped to
  // `intercept_alpha`, leaving the intercept effectively unpenalized.
  bool add_intercept = false;
  double intercept_alpha = 1e-10;
  // Alternative starting point for d_j*; defaults to d0 everywhere.
  std::optional<Vector> init_d;
};

// Variational posterior q(beta, tau) q(alpha_1) ... q(alpha_p):
//   beta | tau ~ N(beta_star, precision tau * v_star_inv)
//   tau ~ Gamma(a_star, b_star)
//   alpha_j ~ Gamma(c_star_j, d_star_j)
struct ArdPosterior {
  Vector beta_star;
  SpdMatrix v_star_inv;
  double a_star = 1.0;
  double b_star = 1.0;
  Vector c_star;
  Vector d_star;
  std::vector<double> elbo_trace;
  bool has_intercept = false;

  Eigen::Index dim() const { return beta_star.size(); }
  // E[alpha_j]; the intercept column reports its clamped value.
  Vector expected_alpha() const;
};

// Univariate Student-t predictive; variance is dof/(dof-2) * scale2 when
// dof > 2.
struct StudentTPredictive {
  double location = 0.0;
  double scale2 = 1.0;
  double dof = 1.0;
};

// Coordinate-ascent fit. a_star and c_star_j are fixed up front by their
// closed forms; the loop refreshes V*^-1, beta*, b*, d_j* and the ELBO
// until both the ELBO increment and the largest relative parameter change
// drop below tol.
ArdPosterior fit_ard(const Matrix &x, const Vector &y, const ArdHyper &hyper,
                     const ArdOptions &options = {});

// Evidence lower bound of the variational posterior under the given data
// and hyperparameters, using closed-form Gaussian/Gamma expectations.
double elbo_ard(const ArdPosterior &posterior, const Matrix &x, const Vector &y,
                const ArdHyper &hyper);

// Approximate predictive density at a new input: Student-t with location
// beta*^T x, 2 a* degrees of freedom and squared scale
// (b*/a*) (1 + x^T V* x). Accepts x_new either in the fitted design's
// coordinates or, for intercept-augmented fits, without the leading one.
StudentTPredictive predict_ard(const ArdPosterior &posterior, const Vector &x_new);

// Equal-tail interval of a Student-t predictive at the given level.
Interval predictive_interval(const StudentTPredictive &pred, double level);

}  // namespace mard

#endif  // MARD_ARD_HPP_
