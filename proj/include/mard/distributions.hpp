#ifndef MARD_DISTRIBUTIONS_HPP_
#define MARD_DISTRIBUTIONS_HPP_

#include <cstdint>

#include "mard/matrix_ops.hpp"

namespace mard {

// Deterministic random stream. Identical seeds produce bitwise-identical
// draw sequences; split() derives an independently seeded stream so that
// parallel chains do not share state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  // Independent substream for chain/replication `stream`.
  Rng split(std::uint64_t stream) const;

  std::uint64_t next_u64();

  // Uniform on the open interval (0, 1).
  double uniform();

  double normal();
  double exponential(double rate);
  // Shape/rate parametrization.
  double gamma(double shape, double rate);
  // Shape/scale parametrization, as used for the sigma^2 prior.
  double inverse_gamma(double shape, double scale);
  double chi_squared(double dof);
  double laplace(double scale);
  // Inverse-Gaussian with mean mu and shape lambda.
  double inverse_gaussian(double mu, double lambda);

 private:
  std::uint64_t seed_;
  std::uint64_t state_;  // splitmix64 counter state
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

// Generalized Inverse Gaussian with density proportional to
//   x^(p-1) * exp(-(a*x + b/x) / 2),  x > 0.
struct GigParams {
  double p = 0.0;  // order
  double a = 1.0;
  double b = 1.0;
};

// Multivariate Student-t parameters. `scale` is the scale matrix (not the
// precision); for dof > 2 the covariance is dof/(dof-2) * scale.
struct MvtParams {
  double dof = 1.0;
  Vector location;
  SpdMatrix scale;
};

// Rejection sampler after Devroye (2014); valid for any real order and
// a, b > 0.
double sample_gig(const GigParams &params, Rng &rng);

// Closed-form GIG mean, sqrt(b/a) * K_{p+1}(sqrt(ab)) / K_p(sqrt(ab)).
double gig_mean(const GigParams &params);

double gig_logpdf(const GigParams &params, double x);

// Wishart draw via the Bartlett factorization. Parametrized so that the
// mean over draws is dof * scale. Requires dof > dim - 1.
SpdMatrix sample_wishart(const SpdMatrix &scale, double dof, Rng &rng);

// E[K^{-1} (x) K] for K ~ Wishart(scale, dof), a (d^2 x d^2) matrix;
// requires dof > dim + 1.
Matrix wishart_inv_kron_expectation(const SpdMatrix &scale, double dof);

// Multivariate normal parametrized by precision (inverse covariance).
Vector sample_mvn_precision(const Vector &mean, const SpdMatrix &precision, Rng &rng);

double mvt_logpdf(const MvtParams &params, const Vector &x);
Vector sample_mvt(const MvtParams &params, Rng &rng);

// Univariate Student-t with scale^2 variance parameter (variance is
// dof/(dof-2) * scale2 for dof > 2).
double student_t_logpdf(double x, double dof, double location, double scale2);
double sample_student_t(double dof, double location, double scale2, Rng &rng);
// Equal-tail quantile of the standardized Student-t, via bisection on the
// regularized incomplete beta function.
double student_t_quantile(double prob, double dof);

double normal_logpdf(double x, double mean, double variance);
double gamma_logpdf(double x, double shape, double rate);
double inverse_gamma_logpdf(double x, double shape, double scale);
double exponential_logpdf(double x, double rate);
double laplace_logpdf(double x, double scale);

}  // namespace mard

#endif  // MARD_DISTRIBUTIONS_HPP_
