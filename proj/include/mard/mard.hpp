#ifndef MARD_MARD_HPP_
#define MARD_MARD_HPP_

#include <vector>

#include "mard/distributions.hpp"
#include "mard/interval.hpp"
#include "mard/matrix_ops.hpp"

namespace mard {

// Normal-Wishart prior on (beta, K) and Gamma(c, d) priors on the shared
// relevance precisions alpha_j. K is the 2x2 precision of the response
// pairs, with Wishart prior parametrized so that E[K] = nu0 * V0.
struct MardHyper {
  SpdMatrix v0;
  double nu0 = 3.0;
  double c = 0.01;
  double d = 0.01;

  static MardHyper defaults();
  void validate() const;
};

struct MardOptions {
  double tol = 1e-3;
  std::size_t max_iter = 1000;
};

// Variational posterior q(beta, K) q(alpha_1) ... q(alpha_p):
//   beta | K ~ N(beta_star, precision K (x) M*)
//   K ~ Wishart(V*, nu*)
//   alpha_j ~ Gamma(c*, d_j*)
// beta_star = vec(B*) stacks the first response's coefficients before the
// second's.
struct MardPosterior {
  Vector beta_star;       // length 2p
  SpdMatrix m_star;       // X^T X + Delta*
  SpdMatrix v_star;       // 2x2 Wishart scale
  double nu_star = 0.0;
  double c_star = 0.0;
  Vector d_star;          // length p
  Vector delta_star;      // diagonal of Delta*, entries c*/d_j*

  Eigen::Index num_features() const { return d_star.size(); }
  // Coefficients as a p x 2 matrix (one column per response).
  Matrix coefficients() const;
};

// Bivariate Student-t predictive for one input point.
struct PredictiveMvt {
  MvtParams params;
};

enum class MardPredictiveForm {
  // phi = 1 + x^T M*^-1 x, the form that matches the sampling oracle.
  kValidated,
  // phi = 1 + x^T M* x, kept for inspection only.
  kUnvalidatedPhi,
};

// Coordinate-ascent fit of the bivariate model. Requires n >= p (the
// ordinary least squares estimate must exist) and exactly two response
// columns. Iterates M*, B*, V*, d_j*, Delta* until the largest relative
// parameter change drops below tol.
MardPosterior fit_mard(const Matrix &x, const Matrix &y, const MardHyper &hyper,
                       const MardOptions &options = {});

// E[beta^T Q beta] / alpha_j for coordinate j under the current posterior:
// the coefficient of alpha_j in q*(alpha_j)'s rate update, combining first
// and mixed Wishart moments of K.
double expected_q_quadform(const MardPosterior &posterior, Eigen::Index j);

// Closed-form predictive density: Student-t with nu* - 1 degrees of
// freedom, location B*^T x and scale matrix phi / (nu* - 1) * V*^-1.
PredictiveMvt predict_mard(const MardPosterior &posterior, const Vector &x_new,
                           MardPredictiveForm form = MardPredictiveForm::kValidated);

// Ancestral sampler from the joint variational predictive: draw K, then
// beta | K, then y | beta, K, keeping only y.
std::vector<Eigen::Vector2d> sample_predictive(const MardPosterior &posterior,
                                               const Vector &x_new, std::size_t n_draws,
                                               Rng &rng);

// Per-coordinate equal-tail intervals of a predictive sample; the region is
// their Cartesian product.
CredibleRegion credible_region(const std::vector<Eigen::Vector2d> &samples, double level);

}  // namespace mard

#endif  // MARD_MARD_HPP_
