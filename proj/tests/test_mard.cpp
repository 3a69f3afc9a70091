#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mard/ard.hpp"
#include "mard/dataset.hpp"
#include "mard/mard.hpp"
#include "support/test_support.hpp"

using namespace mard;
using namespace mard::testing;

namespace {

SyntheticDataset correlated_problem(Eigen::Index n, Eigen::Index p, Eigen::Index k,
                                    double off_diag, std::uint64_t seed) {
  Matrix k_inv(2, 2);
  k_inv << 4.0, off_diag, off_diag, 4.0;
  return synthetic_dataset(n, p, k, SpdMatrix(k_inv), seed);
}

MardPosterior tiny_posterior(const Vector &beta_star, double m_diag, double v_scale,
                             double nu_star) {
  const Eigen::Index p = beta_star.size() / 2;
  return MardPosterior{beta_star,
                       SpdMatrix((m_diag * Matrix::Identity(p, p)).eval()),
                       SpdMatrix((v_scale * Matrix::Identity(2, 2)).eval()),
                       nu_star,
                       1.01,
                       Vector::Ones(p),
                       Vector::Ones(p)};
}

}  // namespace

TEST_CASE("nu* and c* follow their closed forms and never drift") {
  const SyntheticDataset synth = correlated_problem(100, 10, 4, 1.0, 81);
  MardHyper hyper = MardHyper::defaults();
  hyper.nu0 = 4.0;
  const MardPosterior post = fit_mard(synth.data.x, synth.data.y, hyper);
  CHECK(post.nu_star == doctest::Approx(114.0).epsilon(1e-14));
  CHECK(post.c_star == doctest::Approx(hyper.c + 1.0).epsilon(1e-14));
}

TEST_CASE("vanishing regularization recovers ordinary least squares") {
  const SyntheticDataset synth = correlated_problem(80, 6, 3, 0.0, 82);
  MardHyper hyper = MardHyper::defaults();
  hyper.c = 1e-8;
  hyper.d = 1e8;  // Delta* entries stay below (c+1)/d = 1e-8
  const MardPosterior post = fit_mard(synth.data.x, synth.data.y, hyper);

  const Matrix xtx = synth.data.x.transpose() * synth.data.x;
  const Matrix ols = xtx.ldlt().solve(synth.data.x.transpose() * synth.data.y);
  CHECK(rel_diff(post.coefficients(), ols) < 1e-8);
}

TEST_CASE("Wishart mixed-moment identity: closed form vs Monte Carlo") {
  const SpdMatrix scale(Matrix::Identity(2, 2));
  const double nu = 10.0;
  // E[K_11 (K^-1)_11] = nu/(nu-3) - 2/(nu-3) = 8/7 at V* = I.
  const Matrix closed = wishart_inv_kron_expectation(scale, nu);
  CHECK(closed(0, 0) == doctest::Approx(8.0 / 7.0).epsilon(1e-12));

  Rng rng(83);
  const std::size_t n = 1000000;
  Matrix acc = Matrix::Zero(4, 4);
  Matrix acc2 = Matrix::Zero(4, 4);
  for (std::size_t i = 0; i < n; ++i) {
    const SpdMatrix k = sample_wishart(scale, nu, rng);
    const Matrix term = kron(k.inverse(), k.mat());
    acc += term;
    acc2 += term.cwiseProduct(term);
  }
  const Matrix mc_mean = acc / static_cast<double>(n);
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      const double var = acc2(i, j) / static_cast<double>(n) - mc_mean(i, j) * mc_mean(i, j);
      const double se = std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
      CHECK(std::abs(mc_mean(i, j) - closed(i, j)) < 3.0 * se + 1e-12);
    }
  }
}

TEST_CASE("expected_q_quadform on a hand-evaluated posterior") {
  // p=1, B* = [[1, 2]], M* = I, V* = I, nu* = 10:
  //   quad = 1*10 + 8/7 + 2*(0 - 1/7) + 4*10 + 8/7 = 52.
  const MardPosterior post = tiny_posterior((Vector(2) << 1.0, 2.0).finished(), 1.0, 1.0, 10.0);
  CHECK(expected_q_quadform(post, 0) == doctest::Approx(52.0).epsilon(1e-12));
  CHECK_THROWS_AS(expected_q_quadform(post, 5), ParameterError);

  const MardPosterior low_dof = tiny_posterior((Vector(2) << 1.0, 2.0).finished(), 1.0, 1.0, 2.5);
  CHECK_THROWS_AS(expected_q_quadform(low_dof, 0), NumericalError);
}

TEST_CASE("one extra sweep barely moves a converged posterior") {
  const SyntheticDataset synth = correlated_problem(400, 8, 4, 3.0, 84);
  MardHyper hyper = MardHyper::defaults();
  MardOptions opts;
  opts.tol = 1e-3;
  const MardPosterior post = fit_mard(synth.data.x, synth.data.y, hyper, opts);

  // Independent re-application of the update equations.
  const Matrix &x = synth.data.x;
  const Matrix &y = synth.data.y;
  const Matrix xtx = x.transpose() * x;
  const Matrix b_hat = xtx.ldlt().solve(x.transpose() * y);
  const Matrix s = y - x * b_hat;

  Matrix m_new = xtx;
  m_new.diagonal() += post.delta_star;
  const Matrix b_new = m_new.ldlt().solve(x.transpose() * y);
  Matrix delta_inv = Matrix::Zero(8, 8);
  delta_inv.diagonal() = post.delta_star.cwiseInverse();
  const Matrix w = (delta_inv + xtx.inverse()).inverse();
  const Matrix v_inv_new =
      hyper.v0.inverse() + s.transpose() * s + b_hat.transpose() * w * b_hat;
  const Matrix v_new = v_inv_new.inverse();

  CHECK(rel_diff(b_new, post.coefficients()) < 10.0 * opts.tol);
  CHECK(rel_diff(v_new, post.v_star.mat()) < 10.0 * opts.tol);

  const Matrix m_inv = m_new.inverse();
  const Matrix vs(v_new);
  const double nu = post.nu_star;
  const Matrix vs_inv = v_new.inverse();
  for (Eigen::Index j = 0; j < 8; ++j) {
    const double e11 = nu / (nu - 3.0) * vs_inv(0, 0) * vs(0, 0) - 2.0 / (nu - 3.0);
    const double e22 = nu / (nu - 3.0) * vs_inv(1, 1) * vs(1, 1) - 2.0 / (nu - 3.0);
    const double e12 = nu / (nu - 3.0) * vs_inv(0, 1) * vs(0, 1) - 1.0 / (nu - 3.0);
    const double quad = b_new(j, 0) * b_new(j, 0) * nu * vs(0, 0) + m_inv(j, j) * e11 +
                        2.0 * (b_new(j, 0) * b_new(j, 1) * nu * vs(0, 1) + m_inv(j, j) * e12) +
                        b_new(j, 1) * b_new(j, 1) * nu * vs(1, 1) + m_inv(j, j) * e22;
    const double d_new = hyper.d + 0.5 * quad;
    CHECK(std::abs(d_new - post.d_star(j)) / (std::abs(post.d_star(j)) + 1e-12) <
          10.0 * opts.tol);
  }
}

TEST_CASE("Kronecker structure of the joint precision") {
  const SyntheticDataset synth = correlated_problem(60, 4, 2, 2.0, 85);
  const MardPosterior post = fit_mard(synth.data.x, synth.data.y, MardHyper::defaults());
  const Matrix xtx = synth.data.x.transpose() * synth.data.x;
  Matrix delta = Matrix::Zero(4, 4);
  delta.diagonal() = post.delta_star;

  Rng rng(86);
  const Matrix k = random_spd(2, rng);
  // J + Q* = K (x) (X^T X) + K (x) Delta* = K (x) M*
  const Matrix lhs = kron(k, xtx) + kron(k, delta);
  const Matrix rhs = kron(k, post.m_star.mat());
  CHECK(rel_diff(lhs, rhs) < 1e-8);
}

TEST_CASE("predictive location, dof, and input checks") {
  const MardPosterior zero = tiny_posterior(Vector::Zero(6), 2.0, 1.0, 114.0);
  const PredictiveMvt pred = predict_mard(zero, Vector::Ones(3));
  CHECK(pred.params.location.cwiseAbs().maxCoeff() == 0.0);
  CHECK(pred.params.dof == doctest::Approx(113.0));
  CHECK_THROWS_AS(predict_mard(zero, Vector::Ones(4)), ParameterError);
}

TEST_CASE("closed-form predictive matches the ancestral sampling oracle") {
  const SyntheticDataset synth = correlated_problem(200, 4, 2, 3.0, 87);
  const MardPosterior post = fit_mard(synth.data.x, synth.data.y, MardHyper::defaults());

  Vector x_new(4);
  x_new << 0.8, -0.3, 0.5, 1.1;
  const PredictiveMvt pred = predict_mard(post, x_new);

  Rng rng(88);
  const std::size_t n = 300000;
  const auto draws = sample_predictive(post, x_new, n, rng);

  std::vector<double> a(n), v(n), aa(n), vv(n), av(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = draws[i](0);
    v[i] = draws[i](1);
  }
  const double ma = mean_of(a), mv = mean_of(v);
  for (std::size_t i = 0; i < n; ++i) {
    aa[i] = (a[i] - ma) * (a[i] - ma);
    vv[i] = (v[i] - mv) * (v[i] - mv);
    av[i] = (a[i] - ma) * (v[i] - mv);
  }

  CHECK(std::abs(ma - pred.params.location(0)) < 3.0 * mc_stderr(a));
  CHECK(std::abs(mv - pred.params.location(1)) < 3.0 * mc_stderr(v));

  const Matrix cov_closed =
      pred.params.dof / (pred.params.dof - 2.0) * pred.params.scale.mat();
  CHECK(std::abs(mean_of(aa) - cov_closed(0, 0)) < 3.0 * mc_stderr(aa));
  CHECK(std::abs(mean_of(vv) - cov_closed(1, 1)) < 3.0 * mc_stderr(vv));
  CHECK(std::abs(mean_of(av) - cov_closed(0, 1)) < 3.0 * mc_stderr(av));

  // The unvalidated phi form is far from the simulated moments.
  const PredictiveMvt wrong = predict_mard(post, x_new, MardPredictiveForm::kUnvalidatedPhi);
  const Matrix cov_wrong = wrong.params.dof / (wrong.params.dof - 2.0) * wrong.params.scale.mat();
  CHECK(std::abs(mean_of(aa) - cov_wrong(0, 0)) > 10.0 * mc_stderr(aa));
}

TEST_CASE("predictive density quadrature confirms the covariance and its sign") {
  const SyntheticDataset synth = correlated_problem(150, 3, 2, 3.2, 89);
  const MardPosterior post = fit_mard(synth.data.x, synth.data.y, MardHyper::defaults());
  Vector x_new(3);
  x_new << 1.0, 0.4, -0.2;
  const PredictiveMvt pred = predict_mard(post, x_new);

  // Correlated positive noise makes (V*^-1)_12 > 0, hence (V*)_12 < 0 and a
  // positive predictive correlation.
  CHECK(post.v_star.mat()(0, 1) < 0.0);
  const Matrix cov_closed =
      pred.params.dof / (pred.params.dof - 2.0) * pred.params.scale.mat();
  CHECK(cov_closed(0, 1) > 0.0);

  // Direct 2-D quadrature of the density.
  const double sa = std::sqrt(cov_closed(0, 0));
  const double sv = std::sqrt(cov_closed(1, 1));
  const int cells = 400;
  const double span = 12.0;
  const double ha = 2.0 * span * sa / cells, hv = 2.0 * span * sv / cells;
  double mass = 0.0, ca = 0.0, cv = 0.0, cav = 0.0, caa = 0.0, cvv = 0.0;
  for (int i = 0; i < cells; ++i) {
    for (int j = 0; j < cells; ++j) {
      Vector y(2);
      y << pred.params.location(0) - span * sa + (i + 0.5) * ha,
          pred.params.location(1) - span * sv + (j + 0.5) * hv;
      const double f = std::exp(mvt_logpdf(pred.params, y)) * ha * hv;
      mass += f;
      ca += f * y(0);
      cv += f * y(1);
    }
  }
  for (int i = 0; i < cells; ++i) {
    for (int j = 0; j < cells; ++j) {
      Vector y(2);
      y << pred.params.location(0) - span * sa + (i + 0.5) * ha,
          pred.params.location(1) - span * sv + (j + 0.5) * hv;
      const double f = std::exp(mvt_logpdf(pred.params, y)) * ha * hv;
      caa += f * (y(0) - ca / mass) * (y(0) - ca / mass);
      cvv += f * (y(1) - cv / mass) * (y(1) - cv / mass);
      cav += f * (y(0) - ca / mass) * (y(1) - cv / mass);
    }
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(5e-3));
  CHECK(caa / mass == doctest::Approx(cov_closed(0, 0)).epsilon(0.02));
  CHECK(cvv / mass == doctest::Approx(cov_closed(1, 1)).epsilon(0.02));
  CHECK(cav / mass == doctest::Approx(cov_closed(0, 1)).epsilon(0.05));
}

TEST_CASE("degenerate predictive concentrates at the location") {
  const MardPosterior post =
      tiny_posterior((Vector(2) << 1.0, 2.0).finished(), 1e6, 1e6, 1e6);
  Rng rng(90);
  const auto draws = sample_predictive(post, Vector::Ones(1), 200, rng);
  for (const auto &d : draws) {
    CHECK(std::abs(d(0) - 1.0) < 1e-3);
    CHECK(std::abs(d(1) - 2.0) < 1e-3);
  }

  Rng r1(91), r2(91);
  const auto d1 = sample_predictive(post, Vector::Ones(1), 50, r1);
  const auto d2 = sample_predictive(post, Vector::Ones(1), 50, r2);
  for (std::size_t i = 0; i < d1.size(); ++i) {
    CHECK(d1[i](0) == d2[i](0));
    CHECK(d1[i](1) == d2[i](1));
  }
}

TEST_CASE("credible regions from samples") {
  std::vector<Eigen::Vector2d> same(150, Eigen::Vector2d(0.4, -0.2));
  const CredibleRegion degenerate = credible_region(same, 0.95);
  CHECK(degenerate.arousal.lo == 0.4);
  CHECK(degenerate.arousal.hi == 0.4);
  CHECK(degenerate.valence.width() == 0.0);

  Rng rng(92);
  std::vector<Eigen::Vector2d> normals(100000);
  for (auto &d : normals) d = Eigen::Vector2d(rng.normal(), rng.normal());
  const CredibleRegion region = credible_region(normals, 0.95);
  CHECK(std::abs(region.arousal.lo + 1.96) < 0.05);
  CHECK(std::abs(region.arousal.hi - 1.96) < 0.05);
  CHECK(std::abs(region.valence.lo + 1.96) < 0.05);
  CHECK(std::abs(region.valence.hi - 1.96) < 0.05);

  std::vector<Eigen::Vector2d> few(50, Eigen::Vector2d(0, 0));
  CHECK_THROWS_AS(credible_region(few, 0.95), ParameterError);
  CHECK_THROWS_AS(credible_region(same, 1.5), ParameterError);
}

TEST_CASE("unsupported regimes are rejected") {
  Rng rng(93);
  const Matrix x_thin = random_matrix(5, 10, rng);
  const Matrix y = random_matrix(5, 2, rng);
  CHECK_THROWS_WITH_AS(fit_mard(x_thin, y, MardHyper::defaults()),
                       doctest::Contains("unsupported regime"), ParameterError);

  const Matrix x_ok = random_matrix(10, 2, rng);
  const Matrix y1 = random_matrix(10, 1, rng);
  CHECK_THROWS_AS(fit_mard(x_ok, y1, MardHyper::defaults()), ParameterError);

  Matrix x_dup(10, 2);
  x_dup.col(0) = x_ok.col(0);
  x_dup.col(1) = x_ok.col(0);
  const Matrix y2 = random_matrix(10, 2, rng);
  CHECK_THROWS_AS(fit_mard(x_dup, y2, MardHyper::defaults()), SingularityError);

  MardOptions capped;
  capped.max_iter = 1;
  capped.tol = 1e-12;
  const Matrix y3 = random_matrix(10, 2, rng);
  CHECK_THROWS_AS(fit_mard(x_ok, y3, MardHyper::defaults(), capped), ConvergenceError);
}

TEST_CASE("independent responses reduce MARD to two ARD fits") {
  Matrix k_inv(2, 2);
  k_inv << 100.0, 0.0, 0.0, 100.0;
  const SyntheticDataset synth = synthetic_dataset(1000, 100, 20, SpdMatrix(k_inv), 94);
  const Matrix &x = synth.data.x;
  const Matrix &y = synth.data.y;

  const MardPosterior mard_post = fit_mard(x, y, MardHyper::defaults());
  const ArdPosterior ard_a = fit_ard(x, y.col(0), ArdHyper{});
  const ArdPosterior ard_v = fit_ard(x, y.col(1), ArdHyper{});

  Matrix ard_coef(100, 2);
  ard_coef.col(0) = ard_a.beta_star;
  ard_coef.col(1) = ard_v.beta_star;
  const Matrix diff = mard_post.coefficients() - ard_coef;
  const double coef_rmse = std::sqrt(diff.squaredNorm() / static_cast<double>(diff.size()));
  CHECK(coef_rmse < 0.05);
}
