#include "mard/mard.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mard {

namespace {

double relative_change(double now, double before) {
  return std::abs(now - before) / (std::abs(before) + 1e-12);
}

// Sorted-sample quantile with linear interpolation.
double sample_quantile(std::vector<double> &values, double prob) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  const double h = prob * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double frac = h - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

struct WishartMixedMoments {
  double e_tau_a = 0.0;   // E[K_11]
  double e_tau_v = 0.0;   // E[K_22]
  double e_kappa = 0.0;   // E[K_12]
  double e_11 = 0.0;      // E[K_11 (K^-1)_11]
  double e_22 = 0.0;      // E[K_22 (K^-1)_22]
  double e_12 = 0.0;      // E[K_12 (K^-1)_12]
};

// First and mixed moments of K ~ Wishart(V*, nu*), dim 2. The mixed terms
// come from E[K^-1 (x) K]; the subtraction constants are the corresponding
// entries of vec(I) vec(I)^T + G_22.
WishartMixedMoments wishart_moments(const SpdMatrix &v_star, double nu_star) {
  if (!(nu_star > 3.0)) {
    throw NumericalError("mard: Wishart mixed moments undefined for nu* <= 3");
  }
  WishartMixedMoments m;
  const Matrix &v = v_star.mat();
  const Matrix vinv = v_star.inverse();
  m.e_tau_a = nu_star * v(0, 0);
  m.e_tau_v = nu_star * v(1, 1);
  m.e_kappa = nu_star * v(0, 1);
  const double lead = nu_star / (nu_star - 3.0);
  m.e_11 = lead * vinv(0, 0) * v(0, 0) - 2.0 / (nu_star - 3.0);
  m.e_22 = lead * vinv(1, 1) * v(1, 1) - 2.0 / (nu_star - 3.0);
  m.e_12 = lead * vinv(0, 1) * v(0, 1) - 1.0 / (nu_star - 3.0);
  return m;
}

double quadform_coefficient(const Matrix &b_star, double m_inv_jj,
                            const WishartMixedMoments &m, Eigen::Index j) {
  const double ba = b_star(j, 0);
  const double bv = b_star(j, 1);
  return ba * ba * m.e_tau_a + m_inv_jj * m.e_11 +
         2.0 * (ba * bv * m.e_kappa + m_inv_jj * m.e_12) +
         bv * bv * m.e_tau_v + m_inv_jj * m.e_22;
}

}  // namespace

MardHyper MardHyper::defaults() {
  return MardHyper{SpdMatrix(Matrix::Identity(2, 2)), 3.0, 0.01, 0.01};
}

void MardHyper::validate() const {
  if (v0.dim() != 2) throw ParameterError("MardHyper: V0 must be 2x2");
  if (!(nu0 > 1.0)) throw ParameterError("MardHyper: nu0 must exceed dim - 1 = 1");
  if (!(c > 0 && d > 0)) throw ParameterError("MardHyper: c and d must be positive");
}

Matrix MardPosterior::coefficients() const {
  return unvec(beta_star, num_features(), 2);
}

MardPosterior fit_mard(const Matrix &x, const Matrix &y, const MardHyper &hyper,
                       const MardOptions &options) {
  hyper.validate();
  if (!(options.tol > 0)) throw ParameterError("fit_mard: tol must be positive");
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (n == 0 || p == 0) throw DataError("fit_mard: empty design");
  if (y.rows() != n) throw ParameterError("fit_mard: design/response row counts disagree");
  if (y.cols() != 2) {
    throw ParameterError("fit_mard: exactly two response columns are supported");
  }
  if (n < p) {
    std::ostringstream msg;
    msg << "fit_mard: unsupported regime n < p (n=" << n << ", p=" << p
        << "); the least squares step needs n >= p";
    throw ParameterError(msg.str());
  }

  const Matrix xtx = x.transpose() * x;
  Eigen::LLT<Matrix> xtx_llt(xtx);
  if (xtx_llt.info() != Eigen::Success) {
    throw SingularityError("fit_mard: X^T X is numerically singular");
  }
  const Matrix xty = x.transpose() * y;
  const Matrix b_hat = xtx_llt.solve(xty);
  const Matrix s = y - x * b_hat;
  const Matrix sts = s.transpose() * s;
  const Matrix v0_inv = hyper.v0.inverse();
  const SpdMatrix xtx_spd(((xtx + xtx.transpose()) / 2.0).eval());

  const double c_star = hyper.c + 1.0;
  const double nu_star = hyper.nu0 + static_cast<double>(n) + static_cast<double>(p);

  Vector delta = Vector::Constant(p, c_star / hyper.d);
  Vector d_star = Vector::Constant(p, hyper.d);
  Matrix b_star = Matrix::Zero(p, 2);
  Matrix v_star = Matrix::Identity(2, 2);

  for (std::size_t it = 0; it < options.max_iter; ++it) {
    const Matrix b_old = b_star;
    const Vector d_old = d_star;
    const Matrix v_old = v_star;

    Matrix m = xtx;
    m.diagonal() += delta;
    const SpdMatrix m_star(((m + m.transpose()) / 2.0).eval());
    b_star = m_star.solve(xty);

    // V*^-1 = V0^-1 + S^T S + B_hat^T (Delta*^-1 + (X^T X)^-1)^-1 B_hat
    Matrix delta_mat = Matrix::Zero(p, p);
    delta_mat.diagonal() = delta;
    const SpdMatrix w = woodbury_inverse(SpdMatrix(std::move(delta_mat)), xtx_spd);
    Matrix v_inv = v0_inv + sts + b_hat.transpose() * w.mat() * b_hat;
    v_inv = ((v_inv + v_inv.transpose()) / 2.0).eval();
    Eigen::LLT<Matrix> v_inv_llt(v_inv);
    if (v_inv_llt.info() != Eigen::Success) {
      throw NumericalError("fit_mard: V*^-1 update is not positive definite");
    }
    v_star = v_inv_llt.solve(Matrix::Identity(2, 2));
    v_star = ((v_star + v_star.transpose()) / 2.0).eval();
    const SpdMatrix v_star_spd(v_star);

    const WishartMixedMoments moments = wishart_moments(v_star_spd, nu_star);
    const Matrix m_inv = m_star.inverse();
    for (Eigen::Index j = 0; j < p; ++j) {
      const double quad = quadform_coefficient(b_star, m_inv(j, j), moments, j);
      d_star(j) = hyper.d + 0.5 * quad;
      if (!(d_star(j) > 0) || !std::isfinite(d_star(j))) {
        std::ostringstream msg;
        msg << "fit_mard: d*_" << j << " update left the positive half-line";
        throw NumericalError(msg.str());
      }
      delta(j) = c_star / d_star(j);
    }

    double max_rel = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      max_rel = std::max(max_rel, relative_change(d_star(j), d_old(j)));
      max_rel = std::max(max_rel, relative_change(b_star(j, 0), b_old(j, 0)));
      max_rel = std::max(max_rel, relative_change(b_star(j, 1), b_old(j, 1)));
    }
    for (Eigen::Index r = 0; r < 2; ++r) {
      for (Eigen::Index col = 0; col < 2; ++col) {
        max_rel = std::max(max_rel, relative_change(v_star(r, col), v_old(r, col)));
      }
    }

    if (max_rel < options.tol) {
      // Final refresh so the stored triple is exactly self-consistent:
      // Delta* from the final d*, M* = X^T X + Delta*, B* = M*^-1 X^T Y.
      Matrix m_final = xtx;
      m_final.diagonal() += delta;
      const SpdMatrix m_star_final(((m_final + m_final.transpose()) / 2.0).eval());
      const Matrix b_final = m_star_final.solve(xty);
      return MardPosterior{vec(b_final), m_star_final, v_star_spd, nu_star,
                           c_star,       d_star,       delta};
    }
  }
  throw ConvergenceError("fit_mard: no convergence within the iteration cap");
}

double expected_q_quadform(const MardPosterior &posterior, Eigen::Index j) {
  const Eigen::Index p = posterior.num_features();
  if (j < 0 || j >= p) throw ParameterError("expected_q_quadform: index out of range");
  const WishartMixedMoments moments = wishart_moments(posterior.v_star, posterior.nu_star);
  Vector ej = Vector::Zero(p);
  ej(j) = 1.0;
  const double m_inv_jj = posterior.m_star.solve(ej)(j);
  return quadform_coefficient(posterior.coefficients(), m_inv_jj, moments, j);
}

PredictiveMvt predict_mard(const MardPosterior &posterior, const Vector &x_new,
                           MardPredictiveForm form) {
  const Eigen::Index p = posterior.num_features();
  if (x_new.size() != p) {
    throw ParameterError("predict_mard: input length does not match the fitted design");
  }
  const double dof = posterior.nu_star - 2.0 + 1.0;
  if (!(dof > 0)) throw ParameterError("predict_mard: nonpositive degrees of freedom");

  const Matrix b = posterior.coefficients();
  Vector location = b.transpose() * x_new;

  double phi;
  if (form == MardPredictiveForm::kValidated) {
    phi = 1.0 + x_new.dot(posterior.m_star.solve(x_new));
  } else {
    phi = 1.0 + x_new.dot(posterior.m_star.mat() * x_new);
  }
  Matrix scale = (phi / dof) * posterior.v_star.inverse();
  scale = ((scale + scale.transpose()) / 2.0).eval();
  return PredictiveMvt{MvtParams{dof, std::move(location), SpdMatrix(std::move(scale))}};
}

std::vector<Eigen::Vector2d> sample_predictive(const MardPosterior &posterior,
                                               const Vector &x_new, std::size_t n_draws,
                                               Rng &rng) {
  const Eigen::Index p = posterior.num_features();
  if (x_new.size() != p) {
    throw ParameterError("sample_predictive: input length does not match the fitted design");
  }
  const Matrix b_star = posterior.coefficients();
  // beta | K has precision K (x) M*, so with M* = Lm Lm^T and K = Lk Lk^T a
  // matrix-normal draw is B* + Lm^-T Z Lk^-1.
  const Matrix lm = posterior.m_star.llt().matrixL();

  std::vector<Eigen::Vector2d> draws;
  draws.reserve(n_draws);
  Matrix z(p, 2);
  for (std::size_t i = 0; i < n_draws; ++i) {
    const SpdMatrix k = sample_wishart(posterior.v_star, posterior.nu_star, rng);
    const Matrix lk = k.llt().matrixL();

    for (Eigen::Index r = 0; r < p; ++r) {
      z(r, 0) = rng.normal();
      z(r, 1) = rng.normal();
    }
    Matrix noise = lm.transpose().triangularView<Eigen::Upper>().solve(z);
    noise = lk.transpose()
                .triangularView<Eigen::Upper>()
                .solve(noise.transpose())
                .transpose();
    const Matrix b_draw = b_star + noise;

    Eigen::Vector2d eps(rng.normal(), rng.normal());
    const Eigen::Vector2d y =
        b_draw.transpose() * x_new +
        lk.transpose().triangularView<Eigen::Upper>().solve(eps);
    draws.push_back(y);
  }
  return draws;
}

CredibleRegion credible_region(const std::vector<Eigen::Vector2d> &samples, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw ParameterError("credible_region: level must lie in (0,1)");
  }
  if (samples.size() < 100) {
    throw ParameterError("credible_region: at least 100 samples are required");
  }
  std::vector<double> a(samples.size()), v(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    a[i] = samples[i](0);
    v[i] = samples[i](1);
  }
  const double tail = (1.0 - level) / 2.0;
  CredibleRegion region;
  region.arousal.lo = sample_quantile(a, tail);
  region.arousal.hi = sample_quantile(a, 1.0 - tail);
  region.valence.lo = sample_quantile(v, tail);
  region.valence.hi = sample_quantile(v, 1.0 - tail);
  return region;
}

}  // namespace mard
