#include "mard/ard.hpp"

#include <cmath>
#include <sstream>

namespace mard {

namespace {

constexpr double kPi = 3.14159265358979323846;

double digamma(double x) {
  // Asymptotic series after shifting the argument above 6.
  double result = 0.0;
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)));
  return result;
}

Matrix with_intercept_column(const Matrix &x) {
  Matrix out(x.rows(), x.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(x.cols()) = x;
  return out;
}

double relative_change(double now, double before) {
  return std::abs(now - before) / (std::abs(before) + 1e-12);
}

}  // namespace

void ArdHyper::validate() const {
  if (!(a0 > 0 && b0 > 0 && c0 > 0 && d0 > 0)) {
    throw ParameterError("ArdHyper: all hyperparameters must be strictly positive");
  }
}

Vector ArdPosterior::expected_alpha() const {
  return c_star.cwiseQuotient(d_star);
}

double elbo_ard(const ArdPosterior &posterior, const Matrix &x, const Vector &y,
                const ArdHyper &hyper) {
  hyper.validate();
  const Matrix design = posterior.has_intercept ? with_intercept_column(x).eval() : x;
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols();
  if (posterior.dim() != p) {
    throw ParameterError("elbo_ard: posterior and design dimensions disagree");
  }

  const double e_tau = posterior.a_star / posterior.b_star;
  const double e_log_tau = digamma(posterior.a_star) - std::log(posterior.b_star);
  const Vector e_alpha = posterior.expected_alpha();

  const Matrix v_star = posterior.v_star_inv.inverse();
  const Vector residual = y - design * posterior.beta_star;
  const Matrix xtx = design.transpose() * design;

  // E[log p(y | beta, tau)]
  double elbo = 0.5 * n * e_log_tau - 0.5 * n * std::log(2.0 * kPi) -
                0.5 * (e_tau * residual.squaredNorm() + xtx.cwiseProduct(v_star).sum());

  // E[log p(beta | tau, alpha)]; the intercept column has a clamped,
  // non-random alpha and contributes through the quadratic term only.
  const Eigen::Index j0 = posterior.has_intercept ? 1 : 0;
  elbo += 0.5 * p * e_log_tau - 0.5 * p * std::log(2.0 * kPi);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double e_tau_bj2 =
        e_tau * posterior.beta_star(j) * posterior.beta_star(j) + v_star(j, j);
    double e_log_alpha_j;
    if (posterior.has_intercept && j == 0) {
      e_log_alpha_j = std::log(e_alpha(j));
    } else {
      e_log_alpha_j = digamma(posterior.c_star(j)) - std::log(posterior.d_star(j));
    }
    elbo += 0.5 * e_log_alpha_j - 0.5 * e_alpha(j) * e_tau_bj2;
  }

  // E[log p(tau)] and E[log p(alpha_j)]
  elbo += hyper.a0 * std::log(hyper.b0) - std::lgamma(hyper.a0) +
          (hyper.a0 - 1.0) * e_log_tau - hyper.b0 * e_tau;
  for (Eigen::Index j = j0; j < p; ++j) {
    const double e_log_alpha_j = digamma(posterior.c_star(j)) - std::log(posterior.d_star(j));
    elbo += hyper.c0 * std::log(hyper.d0) - std::lgamma(hyper.c0) +
            (hyper.c0 - 1.0) * e_log_alpha_j - hyper.d0 * e_alpha(j);
  }

  // -E[log q(beta, tau)]
  const Matrix l = posterior.v_star_inv.llt().matrixL();
  double logdet_vinv = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) logdet_vinv += 2.0 * std::log(l(i, i));
  const double entropy_q_beta_tau =
      -(0.5 * p * e_log_tau + 0.5 * logdet_vinv - 0.5 * p * std::log(2.0 * kPi) - 0.5 * p +
        posterior.a_star * std::log(posterior.b_star) - std::lgamma(posterior.a_star) +
        (posterior.a_star - 1.0) * e_log_tau - posterior.a_star);
  elbo += entropy_q_beta_tau;

  // -E[log q(alpha_j)]
  for (Eigen::Index j = j0; j < p; ++j) {
    elbo -= posterior.c_star(j) * std::log(posterior.d_star(j)) -
            std::lgamma(posterior.c_star(j)) +
            (posterior.c_star(j) - 1.0) *
                (digamma(posterior.c_star(j)) - std::log(posterior.d_star(j))) -
            posterior.c_star(j);
  }
  return elbo;
}

ArdPosterior fit_ard(const Matrix &x, const Vector &y, const ArdHyper &hyper,
                     const ArdOptions &options) {
  hyper.validate();
  if (x.rows() < 1 || x.cols() < 1) throw DataError("fit_ard: empty design");
  if (y.size() != x.rows()) throw ParameterError("fit_ard: design/response size mismatch");
  if (!(options.tol > 0)) throw ParameterError("fit_ard: tol must be positive");

  const Matrix design = options.add_intercept ? with_intercept_column(x).eval() : x;
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols();
  const Matrix xtx = design.transpose() * design;
  const Vector xty = design.transpose() * y;
  const double yty = y.squaredNorm();
  const Eigen::Index j0 = options.add_intercept ? 1 : 0;

  ArdPosterior post{
      Vector::Zero(p),
      SpdMatrix(Matrix::Identity(p, p)),
      hyper.a0 + 0.5 * static_cast<double>(n),
      hyper.b0,
      Vector::Constant(p, hyper.c0 + 0.5),
      Vector::Constant(p, hyper.d0),
      {},
      options.add_intercept};
  if (options.init_d) {
    if (options.init_d->size() != p - j0) {
      throw ParameterError("fit_ard: init_d length does not match penalized columns");
    }
    post.d_star.tail(p - j0) = *options.init_d;
    if ((post.d_star.array() <= 0).any()) {
      throw ParameterError("fit_ard: init_d must be positive");
    }
  }
  if (options.add_intercept) {
    // Clamp E[alpha_0] = intercept_alpha by pinning d_0*.
    post.d_star(0) = post.c_star(0) / options.intercept_alpha;
  }

  double prev_elbo = -std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < options.max_iter; ++it) {
    const Vector beta_old = post.beta_star;
    const double b_old = post.b_star;
    const Vector d_old = post.d_star;

    // q(beta, tau): V*^-1 = X^T X + diag(E[alpha]); beta* = V* X^T y;
    // b* = b0 + (y^T y - beta*^T V*^-1 beta*) / 2.
    Matrix v_inv = xtx;
    v_inv.diagonal() += post.expected_alpha();
    Eigen::LLT<Matrix> llt(v_inv);
    if (llt.info() != Eigen::Success) {
      throw SingularityError("fit_ard: V*^-1 is numerically singular");
    }
    post.beta_star = llt.solve(xty);
    post.b_star = hyper.b0 + 0.5 * (yty - post.beta_star.dot(xty));
    if (!(post.b_star > 0) || !std::isfinite(post.b_star)) {
      throw NumericalError("fit_ard: b* update left the positive half-line");
    }
    const Matrix v_star = llt.solve(Matrix::Identity(p, p));

    // q(alpha_j): d_j* = d0 + (V*_jj + beta*_j^2 a*/b*) / 2.
    const double e_tau = post.a_star / post.b_star;
    for (Eigen::Index j = j0; j < p; ++j) {
      post.d_star(j) =
          hyper.d0 +
          0.5 * (v_star(j, j) + post.beta_star(j) * post.beta_star(j) * e_tau);
    }
    post.v_star_inv = SpdMatrix(((v_inv + v_inv.transpose()) / 2.0).eval());

    const double elbo = elbo_ard(post, x, y, hyper);
    post.elbo_trace.push_back(elbo);
    if (elbo < prev_elbo - 1e-8 * (1.0 + std::abs(prev_elbo))) {
      std::ostringstream msg;
      msg << "fit_ard: ELBO decreased from " << prev_elbo << " to " << elbo;
      throw NumericalError(msg.str());
    }

    double max_rel = relative_change(post.b_star, b_old);
    for (Eigen::Index j = 0; j < p; ++j) {
      max_rel = std::max(max_rel, relative_change(post.beta_star(j), beta_old(j)));
      max_rel = std::max(max_rel, relative_change(post.d_star(j), d_old(j)));
    }
    const bool elbo_done = it > 0 && std::abs(elbo - prev_elbo) < options.tol;
    prev_elbo = elbo;
    if (elbo_done && max_rel < options.tol) {
      return post;
    }
  }
  throw ConvergenceError("fit_ard: no convergence within the iteration cap");
}

StudentTPredictive predict_ard(const ArdPosterior &posterior, const Vector &x_new) {
  Vector z;
  if (x_new.size() == posterior.dim()) {
    z = x_new;
  } else if (posterior.has_intercept && x_new.size() + 1 == posterior.dim()) {
    z.resize(x_new.size() + 1);
    z(0) = 1.0;
    z.tail(x_new.size()) = x_new;
  } else {
    throw ParameterError("predict_ard: input length does not match the fitted design");
  }
  StudentTPredictive pred;
  pred.location = posterior.beta_star.dot(z);
  pred.dof = 2.0 * posterior.a_star;
  // (1 + x^T V* x)^{-1} a*/b* is the precision form; store the squared scale.
  const double xvx = z.dot(posterior.v_star_inv.solve(z));
  pred.scale2 = (posterior.b_star / posterior.a_star) * (1.0 + xvx);
  return pred;
}

Interval predictive_interval(const StudentTPredictive &pred, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw ParameterError("predictive_interval: level must lie in (0,1)");
  }
  const double q = student_t_quantile(1.0 - (1.0 - level) / 2.0, pred.dof);
  const double half = q * std::sqrt(pred.scale2);
  return Interval{pred.location - half, pred.location + half};
}

}  // namespace mard
