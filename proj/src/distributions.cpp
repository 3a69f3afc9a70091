#include "mard/distributions.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace mard {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint64_t splitmix64(std::uint64_t &state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void require_positive(double value, const char *name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    std::ostringstream msg;
    msg << name << " must be positive and finite, got " << value;
    throw ParameterError(msg.str());
  }
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed), state_(seed) {
  // Burn a few outputs so nearby seeds decorrelate.
  for (int i = 0; i < 4; ++i) splitmix64(state_);
}

Rng Rng::split(std::uint64_t stream) const {
  std::uint64_t s = seed_ ^ (0xA0761D6478BD642FULL + stream * 0xE7037ED1A0B428DBULL);
  splitmix64(s);
  return Rng(s);
}

std::uint64_t Rng::next_u64() { return splitmix64(state_); }

double Rng::uniform() {
  // 53-bit mantissa, shifted off zero so logs are always finite.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  // Marsaglia polar method.
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  cached_normal_ = v * f;
  has_cached_normal_ = true;
  return u * f;
}

double Rng::exponential(double rate) {
  require_positive(rate, "exponential rate");
  return -std::log(uniform()) / rate;
}

double Rng::gamma(double shape, double rate) {
  require_positive(shape, "gamma shape");
  require_positive(rate, "gamma rate");
  if (shape < 1.0) {
    // Boost: Gamma(a) = Gamma(a + 1) * U^(1/a).
    const double boost = std::pow(uniform(), 1.0 / shape);
    return gamma(shape + 1.0, rate) * boost;
  }
  // Marsaglia-Tsang squeeze.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

double Rng::inverse_gamma(double shape, double scale) {
  // If G ~ Gamma(shape, rate = scale), then 1/G ~ IG(shape, scale).
  return 1.0 / gamma(shape, scale);
}

double Rng::chi_squared(double dof) { return gamma(dof / 2.0, 0.5); }

double Rng::laplace(double scale) {
  require_positive(scale, "laplace scale");
  const double u = uniform() - 0.5;
  return (u < 0 ? scale : -scale) * std::log(1.0 - 2.0 * std::abs(u));
}

double Rng::inverse_gaussian(double mu, double lambda) {
  require_positive(mu, "inverse_gaussian mean");
  require_positive(lambda, "inverse_gaussian shape");
  // Michael, Schucany and Haas (1976).
  const double nu = normal();
  const double y = nu * nu;
  const double x = mu + mu * mu * y / (2.0 * lambda) -
                   mu / (2.0 * lambda) * std::sqrt(4.0 * mu * lambda * y + mu * mu * y * y);
  if (uniform() <= mu / (mu + x)) return x;
  return mu * mu / x;
}

namespace {

// Log-concave target on the log scale used by Devroye's GIG sampler.
// psi(x) = -alpha (cosh x - 1) - order (e^x - x - 1), alpha = sqrt(omega^2 +
// order^2) - order, for a draw Z = mode * e^X from the two-parameter
// GIG(order, omega) with density z^(order-1) exp(-omega (z + 1/z) / 2).
double gig_psi(double alpha, double order, double x) {
  return -alpha * (std::cosh(x) - 1.0) - order * (std::expm1(x) - x);
}

double gig_psi_prime(double alpha, double order, double x) {
  return -alpha * std::sinh(x) - order * std::expm1(x);
}

double sample_gig_standard(double order, double omega, Rng &rng) {
  // order >= 0, omega > 0.
  const double alpha = std::sqrt(omega * omega + order * order) - order;

  double t;
  double neg_psi1 = -gig_psi(alpha, order, 1.0);
  if (neg_psi1 >= 0.5 && neg_psi1 <= 2.0) {
    t = 1.0;
  } else if (neg_psi1 > 2.0) {
    t = std::sqrt(2.0 / (alpha + order));
  } else {
    t = std::log(4.0 / (alpha + 2.0 * order));
  }

  double s;
  double neg_psi_m1 = -gig_psi(alpha, order, -1.0);
  if (neg_psi_m1 >= 0.5 && neg_psi_m1 <= 2.0) {
    s = 1.0;
  } else if (neg_psi_m1 > 2.0) {
    s = std::sqrt(4.0 / (alpha * std::cosh(1.0) + order));
  } else {
    s = std::min(1.0 / order,
                 std::log(1.0 + 1.0 / alpha + std::sqrt(1.0 / (alpha * alpha) + 2.0 / alpha)));
  }

  const double eta = -gig_psi(alpha, order, t);
  const double zeta = -gig_psi_prime(alpha, order, t);
  const double theta = -gig_psi(alpha, order, -s);
  const double xi = gig_psi_prime(alpha, order, -s);

  const double p = 1.0 / xi;
  const double r = 1.0 / zeta;
  const double t_shift = t - r * eta;
  const double s_shift = s - p * theta;
  const double q = t_shift + s_shift;

  double x;
  for (;;) {
    const double u = rng.uniform();
    const double v = rng.uniform();
    const double w = rng.uniform();
    if (u < q / (p + q + r)) {
      x = -s_shift + q * v;
    } else if (u < (q + r) / (p + q + r)) {
      x = t_shift - r * std::log(v);
    } else {
      x = -s_shift + p * std::log(v);
    }
    // Piecewise envelope: flat over [-s', t'], then the tangent
    // exponentials of psi at the original t and -s, which cross one exactly
    // at the shifted break points.
    double envelope;
    if (x >= -s_shift && x <= t_shift) {
      envelope = 1.0;
    } else if (x > t_shift) {
      envelope = std::exp(-zeta * (x - t_shift));
    } else {
      envelope = std::exp(xi * (x + s_shift));
    }
    if (std::exp(gig_psi(alpha, order, x)) >= w * envelope) break;
  }

  const double mode = order / omega + std::sqrt(1.0 + (order * order) / (omega * omega));
  return mode * std::exp(x);
}

}  // namespace

double sample_gig(const GigParams &params, Rng &rng) {
  require_positive(params.a, "GIG parameter a");
  require_positive(params.b, "GIG parameter b");
  if (!std::isfinite(params.p)) throw ParameterError("GIG order must be finite");
  // 1/X ~ GIG(-p, b, a) when X ~ GIG(p, a, b).
  if (params.p < 0.0) {
    return 1.0 / sample_gig(GigParams{-params.p, params.b, params.a}, rng);
  }
  const double omega = std::sqrt(params.a * params.b);
  const double z = sample_gig_standard(params.p, omega, rng);
  return std::sqrt(params.b / params.a) * z;
}

double gig_mean(const GigParams &params) {
  require_positive(params.a, "GIG parameter a");
  require_positive(params.b, "GIG parameter b");
  const double omega = std::sqrt(params.a * params.b);
  // K_nu is symmetric in the order.
  const double knum = std::cyl_bessel_k(std::abs(params.p + 1.0), omega);
  const double kden = std::cyl_bessel_k(std::abs(params.p), omega);
  return std::sqrt(params.b / params.a) * knum / kden;
}

double gig_logpdf(const GigParams &params, double x) {
  require_positive(params.a, "GIG parameter a");
  require_positive(params.b, "GIG parameter b");
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  const double omega = std::sqrt(params.a * params.b);
  const double log_norm = 0.5 * params.p * std::log(params.a / params.b) -
                          std::log(2.0 * std::cyl_bessel_k(std::abs(params.p), omega));
  return log_norm + (params.p - 1.0) * std::log(x) - 0.5 * (params.a * x + params.b / x);
}

SpdMatrix sample_wishart(const SpdMatrix &scale, double dof, Rng &rng) {
  const Eigen::Index d = scale.dim();
  if (!(dof > static_cast<double>(d) - 1.0)) {
    std::ostringstream msg;
    msg << "sample_wishart: dof must exceed dim - 1 = " << (d - 1) << ", got " << dof;
    throw ParameterError(msg.str());
  }
  // Bartlett: K = L A A^T L^T with V = L L^T; then E[K] = dof * V.
  Matrix a = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = rng.normal();
    a(i, i) = std::sqrt(rng.chi_squared(dof - static_cast<double>(i)));
  }
  const Matrix l = scale.llt().matrixL();
  Matrix la = l * a;
  Matrix k = la * la.transpose();
  k = ((k + k.transpose()) / 2.0).eval();
  return SpdMatrix(std::move(k));
}

Matrix wishart_inv_kron_expectation(const SpdMatrix &scale, double dof) {
  const Eigen::Index d = scale.dim();
  const double denom = dof - static_cast<double>(d) - 1.0;
  if (!(denom > 0.0)) {
    throw NumericalError("wishart_inv_kron_expectation: moment undefined for dof <= dim + 1");
  }
  const Matrix vinv = scale.inverse();
  const Vector vec_id = vec(Matrix::Identity(d, d));
  const Matrix g = commutation_matrix(d, d);
  return (dof / denom) * kron(vinv, scale.mat()) -
         (vec_id * vec_id.transpose() + g) / denom;
}

Vector sample_mvn_precision(const Vector &mean, const SpdMatrix &precision, Rng &rng) {
  if (mean.size() != precision.dim()) {
    throw ParameterError("sample_mvn_precision: mean and precision dimensions disagree");
  }
  Vector z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  // x = mean + L^{-T} z gives covariance (L L^T)^{-1} = precision^{-1}.
  const auto &llt = precision.llt();
  return mean + llt.matrixU().solve(z);
}

double mvt_logpdf(const MvtParams &params, const Vector &x) {
  require_positive(params.dof, "Student-t dof");
  const Eigen::Index d = params.scale.dim();
  if (x.size() != d || params.location.size() != d) {
    throw ParameterError("mvt_logpdf: dimension mismatch");
  }
  const Vector u = x - params.location;
  const double quad = u.dot(params.scale.solve(u));
  const Matrix l = params.scale.llt().matrixL();
  double half_logdet = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) half_logdet += std::log(l(i, i));
  const double nu = params.dof;
  return std::lgamma((nu + d) / 2.0) - std::lgamma(nu / 2.0) -
         0.5 * d * std::log(nu * kPi) - half_logdet -
         0.5 * (nu + d) * std::log1p(quad / nu);
}

Vector sample_mvt(const MvtParams &params, Rng &rng) {
  require_positive(params.dof, "Student-t dof");
  const Eigen::Index d = params.scale.dim();
  if (params.location.size() != d) {
    throw ParameterError("sample_mvt: dimension mismatch");
  }
  Vector z(d);
  for (Eigen::Index i = 0; i < d; ++i) z(i) = rng.normal();
  const Vector w = params.scale.llt().matrixL() * z;
  const double g = rng.chi_squared(params.dof);
  return params.location + w * std::sqrt(params.dof / g);
}

double student_t_logpdf(double x, double dof, double location, double scale2) {
  require_positive(dof, "Student-t dof");
  require_positive(scale2, "Student-t scale2");
  const double z2 = (x - location) * (x - location) / scale2;
  return std::lgamma((dof + 1.0) / 2.0) - std::lgamma(dof / 2.0) -
         0.5 * std::log(dof * kPi) - 0.5 * std::log(scale2) -
         0.5 * (dof + 1.0) * std::log1p(z2 / dof);
}

double sample_student_t(double dof, double location, double scale2, Rng &rng) {
  require_positive(dof, "Student-t dof");
  require_positive(scale2, "Student-t scale2");
  const double g = rng.chi_squared(dof);
  return location + std::sqrt(scale2) * rng.normal() * std::sqrt(dof / g);
}

namespace {

// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
double betacf(double a, double b, double x) {
  const double eps = 1e-15;
  const double fpmin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(ln_front) * betacf(a, b, x) / a;
  }
  return 1.0 - std::exp(std::lgamma(a + b) - std::lgamma(b) - std::lgamma(a) +
                        b * std::log(1.0 - x) + a * std::log(x)) *
                   betacf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double dof) {
  const double x = dof / (dof + t * t);
  const double tail = 0.5 * incomplete_beta(dof / 2.0, 0.5, x);
  return t >= 0.0 ? 1.0 - tail : tail;
}

}  // namespace

double student_t_quantile(double prob, double dof) {
  require_positive(dof, "Student-t dof");
  if (!(prob > 0.0 && prob < 1.0)) {
    throw ParameterError("student_t_quantile: probability must lie in (0,1)");
  }
  if (prob == 0.5) return 0.0;
  double lo = -1.0, hi = 1.0;
  while (student_t_cdf(lo, dof) > prob) lo *= 2.0;
  while (student_t_cdf(hi, dof) < prob) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (student_t_cdf(mid, dof) < prob) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double normal_logpdf(double x, double mean, double variance) {
  require_positive(variance, "normal variance");
  const double z2 = (x - mean) * (x - mean) / variance;
  return -0.5 * (std::log(2.0 * kPi * variance) + z2);
}

double gamma_logpdf(double x, double shape, double rate) {
  require_positive(shape, "gamma shape");
  require_positive(rate, "gamma rate");
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double inverse_gamma_logpdf(double x, double shape, double scale) {
  require_positive(shape, "inverse-gamma shape");
  require_positive(scale, "inverse-gamma scale");
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

double exponential_logpdf(double x, double rate) {
  require_positive(rate, "exponential rate");
  if (x < 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(rate) - rate * x;
}

double laplace_logpdf(double x, double scale) {
  require_positive(scale, "laplace scale");
  return -std::log(2.0 * scale) - std::abs(x) / scale;
}

}  // namespace mard
