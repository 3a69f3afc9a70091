#include "mard/bayes_lasso.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mard {

namespace {

void check_finite(double value, const char *variable) {
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << "gibbs_step: non-finite conditional parameter for " << variable;
    throw NumericalError(msg.str());
  }
}

void check_data(const Matrix &x, const Vector &y) {
  if (x.rows() == 0 || x.cols() == 0) {
    throw DataError("empty design matrix");
  }
  if (y.size() != x.rows()) {
    throw ParameterError("design matrix and response length disagree");
  }
  if (!x.allFinite() || !y.allFinite()) {
    throw DataError("design or response carries non-finite values");
  }
}

// Quantile of a sorted sample with linear interpolation.
double sorted_quantile(const std::vector<double> &sorted, double prob) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = prob * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

void LassoHyper::validate() const {
  if (!(a > 0 && b > 0 && c > 0 && d > 0)) {
    throw ParameterError("LassoHyper: all hyperparameters must be strictly positive");
  }
}

void GibbsState::validate(const std::string &context) const {
  if (!std::isfinite(beta0)) throw NumericalError(context + ": beta0 is non-finite");
  if (!beta.allFinite()) throw NumericalError(context + ": beta is non-finite");
  if (!(sigma2 > 0) || !std::isfinite(sigma2)) {
    throw NumericalError(context + ": sigma2 must be positive");
  }
  if (!(lambda > 0) || !std::isfinite(lambda)) {
    throw NumericalError(context + ": lambda must be positive");
  }
  for (Eigen::Index j = 0; j < gamma.size(); ++j) {
    if (!(gamma(j) > 0) || !std::isfinite(gamma(j))) {
      throw NumericalError(context + ": gamma must be positive");
    }
  }
}

GibbsState gibbs_step(const GibbsState &state, const Matrix &x, const Vector &y,
                      const LassoHyper &hyper, Rng &rng, const GibbsOptions &options) {
  check_data(x, y);
  hyper.validate();
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (state.beta.size() != p || state.gamma.size() != p) {
    throw ParameterError("gibbs_step: state dimensions do not match the design");
  }

  GibbsState next = state;
  // Residual r = y - beta0 - X beta, kept current across block updates.
  Vector residual = y - x * next.beta;
  residual.array() -= next.beta0;
  const Vector col_sq = x.colwise().squaredNorm();

  for (GibbsBlock block : options.scan) {
    switch (block) {
      case GibbsBlock::kBeta0: {
        // beta0 | . ~ N(mean(y - X beta), sigma2 / n)
        const double mean = (residual.array() + next.beta0).mean();
        const double sd = std::sqrt(next.sigma2 / static_cast<double>(n));
        const double old = next.beta0;
        check_finite(mean, "beta0");
        next.beta0 = mean + sd * rng.normal();
        residual.array() -= next.beta0 - old;
        break;
      }
      case GibbsBlock::kSigma2: {
        // sigma2 | . ~ IG(a + n/2, b + RSS/2)
        const double shape = hyper.a + static_cast<double>(n) / 2.0;
        const double scale = hyper.b + 0.5 * residual.squaredNorm();
        check_finite(scale, "sigma2");
        next.sigma2 = rng.inverse_gamma(shape, scale);
        break;
      }
      case GibbsBlock::kLambda: {
        if (options.clamp_lambda) {
          next.lambda = *options.clamp_lambda;
          break;
        }
        // lambda | . ~ Gamma(c + p, d + sum(gamma)/2)
        const double shape = hyper.c + static_cast<double>(p);
        const double rate = hyper.d + 0.5 * next.gamma.sum();
        check_finite(rate, "lambda");
        next.lambda = rng.gamma(shape, rate);
        break;
      }
      case GibbsBlock::kBeta: {
        for (Eigen::Index j = 0; j < p; ++j) {
          // Leave-one-out residual: r already excludes nothing, so add the
          // j-th contribution back in.
          const double var =
              1.0 / (1.0 / next.gamma(j) + col_sq(j) / next.sigma2);
          const double cross = x.col(j).dot(residual) + col_sq(j) * next.beta(j);
          const double mean = var * cross / next.sigma2;
          check_finite(mean, "beta");
          check_finite(var, "beta");
          const double old = next.beta(j);
          next.beta(j) = mean + std::sqrt(var) * rng.normal();
          residual -= (next.beta(j) - old) * x.col(j);
        }
        break;
      }
      case GibbsBlock::kGamma: {
        if (options.clamp_gamma) {
          next.gamma = *options.clamp_gamma;
          break;
        }
        for (Eigen::Index j = 0; j < p; ++j) {
          // gamma_j | . ~ GIG(1/2, lambda, beta_j^2)
          const double b = std::max(next.beta(j) * next.beta(j), 1e-280);
          check_finite(b, "gamma");
          next.gamma(j) = sample_gig(GigParams{0.5, next.lambda, b}, rng);
        }
        break;
      }
    }
  }
  next.validate("gibbs_step");
  return next;
}

ChainOutput run_chain(const Matrix &x, const Vector &y, const LassoHyper &hyper,
                      std::size_t iters, std::size_t burn_in, std::size_t thin,
                      std::uint64_t seed, const GibbsOptions &options) {
  check_data(x, y);
  hyper.validate();
  if (thin < 1) throw ParameterError("run_chain: thin must be >= 1");
  if (iters <= burn_in) throw ParameterError("run_chain: iters must exceed burn_in");

  const Eigen::Index p = x.cols();
  GibbsState state;
  state.beta = Vector::Zero(p);
  state.gamma = Vector::Ones(p);
  state.beta0 = y.mean();
  const double var_y = (y.array() - y.mean()).square().sum() /
                       std::max<double>(1.0, static_cast<double>(y.size() - 1));
  state.sigma2 = var_y > 0 ? var_y : 1.0;
  state.lambda = hyper.c / hyper.d;
  if (options.clamp_lambda) state.lambda = *options.clamp_lambda;
  if (options.clamp_gamma) state.gamma = *options.clamp_gamma;

  Rng rng(seed);
  ChainOutput out;
  out.iters = iters;
  out.burn_in = burn_in;
  out.thin = thin;
  out.seed = seed;
  out.draws.reserve((iters - burn_in + thin - 1) / thin);
  for (std::size_t it = 0; it < iters; ++it) {
    state = gibbs_step(state, x, y, hyper, rng, options);
    if (it >= burn_in && (it - burn_in) % thin == 0) {
      out.draws.push_back(state);
    }
  }
  return out;
}

IntervalSummary summarize_draws(const std::vector<double> &draws, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw ParameterError("summary level must lie in (0,1)");
  }
  if (draws.size() < 2) {
    throw ParameterError("summary requires at least 2 draws");
  }
  std::vector<double> sorted = draws;
  std::sort(sorted.begin(), sorted.end());
  IntervalSummary s;
  double sum = 0.0;
  for (double v : draws) sum += v;
  s.mean = sum / static_cast<double>(draws.size());
  const double tail = (1.0 - level) / 2.0;
  s.lo = sorted_quantile(sorted, tail);
  s.hi = sorted_quantile(sorted, 1.0 - tail);
  return s;
}

PosteriorSummary posterior_summary(const ChainOutput &chain, double level) {
  if (chain.draws.size() < 2) {
    throw ParameterError("posterior_summary requires at least 2 kept draws");
  }
  const std::size_t m = chain.draws.size();
  const Eigen::Index p = chain.draws.front().beta.size();

  PosteriorSummary out;
  out.level = level;
  std::vector<double> buf(m);

  auto collect = [&](auto getter) {
    for (std::size_t i = 0; i < m; ++i) buf[i] = getter(chain.draws[i]);
    return summarize_draws(buf, level);
  };

  out.beta0 = collect([](const GibbsState &s) { return s.beta0; });
  out.sigma2 = collect([](const GibbsState &s) { return s.sigma2; });
  out.lambda = collect([](const GibbsState &s) { return s.lambda; });
  out.beta.reserve(p);
  out.gamma.reserve(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    out.beta.push_back(collect([j](const GibbsState &s) { return s.beta(j); }));
    out.gamma.push_back(collect([j](const GibbsState &s) { return s.gamma(j); }));
  }
  return out;
}

Vector acf(const Vector &series, std::size_t max_lag) {
  const std::size_t n = static_cast<std::size_t>(series.size());
  if (n <= max_lag) {
    throw ParameterError("acf: series length must exceed max_lag");
  }
  const double mean = series.mean();
  const Vector centered = series.array() - mean;
  const double denom = centered.squaredNorm();
  if (denom <= 0.0) {
    throw NumericalError("acf: series variance is zero, autocorrelation undefined");
  }
  Vector out(max_lag + 1);
  out(0) = 1.0;
  for (std::size_t k = 1; k <= max_lag; ++k) {
    double acc = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) acc += centered(t) * centered(t + k);
    out(k) = acc / denom;
  }
  return out;
}

double effective_sample_size(const Vector &series) {
  const std::size_t n = static_cast<std::size_t>(series.size());
  if (n < 3) return static_cast<double>(n);
  const std::size_t max_lag = std::min<std::size_t>(n - 1, 1000);
  const Vector rho = acf(series, max_lag);
  double acc = 0.0;
  for (std::size_t k = 1; k <= max_lag; ++k) {
    if (rho(k) <= 0.0) break;
    acc += rho(k);
  }
  return static_cast<double>(n) / (1.0 + 2.0 * acc);
}

LassoFit classical_lasso(const Matrix &x, const Vector &y, double lambda, double tol,
                         std::size_t max_iter) {
  check_data(x, y);
  if (lambda < 0.0 || !std::isfinite(lambda)) {
    throw ParameterError("classical_lasso: lambda must be >= 0");
  }
  const Eigen::Index p = x.cols();
  const Vector col_sq = x.colwise().squaredNorm();

  LassoFit fit;
  fit.beta = Vector::Zero(p);
  fit.beta0 = y.mean();
  Vector residual = y.array() - fit.beta0;

  double max_change = 0.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    max_change = 0.0;
    // Intercept is unpenalized: plain mean of the partial residual.
    {
      const double old = fit.beta0;
      fit.beta0 = (residual.array() + old).mean();
      residual.array() -= fit.beta0 - old;
      max_change = std::max(max_change, std::abs(fit.beta0 - old));
    }
    for (Eigen::Index j = 0; j < p; ++j) {
      if (col_sq(j) == 0.0) continue;
      const double rho = x.col(j).dot(residual) + col_sq(j) * fit.beta(j);
      // Soft threshold at lambda/2: the objective carries no 1/2 in front of
      // the squared loss.
      double b = 0.0;
      if (rho > lambda / 2.0) {
        b = (rho - lambda / 2.0) / col_sq(j);
      } else if (rho < -lambda / 2.0) {
        b = (rho + lambda / 2.0) / col_sq(j);
      }
      const double old = fit.beta(j);
      if (b != old) {
        residual -= (b - old) * x.col(j);
        fit.beta(j) = b;
      }
      max_change = std::max(max_change, std::abs(b - old));
    }
    fit.iterations = it + 1;
    if (max_change < tol) return fit;
  }

  // Report the KKT violation as a duality-gap surrogate.
  double kkt = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    const double g = -2.0 * x.col(j).dot(residual);
    if (fit.beta(j) != 0.0) {
      kkt = std::max(kkt, std::abs(g + lambda * (fit.beta(j) > 0 ? 1.0 : -1.0)));
    } else {
      kkt = std::max(kkt, std::max(0.0, std::abs(g) - lambda));
    }
  }
  std::ostringstream msg;
  msg << "classical_lasso: no convergence in " << max_iter
      << " iterations (KKT violation " << kkt << ")";
  throw ConvergenceError(msg.str());
}

}  // namespace mard
