#include "cqed/records.hpp"

#include "cqed/errors.hpp"

#include <boost/math/tools/minima.hpp>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cqed {

namespace {

// Minimizes f over [lo, hi] by a coarse grid followed by Brent around the best
// grid point. Returns the argmin and whether it sits on the boundary.
template <class F>
std::pair<double, bool> grid_brent(F f, double lo, double hi, int grid = 80) {
  int best = 0;
  double fbest = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= grid; ++i) {
    const double x = lo + (hi - lo) * i / grid;
    const double v = f(x);
    if (v < fbest) {
      fbest = v;
      best = i;
    }
  }
  const double step = (hi - lo) / grid;
  const double a = std::max(lo, lo + (best - 1) * step);
  const double b = std::min(hi, lo + (best + 1) * step);
  boost::uintmax_t iters = 200;
  const auto [x, fx] = boost::math::tools::brent_find_minima(f, a, b, 40, iters);
  (void)fx;
  const bool edge = (x - lo) < 1e-6 * (hi - lo) || (hi - x) < 1e-6 * (hi - lo);
  return {x, edge};
}

double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

} // namespace

LifetimeFit fit_lifetime(const SurvivalData &d) {
  const std::size_t m = d.delays.size();
  if (m < 3)
    throw DomainError("lifetime fit needs at least three delays");
  if (d.successes.size() != m || d.trials.size() != m)
    throw DomainError("delays, successes and trials differ in length");
  for (std::size_t i = 0; i < m; ++i) {
    if (d.delays[i] < 0.0)
      throw DomainError("delays must be non-negative");
    if (!(d.trials[i] >= 1.0))
      throw DomainError("every delay needs at least one trial");
    if (d.successes[i] < 0.0 || d.successes[i] > d.trials[i])
      throw DomainError("successes must lie in [0, trials]");
  }
  const double ktot = std::accumulate(d.successes.begin(), d.successes.end(), 0.0);
  if (ktot == 0.0)
    throw FitError("all successes are zero; lifetime not identifiable");
  const double tmax = *std::max_element(d.delays.begin(), d.delays.end());
  if (!(tmax > 0.0))
    throw DomainError("at least one delay must be positive");

  std::vector<double> u(m);
  for (std::size_t i = 0; i < m; ++i)
    u[i] = d.delays[i] / tmax;
  const double umin = *std::min_element(u.begin(), u.end());

  auto loglik = [&](double p0, double theta) {
    double l = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double p = p0 * std::exp(-u[i] / theta);
      l += xlogy(d.successes[i], p) + xlogy(d.trials[i] - d.successes[i], 1.0 - p);
    }
    return l;
  };
  // Profiled amplitude: the score in p0 is monotone decreasing.
  auto best_p0 = [&](double theta) {
    const double hi = std::exp(umin / theta) * (1.0 - 1e-15);
    auto score = [&](double p0) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double w = std::exp(-u[i] / theta);
        s += d.successes[i] / p0 - (d.trials[i] - d.successes[i]) * w / (1.0 - p0 * w);
      }
      return s;
    };
    if (score(hi) >= 0.0)
      return hi;
    double lo = 1e-300, up = hi;
    for (int it = 0; it < 200 && up - lo > 1e-16 * up; ++it) {
      const double mid = 0.5 * (lo + up);
      (score(mid) > 0.0 ? lo : up) = mid;
    }
    return 0.5 * (lo + up);
  };
  auto neg = [&](double log_theta) {
    const double th = std::exp(log_theta);
    return -loglik(best_p0(th), th);
  };
  const auto [lt, edge] = grid_brent(neg, std::log(1e-4), std::log(1e4));
  const double theta = std::exp(lt);

  LifetimeFit fit;
  const double ntot = std::accumulate(d.trials.begin(), d.trials.end(), 0.0);
  if (edge && lt > 0.0) {
    // No measurable decay: the constant model is as good as any exponential.
    fit.tau = fit.tau_error = std::numeric_limits<double>::infinity();
    fit.p0 = ktot / ntot;
    fit.p0_error = std::sqrt(fit.p0 * (1.0 - fit.p0) / ntot);
  } else {
    fit.p0 = best_p0(theta);
    fit.tau = theta * tmax;
    // Expected Fisher information in (p0, theta).
    Eigen::Matrix2d info = Eigen::Matrix2d::Zero();
    for (std::size_t i = 0; i < m; ++i) {
      const double w = std::exp(-u[i] / theta);
      const double p = fit.p0 * w;
      const Eigen::Vector2d g(w, p * u[i] / (theta * theta));
      info += d.trials[i] / (p * (1.0 - p)) * g * g.transpose();
    }
    const Eigen::Matrix2d cov = info.inverse();
    fit.p0_error = std::sqrt(cov(0, 0));
    fit.tau_error = std::sqrt(cov(1, 1)) * tmax;
  }
  for (std::size_t i = 0; i < m; ++i) {
    const double p = std::isfinite(fit.tau) ? fit.p0 * std::exp(-d.delays[i] / fit.tau) : fit.p0;
    const double k = d.successes[i], n = d.trials[i];
    fit.deviance += 2.0 * (xlogy(k, k / (n * p)) + xlogy(n - k, (n - k) / (n * (1.0 - p))));
  }
  fit.dof = static_cast<int>(m) - 2;
  return fit;
}

RepumpFit fit_repump(const std::vector<double> &t, const std::vector<double> &f,
                     const std::vector<double> &sigma) {
  const std::size_t m = t.size();
  if (m < 4)
    throw DomainError("repump fit needs at least four points");
  if (f.size() != m || (!sigma.empty() && sigma.size() != m))
    throw DomainError("time, value and sigma arrays differ in length");
  std::vector<double> w(m, 1.0);
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    if (!(sigma[i] > 0.0))
      throw DomainError("sigma must be positive");
    w[i] = 1.0 / (sigma[i] * sigma[i]);
  }
  const double tmax = *std::max_element(t.begin(), t.end());
  if (!(tmax > 0.0))
    throw DomainError("at least one time must be positive");

  auto amplitude = [&](double tau) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double g = 1.0 - std::exp(-t[i] / tau);
      num += w[i] * f[i] * g;
      den += w[i] * g * g;
    }
    return den > 0.0 ? num / den : 0.0;
  };
  auto chi2 = [&](double tau) {
    const double a = amplitude(tau);
    double c = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double r = f[i] - a * (1.0 - std::exp(-t[i] / tau));
      c += w[i] * r * r;
    }
    return c;
  };
  auto residuals = [&](double tau) {
    const double a = amplitude(tau);
    std::vector<double> r(m);
    for (std::size_t i = 0; i < m; ++i)
      r[i] = f[i] - a * (1.0 - std::exp(-t[i] / tau));
    return r;
  };
  const auto [lt, edge] =
      grid_brent([&](double x) { return chi2(std::exp(x) * tmax); }, std::log(1e-3), std::log(1e3));
  const double tau = std::exp(lt) * tmax;
  if (edge)
    throw FitError("repump fit did not converge: tau runs to the search boundary", residuals(tau));

  RepumpFit fit;
  fit.tau = tau;
  fit.f_eq = amplitude(tau);
  fit.chi2 = chi2(tau);
  fit.dof = static_cast<int>(m) - 2;
  Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < m; ++i) {
    const double e = std::exp(-t[i] / tau);
    const Eigen::Vector2d j(1.0 - e, -fit.f_eq * e * t[i] / (tau * tau));
    jtj += w[i] * j * j.transpose();
  }
  Eigen::Matrix2d cov = jtj.inverse();
  if (sigma.empty())
    cov *= fit.chi2 / std::max(1, fit.dof);
  if (!(cov(0, 0) >= 0.0 && cov(1, 1) >= 0.0) || !std::isfinite(cov(1, 1)))
    throw FitError("repump fit covariance is singular", residuals(tau));
  fit.f_eq_error = std::sqrt(cov(0, 0));
  fit.tau_error = std::sqrt(cov(1, 1));
  return fit;
}

} // namespace cqed
