#include "cqed/pumping.hpp"

#include "cqed/errors.hpp"
#include "cqed/random.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace cqed {

double RamanHeatingEstimate::heating_time() const {
  return rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
}

RamanHeatingEstimate raman_heating_two_state(double gamma_s) {
  if (!(gamma_s >= 0.0))
    throw DomainError("scattering rate must be non-negative");
  RamanHeatingEstimate e;
  e.rate = kTwoStateHeatingFactor * gamma_s;
  e.label = "two-state upper limit";
  return e;
}

namespace {

std::array<double, kGroundSublevels> depths(const ScatteringRates &rates) {
  std::array<double, kGroundSublevels> u{};
  for (int k = 0; k < kGroundSublevels; ++k) {
    u[k] = -rates.shift_hz[k];
    if (!(u[k] > 0.0))
      throw DomainError("sublevel " + std::to_string(k) + " is not trapped");
  }
  return u;
}

} // namespace

double raman_heating_growth_rate(const ScatteringRates &rates) {
  validate_rate_matrix(rates.rate);
  const auto u = depths(rates);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(kGroundSublevels, kGroundSublevels);
  for (int i = 0; i < kGroundSublevels; ++i)
    for (int j = 0; j < kGroundSublevels; ++j) {
      if (i == j)
        continue;
      M(j, i) = rates.rate(j, i) * 0.5 * (1.0 + u[j] / u[i]);
      M(i, i) -= rates.rate(j, i);
    }
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
  if (es.info() != Eigen::Success)
    throw NumericalError("transfer-matrix eigenvalues did not converge", 0.0);
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < kGroundSublevels; ++k)
    best = std::max(best, es.eigenvalues()[k].real());
  return best;
}

RamanHeatingEstimate raman_heating_multilevel(const ScatteringRates &rates,
                                              const MultilevelHeatingConfig &cfg) {
  validate_rate_matrix(rates.rate);
  if (cfg.trajectories < 2)
    throw DomainError("need at least two trajectories");
  if (!(cfg.duration > 0.0))
    throw DomainError("duration must be positive");
  const auto u = depths(rates);

  // Per-sublevel exit rate, jump distribution and energy factor.
  std::array<double, kGroundSublevels> out_rate{};
  std::array<std::array<double, kGroundSublevels>, kGroundSublevels> cumulative{};
  for (int i = 0; i < kGroundSublevels; ++i) {
    double acc = 0.0;
    for (int j = 0; j < kGroundSublevels; ++j) {
      if (j != i)
        acc += rates.rate(j, i);
      cumulative[i][j] = acc;
    }
    out_rate[i] = acc;
  }

  constexpr int kTimes = 21;
  std::array<double, kTimes> times{};
  for (int k = 0; k < kTimes; ++k)
    times[k] = cfg.duration * k / (kTimes - 1);

  using Row = std::array<double, kTimes>;
  const auto rows = run_ensemble(cfg.trajectories, cfg.execution, [&](std::size_t n) {
    Rng rng = make_rng(cfg.seed, n, 0x52414d);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    int state = static_cast<int>(uni(rng) * kGroundSublevels) % kGroundSublevels;
    double energy = 1.0, t = 0.0;
    Row row{};
    int k = 0;
    while (k < kTimes) {
      const double wait = out_rate[state] > 0.0
                              ? -std::log1p(-uni(rng)) / out_rate[state]
                              : std::numeric_limits<double>::infinity();
      while (k < kTimes && times[k] < t + wait)
        row[k++] = energy;
      if (k == kTimes)
        break;
      t += wait;
      const double pick = uni(rng) * out_rate[state];
      const auto &cum = cumulative[state];
      int next = static_cast<int>(std::upper_bound(cum.begin(), cum.end(), pick) - cum.begin());
      next = std::min(next, kGroundSublevels - 1);
      if (next == state) // skip zero-width bins from the excluded diagonal
        next = (next + 1) % kGroundSublevels;
      energy *= 0.5 * (1.0 + u[next] / u[state]);
      state = next;
    }
    return row;
  });

  // Slope of log mean energy over the second half, jackknifed in groups.
  auto slope = [&](std::size_t skip_begin, std::size_t skip_end) {
    Row mean{};
    std::size_t count = 0;
    for (std::size_t n = 0; n < rows.size(); ++n) {
      if (n >= skip_begin && n < skip_end)
        continue;
      for (int k = 0; k < kTimes; ++k)
        mean[k] += rows[n][k];
      ++count;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (int k = kTimes / 2; k < kTimes; ++k) {
      const double y = std::log(mean[k] / static_cast<double>(count));
      sx += times[k];
      sy += y;
      sxx += times[k] * times[k];
      sxy += times[k] * y;
      ++m;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
  };

  RamanHeatingEstimate e;
  e.label = "multilevel Monte Carlo";
  e.rate = slope(0, 0);
  const std::size_t groups = std::min<std::size_t>(20, rows.size());
  std::vector<double> jk;
  for (std::size_t gi = 0; gi < groups; ++gi) {
    const std::size_t b = rows.size() * gi / groups, en = rows.size() * (gi + 1) / groups;
    jk.push_back(slope(b, en));
  }
  double mean = 0.0;
  for (double v : jk)
    mean += v;
  mean /= static_cast<double>(jk.size());
  double var = 0.0;
  for (double v : jk)
    var += (v - mean) * (v - mean);
  e.error = std::sqrt(var * (jk.size() - 1.0) / jk.size());
  if (cfg.trajectories < kMinRamanEnsemble) {
    e.error *= 2.0;
    e.warning = "ensemble of " + std::to_string(cfg.trajectories) +
                " is below " + std::to_string(kMinRamanEnsemble) +
                "; error bar doubled";
  }
  return e;
}

} // namespace cqed
