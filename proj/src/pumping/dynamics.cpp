#include "cqed/pumping.hpp"

#include "cqed/errors.hpp"
#include "cqed/records.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace cqed {

double PumpingState::f4() const { return p.tail(9).sum(); }
double PumpingState::total() const { return p.sum(); }

void PumpingState::validate() const {
  for (int k = 0; k < kGroundSublevels; ++k)
    if (!(p[k] >= -kNormalizationTolerance && p[k] <= 1.0 + kNormalizationTolerance))
      throw DomainError("population of " + ground_sublevels()[k].label() +
                        " outside [0, 1]");
  if (std::abs(total() - 1.0) > kNormalizationTolerance) {
    std::ostringstream msg;
    msg << "populations sum to " << total();
    throw DomainError(msg.str());
  }
}

PumpingState PumpingState::unpolarized(int F) {
  if (F != 3 && F != 4)
    throw DomainError("ground manifold must be F=3 or F=4");
  PumpingState s;
  for (int m = -F; m <= F; ++m)
    s.p[ground_index(F, m)] = 1.0 / (2 * F + 1);
  return s;
}

PumpingState PumpingState::sublevel(int F, int mF) {
  PumpingState s;
  s.p[ground_index(F, mF)] = 1.0;
  return s;
}

void validate_rate_matrix(const RateMatrix &rate) {
  for (int i = 0; i < kGroundSublevels; ++i)
    for (int j = 0; j < kGroundSublevels; ++j) {
      if (!std::isfinite(rate(j, i)))
        throw DomainError("rate matrix has a non-finite entry");
      if (i != j && rate(j, i) < 0.0) {
        std::ostringstream msg;
        msg << "negative rate " << rate(j, i) << " from "
            << ground_sublevels()[i].label() << " to " << ground_sublevels()[j].label();
        throw DomainError(msg.str());
      }
    }
}

namespace {

RateMatrix generator_of(const RateMatrix &rate) {
  RateMatrix g = rate;
  for (int i = 0; i < kGroundSublevels; ++i) {
    g(i, i) = 0.0;
    g(i, i) = -g.col(i).sum();
  }
  return g;
}

using State = std::array<double, kGroundSublevels>;

} // namespace

PumpingState evolve_exact(const RateMatrix &rate, const PumpingState &p0, double t) {
  validate_rate_matrix(rate);
  const Eigen::MatrixXd G = generator_of(rate) * t;
  const Eigen::MatrixXd E = G.exp();
  PumpingState out;
  out.p = E * p0.p;
  return out;
}

double RepumpSeries::two_level_f4(double t) const {
  if (two_level_tau <= 0.0 || !std::isfinite(two_level_tau))
    return f4.empty() ? 0.0 : f4.front();
  return two_level_f_eq * (1.0 - std::exp(-t / two_level_tau));
}

RepumpSeries repump_dynamics(const RateMatrix &rate, const PumpingState &initial,
                             double duration, int samples, EvolutionMethod method) {
  validate_rate_matrix(rate);
  initial.validate();
  if (!(duration > 0.0))
    throw DomainError("duration must be positive");
  if (samples < 2)
    throw DomainError("need at least two samples");

  const RateMatrix G = generator_of(rate);
  RepumpSeries out;
  for (int k = 0; k < samples; ++k)
    out.t.push_back(duration * k / (samples - 1));

  auto record = [&](const PumpingState &s) {
    out.states.push_back(s);
    out.f4.push_back(s.f4());
    out.total.push_back(s.total());
    out.max_normalization_error =
        std::max(out.max_normalization_error, std::abs(s.total() - 1.0));
  };

  if (method == EvolutionMethod::MatrixExponential) {
    for (double t : out.t)
      record(evolve_exact(rate, initial, t));
  } else {
    namespace ode = boost::numeric::odeint;
    auto system = [&G](const State &x, State &dxdt, double) {
      Eigen::Map<const Eigen::Matrix<double, kGroundSublevels, 1>> xv(x.data());
      Eigen::Map<Eigen::Matrix<double, kGroundSublevels, 1>> dv(dxdt.data());
      dv = G * xv;
    };
    auto stepper = ode::make_controlled(1e-14, 1e-13, ode::runge_kutta_dopri5<State>());
    State x;
    std::copy(initial.p.data(), initial.p.data() + kGroundSublevels, x.begin());
    double t = 0.0;
    const double scale = std::max(1.0, G.diagonal().cwiseAbs().maxCoeff());
    double dt = 1e-3 / scale;
    for (double target : out.t) {
      while (t < target) {
        double h = std::min(dt, target - t);
        const bool clipped = h < dt;
        if (stepper.try_step(system, x, t, h) == ode::success) {
          double sum = 0.0;
          for (double v : x)
            sum += v;
          out.max_normalization_error =
              std::max(out.max_normalization_error, std::abs(sum - 1.0));
          if (!clipped)
            dt = h;
        } else {
          dt = h;
        }
        if (target - t < 1e-15 * std::max(1.0, target))
          t = target;
      }
      PumpingState s;
      std::copy(x.begin(), x.end(), s.p.data());
      record(s);
    }
  }

  // Reduced two-manifold model with rates averaged over the current manifold.
  const double r34 = rate.block(7, 0, 9, 7).sum() / 7.0;
  const double r43 = rate.block(0, 7, 7, 9).sum() / 9.0;
  if (r34 + r43 > 0.0) {
    out.two_level_tau = 1.0 / (r34 + r43);
    out.two_level_f_eq = r34 / (r34 + r43);
  }

  const auto [lo, hi] = std::minmax_element(out.f4.begin(), out.f4.end());
  if (*hi - *lo > 1e-9) {
    try {
      const RepumpFit fit = fit_repump(out.t, out.f4);
      out.fitted_tau = fit.tau;
      out.fitted_tau_error = fit.tau_error;
      out.fitted_f_eq = fit.f_eq;
    } catch (const FitError &) {
      // series not of the saturating form (e.g. decaying from F=4); leave 0
    }
  }
  return out;
}

RepumpSeries repump_dynamics(const ScatteringRates &rates, const PumpingState &initial,
                             double duration, int samples, EvolutionMethod method) {
  return repump_dynamics(rates.rate, initial, duration, samples, method);
}

} // namespace cqed
