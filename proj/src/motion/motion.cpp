#include "cqed/motion.hpp"

#include "cqed/constants.hpp"
#include "cqed/errors.hpp"

#include <boost/random/normal_distribution.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace cqed {

namespace cst = constants;

double CaptureModel::max_removed_mk(double pulse_s) const {
  return saturation_energy_mk * (1.0 - std::exp(-pulse_s / saturation_time_s));
}

void LoadingConfig::validate() const {
  if (drop_height_m < 0.0)
    throw DomainError("drop height must be non-negative");
  if (!(arrival_window_s > 0.0) || !(cooling_pulse_s > 0.0))
    throw DomainError("durations must be positive");
  if (mean_atoms < 0.0)
    throw DomainError("mean atom number must be non-negative");
  if (!(mode_waist_m > 0.0))
    throw DomainError("mode waist must be positive");
  if (!(capture.saturation_time_s > 0.0) || capture.saturation_energy_mk < 0.0)
    throw DomainError("capture model parameters out of range");
}

bool ArrivalKinematics::bounded_transit() const { return std::isfinite(transit_time); }
double ArrivalKinematics::kinetic_mk() const { return kinetic_energy / cst::k_B * 1e3; }

ArrivalKinematics free_fall_arrival(const LoadingConfig &config, double mass) {
  config.validate();
  ArrivalKinematics k;
  k.velocity = std::sqrt(2.0 * cst::g_n * config.drop_height_m);
  k.kinetic_energy = 0.5 * mass * k.velocity * k.velocity;
  k.transit_time = k.velocity > 0.0 ? 2.0 * config.mode_waist_m / k.velocity
                                    : std::numeric_limits<double>::infinity();
  return k;
}

NoiseSpectrum NoiseSpectrum::white(double level) {
  if (level < 0.0)
    throw DomainError("noise level must be non-negative");
  return {Kind::White, level, 0.0};
}

NoiseSpectrum NoiseSpectrum::lorentzian(double level, double corner_hz) {
  if (level < 0.0 || !(corner_hz > 0.0))
    throw DomainError("Lorentzian noise needs level >= 0 and corner > 0");
  return {Kind::Lorentzian, level, corner_hz};
}

double NoiseSpectrum::psd(double f) const {
  switch (kind) {
  case Kind::None:
    return 0.0;
  case Kind::White:
    return level;
  case Kind::Lorentzian:
    return level / (1.0 + (f / corner_hz) * (f / corner_hz));
  }
  return 0.0;
}

NoiseSpectrum NoiseSpectrum::white_for_time(double tau_s, double nu_hz) {
  return white(1.0 / (cst::pi * cst::pi * nu_hz * nu_hz * tau_s));
}

double parametric_heating_rate(const std::function<double(double)> &psd, double nu) {
  const double s = psd(2.0 * nu);
  if (s < 0.0)
    throw DomainError("noise PSD must be non-negative");
  return cst::pi * cst::pi * nu * nu * s;
}

double parametric_heating_rate(const NoiseSpectrum &spectrum, double nu) {
  return parametric_heating_rate([&](double f) { return spectrum.psd(f); }, nu);
}

double HeatingBudget::parametric_rate(double nu) const {
  return parametric_heating_rate(intensity_noise, nu);
}

double HeatingBudget::tau_p(double nu) const {
  const double r = parametric_rate(nu);
  return r > 0.0 ? 1.0 / r : std::numeric_limits<double>::infinity();
}

void HeatingBudget::validate() const {
  if (recoil_k_per_s < 0.0 || raman_rate < 0.0 || background_rate < 0.0 ||
      intensity_noise.level < 0.0)
    throw DomainError("heating rates must be non-negative");
  if (!(raman_jump_fraction > 0.0))
    throw DomainError("raman_jump_fraction must be positive");
}

double recoil_energy(double wavelength_nm, double mass) {
  const double k = cst::two_pi / (wavelength_nm * 1e-9);
  return cst::hbar * cst::hbar * k * k / (2.0 * mass);
}

double recoil_scatter_rate(double recoil_k_per_s, double wavelength_nm, double mass) {
  return recoil_k_per_s * cst::k_B / (2.0 * recoil_energy(wavelength_nm, mass));
}

double total_energy(const TrapContext &trap, const PhaseState &s) {
  return 0.5 * trap.mass_kg * s.v.squaredNorm() + fort_potential(trap.fort, s.r);
}

namespace {

constexpr double kForestRuthTheta = 1.3512071919596576; // 1 / (2 - 2^(1/3))

struct Kernel {
  double k, inv_w2, u_over_m;

  // Acceleration without the noise factor.
  void accel(const double *r, double *a) const {
    const double rho2 = r[1] * r[1] + r[2] * r[2];
    const double env = rho2 == 0.0 ? 1.0 : std::exp(-2.0 * rho2 * inv_w2);
    const double s2 = std::sin(2.0 * k * r[0]);
    a[0] = -u_over_m * env * k * s2;
    if (rho2 == 0.0) {
      a[1] = a[2] = 0.0;
      return;
    }
    const double c = std::cos(k * r[0]);
    const double radial = -u_over_m * c * c * env * 4.0 * inv_w2;
    a[1] = radial * r[1];
    a[2] = radial * r[2];
  }
};

Eigen::Vector3d isotropic(Rng &rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Vector3d d(n(rng), n(rng), n(rng));
  return d / d.norm();
}

} // namespace

Trajectory integrate_trajectory(const TrapContext &trap, const PhaseState &initial,
                                const HeatingBudget &heating, double duration,
                                const StepControl &step, Rng &rng) {
  heating.validate();
  const FortField &fort = trap.fort;
  if (!(trap.mass_kg > 0.0) || !(fort.depth_j >= 0.0))
    throw DomainError("trap needs positive mass and non-negative depth");
  if (!(duration >= 0.0))
    throw DomainError("duration must be non-negative");
  const double nu_ax = fort.depth_j > 0.0 ? trap_frequencies(fort, trap.mass_kg).axial_hz : 0.0;
  if (!(step.dt > 0.0))
    throw ConfigError("time step must be positive");
  if (nu_ax > 0.0 && step.dt > StepControl::max_step(nu_ax) * (1.0 + 1e-12))
    throw ConfigError("time step " + std::to_string(step.dt) + " s exceeds 1/(50 nu_axial) = " +
                      std::to_string(StepControl::max_step(nu_ax)) + " s");

  const double m = trap.mass_kg;
  const double h = step.dt;
  const Kernel K{fort.wavenumber, 1.0 / (fort.waist_m * fort.waist_m), fort.depth_j / m};

  // Multiplicative noise on U0, piecewise constant over each step. A white
  // one-sided PSD S at the step rate has per-step variance S / (2 dt).
  const auto &noise = heating.intensity_noise;
  double sigma = 0.0, ar = 0.0;
  if (noise.kind == NoiseSpectrum::Kind::White) {
    sigma = std::sqrt(noise.level / (2.0 * h));
  } else if (noise.kind == NoiseSpectrum::Kind::Lorentzian) {
    // AR(1) with correlation time tc = 1 / (2 pi f_c): S(0) = 4 var tc.
    const double tc = 1.0 / (cst::two_pi * noise.corner_hz);
    ar = std::exp(-h / tc);
    sigma = std::sqrt(noise.level / (4.0 * tc));
  }
  const bool noisy = sigma > 0.0 && step.noise_sign != 0.0;
  boost::random::normal_distribution<double> gauss(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double ar_innov = std::sqrt(1.0 - ar * ar);
  double eps = noisy && ar > 0.0 ? sigma * gauss(rng) : 0.0;

  const double e_r = recoil_energy(fort.wavelength_nm, m);
  const double recoil_rate = recoil_scatter_rate(heating.recoil_k_per_s, fort.wavelength_nm, m);
  const double v_r = std::sqrt(2.0 * e_r / m);
  const double raman_event_rate = heating.raman_rate / heating.raman_jump_fraction;
  const double inf = std::numeric_limits<double>::infinity();
  double next_recoil = recoil_rate > 0.0 ? expo(rng) / recoil_rate : inf;
  double next_raman = raman_event_rate > 0.0 ? expo(rng) / raman_event_rate : inf;
  const double t_bg = heating.background_rate > 0.0 ? expo(rng) / heating.background_rate : inf;
  bool bg_applied = false;

  const double esc_rho2 = std::pow(step.escape_radius_factor * fort.waist_m, 2);
  const double half_l = fort.mirror_separation_m > 0.0 ? 0.5 * fort.mirror_separation_m : inf;

  Trajectory tr;
  double r[3] = {initial.r.x(), initial.r.y(), initial.r.z()};
  double v[3] = {initial.v.x(), initial.v.y(), initial.v.z()};
  auto state = [&] {
    PhaseState s;
    s.r = {r[0], r[1], r[2]};
    s.v = {v[0], v[1], v[2]};
    return s;
  };
  double scale = 1.0;   // 1 + delta of the current step
  double control = 0.0; // sum of delta_n * predicted dU_n, zero mean
  auto record = [&](double t) {
    const PhaseState s = state();
    tr.t.push_back(t);
    tr.samples.push_back(s);
    tr.energy.push_back(total_energy(trap, s));
    tr.hamiltonian.push_back(tr.energy.back() + (scale - 1.0) * fort_potential(fort, s.r));
    tr.control.push_back(control);
  };
  record(0.0);

  const std::size_t n_steps = static_cast<std::size_t>(std::ceil(duration / h - 1e-9));
  const std::size_t sample_every =
      step.sample_interval > 0.0
          ? std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(step.sample_interval / h)))
          : 0;
  double a[3];
  K.accel(r, a);
  double t = 0.0;
  for (std::size_t n = 0; n < n_steps; ++n) {
    const double dt = std::min(h, duration - t);
    if (noisy) {
      eps = ar > 0.0 ? ar * eps + ar_innov * sigma * gauss(rng) : sigma * gauss(rng);
      scale = 1.0 + step.noise_sign * eps;
      // Potential change predicted from the pre-step state; independent of
      // this step's delta, so the product has zero mean.
      double du = 0.0;
      for (int i = 0; i < 3; ++i)
        du -= m * a[i] * (v[i] * dt + 0.5 * a[i] * dt * dt);
      control += (scale - 1.0) * du;
    }
    if (step.scheme == Integrator::VelocityVerlet) {
      const double hk = 0.5 * dt * scale;
      for (int i = 0; i < 3; ++i) {
        v[i] += hk * a[i];
        r[i] += dt * v[i];
      }
      K.accel(r, a);
      for (int i = 0; i < 3; ++i)
        v[i] += hk * a[i];
    } else {
      const double th = kForestRuthTheta;
      const double c1 = 0.5 * th * dt, c2 = 0.5 * (1.0 - th) * dt;
      const double d1 = th * dt * scale, d2 = (1.0 - 2.0 * th) * dt * scale;
      for (int i = 0; i < 3; ++i) r[i] += c1 * v[i];
      K.accel(r, a);
      for (int i = 0; i < 3; ++i) { v[i] += d1 * a[i]; r[i] += c2 * v[i]; }
      K.accel(r, a);
      for (int i = 0; i < 3; ++i) { v[i] += d2 * a[i]; r[i] += c2 * v[i]; }
      K.accel(r, a);
      for (int i = 0; i < 3; ++i) { v[i] += d1 * a[i]; r[i] += c1 * v[i]; }
      K.accel(r, a);
    }
    t += dt;
    ++tr.steps;

    while (t >= next_recoil) {
      const double sgn = unif(rng) < 0.5 ? -1.0 : 1.0;
      const Eigen::Vector3d e = isotropic(rng);
      v[0] += v_r * (sgn + e.x());
      v[1] += v_r * e.y();
      v[2] += v_r * e.z();
      ++tr.recoil_events;
      next_recoil += expo(rng) / recoil_rate;
    }
    while (t >= next_raman) {
      const double e_osc = std::max(0.0, total_energy(trap, state()) + fort.depth_j);
      const double dv = std::sqrt(2.0 * heating.raman_jump_fraction * e_osc / m);
      const Eigen::Vector3d e = isotropic(rng);
      for (int i = 0; i < 3; ++i)
        v[i] += dv * e[i];
      ++tr.raman_events;
      next_raman += expo(rng) / raman_event_rate;
    }
    if (!bg_applied && t >= t_bg) {
      const Eigen::Vector3d e = isotropic(rng);
      for (int i = 0; i < 3; ++i)
        v[i] += step.background_kick_velocity * e[i];
      bg_applied = true;
      tr.background_time = t_bg;
    }

    if (sample_every && (n + 1) % sample_every == 0)
      record(t);

    const double rho2 = r[1] * r[1] + r[2] * r[2];
    if ((rho2 > esc_rho2 || std::abs(r[0]) > half_l) && !tr.escape_time) {
      if (total_energy(trap, state()) > 0.0) {
        tr.escape_time = t;
        tr.bound = false;
        if (step.stop_on_escape)
          break;
      }
    }
  }
  tr.final_state = state();
  tr.final_energy = total_energy(trap, tr.final_state);
  if (tr.t.back() != t)
    record(t);
  return tr;
}

double measure_oscillation_frequency(const TrapContext &trap, const PhaseState &initial,
                                     int axis, double duration, const StepControl &step) {
  if (axis < 0 || axis > 2)
    throw DomainError("axis must be 0, 1 or 2");
  StepControl sc = step;
  sc.sample_interval = step.dt;
  sc.stop_on_escape = false;
  Rng rng(0);
  const Trajectory tr = integrate_trajectory(trap, initial, HeatingBudget{}, duration, sc, rng);
  // Upward zero crossings with linear interpolation.
  std::vector<double> crossings;
  for (std::size_t i = 1; i < tr.samples.size(); ++i) {
    const double a = tr.samples[i - 1].r[axis], b = tr.samples[i].r[axis];
    if (a < 0.0 && b >= 0.0)
      crossings.push_back(tr.t[i - 1] + (tr.t[i] - tr.t[i - 1]) * (-a) / (b - a));
  }
  if (crossings.size() < 2)
    throw NumericalError("fewer than two zero crossings; lengthen the run", 0.0);
  return static_cast<double>(crossings.size() - 1) / (crossings.back() - crossings.front());
}

namespace {

// Least-squares slope of log(y) versus t, with y > 0.
double log_slope(const std::vector<double> &t, const std::vector<double> &y) {
  const std::size_t n = t.size();
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ly = std::log(y[i]);
    st += t[i];
    sy += ly;
    stt += t[i] * t[i];
    sty += t[i] * ly;
  }
  return (n * sty - st * sy) / (n * stt - st * st);
}

} // namespace

EnsembleEnergy heating_ensemble(const TrapContext &trap, const HeatingBudget &heating,
                                const HeatingEnsembleConfig &cfg) {
  if (cfg.trajectories < 2 || cfg.samples < 2)
    throw DomainError("heating ensemble needs at least two trajectories and samples");
  if (cfg.antithetic && cfg.trajectories % 2 != 0)
    throw DomainError("antithetic ensembles need an even trajectory count");
  const FortField &f = trap.fort;
  const double x0 = std::acos(std::sqrt(1.0 - cfg.initial_energy_fraction)) / f.wavenumber;
  PhaseState init;
  init.r.x() = x0;

  StepControl sc = cfg.step;
  sc.sample_interval = cfg.duration / static_cast<double>(cfg.samples - 1);
  sc.stop_on_escape = false;

  auto one = [&](std::size_t i) {
    const std::size_t stream = cfg.antithetic ? i / 2 : i;
    StepControl s = sc;
    if (cfg.antithetic && i % 2 == 1)
      s.noise_sign = -sc.noise_sign;
    Rng rng = make_rng(cfg.seed, stream);
    const Trajectory tr = integrate_trajectory(trap, init, heating, cfg.duration, s, rng);
    // Row 0: raw oscillation energy; row 1: with the control variate.
    std::array<std::vector<double>, 2> e{std::vector<double>(cfg.samples, 0.0),
                                         std::vector<double>(cfg.samples, 0.0)};
    for (std::size_t k = 0; k < cfg.samples && k < tr.energy.size(); ++k) {
      e[0][k] = tr.energy[k] + f.depth_j;
      e[1][k] = e[0][k] + (cfg.control_variate ? tr.control[k] : 0.0);
    }
    return e;
  };
  const auto all = run_ensemble(cfg.trajectories, cfg.execution, one);

  EnsembleEnergy out;
  out.t.resize(cfg.samples);
  out.mean_energy.assign(cfg.samples, 0.0);
  out.raw_mean_energy.assign(cfg.samples, 0.0);
  for (std::size_t k = 0; k < cfg.samples; ++k) {
    out.t[k] = sc.sample_interval * static_cast<double>(k);
    for (const auto &e : all) {
      out.raw_mean_energy[k] += e[0][k];
      out.mean_energy[k] += e[1][k];
    }
    out.raw_mean_energy[k] /= static_cast<double>(all.size());
    out.mean_energy[k] /= static_cast<double>(all.size());
  }
  out.raw_fitted_rate = log_slope(out.t, out.raw_mean_energy);
  out.fitted_rate = log_slope(out.t, out.mean_energy);

  // Delete-a-group jackknife over independent units (pairs when antithetic).
  const std::size_t unit = cfg.antithetic ? 2 : 1;
  const std::size_t units = all.size() / unit;
  const std::size_t groups = std::min<std::size_t>(20, units);
  std::vector<double> rates;
  for (std::size_t g = 0; g < groups; ++g) {
    std::vector<double> mean(cfg.samples, 0.0);
    std::size_t count = 0;
    for (std::size_t u = 0; u < units; ++u) {
      if (u % groups == g)
        continue;
      for (std::size_t j = 0; j < unit; ++j) {
        for (std::size_t k = 0; k < cfg.samples; ++k)
          mean[k] += all[u * unit + j][1][k];
        ++count;
      }
    }
    for (auto &x : mean)
      x /= static_cast<double>(count);
    rates.push_back(log_slope(out.t, mean));
  }
  const double rbar = std::accumulate(rates.begin(), rates.end(), 0.0) / groups;
  double ss = 0.0;
  for (double r : rates)
    ss += (r - rbar) * (r - rbar);
  out.fitted_rate_error = std::sqrt((groups - 1.0) / groups * ss);
  return out;
}

RecoilEnsembleResult recoil_ensemble(const TrapContext &trap, double scatter_rate,
                                     double duration, std::size_t trajectories,
                                     std::uint64_t seed, Execution exec) {
  if (trajectories < 2)
    throw DomainError("need at least two trajectories");
  const FortField &f = trap.fort;
  HeatingBudget hb;
  const double e_r = recoil_energy(f.wavelength_nm, trap.mass_kg);
  hb.recoil_k_per_s = 2.0 * e_r * scatter_rate / cst::k_B;
  StepControl sc;
  sc.dt = StepControl::max_step(trap_frequencies(f, trap.mass_kg).axial_hz);
  sc.stop_on_escape = false;
  const auto gains = run_ensemble(trajectories, exec, [&](std::size_t i) {
    Rng rng = make_rng(seed, i);
    const Trajectory tr = integrate_trajectory(trap, PhaseState{}, hb, duration, sc, rng);
    return tr.final_energy + f.depth_j;
  });
  const double n = static_cast<double>(trajectories);
  const double mean = std::accumulate(gains.begin(), gains.end(), 0.0) / n;
  double ss = 0.0;
  for (double g : gains)
    ss += (g - mean) * (g - mean);
  RecoilEnsembleResult r;
  r.heating_k_per_s = mean / duration / cst::k_B;
  r.heating_error_k_per_s = std::sqrt(ss / (n - 1.0) / n) / duration / cst::k_B;
  r.expected_k_per_s = hb.recoil_k_per_s;
  return r;
}

std::vector<double> escape_times(const TrapContext &trap, const HeatingBudget &heating,
                                 std::size_t trajectories, double max_time,
                                 std::uint64_t seed, Execution exec) {
  StepControl sc;
  sc.dt = StepControl::max_step(trap_frequencies(trap.fort, trap.mass_kg).axial_hz);
  const double x0 = std::acos(std::sqrt(0.95)) / trap.fort.wavenumber;
  PhaseState init;
  init.r.x() = x0;
  return run_ensemble(trajectories, exec, [&](std::size_t i) {
    Rng rng = make_rng(seed, i);
    const Trajectory tr = integrate_trajectory(trap, init, heating, max_time, sc, rng);
    return tr.escape_time.value_or(max_time);
  });
}

KsResult ks_test_exponential(std::vector<double> x, double tau) {
  if (x.empty() || !(tau > 0.0))
    throw DomainError("KS test needs samples and tau > 0");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = 1.0 - std::exp(-x[i] / tau);
    d = std::max({d, (i + 1) / n - F, F - i / n});
  }
  const double sn = std::sqrt(n);
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    p += term;
    if (std::abs(term) < 1e-12)
      break;
  }
  return {d, std::clamp(p, 0.0, 1.0)};
}

double capture_probability(const TrapContext &trap, const LoadingConfig &loading) {
  const double ek = free_fall_arrival(loading, trap.mass_kg).kinetic_mk();
  const double dmax = loading.capture.max_removed_mk(loading.cooling_pulse_s);
  return dmax > ek ? 1.0 - ek / dmax : 0.0;
}

namespace {

// Captured oscillation energy above the trap bottom, or nullopt if the pulse
// fails to bind the atom.
std::optional<double> try_capture(double ek_j, double u0, double dmax_j, Rng &rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double e = ek_j + u0 - unif(rng) * dmax_j;
  if (e < u0)
    return std::max(0.0, e);
  return std::nullopt;
}

bool survives_energy_space(double e, double hold, const TrapContext &trap,
                           const HeatingBudget &hb, double growth, double dt_max, Rng &rng) {
  const double u0 = trap.fort.depth_j;
  std::exponential_distribution<double> expo(1.0);
  if (hb.background_rate > 0.0 && expo(rng) / hb.background_rate < hold)
    return false;
  const double drift = hb.recoil_k_per_s * cst::k_B; // J/s
  if (growth == 0.0 && drift == 0.0)
    return true;
  std::normal_distribution<double> gauss(0.0, 1.0);
  double t = 0.0;
  // Keep an energy floor so multiplicative growth can start from rest.
  const double floor_e = recoil_energy(trap.fort.wavelength_nm, trap.mass_kg);
  e = std::max(e, floor_e);
  while (t < hold) {
    const double dt = std::min(dt_max, hold - t);
    if (growth > 0.0)
      e *= std::exp(0.5 * growth * dt + std::sqrt(growth * dt) * gauss(rng));
    e += drift * dt;
    if (e >= u0)
      return false;
    t += dt;
  }
  return true;
}

bool survives_trajectory(double e, double hold, const TrapContext &trap,
                         const HeatingBudget &hb, const StepControl &sc, Rng &rng) {
  PhaseState s;
  const Eigen::Vector3d dir = isotropic(rng);
  s.v = std::sqrt(2.0 * e / trap.mass_kg) * dir;
  const Trajectory tr = integrate_trajectory(trap, s, hb, hold, sc, rng);
  return !tr.escape_time.has_value();
}

} // namespace

SurvivalCurve survival_experiment(const TrapContext &trap, const SurvivalConfig &cfg) {
  cfg.loading.validate();
  cfg.heating.validate();
  if (cfg.triggers_per_delay < 100)
    throw DomainError("survival_experiment needs at least 100 triggers per delay");
  if (cfg.delays.empty())
    throw DomainError("no delays given");
  const double u0 = trap.fort.depth_j;
  const double nu_ax = trap_frequencies(trap.fort, trap.mass_kg).axial_hz;
  const double growth = cfg.heating.parametric_rate(nu_ax) + cfg.heating.raman_rate;
  const double ek = free_fall_arrival(cfg.loading, trap.mass_kg).kinetic_energy;
  const double dmax = cfg.loading.capture.max_removed_mk(cfg.loading.cooling_pulse_s) * 1e-3 * cst::k_B;
  StepControl sc = cfg.step;
  if (cfg.model == SurvivalModel::Trajectory && !(sc.dt > 0.0))
    sc.dt = StepControl::max_step(nu_ax);

  struct Outcome {
    bool detected = false;
    bool captured = false;
  };
  const std::size_t per = cfg.triggers_per_delay;
  const auto outcomes = run_ensemble(cfg.delays.size() * per, cfg.execution, [&](std::size_t i) {
    const double hold = cfg.delays[i / per];
    Rng rng = make_rng(cfg.seed, i);
    std::poisson_distribution<int> extra(0.5 * cfg.loading.mean_atoms);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int n_atoms = 1 + (cfg.loading.mean_atoms > 0.0 ? extra(rng) : 0);
    Outcome o;
    bool any = false;
    for (int a = 0; a < n_atoms; ++a) {
      const auto e = try_capture(ek, u0, dmax, rng);
      if (!e)
        continue;
      if (a == 0)
        o.captured = true;
      const bool alive =
          cfg.model == SurvivalModel::EnergySpace
              ? survives_energy_space(*e, hold, trap, cfg.heating, growth, cfg.energy_step_s, rng)
              : survives_trajectory(*e, hold, trap, cfg.heating, sc, rng);
      any = any || alive;
    }
    o.detected = any && unif(rng) < cfg.detection.efficiency;
    return o;
  });

  SurvivalCurve curve;
  for (std::size_t d = 0; d < cfg.delays.size(); ++d) {
    double k = 0.0;
    for (std::size_t j = 0; j < per; ++j) {
      const Outcome &o = outcomes[d * per + j];
      k += o.detected ? 1.0 : 0.0;
      curve.captured += o.captured ? 1 : 0;
    }
    const double n = static_cast<double>(per);
    curve.data.delays.push_back(cfg.delays[d]);
    curve.data.successes.push_back(k);
    curve.data.trials.push_back(n);
    const double p = k / n;
    curve.probability.push_back(p);
    curve.error.push_back(std::sqrt(std::max(p * (1.0 - p), 1.0 / n) / n));
  }
  if (curve.captured == 0)
    throw CalibrationError("no trigger led to a capture; raise the capture saturation energy "
                           "or lengthen the cooling pulse");
  if (cfg.delays.size() >= 3)
    curve.fit = fit_lifetime(curve.data);
  return curve;
}

SecondAtomBound second_atom_bound(double mean_atoms) {
  if (mean_atoms < 0.0)
    throw DomainError("mean atom number must be non-negative");
  SecondAtomBound b;
  b.value = 0.5 * mean_atoms;
  b.valid = mean_atoms <= kSecondAtomValidityLimit;
  if (!b.valid)
    b.warning = "N-bar = " + std::to_string(mean_atoms) +
                " is not << 1; the N-bar/2 bound is only marginal";
  return b;
}

} // namespace cqed
