#pragma once

#include "cqed/ensemble.hpp"
#include "cqed/random.hpp"
#include "cqed/records.hpp"
#include "cqed/stark.hpp"

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cqed {

/// Phenomenological capture by the triggered cooling pulse: the pulse removes
/// u * dE_sat * (1 - exp(-dt / t_sat)) of energy, u uniform on [0, 1).
struct CaptureModel {
  double saturation_energy_mk = 4.0;
  double saturation_time_s = 20e-6;

  double max_removed_mk(double pulse_s) const;
};

struct LoadingConfig {
  double drop_height_m = 5e-3;
  double arrival_window_s = 10e-3;
  double mean_atoms = 0.30; // N-bar
  double cooling_pulse_s = 100e-6;
  double cooling_detuning = -2.0 * 3.141592653589793 * 41e6; // rad/s, red of 4 -> 5'
  double mode_waist_m = 23.9e-6;
  CaptureModel capture;

  void validate() const;
};

struct ArrivalKinematics {
  double velocity = 0.0;        // m/s
  double kinetic_energy = 0.0;  // J
  double transit_time = 0.0;    // s; infinity for a zero drop
  bool bounded_transit() const;
  double kinetic_mk() const;
};

ArrivalKinematics free_fall_arrival(const LoadingConfig &config, double mass_kg);

/// One-sided fractional intensity-noise spectrum S_eps(f) (1/Hz).
struct NoiseSpectrum {
  enum class Kind { None, White, Lorentzian };
  Kind kind = Kind::None;
  double level = 0.0;     // S at f = 0
  double corner_hz = 0.0; // Lorentzian only

  static NoiseSpectrum white(double level);
  static NoiseSpectrum lorentzian(double level, double corner_hz);
  double psd(double f) const;
  /// White level that gives the rate 1/tau at trap frequency nu.
  static NoiseSpectrum white_for_time(double tau_s, double nu_hz);
};

/// Energy e-folding rate pi^2 nu^2 S(2 nu).
double parametric_heating_rate(const NoiseSpectrum &spectrum, double nu_hz);
double parametric_heating_rate(const std::function<double(double)> &psd, double nu_hz);

struct HeatingBudget {
  double recoil_k_per_s = 0.0;   // linear heating from FORT photon recoil
  NoiseSpectrum intensity_noise; // drives the parametric channel
  double raman_rate = 0.0;       // Gamma_IR, s^-1 energy growth
  double background_rate = 0.0;  // s^-1 loss
  double raman_jump_fraction = 0.1; // mean energy jump per Raman event / E_osc

  double parametric_rate(double nu_axial_hz) const;
  double tau_p(double nu_axial_hz) const;
  void validate() const;
};

inline constexpr double kDefaultBackgroundRate = 1.0 / 30.0;

/// Photon recoil energy hbar^2 k^2 / 2m for the FORT photon.
double recoil_energy(double wavelength_nm, double mass_kg);
/// Rayleigh scattering rate that produces the given recoil heating (K/s).
double recoil_scatter_rate(double recoil_k_per_s, double wavelength_nm, double mass_kg);

struct PhaseState {
  Eigen::Vector3d r = Eigen::Vector3d::Zero();
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
};

enum class Integrator { VelocityVerlet, ForestRuth };

struct StepControl {
  double dt = 0.0;
  Integrator scheme = Integrator::VelocityVerlet;
  double sample_interval = 0.0; // 0 keeps only the end points
  bool stop_on_escape = true;
  double escape_radius_factor = 3.0; // escape needs rho > factor * w_F (or a mirror)
  double background_kick_velocity = 20.0; // m/s, random direction
  double noise_sign = 1.0; // flips the intensity noise; used for antithetic pairs
  double noise_correlation_s = 0.0; // 0 = white at the step rate

  /// Largest step allowed for a trap with this axial frequency.
  static double max_step(double nu_axial_hz) { return 1.0 / (50.0 * nu_axial_hz); }
};

struct Trajectory {
  std::vector<double> t;
  std::vector<PhaseState> samples;
  std::vector<double> energy; // J, kinetic + unperturbed potential
  std::vector<double> hamiltonian; // J, kinetic + noisy potential of the current step
  std::vector<double> control; // zero-mean martingale of the noise work, J
  PhaseState final_state;
  double final_energy = 0.0;
  bool bound = true;
  std::optional<double> escape_time;
  std::optional<double> background_time;
  std::size_t steps = 0;
  std::size_t recoil_events = 0;
  std::size_t raman_events = 0;
};

struct TrapContext {
  FortField fort;
  double mass_kg = 0.0;
};

double total_energy(const TrapContext &trap, const PhaseState &s);

/// Symplectic integration in the full 3-D FORT potential with stochastic
/// heating channels. Throws ConfigError when dt exceeds StepControl::max_step.
Trajectory integrate_trajectory(const TrapContext &trap, const PhaseState &initial,
                                const HeatingBudget &heating, double duration,
                                const StepControl &step, Rng &rng);

/// Oscillation frequency from zero crossings of one coordinate (0 = x axis,
/// 1 = y) for motion started from `initial` with heating off.
double measure_oscillation_frequency(const TrapContext &trap, const PhaseState &initial,
                                     int axis, double duration, const StepControl &step);

struct EnsembleEnergy {
  std::vector<double> t;
  std::vector<double> mean_energy; // J above the trap bottom
  std::vector<double> raw_mean_energy; // without the control variate
  double fitted_rate = 0.0;        // slope of log mean energy
  double fitted_rate_error = 0.0;
  double raw_fitted_rate = 0.0;
};

struct HeatingEnsembleConfig {
  std::size_t trajectories = 1000;
  double duration = 0.1;
  std::size_t samples = 11;
  double initial_energy_fraction = 0.01; // E_osc / U0, started along x
  bool antithetic = false; // pair each noise realization with its negative
  /// Add the zero-mean noise-work martingale to each energy sample. Leaves the
  /// ensemble mean unchanged and removes first-order energy diffusion.
  bool control_variate = true;
  StepControl step;
  std::uint64_t seed = 1;
  Execution execution = Execution::Serial;
};

/// Ensemble mean oscillation energy versus time and its exponential growth rate.
EnsembleEnergy heating_ensemble(const TrapContext &trap, const HeatingBudget &heating,
                                const HeatingEnsembleConfig &config);

/// Linear growth rate of the ensemble mean energy (K/s) from planted recoil.
struct RecoilEnsembleResult {
  double heating_k_per_s = 0.0;
  double heating_error_k_per_s = 0.0;
  double expected_k_per_s = 0.0;
};
RecoilEnsembleResult recoil_ensemble(const TrapContext &trap, double scatter_rate,
                                     double duration, std::size_t trajectories,
                                     std::uint64_t seed, Execution exec);

/// Escape times of trajectories with only memoryless loss (background).
std::vector<double> escape_times(const TrapContext &trap, const HeatingBudget &heating,
                                 std::size_t trajectories, double max_time,
                                 std::uint64_t seed, Execution exec);

/// One-sample Kolmogorov-Smirnov statistic and asymptotic p-value against Exp(tau).
struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};
KsResult ks_test_exponential(std::vector<double> samples, double tau);

enum class SurvivalModel {
  /// Orbit-averaged energy random walk: parametric/Raman growth as geometric
  /// Brownian motion, recoil as linear drift, background as a Poisson loss.
  EnergySpace,
  /// Full trajectories from integrate_trajectory for the hold.
  Trajectory,
};

struct DetectionModel {
  double efficiency = 0.95;
};

struct SurvivalConfig {
  std::vector<double> delays;
  std::size_t triggers_per_delay = 200;
  LoadingConfig loading;
  HeatingBudget heating;
  DetectionModel detection;
  SurvivalModel model = SurvivalModel::EnergySpace;
  double energy_step_s = 1e-3;
  StepControl step; // Trajectory model only
  std::uint64_t seed = 1;
  Execution execution = Execution::Serial;
};

struct SurvivalCurve {
  SurvivalData data;
  std::vector<double> probability;
  std::vector<double> error; // binomial standard error
  std::size_t captured = 0;  // over all triggers
  LifetimeFit fit;
};

/// Trigger, cooling pulse, dark hold, redetection for every delay.
/// Throws CalibrationError when no trigger leads to a capture.
SurvivalCurve survival_experiment(const TrapContext &trap, const SurvivalConfig &config);

/// Capture probability of the trigger atom for a given pulse.
double capture_probability(const TrapContext &trap, const LoadingConfig &loading);

struct SecondAtomBound {
  double value = 0.0;
  bool valid = true; // N-bar << 1
  std::string warning;
};
inline constexpr double kSecondAtomValidityLimit = 0.1;
SecondAtomBound second_atom_bound(double mean_atoms);

} // namespace cqed
