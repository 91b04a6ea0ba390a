#pragma once

#include "cqed/atoms.hpp"
#include "cqed/ensemble.hpp"
#include "cqed/stark.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace cqed {

/// The 16 hyperfine ground sublevels: F=3 (m=-3..3) then F=4 (m=-4..4).
inline constexpr int kGroundSublevels = 16;

struct GroundSublevel {
  int F = 0;
  int mF = 0; // projection on the cavity axis
  std::string label() const;
};
const std::array<GroundSublevel, kGroundSublevels> &ground_sublevels();
int ground_index(int F, int mF);

/// Population vector over the ground sublevels.
struct PumpingState {
  Eigen::Matrix<double, kGroundSublevels, 1> p =
      Eigen::Matrix<double, kGroundSublevels, 1>::Zero();

  double f4() const;
  double total() const;
  /// Throws DomainError unless entries lie in [0,1] and sum to 1 within 1e-12.
  void validate() const;

  static PumpingState unpolarized(int F);
  static PumpingState sublevel(int F, int mF);
};

inline constexpr double kNormalizationTolerance = 1e-12;
inline constexpr double kDefaultEllipticity = 0.05;

/// Rates between ground sublevels |F m_F>, quantized along the cavity axis
/// where the FORT light shift is diagonal. `rate(j, i)` is the rate i -> j.
struct ScatteringRates {
  Eigen::Matrix<double, kGroundSublevels, kGroundSublevels> rate =
      Eigen::Matrix<double, kGroundSublevels, kGroundSublevels>::Zero();
  /// Light shift of each sublevel (Hz, negative for a red trap).
  std::array<double, kGroundSublevels> shift_hz{};
  double ellipticity = 0.0;
  double intensity_w_m2 = 0.0;

  // Means over the 16 initial sublevels of the out-rates in each class.
  double f_changing = 0.0;
  double mf_changing = 0.0;
  double rayleigh = 0.0;

  /// Mean F=3 -> F=4 and F=4 -> F=3 rates for unpolarized manifolds.
  double rate_3_to_4() const;
  double rate_4_to_3() const;
  /// Rate between two sublevels, i -> j.
  double channel(int i, int j) const { return rate(j, i); }

  /// Column-sum-zero generator of the inelastic dynamics.
  Eigen::Matrix<double, kGroundSublevels, kGroundSublevels> generator() const;
  /// Recomputes the three aggregates from `rate`.
  void update_aggregates();
};

/// Second-order FORT-photon scattering summed over every P level coupled to
/// 6S1/2. Excited hyperfine structure is neglected; ground hyperfine energies
/// enter the denominators. `ellipticity` is tan(beta) for the polarization
/// cos(beta) l+ + i sin(beta) l-, in [0, 1]; it produces the vector shift
/// that splits m_F.
ScatteringRates raman_scattering_rates(const LevelScheme &scheme,
                                       const FortField &fort,
                                       double ellipticity = kDefaultEllipticity);
ScatteringRates raman_scattering_rates(const LevelScheme &scheme,
                                       double wavelength_nm,
                                       double peak_intensity_w_m2,
                                       double ellipticity = kDefaultEllipticity);

/// Ground-manifold light-shift operator (Hz) in the |F m_F> basis, with
/// F-mixing dropped. Diagonal up to rounding.
Eigen::MatrixXcd ground_light_shift_operator(const LevelScheme &scheme,
                                             double wavelength_nm,
                                             double intensity_w_m2,
                                             double ellipticity);

using RateMatrix = Eigen::Matrix<double, kGroundSublevels, kGroundSublevels>;

/// Checks that off-diagonal entries are non-negative and finite.
void validate_rate_matrix(const RateMatrix &rate);

enum class EvolutionMethod { Dopri5, MatrixExponential };

struct RepumpSeries {
  std::vector<double> t;
  std::vector<double> f4;
  std::vector<double> total;
  std::vector<PumpingState> states;
  double fitted_tau = 0.0;
  double fitted_tau_error = 0.0;
  double fitted_f_eq = 0.0;
  double two_level_tau = 0.0;
  double two_level_f_eq = 0.0;
  /// Largest |sum p - 1| seen at any accepted integrator step.
  double max_normalization_error = 0.0;

  /// f_eq (1 - exp(-t/tau)) from the reduced two-manifold model.
  double two_level_f4(double t) const;
};

/// Evolves dp/dt = G p from `initial` and samples f4 on `samples` evenly
/// spaced times in [0, duration]. The fit is skipped (fields left 0) when the
/// series is flat.
RepumpSeries repump_dynamics(const RateMatrix &rate, const PumpingState &initial,
                             double duration, int samples = 51,
                             EvolutionMethod method = EvolutionMethod::Dopri5);
RepumpSeries repump_dynamics(const ScatteringRates &rates,
                             const PumpingState &initial, double duration,
                             int samples = 51,
                             EvolutionMethod method = EvolutionMethod::Dopri5);

/// exp(G t) p0 via Eigen's matrix exponential.
PumpingState evolve_exact(const RateMatrix &rate, const PumpingState &p0, double t);

struct RamanHeatingEstimate {
  double rate = 0.0;  // Gamma_IR, s^-1
  double error = 0.0;
  double heating_time() const;
  std::string label;
  std::string warning;
};

inline constexpr double kTwoStateHeatingFactor = 0.2;
inline constexpr std::size_t kMinRamanEnsemble = 1000;

RamanHeatingEstimate raman_heating_two_state(double gamma_s);

struct MultilevelHeatingConfig {
  std::size_t trajectories = 4000;
  double duration = 20.0; // s
  std::uint64_t seed = 1;
  Execution execution = default_execution();
};

/// Sublevel random walk. Each inelastic event moves the atom to a potential
/// of depth ratio r = U_j / U_i; averaging the sudden change over the
/// oscillation phase multiplies the energy by (1 + r)/2. Growth of the mean
/// energy gives Gamma_IR.
RamanHeatingEstimate raman_heating_multilevel(const ScatteringRates &rates,
                                              const MultilevelHeatingConfig &cfg = {});

/// Largest eigenvalue of the mean-energy transfer matrix; the exact
/// long-time limit the Monte Carlo estimates.
double raman_heating_growth_rate(const ScatteringRates &rates);

} // namespace cqed
