#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace cqed {

/// Atomic transition the cavity is tuned to.
enum class CoupledTransition { F4ToF5, F4ToF4 };

/// Where the 935.6 nm standing wave sits relative to the 852 nm one.
enum class ModeRegistration {
  /// A FORT antinode coincides with a maximum of |g| at x = 0.
  AntinodeAtMaxCoupling,
  /// Both modes vanish at the mirrors (x = 0 and x = l) with integer mode
  /// numbers q0 = round(2l/lambda0) and qF = q0 - mode_order_gap.
  MirrorBoundary,
};

struct CavitySystem {
  double g0 = 0.0;     // rad/s, peak coupling on (4,4) -> (5',4)
  double kappa = 0.0;  // rad/s, field decay
  double gamma = 0.0;  // rad/s, dipole decay
  double length_m = 0.0;
  double waist_m = 0.0;
  double finesse = 0.0;
  double wavelength_nm = 0.0;
  double fort_wavelength_nm = 935.6;
  int mode_order_gap = 9;

  /// Values quoted for the experiment.
  static CavitySystem experiment_defaults();

  double wavenumber() const;
  double free_spectral_range_hz() const;
  /// Field decay implied by finesse and length, pi * FSR / F (rad/s).
  double kappa_from_finesse() const;
  /// Throws DomainError when the system is not in the regime g0 > kappa > gamma
  /// or when finesse and kappa disagree by more than 10%.
  void validate() const;
};

/// g(x, rho) = g0 cos(k0 x) exp(-rho^2 / w0^2), signed. x is measured from an
/// antinode of the probe mode.
double coupling_at(const CavitySystem &system, double x, double rho);

/// Ratio of the 4 -> 4' coupling to the 4 -> 5' coupling for the same
/// (F=4, m_F=4) pi transition that defines g0.
double transition_coupling_scale(CoupledTransition transition);

struct CriticalNumbers {
  double n0 = 0.0; // gamma^2 / (2 g0^2)
  double N0 = 0.0; // 2 kappa gamma / g0^2
};
CriticalNumbers critical_numbers(const CavitySystem &system);

struct FortSite {
  double x_m = 0.0;       // axial position measured from the cavity centre
  double coupling = 0.0;  // signed g at that position (rad/s)
};

/// FORT antinodes between the mirrors and the probe coupling at each one.
std::vector<FortSite> fort_site_couplings(const CavitySystem &system,
                                          ModeRegistration registration =
                                              ModeRegistration::AntinodeAtMaxCoupling);

/// Site with the largest |g|, among those returned above.
FortSite best_fort_site(const CavitySystem &system, ModeRegistration registration);

struct DriveConfig {
  double probe_detuning = 0.0;  // omega_p - omega_atom (rad/s)
  double cavity_detuning = 0.0; // omega_C - omega_atom (rad/s)
  double epsilon = 0.0;         // drive amplitude (rad/s)
  CoupledTransition transition = CoupledTransition::F4ToF5;
  /// Per-atom additive shift of the atomic line (rad/s), e.g. the FORT
  /// residual delta_0. Empty means no shift.
  std::vector<double> atomic_shifts;

  double cavity_probe_detuning() const { return probe_detuning - cavity_detuning; }
  double atom_probe_detuning(std::size_t i) const;
};

struct TransmissionResult {
  std::complex<double> amplitude; // <a>
  double mbar = 0.0;              // |<a>|^2
  double flux = 0.0;              // photons/s leaving through both mirrors, 2 kappa mbar
  std::vector<double> couplings;
};

/// Weak drive m-bar limit for the linear solver.
inline constexpr double kWeakDriveMbarLimit = 0.1;

/// Linear steady state of N two-level atoms in the driven cavity.
/// Throws SolverSelectionError when the predicted m-bar reaches
/// kWeakDriveMbarLimit.
TransmissionResult transmission_weak_drive(const CavitySystem &system,
                                           const DriveConfig &drive,
                                           const std::vector<double> &couplings);

/// Empty-cavity reference, Lorentzian in the cavity-probe detuning.
double empty_cavity_mbar(const CavitySystem &system, const DriveConfig &drive);

struct MasterEquationDiagnostics {
  double trace_error = 0.0;
  double hermiticity_error = 0.0;
  double min_diagonal = 0.0;
  double top_fock_population = 0.0;
  double residual = 0.0;
  std::size_t dimension = 0;
};

struct MasterEquationResult : TransmissionResult {
  MasterEquationDiagnostics diagnostics;
  std::vector<double> photon_distribution;
  std::vector<double> excited_populations;
};

inline constexpr double kDensityTolerance = 1e-8;
inline constexpr double kTopFockTolerance = 1e-6;
inline constexpr std::size_t kMaxMasterEquationAtoms = 3;

/// Steady state of the Lindblad equation in a truncated Fock basis
/// (fock_cutoff photon states, n = 0 .. fock_cutoff-1).
MasterEquationResult transmission_master_equation(const CavitySystem &system,
                                                  const DriveConfig &drive,
                                                  const std::vector<double> &couplings,
                                                  std::size_t fock_cutoff);

inline constexpr std::size_t kMaxFockCutoff = 80;

/// Master equation with the cutoff grown (x1.5 from a start set by the
/// empty-cavity photon number) until the top Fock population passes
/// kTopFockTolerance. Rethrows CutoffError beyond max_cutoff.
MasterEquationResult transmission_master_equation_adaptive(
    const CavitySystem &system, const DriveConfig &drive,
    const std::vector<double> &couplings, std::size_t max_cutoff = kMaxFockCutoff);

/// m-bar for N = 0 .. n_max identical atoms at coupling g (weak-drive solver).
std::vector<double> staircase_levels(const CavitySystem &system,
                                     const DriveConfig &drive, std::size_t n_max,
                                     double coupling);

inline constexpr std::size_t kMaxStaircaseAtoms = 5;

/// Drive amplitude for which the empty cavity holds m-bar photons on resonance.
double epsilon_for_empty_mbar(const CavitySystem &system, double mbar);

} // namespace cqed
