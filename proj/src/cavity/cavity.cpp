#include "cqed/cavity.hpp"

#include "cqed/angular.hpp"
#include "cqed/constants.hpp"
#include "cqed/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cqed {

namespace cst = constants;
using cd = std::complex<double>;

CavitySystem CavitySystem::experiment_defaults() {
  CavitySystem s;
  s.g0 = cst::two_pi * 24e6;
  s.kappa = cst::two_pi * 4.2e6;
  s.gamma = cst::two_pi * 2.6e6;
  s.length_m = 43.0e-6;
  s.waist_m = 23.9e-6;
  s.finesse = 4.2e5;
  s.wavelength_nm = 852.4;
  return s;
}

double CavitySystem::wavenumber() const { return cst::two_pi / (wavelength_nm * 1e-9); }

double CavitySystem::free_spectral_range_hz() const { return cst::c / (2.0 * length_m); }

double CavitySystem::kappa_from_finesse() const {
  return cst::pi * free_spectral_range_hz() / finesse;
}

void CavitySystem::validate() const {
  if (!(g0 > 0.0 && kappa > 0.0 && gamma > 0.0))
    throw DomainError("cavity rates must be positive");
  if (!(g0 > kappa && kappa > gamma))
    throw DomainError("expected g0 > kappa > gamma");
  if (!(length_m > 0.0 && waist_m > 0.0 && wavelength_nm > 0.0 && finesse > 1.0))
    throw DomainError("cavity geometry must be positive with finesse > 1");
  if (std::abs(kappa_from_finesse() / kappa - 1.0) > 0.1)
    throw DomainError("finesse and kappa disagree by more than 10%");
}

double coupling_at(const CavitySystem &system, double x, double rho) {
  return system.g0 * std::cos(system.wavenumber() * x) *
         std::exp(-rho * rho / (system.waist_m * system.waist_m));
}

double transition_coupling_scale(CoupledTransition transition) {
  if (transition == CoupledTransition::F4ToF5)
    return 1.0;
  const HalfInt J = HalfInt::from_twice(1), Jp = HalfInt::from_twice(3);
  const HalfInt I = HalfInt::from_twice(7);
  const HalfInt F4 = HalfInt::integer(4), F5 = HalfInt::integer(5);
  const double a44 = angular_factor(F4, F4, F4, F4, 0, J, Jp, I);
  const double a45 = angular_factor(F4, F4, F5, F4, 0, J, Jp, I);
  return std::abs(a44 / a45);
}

CriticalNumbers critical_numbers(const CavitySystem &s) {
  if (!(s.g0 > 0.0))
    throw DomainError("g0 must be positive");
  return {s.gamma * s.gamma / (2.0 * s.g0 * s.g0), 2.0 * s.kappa * s.gamma / (s.g0 * s.g0)};
}

std::vector<FortSite> fort_site_couplings(const CavitySystem &s, ModeRegistration reg) {
  std::vector<FortSite> sites;
  const double half = 0.5 * s.length_m;
  if (reg == ModeRegistration::AntinodeAtMaxCoupling) {
    const double spacing = 0.5 * s.fort_wavelength_nm * 1e-9;
    const int n = static_cast<int>(std::floor(half / spacing));
    for (int j = -n; j <= n; ++j) {
      const double x = j * spacing;
      sites.push_back({x, coupling_at(s, x, 0.0)});
    }
    return sites;
  }
  const int q0 = static_cast<int>(std::lround(2.0 * s.length_m / (s.wavelength_nm * 1e-9)));
  const int qf = q0 - s.mode_order_gap;
  if (qf < 1)
    throw DomainError("mode order gap exceeds the probe mode number");
  for (int m = 0; m < qf; ++m) {
    const double xm = (m + 0.5) * s.length_m / qf; // from the first mirror
    sites.push_back({xm - half, s.g0 * std::sin(q0 * cst::pi * xm / s.length_m)});
  }
  return sites;
}

FortSite best_fort_site(const CavitySystem &s, ModeRegistration reg) {
  const auto sites = fort_site_couplings(s, reg);
  return *std::max_element(sites.begin(), sites.end(), [](const FortSite &a, const FortSite &b) {
    return std::abs(a.coupling) < std::abs(b.coupling);
  });
}

double DriveConfig::atom_probe_detuning(std::size_t i) const {
  const double shift = i < atomic_shifts.size() ? atomic_shifts[i] : 0.0;
  return probe_detuning - shift;
}

namespace {

void check_shifts(const DriveConfig &drive, std::size_t n_atoms) {
  if (!drive.atomic_shifts.empty() && drive.atomic_shifts.size() != n_atoms)
    throw DomainError("atomic_shifts must be empty or match the atom count");
}

} // namespace

TransmissionResult transmission_weak_drive(const CavitySystem &s, const DriveConfig &drive,
                                           const std::vector<double> &couplings) {
  check_shifts(drive, couplings.size());
  const double scale = transition_coupling_scale(drive.transition);
  cd denom(s.kappa, -drive.cavity_probe_detuning());
  TransmissionResult r;
  for (std::size_t i = 0; i < couplings.size(); ++i) {
    const double g = couplings[i] * scale;
    denom += g * g / cd(s.gamma, -drive.atom_probe_detuning(i));
    r.couplings.push_back(g);
  }
  r.amplitude = cd(0.0, -drive.epsilon) / denom;
  r.mbar = std::norm(r.amplitude);
  r.flux = 2.0 * s.kappa * r.mbar;
  if (r.mbar >= kWeakDriveMbarLimit)
    throw SolverSelectionError("predicted mbar " + std::to_string(r.mbar) +
                               " exceeds the weak-drive limit; use the master-equation solver");
  return r;
}

double empty_cavity_mbar(const CavitySystem &s, const DriveConfig &drive) {
  const double d = drive.cavity_probe_detuning();
  return drive.epsilon * drive.epsilon / (s.kappa * s.kappa + d * d);
}

double epsilon_for_empty_mbar(const CavitySystem &s, double mbar) {
  if (mbar < 0.0)
    throw DomainError("mbar must be non-negative");
  return s.kappa * std::sqrt(mbar);
}

std::vector<double> staircase_levels(const CavitySystem &s, const DriveConfig &drive,
                                     std::size_t n_max, double coupling) {
  if (n_max > kMaxStaircaseAtoms)
    throw DomainError("staircase supports at most " + std::to_string(kMaxStaircaseAtoms) +
                      " atoms");
  std::vector<double> out;
  for (std::size_t n = 0; n <= n_max; ++n) {
    DriveConfig d = drive;
    if (!drive.atomic_shifts.empty())
      d.atomic_shifts.assign(n, drive.atomic_shifts.front());
    out.push_back(transmission_weak_drive(s, d, std::vector<double>(n, coupling)).mbar);
  }
  return out;
}

} // namespace cqed
