#pragma once

#include "cqed/atoms.hpp"

#include <Eigen/Core>

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cqed {

/// How detunings enter the second-order light-shift sum.
enum class DetuningModel {
  /// Fine-structure line frequencies; the J-level operator is then projected
  /// onto each hyperfine manifold.
  FineStructure,
  /// Each F -> F'' component uses its own hyperfine-shifted frequency.
  HyperfineResolved,
};

struct Sublevel {
  HalfInt F;
  HalfInt mF;
  auto operator<=>(const Sublevel &) const = default;
};

/// Light shift of one fine-structure level in linearly (pi) polarized light.
struct LevelShift {
  std::string level;
  double scalar_hz = 0.0;      // mean over m_J
  double tensor_hz = 0.0;      // shift(m_J = J) - scalar; zero for J = 1/2
  std::vector<double> by_mj;   // m_J = -J .. J
  std::map<Sublevel, double> by_sublevel;

  double manifold_mean(HalfInt F) const;
  double mean() const;
};

/// D2-pair shifts: ground 6S1/2 and excited 6P3/2 (F', m_F').
struct StarkShiftResult {
  double wavelength_nm = 0.0;
  double intensity_w_m2 = 0.0;
  double ground_hz = 0.0;
  std::map<Sublevel, double> excited_hz;
  bool normalized = false;

  double excited_manifold_mean(HalfInt F) const;
  double excited_mean() const;

  /// delta / reference, with the reference normally the ground shift at the
  /// FORT design wavelength and the same intensity.
  StarkShiftResult normalized_to(double reference_ground_hz) const;
};

inline constexpr double kPoleExclusionNm = 0.01;
inline constexpr double kDesignFortWavelengthNm = 935.6;
inline constexpr const char *kGroundLevel = "6S1/2";
inline constexpr const char *kExcitedLevel = "6P3/2";

/// Second-order shift (Hz) of every sublevel of `level`, counter-rotating
/// terms included. Throws ResonanceError within kPoleExclusionNm of any line
/// touching the level.
LevelShift level_shift(const LevelScheme &scheme, std::string_view level,
                       double wavelength_nm, double intensity_w_m2,
                       DetuningModel model = DetuningModel::FineStructure);

StarkShiftResult stark_shift(const LevelScheme &scheme, double wavelength_nm,
                             double intensity_w_m2,
                             DetuningModel model = DetuningModel::FineStructure);

/// Scalar dynamic polarizability in atomic units.
double scalar_polarizability_au(const LevelScheme &scheme, std::string_view level,
                                double wavelength_nm);

/// Intensity (W/m^2) that yields a given ground-state shift.
double intensity_for_ground_shift(const LevelScheme &scheme, double wavelength_nm,
                                  double ground_shift_hz);

struct MagicCriterion {
  enum class Kind { ManifoldMean, AllMean, SingleSublevel };
  Kind kind = Kind::ManifoldMean;
  HalfInt F = HalfInt::integer(4);
  HalfInt mF = HalfInt::integer(0);

  static MagicCriterion manifold_mean(HalfInt F) { return {Kind::ManifoldMean, F, {}}; }
  static MagicCriterion all_mean() { return {Kind::AllMean, {}, {}}; }
  static MagicCriterion sublevel(HalfInt F, HalfInt mF) {
    return {Kind::SingleSublevel, F, mF};
  }
  double aggregate(const StarkShiftResult &r) const;
  std::string describe() const;
};

/// Wavelength (nm) in [lo, hi] where the chosen 6P3/2 aggregate shift equals
/// the ground shift. Requires exactly one sign change in the bracket.
double find_magic_wavelength(const LevelScheme &scheme, double lo_nm, double hi_nm,
                             const MagicCriterion &criterion = {},
                             DetuningModel model = DetuningModel::FineStructure);

/// Standing-wave Gaussian dipole trap inside the cavity.
struct FortField {
  double wavelength_nm = 0.0;
  double waist_m = 0.0;
  double wavenumber = 0.0;       // rad/m
  double ground_shift_hz = 0.0;  // peak, negative for a red-detuned trap
  double depth_j = 0.0;          // U0 = h |ground_shift_hz|
  double mirror_separation_m = 0.0;
  double peak_intensity_w_m2 = 0.0; // 0 when built from a shift alone
  std::optional<double> residual_shift_hz; // max |d6P - d6S| at the antinode

  double depth_mk() const;
  /// Number of half-wavelengths that fit between the mirrors.
  double antinode_count() const { return mirror_separation_m / (0.5 * wavelength_nm * 1e-9); }

  static FortField from_ground_shift(double wavelength_nm, double ground_shift_hz,
                                     double waist_m, double mirror_separation_m);
  static FortField from_depth_mk(double wavelength_nm, double depth_mk,
                                 double waist_m, double mirror_separation_m);
  static FortField from_intensity(const LevelScheme &scheme, double wavelength_nm,
                                  double peak_intensity_w_m2, double waist_m,
                                  double mirror_separation_m);
};

/// Mode waist at another wavelength of the same resonator (scales as sqrt(lambda)).
double scaled_waist(double waist_m, double from_nm, double to_nm);

/// U(x, rho) = -U0 cos^2(k x) exp(-2 rho^2 / w^2); x along the cavity axis,
/// measured from an antinode.
double fort_potential(const FortField &fort, const Eigen::Vector3d &position);
Eigen::Vector3d fort_force(const FortField &fort, const Eigen::Vector3d &position,
                           double depth_scale = 1.0);

struct TrapGeometryReport {
  double axial_hz = 0.0;
  double radial_hz = 0.0;
  double axial_fd_hz = 0.0;  // from second differences of fort_potential
  double radial_fd_hz = 0.0;
  std::optional<double> residual_shift_hz;
};

/// Harmonic frequencies at the trap bottom.
TrapGeometryReport trap_frequencies(const FortField &fort, double mass_kg);

/// Mode-matched input power -> FORT. Circulating power P F / pi, standing-wave
/// antinode intensity 8 P_circ / (pi w^2).
FortField depth_from_input_power(double input_power_w, double finesse,
                                 double waist_m, const LevelScheme &scheme,
                                 double wavelength_nm,
                                 double mirror_separation_m = 43.0e-6);

} // namespace cqed
