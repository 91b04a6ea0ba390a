#pragma once

#include "cqed/angular.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cqed {

/// Fine-structure level. Energies are stored in Hz above the ground level;
/// the data file carries cm^-1 and is converted on load.
struct Level {
  std::string label; // e.g. "6P3/2"
  HalfInt J;
  double energy_hz = 0.0;
  double hfs_a_hz = 0.0; // magnetic-dipole constant
  double hfs_b_hz = 0.0; // electric-quadrupole constant

  /// Hyperfine energy of manifold F relative to the fine-structure centroid.
  double hyperfine_shift_hz(HalfInt F, HalfInt I) const;
};

struct TransitionLine {
  std::size_t lower = 0; // index into LevelScheme::levels
  std::size_t upper = 0;
  double wavelength_nm = 0.0; // vacuum
  double reduced_dipole_au = 0.0; // |<J'||d||J>| in e a0
  std::string source;

  double frequency_hz() const;
};

class LevelScheme {
public:
  std::string name;
  int format_version = 0;
  double mass_kg = 0.0;
  HalfInt nuclear_spin;
  std::vector<Level> levels;
  std::vector<TransitionLine> lines;

  const Level &level(std::string_view label) const;
  std::optional<std::size_t> find_level(std::string_view label) const;
  std::size_t level_index(std::string_view label) const;

  /// Lines that have `label` as either end.
  std::vector<const TransitionLine *> lines_touching(std::size_t level) const;
  const TransitionLine *find_line(std::string_view lower,
                                  std::string_view upper) const;

  /// Hyperfine F values allowed for a level.
  std::vector<HalfInt> hyperfine_levels(std::size_t level) const;

  std::string line_name(const TransitionLine &line) const;

  /// Throws DataIntegrityError on the first violated invariant.
  void validate() const;
};

/// Reads the plain-text atomic data file. See data/README for the schema.
LevelScheme load_level_scheme(const std::filesystem::path &path);
LevelScheme parse_level_scheme(std::string_view text);

/// Location of the bundled Cs file (compile-time default).
std::filesystem::path default_atom_data_path();

/// Tolerances used by the validator.
inline constexpr double kLineEnergyTolerance = 1e-3; // relative
inline constexpr double kAnchorToleranceNm = 0.1;
inline constexpr double kD2AnchorNm = 852.4;
inline constexpr double kD1AnchorNm = 894.6;

} // namespace cqed
