#pragma once

#include <numbers>

// SI values (CODATA 2018 exact where defined).
namespace cqed::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr double h = 6.62607015e-34;      // J s
inline constexpr double hbar = h / two_pi;       // J s
inline constexpr double k_B = 1.380649e-23;      // J/K
inline constexpr double c = 299792458.0;         // m/s
inline constexpr double epsilon0 = 8.8541878128e-12; // F/m
inline constexpr double e = 1.602176634e-19;     // C
inline constexpr double a0 = 5.29177210903e-11;  // m
inline constexpr double amu = 1.66053906660e-27; // kg
inline constexpr double g_n = 9.80665;           // m/s^2

// Atomic unit of electric dipole moment, e*a0 (C m).
inline constexpr double ea0 = e * a0;

// 1 cm^-1 expressed in Hz.
inline constexpr double wavenumber_to_hz = 100.0 * c;

inline double wavelength_nm_to_hz(double nm) { return c / (nm * 1e-9); }
inline double hz_to_wavelength_nm(double hz) { return c / hz * 1e9; }
inline double angular(double hz) { return two_pi * hz; }

} // namespace cqed::constants
