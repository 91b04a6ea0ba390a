#include "cqed/constants.hpp"
#include "cqed/errors.hpp"
#include "cqed/stark.hpp"

#include <doctest.h>

#include <cmath>

using namespace cqed;
namespace cst = cqed::constants;

namespace {

const LevelScheme &cs() {
  static const LevelScheme s = load_level_scheme(default_atom_data_path());
  return s;
}

// Scalar polarizability (a.u.) straight from the line list:
// alpha0 = sum_b 2 w_ba |<b||d||a>|^2 / (3 (2J_a+1) hbar (w_ba^2 - w^2)).
double alpha_oracle(const LevelScheme &s, const std::string &label, double nm) {
  const std::size_t a = s.level_index(label);
  const double w = cst::two_pi * cst::c / (nm * 1e-9);
  const double tj = s.levels[a].J.twice();
  double alpha = 0.0;
  for (const auto &l : s.lines) {
    if (l.lower != a && l.upper != a)
      continue;
    const double sign = l.lower == a ? 1.0 : -1.0;
    const double wba = sign * cst::two_pi * cst::c / (l.wavelength_nm * 1e-9);
    const double d = l.reduced_dipole_au * cst::ea0;
    alpha += 2.0 * wba * d * d / (3.0 * (tj + 1.0) * cst::hbar * (wba * wba - w * w));
  }
  const double hartree = 4.3597447222071e-18;
  return alpha / (cst::ea0 * cst::ea0 / hartree);
}

} // namespace

TEST_SUITE("stark") {

TEST_CASE("scalar polarizability matches the line-sum oracle") {
  for (double nm : {800.0, 935.6, 1064.0, 1550.0}) {
    CHECK(scalar_polarizability_au(cs(), "6S1/2", nm) ==
          doctest::Approx(alpha_oracle(cs(), "6S1/2", nm)).epsilon(1e-9));
    CHECK(scalar_polarizability_au(cs(), "6P3/2", nm) ==
          doctest::Approx(alpha_oracle(cs(), "6P3/2", nm)).epsilon(1e-9));
  }
  // Static ground polarizability of Cs is 401 a.u., about 16 of it from the core
  // which the line list leaves out.
  CHECK(scalar_polarizability_au(cs(), "6S1/2", 1e6) == doctest::Approx(385.0).epsilon(0.01));
}

TEST_CASE("shift is linear in intensity") {
  const auto a = stark_shift(cs(), 935.6, 1e9);
  const auto b = stark_shift(cs(), 935.6, 3e9);
  CHECK(b.ground_hz == doctest::Approx(3.0 * a.ground_hz));
  CHECK(b.excited_mean() == doctest::Approx(3.0 * a.excited_mean()));
  CHECK(stark_shift(cs(), 935.6, 0.0).ground_hz == 0.0);
  CHECK_THROWS_AS(stark_shift(cs(), 935.6, -1.0), DomainError);
}

TEST_CASE("m_F reflection symmetry in linear polarization") {
  for (auto model : {DetuningModel::FineStructure, DetuningModel::HyperfineResolved}) {
    const auto r = stark_shift(cs(), 930.0, 1e9, model);
    CHECK(r.excited_hz.size() == 32);
    double scale = 0.0, worst = 0.0;
    for (const auto &[k, v] : r.excited_hz) {
      const auto it = r.excited_hz.find({k.F, -k.mF});
      REQUIRE(it != r.excited_hz.end());
      worst = std::max(worst, std::abs(v - it->second));
      scale = std::max(scale, std::abs(v));
    }
    CHECK(worst <= 1e-10 * scale);
  }
}

TEST_CASE("fine-structure projection preserves the level mean") {
  const auto lv = level_shift(cs(), "6P3/2", 930.0, 1e9);
  double sum = 0.0;
  for (const auto &[k, v] : lv.by_sublevel)
    sum += v;
  CHECK(sum / 32.0 == doctest::Approx(lv.scalar_hz).epsilon(1e-12));
  CHECK(lv.mean() == doctest::Approx(lv.scalar_hz).epsilon(1e-12));
}

TEST_CASE("normalization to the ground shift") {
  const auto ref = stark_shift(cs(), kDesignFortWavelengthNm, 1e9);
  const auto n = ref.normalized_to(ref.ground_hz);
  CHECK(n.ground_hz == 1.0);
  CHECK(n.normalized);
  CHECK(n.excited_manifold_mean(HalfInt::integer(4)) == doctest::Approx(1.0).epsilon(0.25));
}

TEST_CASE("magic wavelength near the design FORT wavelength") {
  const double fs = find_magic_wavelength(cs(), 925.0, 945.0);
  const double hf = find_magic_wavelength(cs(), 925.0, 945.0, {}, DetuningModel::HyperfineResolved);
  CHECK(fs == doctest::Approx(935.6).epsilon(2.0 / 935.6));
  CHECK(std::abs(fs - hf) < 1e-3);
  const auto r = stark_shift(cs(), fs, 1e9);
  CHECK(std::abs(r.excited_manifold_mean(HalfInt::integer(4)) / r.ground_hz - 1.0) < 1e-8);
  CHECK_THROWS_AS(find_magic_wavelength(cs(), 940.0, 945.0), NoRootError);
  CHECK_THROWS_AS(find_magic_wavelength(cs(), 945.0, 925.0), DomainError);
}

TEST_CASE("pole exclusion") {
  CHECK_THROWS_AS(stark_shift(cs(), 852.3473 + 0.5 * kPoleExclusionNm, 1e9), ResonanceError);
  CHECK_THROWS_AS(level_shift(cs(), "6P3/2", 917.4834, 1e9), ResonanceError);
  CHECK_NOTHROW(stark_shift(cs(), 852.3473 + 2.0 * kPoleExclusionNm, 1e9));
}

TEST_CASE("depth chain") {
  const auto f = FortField::from_ground_shift(935.6, -47e6, 25e-6, 43e-6);
  CHECK(f.depth_mk() == doctest::Approx(cst::h * 47e6 / cst::k_B * 1e3).epsilon(1e-12));
  CHECK(f.depth_mk() == doctest::Approx(2.26).epsilon(0.03));
  const auto g = FortField::from_depth_mk(935.6, f.depth_mk(), 25e-6, 43e-6);
  CHECK(g.ground_shift_hz == doctest::Approx(-47e6).epsilon(1e-12));
  const auto p = depth_from_input_power(1.2e-3, 2200, 25e-6, cs(), 935.6);
  CHECK(p.ground_shift_hz == doctest::Approx(-47e6).epsilon(0.30));
  // Circulating power P F / pi, antinode intensity 8 P_circ / (pi w^2)
  const double I = 8.0 * (1.2e-3 * 2200 / cst::pi) / (cst::pi * 25e-6 * 25e-6);
  CHECK(p.peak_intensity_w_m2 == doctest::Approx(I).epsilon(1e-12));
  CHECK(p.ground_shift_hz == doctest::Approx(stark_shift(cs(), 935.6, I).ground_hz).epsilon(1e-12));
}

TEST_CASE("trap frequencies: closed form and curvature") {
  const auto f = FortField::from_depth_mk(935.6, 2.3, 25e-6, 43e-6);
  const double U0 = 2.3e-3 * cst::k_B, m = cs().mass_kg, k = cst::two_pi / 935.6e-9;
  const auto r = trap_frequencies(f, m);
  CHECK(r.axial_hz == doctest::Approx(std::sqrt(2.0 * U0 * k * k / m) / cst::two_pi).epsilon(1e-12));
  CHECK(r.radial_hz == doctest::Approx(std::sqrt(4.0 * U0 / (m * 25e-6 * 25e-6)) / cst::two_pi)
                           .epsilon(1e-12));
  CHECK(std::abs(r.axial_fd_hz / r.axial_hz - 1.0) < 1e-6);
  CHECK(std::abs(r.radial_fd_hz / r.radial_hz - 1.0) < 1e-6);
  CHECK(r.axial_hz == doctest::Approx(570e3).epsilon(0.03));
  CHECK(r.radial_hz == doctest::Approx(4.8e3).epsilon(0.05));
}

TEST_CASE("potential and force are consistent") {
  const auto f = FortField::from_depth_mk(935.6, 2.3, 25e-6, 43e-6);
  const Eigen::Vector3d p(37e-9, 4e-6, -3e-6);
  const auto F = fort_force(f, p);
  for (int i = 0; i < 3; ++i) {
    const double h = 1e-12;
    Eigen::Vector3d a = p, b = p;
    a[i] += h;
    b[i] -= h;
    const double fd = -(fort_potential(f, a) - fort_potential(f, b)) / (2 * h);
    CHECK(F[i] == doctest::Approx(fd).epsilon(1e-5));
  }
  CHECK(fort_potential(f, Eigen::Vector3d::Zero()) == doctest::Approx(-f.depth_j));
  CHECK(f.antinode_count() == doctest::Approx(43e-6 / (0.5 * 935.6e-9)));
}

TEST_CASE("waist scaling") {
  CHECK(scaled_waist(23.9e-6, 852.4, 935.6) == doctest::Approx(23.9e-6 * std::sqrt(935.6 / 852.4)));
}

}
