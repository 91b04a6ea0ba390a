#include "cqed/pumping.hpp"

#include "cqed/angular.hpp"
#include "cqed/constants.hpp"
#include "cqed/errors.hpp"

#include <cmath>
#include <complex>
#include <sstream>

namespace cqed {

namespace cst = constants;
using cd = std::complex<double>;
using Mat16c = Eigen::Matrix<cd, kGroundSublevels, kGroundSublevels>;

std::string GroundSublevel::label() const {
  return "F=" + std::to_string(F) + ",m=" + std::to_string(mF);
}

const std::array<GroundSublevel, kGroundSublevels> &ground_sublevels() {
  static const auto table = [] {
    std::array<GroundSublevel, kGroundSublevels> t{};
    int k = 0;
    for (int F = 3; F <= 4; ++F)
      for (int m = -F; m <= F; ++m)
        t[k++] = {F, m};
    return t;
  }();
  return table;
}

int ground_index(int F, int mF) {
  if ((F != 3 && F != 4) || std::abs(mF) > F)
    throw DomainError("no ground sublevel F=" + std::to_string(F) +
                      " m=" + std::to_string(mF));
  return F == 3 ? mF + 3 : 7 + mF + 4;
}

namespace {

bool in_f4(int k) { return k >= 7; }

// Orbital angular momentum from a label such as "7P3/2".
int orbital_l(const std::string &label) {
  for (char ch : label) {
    switch (ch) {
    case 'S': return 0;
    case 'P': return 1;
    case 'D': return 2;
    case 'F': return 3;
    default: break;
    }
  }
  throw DataIntegrityError("cannot read orbital momentum from level '" + label + "'");
}

// <ja ma| d_q |jb mb> / <ja||d||jb>, twice-valued arguments.
double we_factor(int tja, int tma, int tjb, int tmb, int q) {
  const int ph = ((tja - tma) / 2) % 2 == 0 ? 1 : -1;
  return ph * wigner_3j(tja, 2, tjb, -tma, 2 * q, tmb);
}

struct Path {
  int tj = 0;          // twice J of the excited level
  double red_up = 0.0; // <e||d||g>, C m, LS sign included
  double red_down = 0.0; // <g||d||e>
  double omega = 0.0;  // line angular frequency
};

// Spherical components of the laser polarization, eps . d = sum_p c_p d_p,
// quantized along the propagation (cavity) axis. The lab field is
// cos(beta) l+ + i sin(beta) l- with both directions transverse.
std::array<cd, 3> polarization(double ellipticity) {
  const double beta = std::atan(ellipticity);
  const cd i(0.0, 1.0);
  const double r = 1.0 / std::sqrt(2.0);
  return {i * r * (std::cos(beta) + std::sin(beta)), 0.0,
          i * r * (std::cos(beta) - std::sin(beta))}; // p = -1, 0, +1
}

struct Operators {
  std::array<Mat16c, 3> scatter; // amplitude for emitted component q (E0/2hbar included)
  Mat16c shift;                  // light-shift operator, Hz
  std::array<double, kGroundSublevels> ground_hz{};
};

Operators build(const LevelScheme &scheme, double wavelength_nm, double intensity,
                double ellipticity) {
  if (intensity < 0.0)
    throw DomainError("intensity must be non-negative");
  if (!(ellipticity >= 0.0 && ellipticity <= 1.0))
    throw DomainError("ellipticity must lie in [0, 1]");
  if (!(wavelength_nm > 0.0))
    throw DomainError("wavelength must be positive");
  if (scheme.nuclear_spin.twice() != 7)
    throw DomainError("ground sublevel model assumes I = 7/2");

  const std::size_t g = scheme.level_index(kGroundLevel);
  const int tjg = scheme.levels[g].J.twice();
  const int lg = orbital_l(scheme.levels[g].label);
  const double w = cst::two_pi * cst::wavelength_nm_to_hz(wavelength_nm);

  std::vector<Path> paths;
  for (const auto *l : scheme.lines_touching(g)) {
    if (std::abs(l->wavelength_nm - wavelength_nm) < kPoleExclusionNm) {
      std::ostringstream msg;
      msg << "wavelength " << wavelength_nm << " nm is within " << kPoleExclusionNm
          << " nm of the " << scheme.line_name(*l) << " resonance";
      throw ResonanceError(msg.str(), scheme.line_name(*l));
    }
    if (l->lower != g)
      continue;
    const Level &e = scheme.levels[l->upper];
    const int tje = e.J.twice(), le = orbital_l(e.label);
    // LS-coupled reduced element relative to the radial integral; only its
    // sign is kept, the magnitude comes from the data file.
    const int exponent = le + (1 + tjg) / 2 + 1; // L' + S + J + 1 with S = 1/2
    const double six = wigner_6j(2 * le, tje, 1, tjg, 2 * lg, 2);
    const double sign = ((exponent % 2 == 0) ? 1.0 : -1.0) * (six < 0 ? -1.0 : 1.0);
    Path p;
    p.tj = tje;
    p.red_up = sign * l->reduced_dipole_au * cst::ea0;
    p.red_down = (((tjg - tje) / 2) % 2 == 0 ? 1.0 : -1.0) * p.red_up;
    p.omega = cst::two_pi * l->frequency_hz();
    paths.push_back(p);
  }

  // Coupled |F m> <- uncoupled |mJ mI>, uncoupled index a * 8 + b.
  Eigen::Matrix<double, kGroundSublevels, kGroundSublevels> C;
  C.setZero();
  const auto &subs = ground_sublevels();
  for (int k = 0; k < kGroundSublevels; ++k)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 8; ++b) {
        const int tmj = 2 * a - 1, tmi = 2 * b - 7;
        C(k, a * 8 + b) = clebsch_gordan(tjg, tmj, 7, tmi, 2 * subs[k].F, 2 * subs[k].mF);
      }

  Operators out;
  for (int k = 0; k < kGroundSublevels; ++k)
    out.ground_hz[k] = scheme.levels[g].hyperfine_shift_hz(
        HalfInt::integer(subs[k].F), scheme.nuclear_spin);

  const auto c = polarization(ellipticity);
  const double e0 = std::sqrt(2.0 * intensity / (cst::epsilon0 * cst::c));
  const double amp = e0 / (2.0 * cst::hbar);
  const double shift_scale = -e0 * e0 / (4.0 * cst::hbar) / cst::h;

  for (auto &m : out.scatter)
    m.setZero();
  out.shift.setZero();

  for (int F = 3; F <= 4; ++F) {
    const int k0 = ground_index(F, -F);
    const double wg = cst::two_pi * out.ground_hz[k0];
    // 2x2 electronic-ground operators with detunings referenced to manifold F.
    std::array<Eigen::Matrix2cd, 3> t;
    for (auto &m : t)
      m.setZero();
    Eigen::Matrix2cd ls = Eigen::Matrix2cd::Zero();
    for (const Path &p : paths) {
      const double d_rot = p.omega - wg - w;
      const double d_cr = p.omega - wg + w;
      for (int mo = 0; mo < 2; ++mo)
        for (int mi = 0; mi < 2; ++mi) {
          const int tmo = 2 * mo - 1, tmi = 2 * mi - 1;
          for (int tme = -p.tj; tme <= p.tj; tme += 2) {
            // absorption e <- g and the laser operator acting g' <- e
            cd up_abs = 0.0, down_las = 0.0;
            for (int pi = 0; pi < 3; ++pi) {
              up_abs += c[pi] * we_factor(p.tj, tme, tjg, tmi, pi - 1) * p.red_up;
              down_las += c[pi] * we_factor(tjg, tmo, p.tj, tme, pi - 1) * p.red_down;
            }
            for (int q = -1; q <= 1; ++q) {
              const double down_q = we_factor(tjg, tmo, p.tj, tme, q) * p.red_down;
              const double up_q = we_factor(p.tj, tme, tjg, tmi, q) * p.red_up;
              t[q + 1](mo, mi) += down_q * up_abs / d_rot + down_las * up_q / d_cr;
            }
            // <g'|D_L^dag|e> = conj(<e|D_L|g'>), <e|D_L^dag|g> = conj(<g|D_L|e>)
            cd up_abs_o = 0.0, down_las_i = 0.0;
            for (int pi = 0; pi < 3; ++pi) {
              up_abs_o += c[pi] * we_factor(p.tj, tme, tjg, tmo, pi - 1) * p.red_up;
              down_las_i += c[pi] * we_factor(tjg, tmi, p.tj, tme, pi - 1) * p.red_down;
            }
            ls(mo, mi) += std::conj(up_abs_o) * up_abs / d_rot +
                          down_las * std::conj(down_las_i) / d_cr;
          }
        }
    }
    // Lift to the 16-dim uncoupled space (nuclear spin is a spectator) and
    // keep only columns belonging to manifold F.
    const int kn = 2 * F + 1;
    for (int q = 0; q < 3; ++q) {
      Mat16c T = Mat16c::Zero();
      for (int a = 0; a < 2; ++a)
        for (int a2 = 0; a2 < 2; ++a2)
          for (int b = 0; b < 8; ++b)
            T(a * 8 + b, a2 * 8 + b) = t[q](a, a2);
      const Mat16c A = C.cast<cd>() * T * C.transpose().cast<cd>();
      out.scatter[q].middleCols(k0, kn) = amp * A.middleCols(k0, kn);
    }
    Mat16c L = Mat16c::Zero();
    for (int a = 0; a < 2; ++a)
      for (int a2 = 0; a2 < 2; ++a2)
        for (int b = 0; b < 8; ++b)
          L(a * 8 + b, a2 * 8 + b) = ls(a, a2);
    const Mat16c W = C.cast<cd>() * L * C.transpose().cast<cd>();
    out.shift.block(k0, k0, kn, kn) = shift_scale * W.block(k0, k0, kn, kn);
  }
  return out;
}

} // namespace

Eigen::MatrixXcd ground_light_shift_operator(const LevelScheme &scheme,
                                             double wavelength_nm,
                                             double intensity_w_m2,
                                             double ellipticity) {
  return build(scheme, wavelength_nm, intensity_w_m2, ellipticity).shift;
}

ScatteringRates raman_scattering_rates(const LevelScheme &scheme,
                                       double wavelength_nm,
                                       double peak_intensity_w_m2,
                                       double ellipticity) {
  const Operators ops = build(scheme, wavelength_nm, peak_intensity_w_m2, ellipticity);
  ScatteringRates r;
  r.ellipticity = ellipticity;
  r.intensity_w_m2 = peak_intensity_w_m2;
  // Scalar plus vector shift only, so the operator is diagonal in this basis.
  for (int k = 0; k < kGroundSublevels; ++k)
    r.shift_hz[k] = ops.shift(k, k).real();

  const double w = cst::two_pi * cst::wavelength_nm_to_hz(wavelength_nm);
  const double pref = 1.0 / (3.0 * cst::pi * cst::epsilon0 * cst::hbar *
                             std::pow(cst::c, 3));
  const auto &A = ops.scatter;
  for (int i = 0; i < kGroundSublevels; ++i)
    for (int j = 0; j < kGroundSublevels; ++j) {
      const double ws = w + cst::two_pi * (ops.ground_hz[i] - ops.ground_hz[j]);
      double s = 0.0;
      for (int q = 0; q < 3; ++q)
        s += std::norm(A[q](j, i));
      r.rate(j, i) = pref * ws * ws * ws * s;
    }
  r.update_aggregates();
  return r;
}

ScatteringRates raman_scattering_rates(const LevelScheme &scheme,
                                       const FortField &fort, double ellipticity) {
  const double intensity =
      fort.peak_intensity_w_m2 > 0.0
          ? fort.peak_intensity_w_m2
          : (fort.ground_shift_hz == 0.0
                 ? 0.0
                 : intensity_for_ground_shift(scheme, fort.wavelength_nm,
                                              fort.ground_shift_hz));
  return raman_scattering_rates(scheme, fort.wavelength_nm, intensity, ellipticity);
}

void ScatteringRates::update_aggregates() {
  double fc = 0.0, mc = 0.0, ray = 0.0;
  for (int i = 0; i < kGroundSublevels; ++i)
    for (int j = 0; j < kGroundSublevels; ++j) {
      const double g = rate(j, i);
      if (i == j)
        ray += g;
      else if (in_f4(i) != in_f4(j))
        fc += g;
      else
        mc += g;
    }
  f_changing = fc / kGroundSublevels;
  mf_changing = mc / kGroundSublevels;
  rayleigh = ray / kGroundSublevels;
}

double ScatteringRates::rate_3_to_4() const {
  return rate.block(7, 0, 9, 7).sum() / 7.0;
}

double ScatteringRates::rate_4_to_3() const {
  return rate.block(0, 7, 7, 9).sum() / 9.0;
}

RateMatrix ScatteringRates::generator() const {
  RateMatrix g = rate;
  for (int i = 0; i < kGroundSublevels; ++i) {
    g(i, i) = 0.0;
    g(i, i) = -g.col(i).sum();
  }
  return g;
}

} // namespace cqed
