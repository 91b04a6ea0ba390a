#include "cqed/stark.hpp"

#include "cqed/constants.hpp"
#include "cqed/errors.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <numeric>
#include <sstream>

namespace cqed {

namespace cst = constants;

double LevelShift::manifold_mean(HalfInt F) const {
  double sum = 0.0;
  int n = 0;
  for (const auto &[s, v] : by_sublevel)
    if (s.F == F) {
      sum += v;
      ++n;
    }
  if (n == 0)
    throw DomainError("level " + level + " has no F=" + F.str() + " manifold");
  return sum / n;
}

double LevelShift::mean() const {
  double sum = 0.0;
  for (const auto &[s, v] : by_sublevel)
    sum += v;
  return sum / static_cast<double>(by_sublevel.size());
}

double StarkShiftResult::excited_manifold_mean(HalfInt F) const {
  double sum = 0.0;
  int n = 0;
  for (const auto &[s, v] : excited_hz)
    if (s.F == F) {
      sum += v;
      ++n;
    }
  if (n == 0)
    throw DomainError("6P3/2 has no F'=" + F.str() + " manifold");
  return sum / n;
}

double StarkShiftResult::excited_mean() const {
  double sum = 0.0;
  for (const auto &[s, v] : excited_hz)
    sum += v;
  return sum / static_cast<double>(excited_hz.size());
}

StarkShiftResult StarkShiftResult::normalized_to(double reference) const {
  if (reference == 0.0)
    throw DomainError("normalization reference shift is zero");
  StarkShiftResult out = *this;
  out.ground_hz /= reference;
  for (auto &[s, v] : out.excited_hz)
    v /= reference;
  out.normalized = true;
  return out;
}

namespace {

// Field-amplitude factor: shift in Hz = -alpha_SI * I / (2 eps0 c h).
double shift_hz_per_alpha_si(double intensity) {
  return -intensity / (2.0 * cst::epsilon0 * cst::c * cst::h);
}

// 2 w_ba / (w_ba^2 - w^2): rotating plus counter-rotating denominators.
double resonance_factor(double w_ba, double w) {
  return 2.0 * w_ba / (w_ba * w_ba - w * w);
}

struct Partner {
  const TransitionLine *line;
  std::size_t level;
  double sign; // +1 if partner above
};

std::vector<Partner> partners(const LevelScheme &scheme, std::size_t a,
                              double wavelength_nm) {
  std::vector<Partner> out;
  for (const auto *l : scheme.lines_touching(a)) {
    if (std::abs(l->wavelength_nm - wavelength_nm) < kPoleExclusionNm) {
      std::ostringstream msg;
      msg << "wavelength " << wavelength_nm << " nm is within "
          << kPoleExclusionNm << " nm of the " << scheme.line_name(*l)
          << " resonance at " << l->wavelength_nm << " nm";
      throw ResonanceError(msg.str(), scheme.line_name(*l));
    }
    const bool above = l->lower == a;
    out.push_back({l, above ? l->upper : l->lower, above ? 1.0 : -1.0});
  }
  return out;
}

} // namespace

LevelShift level_shift(const LevelScheme &scheme, std::string_view label,
                       double wavelength_nm, double intensity,
                       DetuningModel model) {
  if (intensity < 0.0)
    throw DomainError("intensity must be non-negative");
  if (!(wavelength_nm > 0.0))
    throw DomainError("wavelength must be positive");
  const std::size_t a = scheme.level_index(label);
  const Level &lv = scheme.levels[a];
  const HalfInt I = scheme.nuclear_spin;
  const double w = cst::two_pi * cst::wavelength_nm_to_hz(wavelength_nm);
  const auto parts = partners(scheme, a, wavelength_nm);
  const double to_hz = shift_hz_per_alpha_si(intensity);

  LevelShift out;
  out.level = lv.label;

  const int tj = lv.J.twice();
  for (int tm = -tj; tm <= tj; tm += 2) {
    double alpha = 0.0;
    const HalfInt m = HalfInt::from_twice(tm);
    for (const auto &p : parts) {
      const HalfInt Jb = scheme.levels[p.level].J;
      if (std::abs(tm) > Jb.twice())
        continue;
      const double ang = fine_structure_factor(lv.J, m, Jb, m, 0);
      const double d = p.line->reduced_dipole_au * cst::ea0;
      const double w_ba = p.sign * cst::two_pi * p.line->frequency_hz();
      alpha += ang * ang * d * d * resonance_factor(w_ba, w);
    }
    out.by_mj.push_back(alpha / cst::hbar * to_hz);
  }
  out.scalar_hz =
      std::accumulate(out.by_mj.begin(), out.by_mj.end(), 0.0) / out.by_mj.size();
  out.tensor_hz = tj >= 2 ? out.by_mj.back() - out.scalar_hz : 0.0;

  for (const HalfInt F : scheme.hyperfine_levels(a)) {
    for (int tmf = -F.twice(); tmf <= F.twice(); tmf += 2) {
      const HalfInt mF = HalfInt::from_twice(tmf);
      double shift = 0.0;
      if (model == DetuningModel::FineStructure) {
        for (int tm = -tj; tm <= tj; tm += 2) {
          const int tmi = tmf - tm;
          if (std::abs(tmi) > I.twice())
            continue;
          const double cg = clebsch_gordan(tj, tm, I.twice(), tmi, F.twice(), tmf);
          shift += cg * cg * out.by_mj[(tm + tj) / 2];
        }
      } else {
        const double norm = 1.0 / std::sqrt(tj + 1.0);
        const double hf_a = lv.hyperfine_shift_hz(F, I);
        double alpha = 0.0;
        for (const auto &p : parts) {
          const Level &lb = scheme.levels[p.level];
          const double d = p.line->reduced_dipole_au * cst::ea0;
          for (const HalfInt Fb : scheme.hyperfine_levels(p.level)) {
            if (std::abs(tmf) > Fb.twice())
              continue;
            const double ang =
                angular_factor(F, mF, Fb, mF, 0, lv.J, lb.J, I) * norm;
            if (ang == 0.0)
              continue;
            const double w_ba =
                p.sign * cst::two_pi * p.line->frequency_hz() +
                cst::two_pi * (lb.hyperfine_shift_hz(Fb, I) - hf_a);
            alpha += ang * ang * d * d * resonance_factor(w_ba, w);
          }
        }
        shift = alpha / cst::hbar * to_hz;
      }
      out.by_sublevel[{F, mF}] = shift;
    }
  }
  return out;
}

StarkShiftResult stark_shift(const LevelScheme &scheme, double wavelength_nm,
                             double intensity, DetuningModel model) {
  const LevelShift g = level_shift(scheme, kGroundLevel, wavelength_nm, intensity, model);
  const LevelShift e = level_shift(scheme, kExcitedLevel, wavelength_nm, intensity, model);
  StarkShiftResult r;
  r.wavelength_nm = wavelength_nm;
  r.intensity_w_m2 = intensity;
  // Ground manifold: in the fine-structure model every sublevel is identical;
  // in the hyperfine-resolved model we report the manifold mean.
  r.ground_hz = g.mean();
  r.excited_hz = e.by_sublevel;
  return r;
}

double scalar_polarizability_au(const LevelScheme &scheme, std::string_view level,
                                double wavelength_nm) {
  // alpha = -2 eps0 c h * shift / I; one atomic unit = e^2 a0^2 / E_h.
  constexpr double unit_intensity = 1.0;
  const LevelShift s = level_shift(scheme, level, wavelength_nm, unit_intensity);
  const double alpha_si = -s.scalar_hz * 2.0 * cst::epsilon0 * cst::c * cst::h;
  constexpr double hartree = 4.3597447222071e-18;
  return alpha_si / (cst::ea0 * cst::ea0 / hartree);
}

double intensity_for_ground_shift(const LevelScheme &scheme, double wavelength_nm,
                                  double ground_shift_hz) {
  const double per_unit = stark_shift(scheme, wavelength_nm, 1.0).ground_hz;
  const double intensity = ground_shift_hz / per_unit;
  if (intensity < 0.0)
    throw DomainError("requested shift has the opposite sign of the light shift");
  return intensity;
}

double MagicCriterion::aggregate(const StarkShiftResult &r) const {
  switch (kind) {
  case Kind::ManifoldMean:
    return r.excited_manifold_mean(F);
  case Kind::AllMean:
    return r.excited_mean();
  case Kind::SingleSublevel: {
    auto it = r.excited_hz.find({F, mF});
    if (it == r.excited_hz.end())
      throw DomainError("no 6P3/2 sublevel F'=" + F.str() + " m=" + mF.str());
    return it->second;
  }
  }
  return 0.0;
}

std::string MagicCriterion::describe() const {
  switch (kind) {
  case Kind::ManifoldMean:
    return "F'=" + F.str() + " mean";
  case Kind::AllMean:
    return "all-F' mean";
  case Kind::SingleSublevel:
    return "F'=" + F.str() + " m_F'=" + mF.str();
  }
  return {};
}

double find_magic_wavelength(const LevelScheme &scheme, double lo, double hi,
                             const MagicCriterion &criterion,
                             DetuningModel model) {
  if (!(lo < hi))
    throw DomainError("bracket must satisfy lo < hi");
  const std::size_t g = scheme.level_index(kGroundLevel);
  const std::size_t e = scheme.level_index(kExcitedLevel);
  for (const auto &line : scheme.lines) {
    const bool relevant = line.lower == g || line.upper == g ||
                          line.lower == e || line.upper == e;
    if (relevant && line.wavelength_nm > lo - kPoleExclusionNm &&
        line.wavelength_nm < hi + kPoleExclusionNm) {
      std::ostringstream msg;
      msg << "bracket [" << lo << ", " << hi << "] nm contains the "
          << scheme.line_name(line) << " resonance at " << line.wavelength_nm
          << " nm";
      throw ResonanceError(msg.str(), scheme.line_name(line));
    }
  }
  auto mismatch = [&](double nm) {
    const auto r = stark_shift(scheme, nm, 1.0, model);
    return (criterion.aggregate(r) - r.ground_hz) / std::abs(r.ground_hz);
  };

  constexpr int samples = 200;
  int changes = 0;
  double a = lo, fa = mismatch(lo), bracket_lo = lo, bracket_hi = hi;
  double f_lo = fa, f_hi = 0.0;
  for (int i = 1; i <= samples; ++i) {
    const double b = lo + (hi - lo) * i / samples;
    const double fb = mismatch(b);
    if (fa == 0.0)
      return a;
    if ((fa < 0.0) != (fb < 0.0)) {
      ++changes;
      bracket_lo = a;
      bracket_hi = b;
      f_lo = fa;
      f_hi = fb;
    }
    a = b;
    fa = fb;
  }
  if (changes == 0)
    throw NoRootError("no magic crossing (" + criterion.describe() + ") in [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "] nm");
  if (changes > 1)
    throw AmbiguousBracketError(std::to_string(changes) +
                                " sign changes of d6P - d6S in bracket; narrow it");

  boost::uintmax_t iters = 200;
  auto [x0, x1] = boost::math::tools::toms748_solve(
      mismatch, bracket_lo, bracket_hi, f_lo, f_hi,
      boost::math::tools::eps_tolerance<double>(50), iters);
  return 0.5 * (x0 + x1);
}

double FortField::depth_mk() const { return depth_j / cst::k_B * 1e3; }

FortField FortField::from_ground_shift(double wavelength_nm, double shift_hz,
                                       double waist_m, double separation_m) {
  if (!(wavelength_nm > 0.0) || !(waist_m > 0.0))
    throw DomainError("wavelength and waist must be positive");
  FortField f;
  f.wavelength_nm = wavelength_nm;
  f.waist_m = waist_m;
  f.wavenumber = cst::two_pi / (wavelength_nm * 1e-9);
  f.ground_shift_hz = shift_hz;
  f.depth_j = cst::h * std::abs(shift_hz);
  f.mirror_separation_m = separation_m;
  return f;
}

FortField FortField::from_depth_mk(double wavelength_nm, double depth_mk,
                                   double waist_m, double separation_m) {
  return from_ground_shift(wavelength_nm, -depth_mk * 1e-3 * cst::k_B / cst::h,
                           waist_m, separation_m);
}

FortField FortField::from_intensity(const LevelScheme &scheme, double wavelength_nm,
                                    double peak_intensity, double waist_m,
                                    double separation_m) {
  const auto r = stark_shift(scheme, wavelength_nm, peak_intensity);
  FortField f = from_ground_shift(wavelength_nm, r.ground_hz, waist_m, separation_m);
  f.peak_intensity_w_m2 = peak_intensity;
  double worst = 0.0;
  for (const auto &[s, v] : r.excited_hz)
    worst = std::max(worst, std::abs(v - r.ground_hz));
  f.residual_shift_hz = worst;
  return f;
}

double scaled_waist(double waist_m, double from_nm, double to_nm) {
  return waist_m * std::sqrt(to_nm / from_nm);
}

double fort_potential(const FortField &fort, const Eigen::Vector3d &p) {
  const double c = std::cos(fort.wavenumber * p.x());
  const double rho2 = p.y() * p.y() + p.z() * p.z();
  return -fort.depth_j * c * c * std::exp(-2.0 * rho2 / (fort.waist_m * fort.waist_m));
}

Eigen::Vector3d fort_force(const FortField &fort, const Eigen::Vector3d &p,
                           double depth_scale) {
  const double k = fort.wavenumber;
  const double w2 = fort.waist_m * fort.waist_m;
  const double s2 = std::sin(2.0 * k * p.x());
  const double c = std::cos(k * p.x());
  const double env = std::exp(-2.0 * (p.y() * p.y() + p.z() * p.z()) / w2);
  const double u0 = fort.depth_j * depth_scale;
  // F = -grad U with U = -U0 c^2 env.
  const double radial = -u0 * c * c * env * 4.0 / w2;
  return {-u0 * env * k * s2, radial * p.y(), radial * p.z()};
}

TrapGeometryReport trap_frequencies(const FortField &fort, double mass) {
  if (!(fort.depth_j > 0.0))
    throw DomainError("trap depth must be positive");
  if (!(mass > 0.0))
    throw DomainError("mass must be positive");
  TrapGeometryReport r;
  r.axial_hz = fort.wavenumber / cst::two_pi * std::sqrt(2.0 * fort.depth_j / mass);
  r.radial_hz = std::sqrt(4.0 * fort.depth_j / (mass * fort.waist_m * fort.waist_m)) /
                cst::two_pi;

  auto curvature = [&](const Eigen::Vector3d &dir, double step) {
    const Eigen::Vector3d o = Eigen::Vector3d::Zero();
    return (fort_potential(fort, o + step * dir) - 2.0 * fort_potential(fort, o) +
            fort_potential(fort, o - step * dir)) /
           (step * step);
  };
  const double hx = 1e-4 / fort.wavenumber;
  const double hr = 1e-4 * fort.waist_m;
  r.axial_fd_hz = std::sqrt(curvature(Eigen::Vector3d::UnitX(), hx) / mass) / cst::two_pi;
  r.radial_fd_hz = std::sqrt(curvature(Eigen::Vector3d::UnitY(), hr) / mass) / cst::two_pi;
  r.residual_shift_hz = fort.residual_shift_hz;

  constexpr double tol = 1e-6;
  if (std::abs(r.axial_fd_hz / r.axial_hz - 1.0) > tol ||
      std::abs(r.radial_fd_hz / r.radial_hz - 1.0) > tol)
    throw NumericalError("closed-form trap frequencies disagree with potential curvature",
                         std::abs(r.axial_fd_hz / r.axial_hz - 1.0));
  return r;
}

FortField depth_from_input_power(double input_power_w, double finesse,
                                 double waist_m, const LevelScheme &scheme,
                                 double wavelength_nm, double separation_m) {
  if (input_power_w < 0.0)
    throw DomainError("input power must be non-negative");
  if (!(finesse > 1.0))
    throw DomainError("finesse must exceed 1");
  const double circulating = input_power_w * finesse / cst::pi;
  const double peak = 8.0 * circulating / (cst::pi * waist_m * waist_m);
  return FortField::from_intensity(scheme, wavelength_nm, peak, waist_m, separation_m);
}

} // namespace cqed
