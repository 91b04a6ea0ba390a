#include "cqed/scenario.hpp"

#include "cqed/atoms.hpp"
#include "cqed/cavity.hpp"
#include "cqed/constants.hpp"
#include "cqed/errors.hpp"
#include "cqed/motion.hpp"
#include "cqed/pumping.hpp"
#include "cqed/random.hpp"
#include "cqed/records.hpp"
#include "cqed/stark.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#ifndef CQED_VERSION
#define CQED_VERSION "0.0.0"
#endif

namespace cqed {

namespace cst = constants;
using json = nlohmann::json;

const char *version() { return CQED_VERSION; }

const std::vector<std::string> &scenario_tags() {
  static const std::vector<std::string> tags = {
      "stark-scan", "magic",     "transmit",  "staircase-levels", "staircase",
      "fit-lifetime", "lifetime", "repump",   "heating-budget"};
  return tags;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

// ---------------------------------------------------------------------------
// Field-level configuration reading

struct Errors {
  std::vector<std::string> list;
  void add(const std::string &path, const std::string &msg) { list.push_back(path + ": " + msg); }
};

class Block {
public:
  Block(const json &root, const std::string &name, Errors &err, json &effective)
      : path_(name), err_(err), eff_(effective[name]) {
    eff_ = json::object();
    if (root.contains(name)) {
      if (!root[name].is_object())
        err_.add(path_, "must be an object");
      else
        j_ = &root[name];
    }
  }

  double number(const std::string &key, double def,
                const std::function<bool(double)> &ok = {}, const char *req = "") {
    used_.insert(key);
    double v = def;
    if (auto *x = find(key)) {
      if (!x->is_number()) {
        err_.add(field(key), "expected a number");
        return def;
      }
      v = x->get<double>();
    }
    if (ok && !ok(v))
      err_.add(field(key), std::string("must be ") + req);
    eff_[key] = v;
    return v;
  }

  long long integer(const std::string &key, long long def, long long lo, long long hi) {
    used_.insert(key);
    long long v = def;
    if (auto *x = find(key)) {
      if (!x->is_number_integer()) {
        err_.add(field(key), "expected an integer");
        return def;
      }
      v = x->get<long long>();
    }
    if (v < lo || v > hi)
      err_.add(field(key), "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    eff_[key] = v;
    return v;
  }

  std::string choice(const std::string &key, const std::string &def,
                     const std::vector<std::string> &allowed) {
    used_.insert(key);
    std::string v = def;
    if (auto *x = find(key)) {
      if (!x->is_string()) {
        err_.add(field(key), "expected a string");
        return def;
      }
      v = x->get<std::string>();
    }
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      std::string list;
      for (const auto &a : allowed)
        list += (list.empty() ? "" : ", ") + a;
      err_.add(field(key), "must be one of " + list);
    }
    eff_[key] = v;
    return v;
  }

  std::vector<double> numbers(const std::string &key, const std::vector<double> &def,
                              const std::function<bool(double)> &ok = {},
                              const char *req = "") {
    used_.insert(key);
    std::vector<double> v = def;
    if (auto *x = find(key)) {
      if (!x->is_array()) {
        err_.add(field(key), "expected an array of numbers");
        return def;
      }
      v.clear();
      for (const auto &e : *x) {
        if (!e.is_number()) {
          err_.add(field(key), "expected an array of numbers");
          return def;
        }
        v.push_back(e.get<double>());
      }
    }
    if (ok)
      for (double d : v)
        if (!ok(d)) {
          err_.add(field(key), std::string("entries must be ") + req);
          break;
        }
    eff_[key] = v;
    return v;
  }

  std::optional<std::string> text(const std::string &key) {
    used_.insert(key);
    if (auto *x = find(key)) {
      if (!x->is_string()) {
        err_.add(field(key), "expected a string");
        return std::nullopt;
      }
      eff_[key] = x->get<std::string>();
      return x->get<std::string>();
    }
    return std::nullopt;
  }

  std::optional<double> optional_number(const std::string &key,
                                        const std::function<bool(double)> &ok,
                                        const char *req) {
    used_.insert(key);
    if (auto *x = find(key)) {
      if (!x->is_number()) {
        err_.add(field(key), "expected a number");
        return std::nullopt;
      }
      const double v = x->get<double>();
      if (!ok(v))
        err_.add(field(key), std::string("must be ") + req);
      eff_[key] = v;
      return v;
    }
    return std::nullopt;
  }

  void error(const std::string &key, const std::string &msg) { err_.add(field(key), msg); }

  ~Block() {
    if (j_)
      for (const auto &[k, v] : j_->items())
        if (!used_.count(k))
          err_.add(field(k), "unknown field");
  }

private:
  const json *find(const std::string &key) const {
    if (j_ && j_->contains(key))
      return &(*j_)[key];
    return nullptr;
  }
  std::string field(const std::string &key) const { return path_ + "." + key; }

  const json *j_ = nullptr;
  std::string path_;
  Errors &err_;
  json &eff_;
  std::set<std::string> used_;
};

const auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
const auto non_negative = [](double v) { return v >= 0.0 && std::isfinite(v); };
const auto finite = [](double v) { return std::isfinite(v); };
const auto fraction = [](double v) { return v >= 0.0 && v <= 1.0; };

// ---------------------------------------------------------------------------
// Typed parameter blocks

struct FortParams {
  double wavelength_nm, depth_mk, waist_um, separation_um;
  std::optional<double> input_power_mw;
  double finesse;
};

FortParams read_fort(const json &root, Errors &err, json &eff) {
  Block b(root, "fort", err, eff);
  FortParams p;
  p.wavelength_nm = b.number("wavelength_nm", 935.6, positive, "positive");
  p.depth_mk = b.number("depth_mk", 2.3, positive, "positive");
  p.waist_um = b.number("waist_um", 25.0, positive, "positive");
  p.separation_um = b.number("mirror_separation_um", 43.0, positive, "positive");
  p.input_power_mw = b.optional_number("input_power_mw", positive, "positive");
  p.finesse = b.number("finesse", 2200.0, [](double v) { return v > 1.0; }, "greater than 1");
  return p;
}

FortField make_fort(const FortParams &p, const LevelScheme &scheme) {
  if (p.input_power_mw)
    return depth_from_input_power(*p.input_power_mw * 1e-3, p.finesse, p.waist_um * 1e-6,
                                  scheme, p.wavelength_nm, p.separation_um * 1e-6);
  return FortField::from_depth_mk(p.wavelength_nm, p.depth_mk, p.waist_um * 1e-6,
                                  p.separation_um * 1e-6);
}

struct CavityParams {
  CavitySystem system;
  CoupledTransition transition;
};

CavityParams read_cavity(const json &root, Errors &err, json &eff) {
  Block b(root, "cavity", err, eff);
  const CavitySystem d = CavitySystem::experiment_defaults();
  CavityParams p;
  p.system = d;
  p.system.g0 = cst::two_pi * 1e6 * b.number("g0_mhz", d.g0 / cst::two_pi / 1e6, positive, "positive");
  p.system.kappa = cst::two_pi * 1e6 * b.number("kappa_mhz", d.kappa / cst::two_pi / 1e6, positive, "positive");
  p.system.gamma = cst::two_pi * 1e6 * b.number("gamma_mhz", d.gamma / cst::two_pi / 1e6, positive, "positive");
  p.system.length_m = 1e-6 * b.number("length_um", d.length_m * 1e6, positive, "positive");
  p.system.waist_m = 1e-6 * b.number("waist_um", d.waist_m * 1e6, positive, "positive");
  p.system.finesse = b.number("finesse", d.finesse, [](double v) { return v > 1.0; }, "greater than 1");
  p.system.wavelength_nm = b.number("wavelength_nm", d.wavelength_nm, positive, "positive");
  const std::string t = b.choice("transition", "4-5", {"4-5", "4-4"});
  p.transition = t == "4-4" ? CoupledTransition::F4ToF4 : CoupledTransition::F4ToF5;
  return p;
}

struct HeatingParams {
  double recoil_uk_per_s, parametric_tau_s, raman_rate, background_rate, raman_jump_fraction;
};

HeatingParams read_heating(const json &root, Errors &err, json &eff) {
  Block b(root, "heating", err, eff);
  HeatingParams p;
  p.recoil_uk_per_s = b.number("recoil_uk_per_s", 11.0, non_negative, "non-negative");
  p.parametric_tau_s = b.number("parametric_tau_s", 1.6, non_negative, "non-negative (0 disables)");
  p.raman_rate = b.number("raman_rate_per_s", 0.0, non_negative, "non-negative");
  p.background_rate = b.number("background_rate_per_s", kDefaultBackgroundRate, non_negative,
                               "non-negative");
  p.raman_jump_fraction = b.number("raman_jump_fraction", 0.1, positive, "positive");
  return p;
}

HeatingBudget make_heating(const HeatingParams &p, double nu_axial) {
  HeatingBudget h;
  h.recoil_k_per_s = p.recoil_uk_per_s * 1e-6;
  if (p.parametric_tau_s > 0.0)
    h.intensity_noise = NoiseSpectrum::white_for_time(p.parametric_tau_s, nu_axial);
  h.raman_rate = p.raman_rate;
  h.background_rate = p.background_rate;
  h.raman_jump_fraction = p.raman_jump_fraction;
  return h;
}

DetuningModel read_model(Block &b) {
  const std::string m = b.choice("model", "fine-structure", {"fine-structure", "hyperfine-resolved"});
  return m == "hyperfine-resolved" ? DetuningModel::HyperfineResolved : DetuningModel::FineStructure;
}

const char *model_name(DetuningModel m) {
  return m == DetuningModel::HyperfineResolved ? "hyperfine-resolved" : "fine-structure";
}

// ---------------------------------------------------------------------------
// Output helpers

std::string fmt(double v) {
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct Artifact {
  std::string name;
  std::string content;
};

class Csv {
public:
  explicit Csv(const std::string &provenance) { out_ << provenance; }
  Csv &header(const std::vector<std::string> &cols) {
    row(cols);
    return *this;
  }
  void row(const std::vector<std::string> &cells) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }
  void values(const std::vector<double> &cells) {
    std::vector<std::string> s;
    for (double v : cells)
      s.push_back(fmt(v));
    row(s);
  }
  std::string str() const { return out_.str(); }

private:
  std::ostringstream out_;
};

struct Context {
  const ScenarioConfig &config;
  json effective; // parameter blocks with defaults filled in
  LevelScheme scheme;
  std::string hash;
  std::string provenance;
  std::vector<Artifact> artifacts;
  std::vector<std::pair<std::filesystem::path, std::function<void(const std::filesystem::path &)>>> writers;
  std::ostringstream summary;
};

// ---------------------------------------------------------------------------
// Scenario parsing. Each parser reads its blocks into `eff` and returns a
// closure that performs the computation.

using Runner = std::function<void(Context &)>;

Runner parse_stark_scan(const json &root, Errors &err, json &eff) {
  Block b(root, "stark-scan", err, eff);
  const double lo = b.number("lambda_min_nm", 925.0, positive, "positive");
  const double hi = b.number("lambda_max_nm", 945.0, positive, "positive");
  const long long n = b.integer("points", 201, 2, 1000000);
  const double ref = b.number("reference_nm", 935.6, positive, "positive");
  const DetuningModel model = read_model(b);
  if (lo >= hi)
    b.error("lambda_max_nm", "must exceed lambda_min_nm");
  return [=](Context &ctx) {
    const double intensity = 1e9; // ratios do not depend on it
    const double reference = stark_shift(ctx.scheme, ref, intensity, model).ground_hz;
    Csv csv(ctx.provenance);
    std::vector<std::string> cols = {"wavelength_nm", "d6S_norm"};
    const auto probe = stark_shift(ctx.scheme, lo, intensity, model);
    std::vector<HalfInt> manifolds;
    for (const auto &[s, v] : probe.excited_hz)
      if (manifolds.empty() || manifolds.back() != s.F)
        manifolds.push_back(s.F);
    for (HalfInt F : manifolds)
      cols.push_back("d6P_F" + F.str() + "_mean_norm");
    for (const auto &[s, v] : probe.excited_hz)
      cols.push_back("d6P_F" + s.F.str() + "_m" + s.mF.str() + "_norm");
    csv.header(cols);
    for (long long k = 0; k < n; ++k) {
      const double lam = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
      const auto r = stark_shift(ctx.scheme, lam, intensity, model).normalized_to(reference);
      std::vector<double> row = {lam, r.ground_hz};
      for (HalfInt F : manifolds)
        row.push_back(r.excited_manifold_mean(F));
      for (const auto &[s, v] : r.excited_hz)
        row.push_back(v);
      csv.values(row);
    }
    ctx.artifacts.push_back({"stark_scan.csv", csv.str()});
    ctx.summary << n << " wavelengths in [" << fmt(lo) << ", " << fmt(hi) << "] nm ("
                << model_name(model) << ")\n";
  };
}

MagicCriterion read_criterion(Block &b) {
  const std::string kind = b.choice("criterion", "manifold-mean", {"manifold-mean", "all-mean", "sublevel"});
  const long long F = b.integer("F", 4, 2, 5);
  const long long m = b.integer("mF", 0, -5, 5);
  if (kind == "all-mean")
    return MagicCriterion::all_mean();
  if (kind == "sublevel") {
    if (std::llabs(m) > F)
      b.error("mF", "must satisfy |mF| <= F");
    return MagicCriterion::sublevel(HalfInt::integer(static_cast<int>(F)),
                                    HalfInt::integer(static_cast<int>(m)));
  }
  return MagicCriterion::manifold_mean(HalfInt::integer(static_cast<int>(F)));
}

Runner parse_magic(const json &root, Errors &err, json &eff) {
  Block b(root, "magic", err, eff);
  const auto bracket = b.numbers("bracket_nm", {925.0, 945.0}, positive, "positive");
  if (bracket.size() != 2 || (bracket.size() == 2 && bracket[0] >= bracket[1]))
    b.error("bracket_nm", "must be [lo, hi] with lo < hi");
  const DetuningModel model = read_model(b);
  const MagicCriterion crit = read_criterion(b);
  return [=](Context &ctx) {
    const double lam = find_magic_wavelength(ctx.scheme, bracket[0], bracket[1], crit, model);
    const DetuningModel other = model == DetuningModel::FineStructure
                                    ? DetuningModel::HyperfineResolved
                                    : DetuningModel::FineStructure;
    const double lam_other = find_magic_wavelength(ctx.scheme, bracket[0], bracket[1], crit, other);
    Csv csv(ctx.provenance);
    csv.header({"criterion", "model", "bracket_lo_nm", "bracket_hi_nm", "magic_nm",
                "other_model_magic_nm", "model_difference_nm"});
    csv.row({crit.describe(), model_name(model), fmt(bracket[0]), fmt(bracket[1]), fmt(lam),
             fmt(lam_other), fmt(lam_other - lam)});
    ctx.artifacts.push_back({"magic.csv", csv.str()});
    ctx.summary << "magic wavelength " << fmt(lam) << " nm (" << crit.describe() << ", "
                << model_name(model) << ")\n";
  };
}

std::vector<double> couplings_for(const CavitySystem &s, long long atoms, double frac) {
  return std::vector<double>(static_cast<std::size_t>(atoms), frac * s.g0);
}

Runner parse_transmit(const json &root, Errors &err, json &eff) {
  const CavityParams cav = read_cavity(root, err, eff);
  Block b(root, "transmit", err, eff);
  const double lo = b.number("detuning_min_mhz", -60.0, finite, "finite");
  const double hi = b.number("detuning_max_mhz", 60.0, finite, "finite");
  const long long n = b.integer("points", 121, 2, 100000);
  const long long atoms = b.integer("atoms", 1, 0, static_cast<long long>(kMaxStaircaseAtoms));
  const double frac = b.number("coupling_fraction", 1.0, non_negative, "non-negative");
  const double mbar = b.number("mbar_empty", 0.01, positive, "positive");
  const double dc = b.number("cavity_detuning_mhz", 0.0, finite, "finite");
  const std::string solver = b.choice("solver", "weak", {"weak", "master", "both"});
  if (lo >= hi)
    b.error("detuning_max_mhz", "must exceed detuning_min_mhz");
  if (solver != "weak" && atoms > static_cast<long long>(kMaxMasterEquationAtoms))
    b.error("atoms", "master equation supports at most " +
                         std::to_string(kMaxMasterEquationAtoms) + " atoms");
  return [=](Context &ctx) {
    const CavitySystem &sys = cav.system;
    sys.validate();
    const auto g = couplings_for(sys, atoms, frac);
    DriveConfig drive;
    drive.epsilon = epsilon_for_empty_mbar(sys, mbar);
    drive.cavity_detuning = cst::two_pi * 1e6 * dc;
    drive.transition = cav.transition;
    Csv csv(ctx.provenance);
    std::vector<std::string> cols = {"probe_detuning_mhz", "mbar_empty"};
    const bool weak = solver != "master", master = solver != "weak";
    if (weak)
      for (const char *c : {"mbar_weak", "ratio_weak", "flux_weak_per_s"})
        cols.push_back(c);
    if (master)
      for (const char *c : {"mbar_master", "ratio_master", "flux_master_per_s", "fock_cutoff"})
        cols.push_back(c);
    csv.header(cols);
    for (long long k = 0; k < n; ++k) {
      const double dp = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
      drive.probe_detuning = cst::two_pi * 1e6 * dp;
      const double empty = empty_cavity_mbar(sys, drive);
      std::vector<double> row = {dp, empty};
      if (weak) {
        const auto r = transmission_weak_drive(sys, drive, g);
        row.insert(row.end(), {r.mbar, r.mbar / empty, r.flux});
      }
      if (master) {
        const auto r = transmission_master_equation_adaptive(sys, drive, g);
        row.insert(row.end(), {r.mbar, r.mbar / empty, r.flux,
                               static_cast<double>(r.photon_distribution.size())});
      }
      csv.values(row);
    }
    ctx.artifacts.push_back({"transmit.csv", csv.str()});
    ctx.summary << n << " probe detunings, " << atoms << " atom(s), solver " << solver << "\n";
  };
}

Runner parse_staircase_levels(const json &root, Errors &err, json &eff) {
  const CavityParams cav = read_cavity(root, err, eff);
  Block b(root, "staircase-levels", err, eff);
  const long long n_max = b.integer("n_max", 3, 0, static_cast<long long>(kMaxStaircaseAtoms));
  const double frac = b.number("coupling_fraction", 0.08, non_negative, "non-negative");
  const double mbar = b.number("mbar_empty", 0.01, positive, "positive");
  const double dp = b.number("probe_detuning_mhz", 0.0, finite, "finite");
  const double bw = b.number("bin_width_s", kDefaultBinWidthS, positive, "positive");
  return [=](Context &ctx) {
    const CavitySystem &sys = cav.system;
    sys.validate();
    DriveConfig drive;
    drive.epsilon = epsilon_for_empty_mbar(sys, mbar);
    drive.probe_detuning = cst::two_pi * 1e6 * dp;
    drive.transition = cav.transition;
    const auto levels = staircase_levels(sys, drive, static_cast<std::size_t>(n_max), frac * sys.g0);
    Csv csv(ctx.provenance);
    csv.header({"atoms", "mbar", "flux_per_s", "counts_per_bin", "ratio_to_empty"});
    for (std::size_t N = 0; N < levels.size(); ++N)
      csv.values({static_cast<double>(N), levels[N], 2.0 * sys.kappa * levels[N],
                  2.0 * sys.kappa * levels[N] * bw, levels[N] / levels[0]});
    ctx.artifacts.push_back({"staircase_levels.csv", csv.str()});
    ctx.summary << "levels for N = 0.." << n_max << "\n";
  };
}

NoiseModel parse_noise(const std::string &s) { return noise_model_from_string(s); }

Runner parse_staircase(const json &root, Errors &err, json &eff) {
  const CavityParams cav = read_cavity(root, err, eff);
  Block b(root, "staircase", err, eff);
  const auto input = b.text("input");
  const long long initial = b.integer("initial_atoms", 3, 0, static_cast<long long>(kMaxStaircaseAtoms));
  const auto losses = b.numbers("loss_times_s", {0.3, 0.6, 0.9}, positive, "positive");
  const double duration = b.number("duration_s", 1.2, positive, "positive");
  const double frac = b.number("coupling_fraction", 0.08, non_negative, "non-negative");
  const double mbar = b.number("mbar_empty", 0.01, positive, "positive");
  const double bw = b.number("bin_width_s", kDefaultBinWidthS, positive, "positive");
  const std::string noise = b.choice("noise", "poisson", {"poisson", "noiseless"});
  const double eff_det = b.number("detection_efficiency", 1.0, fraction, "in [0, 1]");
  const double pen = b.number("penalty_factor", 1.0, positive, "positive");
  const long long min_seg = b.integer("min_segment_bins", 3, 1, 1000000);
  if (input && !std::filesystem::exists(*input))
    b.error("input", "file '" + *input + "' does not exist");
  if (!input && static_cast<long long>(losses.size()) > initial)
    b.error("loss_times_s", "more loss times than initial atoms");
  if (!input && !std::is_sorted(losses.begin(), losses.end()))
    b.error("loss_times_s", "must be sorted");
  return [=](Context &ctx) {
    PhotonRecord record;
    std::vector<double> level_counts;
    if (input) {
      record = read_record(*input);
      if (record.truth)
        level_counts = record.truth->level_counts;
    } else {
      const CavitySystem &sys = cav.system;
      sys.validate();
      DriveConfig drive;
      drive.epsilon = epsilon_for_empty_mbar(sys, mbar);
      drive.transition = cav.transition;
      const auto levels = staircase_levels(sys, drive, static_cast<std::size_t>(initial), frac * sys.g0);
      SynthesisConfig sc;
      sc.duration_s = duration;
      sc.bin_width_s = bw;
      sc.noise = parse_noise(noise);
      sc.detection_efficiency = eff_det;
      Rng rng = make_rng(ctx.config.seed, 0, 0x5354);
      record = synthesize_record(levels, sys.kappa, static_cast<int>(initial), losses, sc, rng);
      level_counts = record.truth->level_counts;
      const std::string header = ctx.provenance;
      ctx.writers.push_back({"staircase_record.csv", [record, header](const std::filesystem::path &p) {
                               write_record(p, record, header);
                             }});
    }
    PenaltyPolicy policy;
    policy.factor = pen;
    policy.min_segment_bins = static_cast<std::size_t>(min_seg);
    const auto seg = segment_staircase(record, policy, level_counts);
    Csv csv(ctx.provenance);
    csv.header({"segment", "start_s", "end_s", "mean_counts_per_bin", "atoms"});
    for (std::size_t s = 0; s < seg.segments(); ++s) {
      const std::size_t start = s == 0 ? 0 : seg.change_points[s - 1];
      const std::size_t end = s < seg.change_points.size() ? seg.change_points[s] : record.samples.size();
      csv.row({std::to_string(s), fmt(start * record.bin_width_s), fmt(end * record.bin_width_s),
               fmt(seg.levels[s]), seg.levels_only ? "" : std::to_string(seg.atom_numbers[s])});
    }
    ctx.artifacts.push_back({"staircase_segments.csv", csv.str()});
    ctx.summary << seg.segments() << " segment(s) in " << record.samples.size() << " bins";
    if (!seg.levels_only) {
      ctx.summary << ", atoms";
      for (int a : seg.atom_numbers)
        ctx.summary << ' ' << a;
    }
    ctx.summary << "\n";
  };
}

void emit_fit(Context &ctx, const LifetimeFit &fit) {
  Csv csv(ctx.provenance);
  csv.header({"tau_s", "tau_error_s", "p0", "p0_error", "deviance", "dof"});
  csv.values({fit.tau, fit.tau_error, fit.p0, fit.p0_error, fit.deviance, static_cast<double>(fit.dof)});
  ctx.artifacts.push_back({"lifetime_fit.csv", csv.str()});
  ctx.summary << "tau = " << fmt(fit.tau) << " +- " << fmt(fit.tau_error) << " s, P0 = "
              << fmt(fit.p0) << "\n";
}

Runner parse_fit_lifetime(const json &root, Errors &err, json &eff) {
  Block b(root, "fit-lifetime", err, eff);
  const auto input = b.text("input");
  if (!input)
    b.error("input", "required");
  else if (!std::filesystem::exists(*input))
    b.error("input", "file '" + *input + "' does not exist");
  return [=](Context &ctx) { emit_fit(ctx, fit_lifetime(read_survival_csv(*input))); };
}

Runner parse_lifetime(const json &root, Errors &err, json &eff) {
  const FortParams fp = read_fort(root, err, eff);
  const HeatingParams hp = read_heating(root, err, eff);
  Block b(root, "lifetime", err, eff);
  const auto delays = b.numbers("delays_s", {0.05, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0}, non_negative,
                                "non-negative");
  const long long triggers = b.integer("triggers_per_delay", 200, 1, 100000000);
  const double mean_atoms = b.number("mean_atoms", 0.30, positive, "positive");
  const double pulse_us = b.number("cooling_pulse_us", 100.0, positive, "positive");
  const double drop_mm = b.number("drop_height_mm", 5.0, non_negative, "non-negative");
  const double det = b.number("detection_efficiency", 0.95, fraction, "in [0, 1]");
  const std::string model = b.choice("model", "energy-space", {"energy-space", "trajectory"});
  const double estep = b.number("energy_step_s", 1e-3, positive, "positive");
  if (delays.empty())
    b.error("delays_s", "must not be empty");
  return [=](Context &ctx) {
    TrapContext trap{make_fort(fp, ctx.scheme), ctx.scheme.mass_kg};
    const auto freq = trap_frequencies(trap.fort, trap.mass_kg);
    SurvivalConfig sc;
    sc.delays = delays;
    sc.triggers_per_delay = static_cast<std::size_t>(triggers);
    sc.loading.mean_atoms = mean_atoms;
    sc.loading.cooling_pulse_s = pulse_us * 1e-6;
    sc.loading.drop_height_m = drop_mm * 1e-3;
    sc.detection.efficiency = det;
    sc.heating = make_heating(hp, freq.axial_hz);
    sc.model = model == "trajectory" ? SurvivalModel::Trajectory : SurvivalModel::EnergySpace;
    sc.energy_step_s = estep;
    sc.step.dt = StepControl::max_step(freq.axial_hz);
    sc.step.scheme = Integrator::VelocityVerlet;
    sc.seed = ctx.config.seed;
    sc.execution = default_execution();
    const auto curve = survival_experiment(trap, sc);
    Csv csv(ctx.provenance);
    csv.header({"delay_s", "successes", "trials", "probability", "error"});
    for (std::size_t k = 0; k < curve.data.delays.size(); ++k)
      csv.values({curve.data.delays[k], curve.data.successes[k], curve.data.trials[k],
                  curve.probability[k], curve.error[k]});
    ctx.artifacts.push_back({"survival.csv", csv.str()});
    emit_fit(ctx, curve.fit);
    const auto bound = second_atom_bound(mean_atoms);
    if (!bound.valid)
      ctx.summary << "warning: " << bound.warning << "\n";
  };
}

PumpingState parse_initial(const std::string &s) {
  if (s == "unpolarized-F3")
    return PumpingState::unpolarized(3);
  return PumpingState::unpolarized(4);
}

Runner parse_repump(const json &root, Errors &err, json &eff) {
  const FortParams fp = read_fort(root, err, eff);
  Block b(root, "repump", err, eff);
  const std::string initial = b.choice("initial", "unpolarized-F3", {"unpolarized-F3", "unpolarized-F4"});
  const double duration = b.number("duration_s", 0.5, positive, "positive");
  const long long samples = b.integer("samples", 51, 4, 1000000);
  const double ell = b.number("ellipticity", kDefaultEllipticity, fraction, "in [0, 1]");
  const std::string method = b.choice("method", "dopri5", {"dopri5", "matrix-exponential"});
  return [=](Context &ctx) {
    const FortField fort = make_fort(fp, ctx.scheme);
    const auto rates = raman_scattering_rates(ctx.scheme, fort, ell);
    const auto series = repump_dynamics(rates, parse_initial(initial), duration,
                                        static_cast<int>(samples),
                                        method == "dopri5" ? EvolutionMethod::Dopri5
                                                           : EvolutionMethod::MatrixExponential);
    Csv csv(ctx.provenance);
    csv.header({"t_D_s", "f4", "f4_two_level", "total"});
    for (std::size_t k = 0; k < series.t.size(); ++k)
      csv.values({series.t[k], series.f4[k], series.two_level_f4(series.t[k]), series.total[k]});
    ctx.artifacts.push_back({"repump.csv", csv.str()});
    Csv sum(ctx.provenance);
    sum.header({"fitted_tau_s", "fitted_tau_error_s", "fitted_f_eq", "two_level_tau_s",
                "two_level_f_eq", "gamma_3_to_4_per_s", "gamma_4_to_3_per_s",
                "f_changing_per_s", "mf_changing_per_s", "rayleigh_per_s"});
    sum.values({series.fitted_tau, series.fitted_tau_error, series.fitted_f_eq,
                series.two_level_tau, series.two_level_f_eq, rates.rate_3_to_4(),
                rates.rate_4_to_3(), rates.f_changing, rates.mf_changing, rates.rayleigh});
    ctx.artifacts.push_back({"repump_summary.csv", sum.str()});
    ctx.summary << "tau_R fitted " << fmt(series.fitted_tau) << " s, two-level "
                << fmt(series.two_level_tau) << " s\n";
  };
}

Runner parse_heating_budget(const json &root, Errors &err, json &eff) {
  const FortParams fp = read_fort(root, err, eff);
  const HeatingParams hp = read_heating(root, err, eff);
  Block b(root, "heating-budget", err, eff);
  const double ell = b.number("ellipticity", kDefaultEllipticity, fraction, "in [0, 1]");
  const long long traj = b.integer("raman_trajectories", 4000, 2, 100000000);
  const double rdur = b.number("raman_duration_s", 20.0, positive, "positive");
  return [=](Context &ctx) {
    const FortField fort = make_fort(fp, ctx.scheme);
    const auto freq = trap_frequencies(fort, ctx.scheme.mass_kg);
    const HeatingBudget hb = make_heating(hp, freq.axial_hz);
    const auto rates = raman_scattering_rates(ctx.scheme, fort, ell);
    double fastest = 0.0;
    for (int i = 0; i < kGroundSublevels; ++i) {
      double out = 0.0;
      for (int j = 0; j < kGroundSublevels; ++j)
        if ((i >= 7) != (j >= 7))
          out += rates.rate(j, i);
      fastest = std::max(fastest, out);
    }
    const double total_scatter = rates.f_changing + rates.mf_changing + rates.rayleigh;
    const double er = recoil_energy(fort.wavelength_nm, ctx.scheme.mass_kg);
    const double recoil_calc = 2.0 * er * total_scatter / cst::k_B;
    const auto two = raman_heating_two_state(fastest);
    MultilevelHeatingConfig mc;
    mc.trajectories = static_cast<std::size_t>(traj);
    mc.duration = rdur;
    mc.seed = ctx.config.seed;
    const auto multi = raman_heating_multilevel(rates, mc);
    const double prate_ax = hb.parametric_rate(freq.axial_hz);
    const double prate_rad = parametric_heating_rate(hb.intensity_noise, freq.radial_hz);

    Csv csv(ctx.provenance);
    csv.header({"quantity", "value", "unit"});
    auto line = [&](const char *q, double v, const char *u) { csv.row({q, fmt(v), u}); };
    line("depth", fort.depth_mk(), "mK");
    line("nu_axial", freq.axial_hz, "Hz");
    line("nu_radial", freq.radial_hz, "Hz");
    line("recoil_configured", hb.recoil_k_per_s * 1e6, "uK/s");
    line("recoil_from_scattering", recoil_calc * 1e6, "uK/s");
    line("photon_scattering_rate", total_scatter, "1/s");
    line("parametric_rate_axial", prate_ax, "1/s");
    line("tau_p_axial", prate_ax > 0 ? 1.0 / prate_ax : INFINITY, "s");
    line("parametric_rate_radial", prate_rad, "1/s");
    line("raman_gamma_s_mean", rates.f_changing, "1/s");
    line("raman_gamma_s_fastest", fastest, "1/s");
    line("raman_mf_changing_mean", rates.mf_changing, "1/s");
    line("raman_two_state_rate", two.rate, "1/s");
    line("raman_two_state_heating_time", two.heating_time(), "s");
    line("raman_multilevel_rate", multi.rate, "1/s");
    line("raman_multilevel_error", multi.error, "1/s");
    line("raman_multilevel_eigenvalue", raman_heating_growth_rate(rates), "1/s");
    line("raman_configured", hb.raman_rate, "1/s");
    line("background_rate", hb.background_rate, "1/s");
    ctx.artifacts.push_back({"heating_budget.csv", csv.str()});
    ctx.summary << "recoil " << fmt(recoil_calc * 1e6) << " uK/s, tau_p " << fmt(1.0 / prate_ax)
                << " s, Raman two-state " << fmt(two.rate) << " /s vs multilevel "
                << fmt(multi.rate) << " /s\n";
    if (!multi.warning.empty())
      ctx.summary << "warning: " << multi.warning << "\n";
  };
}

struct Parsed {
  json effective;
  Runner runner;
  std::filesystem::path atom_data;
};

Parsed parse(const ScenarioConfig &config) {
  Errors err;
  Parsed out;
  out.effective = json::object();
  const json &root = config.params;
  if (!root.is_object())
    err.add("params", "must be an object");
  static const std::map<std::string, std::function<Runner(const json &, Errors &, json &)>> parsers = {
      {"stark-scan", parse_stark_scan},
      {"magic", parse_magic},
      {"transmit", parse_transmit},
      {"staircase-levels", parse_staircase_levels},
      {"staircase", parse_staircase},
      {"fit-lifetime", parse_fit_lifetime},
      {"lifetime", parse_lifetime},
      {"repump", parse_repump},
      {"heating-budget", parse_heating_budget},
  };
  auto it = parsers.find(config.scenario);
  if (it == parsers.end()) {
    std::string list;
    for (const auto &t : scenario_tags())
      list += (list.empty() ? "" : ", ") + t;
    err.add("scenario", "'" + config.scenario + "' is not one of " + list);
  } else if (root.is_object()) {
    out.runner = it->second(root, err, out.effective);
    for (const auto &[k, v] : root.items())
      if (!out.effective.contains(k))
        err.add(k, "block not used by scenario '" + config.scenario + "'");
  }
  out.atom_data = config.atom_data.value_or(default_atom_data_path());
  if (!std::filesystem::exists(out.atom_data))
    err.add("atom_data", "file '" + out.atom_data.string() + "' does not exist");
  if (!err.list.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto &e : err.list)
      msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return out;
}

std::string read_file(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string hash_of(const ScenarioConfig &config, const Parsed &parsed) {
  json canon = {{"scenario", config.scenario},
                {"seed", config.seed},
                {"params", parsed.effective},
                {"atom_data_fnv1a64", hex64(fnv1a64(read_file(parsed.atom_data)))}};
  return "fnv1a64:" + hex64(fnv1a64(canon.dump()));
}

} // namespace

ScenarioConfig ScenarioConfig::from_json(const json &j) {
  if (!j.is_object())
    throw ConfigError("invalid configuration:\n  (root): must be a JSON object");
  Errors err;
  ScenarioConfig c;
  c.params = json::object();
  for (const auto &[k, v] : j.items()) {
    if (k == "scenario") {
      if (!v.is_string())
        err.add("scenario", "expected a string");
      else
        c.scenario = v.get<std::string>();
    } else if (k == "seed") {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        err.add("seed", "expected a non-negative integer");
      else
        c.seed = v.get<std::uint64_t>();
    } else if (k == "output_dir") {
      if (!v.is_string())
        err.add("output_dir", "expected a string");
      else
        c.output_dir = v.get<std::string>();
    } else if (k == "atom_data") {
      if (!v.is_string())
        err.add("atom_data", "expected a string");
      else
        c.atom_data = v.get<std::string>();
    } else {
      c.params[k] = v;
    }
  }
  if (!j.contains("scenario"))
    err.add("scenario", "required");
  if (!err.list.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto &e : err.list)
      msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return c;
}

json ScenarioConfig::to_json() const {
  json j = params;
  j["scenario"] = scenario;
  j["seed"] = seed;
  j["output_dir"] = output_dir.string();
  if (atom_data)
    j["atom_data"] = atom_data->string();
  return j;
}

json validate_scenario(const ScenarioConfig &config) { return parse(config).effective; }

std::string config_hash(const ScenarioConfig &config) {
  return hash_of(config, parse(config));
}

ScenarioOutput run_scenario(const ScenarioConfig &config) {
  const Parsed parsed = parse(config);
  Context ctx{config, parsed.effective, load_level_scheme(parsed.atom_data), {}, {}, {}, {}, {}};
  ctx.hash = hash_of(config, parsed);
  std::ostringstream prov;
  prov << "# generator: cqed " << version() << "\n"
       << "# scenario: " << config.scenario << "\n"
       << "# config_hash: " << ctx.hash << "\n"
       << "# seed: " << config.seed << "\n";
  ctx.provenance = prov.str();

  parsed.runner(ctx);

  // Everything computed; only now touch the filesystem.
  ScenarioOutput out;
  out.config_hash = ctx.hash;
  std::filesystem::create_directories(config.output_dir);
  for (const auto &a : ctx.artifacts) {
    const auto path = config.output_dir / a.name;
    std::ofstream f(path, std::ios::binary);
    f << a.content;
    if (!f)
      throw Error("cannot write " + path.string());
    out.files.push_back(path);
  }
  for (const auto &[name, write] : ctx.writers) {
    const auto path = config.output_dir / name;
    write(path);
    out.files.push_back(path);
  }
  json effective = {{"scenario", config.scenario},
                    {"seed", config.seed},
                    {"config_hash", ctx.hash},
                    {"generator", std::string("cqed ") + version()}};
  for (const auto &[k, v] : parsed.effective.items())
    effective[k] = v;
  {
    const auto path = config.output_dir / (config.scenario + "_config.json");
    std::ofstream f(path, std::ios::binary);
    f << effective.dump(2) << "\n";
    out.files.push_back(path);
  }
  out.summary = ctx.summary.str();
  return out;
}

} // namespace cqed
