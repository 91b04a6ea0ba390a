#include "cqed/atoms.hpp"

#include "cqed/constants.hpp"
#include "cqed/errors.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#ifndef CQED_DATA_DIR
#define CQED_DATA_DIR "data"
#endif

namespace cqed {

double Level::hyperfine_shift_hz(HalfInt F, HalfInt I) const {
  const double f = F.value(), i = I.value(), j = J.value();
  const double K = f * (f + 1) - i * (i + 1) - j * (j + 1);
  double shift = 0.5 * hfs_a_hz * K;
  if (J.twice() >= 2 && I.twice() >= 2 && hfs_b_hz != 0.0) {
    shift += hfs_b_hz * (1.5 * K * (K + 1) - 2.0 * i * (i + 1) * j * (j + 1)) /
             (4.0 * i * (2 * i - 1) * j * (2 * j - 1));
  }
  return shift;
}

double TransitionLine::frequency_hz() const {
  return constants::wavelength_nm_to_hz(wavelength_nm);
}

std::optional<std::size_t> LevelScheme::find_level(std::string_view label) const {
  for (std::size_t i = 0; i < levels.size(); ++i)
    if (levels[i].label == label)
      return i;
  return std::nullopt;
}

std::size_t LevelScheme::level_index(std::string_view label) const {
  if (auto i = find_level(label))
    return *i;
  throw DomainError("unknown level '" + std::string(label) + "'");
}

const Level &LevelScheme::level(std::string_view label) const {
  return levels[level_index(label)];
}

std::vector<const TransitionLine *>
LevelScheme::lines_touching(std::size_t level) const {
  std::vector<const TransitionLine *> out;
  for (const auto &l : lines)
    if (l.lower == level || l.upper == level)
      out.push_back(&l);
  return out;
}

const TransitionLine *LevelScheme::find_line(std::string_view lower,
                                             std::string_view upper) const {
  auto lo = find_level(lower), up = find_level(upper);
  if (!lo || !up)
    return nullptr;
  for (const auto &l : lines)
    if (l.lower == *lo && l.upper == *up)
      return &l;
  return nullptr;
}

std::vector<HalfInt> LevelScheme::hyperfine_levels(std::size_t level) const {
  const int tj = levels.at(level).J.twice(), ti = nuclear_spin.twice();
  std::vector<HalfInt> out;
  for (int tf = std::abs(tj - ti); tf <= tj + ti; tf += 2)
    out.push_back(HalfInt::from_twice(tf));
  return out;
}

std::string LevelScheme::line_name(const TransitionLine &line) const {
  return levels.at(line.lower).label + "->" + levels.at(line.upper).label;
}

void LevelScheme::validate() const {
  if (levels.empty())
    throw DataIntegrityError("no levels defined");
  if (mass_kg <= 0.0)
    throw DataIntegrityError("atom mass must be positive");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto &lv = levels[i];
    const std::string j = lv.J.str();
    if (lv.label.size() < j.size() ||
        lv.label.compare(lv.label.size() - j.size(), j.size(), j) != 0)
      throw DataIntegrityError("level " + lv.label + ": J=" + j +
                               " inconsistent with label");
    if (i > 0 && lv.energy_hz < levels[i - 1].energy_hz)
      throw DataIntegrityError("level " + lv.label +
                               " breaks ascending-energy ordering");
    for (std::size_t k = 0; k < i; ++k)
      if (levels[k].label == lv.label)
        throw DataIntegrityError("duplicate level " + lv.label);
  }
  for (const auto &l : lines) {
    const std::string name = l.lower < levels.size() && l.upper < levels.size()
                                 ? line_name(l)
                                 : std::string("<dangling>");
    if (l.lower >= levels.size() || l.upper >= levels.size() ||
        l.lower == l.upper)
      throw DataIntegrityError("line " + name +
                               " must reference two distinct levels");
    if (!(l.wavelength_nm > 0.0))
      throw DataIntegrityError("line " + name + ": wavelength must be positive");
    if (l.reduced_dipole_au < 0.0)
      throw DataIntegrityError("line " + name +
                               ": matrix element must be non-negative");
    const double de = levels[l.upper].energy_hz - levels[l.lower].energy_hz;
    if (de <= 0.0)
      throw DataIntegrityError("line " + name + ": upper level is not above lower");
    const double rel = std::abs(l.frequency_hz() - de) / de;
    if (rel > kLineEnergyTolerance)
      throw DataIntegrityError("line " + name +
                               ": wavelength inconsistent with level energies");
  }
  auto anchor = [&](const char *lo, const char *up, double nm) {
    const auto *l = find_line(lo, up);
    if (!l)
      throw DataIntegrityError(std::string("missing anchor line ") + lo + "->" +
                               up);
    if (std::abs(l->wavelength_nm - nm) > kAnchorToleranceNm)
      throw DataIntegrityError(std::string("anchor line ") + lo + "->" + up +
                               " not at " + std::to_string(nm) + " nm");
  };
  anchor("6S1/2", "6P3/2", kD2AnchorNm);
  anchor("6S1/2", "6P1/2", kD1AnchorNm);
}

namespace {

struct Cursor {
  std::istringstream in;
  std::size_t line_no = 0;

  // Next non-blank, non-comment line; false at EOF.
  bool next(std::string &out) {
    std::string raw;
    while (std::getline(in, raw)) {
      ++line_no;
      auto hash = raw.find('#');
      // '#' inside a quoted source string is kept.
      if (hash != std::string::npos) {
        auto quote = raw.find('"');
        if (quote == std::string::npos || hash < quote)
          raw.erase(hash);
      }
      auto first = raw.find_first_not_of(" \t\r");
      if (first == std::string::npos)
        continue;
      auto last = raw.find_last_not_of(" \t\r");
      out = raw.substr(first, last - first + 1);
      return true;
    }
    return false;
  }
};

double to_double(const std::string &tok, const std::string &field,
                 std::size_t line) {
  try {
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size())
      throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception &) {
    throw ParseError("field '" + field + "' is not a number: '" + tok + "'",
                     line);
  }
}

} // namespace

LevelScheme parse_level_scheme(std::string_view text) {
  Cursor cur{std::istringstream{std::string(text)}};
  LevelScheme scheme;
  std::string line;

  if (!cur.next(line))
    throw ParseError("empty file: missing 'cqed-atom-data <version>' header",
                     cur.line_no);
  {
    std::istringstream hs(line);
    std::string magic;
    int version = 0;
    if (!(hs >> magic >> version) || magic != "cqed-atom-data")
      throw ParseError("expected 'cqed-atom-data <version>' header", cur.line_no);
    if (version != 1)
      throw ParseError("unsupported format version " + std::to_string(version),
                       cur.line_no);
    scheme.format_version = version;
  }

  bool have_mass = false, have_spin = false;
  while (cur.next(line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "atom") {
      ls >> scheme.name;
    } else if (key == "mass_amu") {
      std::string v;
      ls >> v;
      scheme.mass_kg = to_double(v, "mass_amu", cur.line_no) * constants::amu;
      have_mass = true;
    } else if (key == "nuclear_spin") {
      std::string v;
      ls >> v;
      try {
        scheme.nuclear_spin = HalfInt::parse(v);
      } catch (const DomainError &e) {
        throw ParseError(e.what(), cur.line_no);
      }
      have_spin = true;
    } else if (key == "levels") {
      while (true) {
        if (!cur.next(line))
          throw ParseError("unterminated levels block", cur.line_no);
        if (line == "end")
          break;
        std::istringstream rs(line);
        std::string label, j, e, a, b, extra;
        if (!(rs >> label >> j >> e >> a >> b) || (rs >> extra))
          throw ParseError("level record needs 'label J energy_cm-1 A_MHz B_MHz': '" +
                               line + "'",
                           cur.line_no);
        Level lv;
        lv.label = label;
        try {
          lv.J = HalfInt::parse(j);
        } catch (const DomainError &err) {
          throw ParseError("level " + label + ": " + err.what(), cur.line_no);
        }
        lv.energy_hz = to_double(e, label + ".energy", cur.line_no) *
                       constants::wavenumber_to_hz;
        lv.hfs_a_hz = to_double(a, label + ".A", cur.line_no) * 1e6;
        lv.hfs_b_hz = to_double(b, label + ".B", cur.line_no) * 1e6;
        scheme.levels.push_back(std::move(lv));
      }
    } else if (key == "lines") {
      while (true) {
        if (!cur.next(line))
          throw ParseError("unterminated lines block", cur.line_no);
        if (line == "end")
          break;
        std::istringstream rs(line);
        std::string lo, up, wl, d;
        if (!(rs >> lo >> up >> wl >> d))
          throw ParseError("line record needs 'lower upper wavelength_nm "
                           "reduced_dipole_au \"source\"': '" +
                               line + "'",
                           cur.line_no);
        std::string rest;
        std::getline(rs, rest);
        auto q1 = rest.find('"'), q2 = rest.rfind('"');
        if (q1 == std::string::npos || q2 == q1)
          throw ParseError("line " + lo + "->" + up +
                               ": source citation must be a quoted string",
                           cur.line_no);
        auto li = scheme.find_level(lo), ui = scheme.find_level(up);
        if (!li || !ui)
          throw ParseError("line " + lo + "->" + up +
                               " references an undefined level",
                           cur.line_no);
        TransitionLine t;
        t.lower = *li;
        t.upper = *ui;
        t.wavelength_nm = to_double(wl, lo + "->" + up + ".wavelength", cur.line_no);
        t.reduced_dipole_au = to_double(d, lo + "->" + up + ".dipole", cur.line_no);
        t.source = rest.substr(q1 + 1, q2 - q1 - 1);
        scheme.lines.push_back(std::move(t));
      }
    } else {
      throw ParseError("unknown keyword '" + key + "'", cur.line_no);
    }
  }
  if (!have_mass)
    throw ParseError("missing 'mass_amu'", cur.line_no);
  if (!have_spin)
    throw ParseError("missing 'nuclear_spin'", cur.line_no);

  scheme.validate();
  return scheme;
}

LevelScheme load_level_scheme(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw ParseError("cannot open atomic data file '" + path.string() + "'", 0);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_level_scheme(buf.str());
}

std::filesystem::path default_atom_data_path() {
  return std::filesystem::path(CQED_DATA_DIR) / "cs_levels.dat";
}

} // namespace cqed
