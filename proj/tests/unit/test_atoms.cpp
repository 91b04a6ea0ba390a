#include "cqed/atoms.hpp"
#include "cqed/errors.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>

using namespace cqed;

namespace {

std::string shipped_text() {
  std::ifstream in(default_atom_data_path());
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string replace(std::string text, const std::string &from, const std::string &to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  text.replace(pos, from.size(), to);
  return text;
}

} // namespace

TEST_SUITE("atoms") {

TEST_CASE("shipped data loads and validates") {
  const auto s = load_level_scheme(default_atom_data_path());
  CHECK(s.name == "Cs");
  CHECK(s.format_version == 1);
  CHECK(s.nuclear_spin.twice() == 7);
  CHECK(s.mass_kg == doctest::Approx(132.905451961 * 1.66053906660e-27));
  CHECK(s.levels.size() == 16);
  CHECK(s.lines.size() == 15);
  const auto *d2 = s.find_line("6S1/2", "6P3/2");
  REQUIRE(d2 != nullptr);
  CHECK(d2->wavelength_nm == doctest::Approx(852.3473));
  CHECK(s.line_name(*d2) == "6S1/2->6P3/2");
  CHECK(s.lines_touching(s.level_index("6S1/2")).size() == 6);
  CHECK(s.hyperfine_levels(s.level_index("6P3/2")).size() == 4);
  CHECK_THROWS_AS(s.level("6F7/2"), DomainError);
}

TEST_CASE("ground hyperfine splitting follows the A constant") {
  const auto s = load_level_scheme(default_atom_data_path());
  const auto &g = s.level("6S1/2");
  const double split = g.hyperfine_shift_hz(HalfInt::integer(4), s.nuclear_spin) -
                       g.hyperfine_shift_hz(HalfInt::integer(3), s.nuclear_spin);
  CHECK(split == doctest::Approx(4.0 * 2298.1579425e6).epsilon(1e-12));
  // Centroid: sum (2F+1) shift = 0
  const double c = 7.0 * g.hyperfine_shift_hz(HalfInt::integer(3), s.nuclear_spin) +
                   9.0 * g.hyperfine_shift_hz(HalfInt::integer(4), s.nuclear_spin);
  CHECK(std::abs(c) < 1e-3);
}

TEST_CASE("parse errors carry line numbers") {
  const std::string text = shipped_text();
  CHECK_THROWS_AS(parse_level_scheme(""), ParseError);
  CHECK_THROWS_AS(parse_level_scheme(replace(text, "cqed-atom-data 1", "cqed-atom-data 9")),
                  ParseError);
  CHECK_THROWS_AS(parse_level_scheme(replace(text, "mass_amu 132.905451961", "")), ParseError);
  CHECK_THROWS_AS(parse_level_scheme(replace(text, "nuclear_spin 7/2", "nuclear_spin seven")),
                  ParseError);
  CHECK_THROWS_AS(parse_level_scheme(replace(text, "atom Cs", "colour blue")), ParseError);
  try {
    parse_level_scheme(replace(text, "894.5930", "eight"));
    FAIL("expected ParseError");
  } catch (const ParseError &e) {
    CHECK(e.line() == 32);
  }
  // Unterminated block
  const auto cut = text.substr(0, text.rfind("end"));
  CHECK_THROWS_AS(parse_level_scheme(cut), ParseError);
  CHECK_THROWS_AS(load_level_scheme("/nonexistent/cs.dat"), ParseError);
}

TEST_CASE("corrupted physics is rejected") {
  const std::string text = shipped_text();
  // D2 moved off its anchor but kept consistent with the level energy
  CHECK_THROWS_AS(parse_level_scheme(replace(
                      replace(text, "852.3473", "853.3473"), "11732.30710410", "11718.56000000")),
                  DataIntegrityError);
  // Wavelength inconsistent with level energies
  CHECK_THROWS_AS(parse_level_scheme(replace(text, "3614.0860", "3714.0860")),
                  DataIntegrityError);
  // Negative matrix element
  CHECK_THROWS_AS(parse_level_scheme(replace(text, "0.2781", "-0.2781")), DataIntegrityError);
  // Levels out of order
  CHECK_THROWS_AS(parse_level_scheme(replace(text, "14596.84232000", "14400.00000000")),
                  DataIntegrityError);
  // J inconsistent with label
  CHECK_THROWS_AS(parse_level_scheme(replace(text, "7S1/2     1/2", "7S1/2     3/2")),
                  DataIntegrityError);
  // Missing D1
  CHECK_THROWS_AS(
      parse_level_scheme(replace(text, "6S1/2     6P1/2   894.5930        4.5057              "
                                       "\"Patterson et al., PRA 91, 012506 (2015)\"\n",
                                 "")),
      DataIntegrityError);
}

TEST_CASE("unknown line endpoints are parse errors") {
  const std::string text = shipped_text();
  CHECK_THROWS_AS(parse_level_scheme(replace(text, "6S1/2     7P1/2", "6S1/2     7F5/2")),
                  ParseError);
}

}
