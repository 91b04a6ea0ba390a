#include "cqed/records.hpp"

#include "cqed/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <sstream>

namespace cqed {

using nlohmann::json;

namespace {

void write_header(std::ostream &os, const std::string &header) {
  std::istringstream in(header);
  std::string line;
  while (std::getline(in, line))
    os << (line.rfind('#', 0) == 0 ? "" : "# ") << line << '\n';
}

std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path &path,
                                                  std::size_t columns) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#')
      continue;
    if (!header_seen) {
      header_seen = true;
      if (line.find_first_not_of("0123456789.-+eE, \t") != std::string::npos)
        continue; // column names
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception &) {
        throw ParseError("non-numeric cell '" + cell + "' in " + path.string(), lineno);
      }
    }
    // Extra trailing columns (e.g. derived probabilities) are ignored.
    if (row.size() < columns)
      throw ParseError("expected at least " + std::to_string(columns) + " columns in " +
                           path.string(),
                       lineno);
    row.resize(columns);
    rows.push_back(std::move(row));
  }
  return rows;
}

} // namespace

void write_record(const std::filesystem::path &csv, const PhotonRecord &rec,
                  const std::string &header) {
  std::ofstream out(csv);
  if (!out)
    throw ConfigError("cannot write " + csv.string());
  write_header(out, header);
  out << "time_s,counts\n" << std::setprecision(17);
  for (std::size_t i = 0; i < rec.samples.size(); ++i)
    out << i * rec.bin_width_s << ',' << rec.samples[i] << '\n';

  json side;
  side["bin_width_s"] = rec.bin_width_s;
  side["noise_model"] = to_string(rec.noise);
  side["detection_efficiency"] = rec.detection_efficiency;
  side["bins"] = rec.samples.size();
  if (rec.truth) {
    side["truth"] = {{"level_counts", rec.truth->level_counts},
                     {"change_points", rec.truth->change_points},
                     {"atom_numbers", rec.truth->atom_numbers},
                     {"event_times", rec.truth->event_times}};
  }
  std::ofstream js(csv.string() + ".json");
  js << side.dump(2) << '\n';
}

PhotonRecord read_record(const std::filesystem::path &csv) {
  const auto rows = read_numeric_csv(csv, 2);
  PhotonRecord rec;
  for (const auto &r : rows)
    rec.samples.push_back(r[1]);
  if (rows.size() >= 2)
    rec.bin_width_s = rows[1][0] - rows[0][0];
  const std::filesystem::path side = csv.string() + ".json";
  if (std::filesystem::exists(side)) {
    std::ifstream in(side);
    json j;
    try {
      in >> j;
    } catch (const json::exception &e) {
      throw ParseError(std::string("sidecar JSON: ") + e.what(), 0);
    }
    rec.bin_width_s = j.value("bin_width_s", rec.bin_width_s);
    rec.noise = noise_model_from_string(j.value("noise_model", std::string("poisson")));
    rec.detection_efficiency = j.value("detection_efficiency", 1.0);
    if (j.contains("truth")) {
      RecordTruth t;
      const auto &jt = j["truth"];
      t.level_counts = jt.value("level_counts", std::vector<double>{});
      t.change_points = jt.value("change_points", std::vector<std::size_t>{});
      t.atom_numbers = jt.value("atom_numbers", std::vector<int>{});
      t.event_times = jt.value("event_times", std::vector<double>{});
      rec.truth = t;
    }
  }
  if (!(rec.bin_width_s > 0.0))
    throw ParseError("record has no usable bin width", 0);
  return rec;
}

void write_survival_csv(const std::filesystem::path &csv, const SurvivalData &d,
                        const std::string &header) {
  std::ofstream out(csv);
  if (!out)
    throw ConfigError("cannot write " + csv.string());
  write_header(out, header);
  out << "delay_s,successes,trials\n" << std::setprecision(17);
  for (std::size_t i = 0; i < d.delays.size(); ++i)
    out << d.delays[i] << ',' << d.successes[i] << ',' << d.trials[i] << '\n';
}

SurvivalData read_survival_csv(const std::filesystem::path &csv) {
  SurvivalData d;
  for (const auto &r : read_numeric_csv(csv, 3)) {
    d.delays.push_back(r[0]);
    d.successes.push_back(r[1]);
    d.trials.push_back(r[2]);
  }
  return d;
}

} // namespace cqed
