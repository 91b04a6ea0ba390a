// cqed: command-line front end. Every subcommand builds a ScenarioConfig and
// hands it to run_scenario, so `run --config` and the shortcuts agree.
#include "cqed/errors.hpp"
#include "cqed/scenario.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using json = nlohmann::json;

enum Exit { kOk = 0, kRuntime = 1, kConfig = 2 };

struct Globals {
  std::uint64_t seed = 1;
  std::string out = ".";
  std::string atom_data;
};

cqed::ScenarioConfig make(const Globals &g, const std::string &tag, json params) {
  cqed::ScenarioConfig c;
  c.scenario = tag;
  c.seed = g.seed;
  c.output_dir = g.out;
  if (!g.atom_data.empty())
    c.atom_data = g.atom_data;
  c.params = std::move(params);
  return c;
}

int execute(const cqed::ScenarioConfig &config) {
  try {
    const auto out = cqed::run_scenario(config);
    std::cout << out.summary;
    for (const auto &f : out.files)
      std::cout << "wrote " << f.string() << "\n";
    return kOk;
  } catch (const cqed::ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Cavity QED single-atom trapping toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Master seed")->capture_default_str();
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--atom-data", g.atom_data, "Atomic line data file");
  app.set_version_flag("--version", std::string("cqed ") + cqed::version());

  std::optional<cqed::ScenarioConfig> config;
  std::string config_error;

  auto *stark = app.add_subcommand("stark", "Normalized light shifts over a wavelength range");
  std::vector<double> scan{925.0, 945.0};
  int points = 201;
  std::string model = "fine-structure";
  stark->add_option("--scan", scan, "lambda_min lambda_max (nm)")->expected(2);
  stark->add_option("--points", points)->capture_default_str();
  stark->add_option("--model", model)->capture_default_str();
  stark->callback([&] {
    config = make(g, "stark-scan",
                  {{"stark-scan", {{"lambda_min_nm", scan[0]}, {"lambda_max_nm", scan[1]},
                                   {"points", points}, {"model", model}}}});
  });

  auto *magic = app.add_subcommand("magic", "Magic wavelength in a bracket");
  std::vector<double> bracket{925.0, 945.0};
  std::string criterion = "manifold-mean";
  magic->add_option("--bracket", bracket, "lo hi (nm)")->expected(2);
  magic->add_option("--model", model)->capture_default_str();
  magic->add_option("--criterion", criterion)->capture_default_str();
  magic->callback([&] {
    config = make(g, "magic",
                  {{"magic", {{"bracket_nm", bracket}, {"model", model}, {"criterion", criterion}}}});
  });

  auto *transmit = app.add_subcommand("transmit", "Transmission versus probe detuning");
  std::vector<double> dscan{-60.0, 60.0, 121.0};
  int atoms = 1;
  std::string solver = "weak";
  double mbar = 0.01;
  transmit->add_option("--detuning-scan", dscan, "min_MHz max_MHz points")->expected(3);
  transmit->add_option("--atoms", atoms)->capture_default_str();
  transmit->add_option("--solver", solver, "weak | master | both")->capture_default_str();
  transmit->add_option("--mbar-empty", mbar)->capture_default_str();
  transmit->callback([&] {
    config = make(g, "transmit",
                  {{"transmit", {{"detuning_min_mhz", dscan[0]}, {"detuning_max_mhz", dscan[1]},
                                 {"points", static_cast<long long>(dscan[2])}, {"atoms", atoms},
                                 {"solver", solver}, {"mbar_empty", mbar}}}});
  });

  auto *levels = app.add_subcommand("staircase-levels", "Transmission level per atom number");
  int n_max = 3;
  double coupling = 0.08;
  levels->add_option("--n-max", n_max)->capture_default_str();
  levels->add_option("--coupling-fraction", coupling)->capture_default_str();
  levels->callback([&] {
    config = make(g, "staircase-levels",
                  {{"staircase-levels", {{"n_max", n_max}, {"coupling_fraction", coupling}}}});
  });

  auto *staircase = app.add_subcommand("staircase", "Segment a record (or a synthetic one)");
  std::string record_in;
  staircase->add_option("--in", record_in, "Record CSV with its .json sidecar");
  staircase->callback([&] {
    json block = json::object();
    if (!record_in.empty())
      block["input"] = record_in;
    config = make(g, "staircase", {{"staircase", block}});
  });

  auto *fit = app.add_subcommand("fit-lifetime", "Binomial lifetime fit of survival data");
  std::string survival_in;
  fit->add_option("--in", survival_in, "Survival CSV (delay_s,successes,trials)")->required();
  fit->callback([&] {
    config = make(g, "fit-lifetime", {{"fit-lifetime", {{"input", survival_in}}}});
  });

  auto *lifetime = app.add_subcommand("lifetime", "Simulated trigger/hold/redetect survival curve");
  double mean_atoms = 0.30;
  int triggers = 200;
  lifetime->add_option("--mean-atoms", mean_atoms)->capture_default_str();
  lifetime->add_option("--triggers", triggers, "Triggers per delay")->capture_default_str();
  lifetime->callback([&] {
    config = make(g, "lifetime",
                  {{"lifetime", {{"mean_atoms", mean_atoms}, {"triggers_per_delay", triggers}}}});
  });

  auto *repump = app.add_subcommand("repump", "F=4 repopulation by FORT Raman scattering");
  std::string initial = "unpolarized-F3";
  double duration = 0.5, ellipticity = 0.05;
  repump->add_option("--initial", initial)->capture_default_str();
  repump->add_option("--duration", duration, "s")->capture_default_str();
  repump->add_option("--ellipticity", ellipticity)->capture_default_str();
  repump->callback([&] {
    config = make(g, "repump",
                  {{"repump", {{"initial", initial}, {"duration_s", duration},
                               {"ellipticity", ellipticity}}}});
  });

  auto *budget = app.add_subcommand("heating-budget", "Per-channel heating and loss rates");
  budget->add_option("--ellipticity", ellipticity)->capture_default_str();
  budget->callback([&] {
    config = make(g, "heating-budget", {{"heating-budget", {{"ellipticity", ellipticity}}}});
  });

  auto *run = app.add_subcommand("run", "Run a JSON scenario file");
  std::string config_path;
  run->add_option("--config", config_path, "Scenario JSON")->required();
  run->callback([&] {
    std::ifstream in(config_path);
    if (!in) {
      config_error = "cannot open config file '" + config_path + "'";
      return;
    }
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error &e) {
      config_error = std::string("malformed JSON in '") + config_path + "': " + e.what();
      return;
    }
    try {
      auto c = cqed::ScenarioConfig::from_json(j);
      // Command-line globals override the file only when given explicitly.
      if (app.count("--seed"))
        c.seed = g.seed;
      if (app.count("--out"))
        c.output_dir = g.out;
      if (app.count("--atom-data"))
        c.atom_data = g.atom_data;
      config = std::move(c);
    } catch (const cqed::ConfigError &e) {
      config_error = e.what();
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  if (!config_error.empty()) {
    std::cerr << "config error: " << config_error << "\n";
    return kConfig;
  }
  return execute(*config);
}
