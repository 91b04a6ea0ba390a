#include "cqed/records.hpp"

#include "cqed/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cqed {

std::string to_string(NoiseModel m) {
  return m == NoiseModel::Poisson ? "poisson" : "noiseless";
}

NoiseModel noise_model_from_string(const std::string &s) {
  if (s == "poisson")
    return NoiseModel::Poisson;
  if (s == "noiseless")
    return NoiseModel::Noiseless;
  throw DomainError("unknown noise model '" + s + "'");
}

std::vector<double> PhotonRecord::flux() const {
  std::vector<double> f(samples);
  for (auto &x : f)
    x /= bin_width_s;
  return f;
}

PhotonRecord synthesize_flux_profile(const std::vector<double> &breaks,
                                     const std::vector<double> &flux,
                                     const SynthesisConfig &cfg, Rng &rng) {
  if (!(cfg.bin_width_s > 0.0))
    throw DomainError("bin width must be positive");
  if (cfg.duration_s < 0.0)
    throw DomainError("duration must be non-negative");
  if (breaks.size() != flux.size() || breaks.empty())
    throw DomainError("breakpoints and flux values must be non-empty and equal in length");
  if (!std::is_sorted(breaks.begin(), breaks.end()))
    throw DomainError("breakpoints must be sorted");
  if (std::any_of(flux.begin(), flux.end(), [](double f) { return f < 0.0; }))
    throw DomainError("flux must be non-negative");
  if (cfg.detection_efficiency < 0.0 || cfg.detection_efficiency > 1.0)
    throw DomainError("detection efficiency must lie in [0, 1]");

  PhotonRecord rec;
  rec.bin_width_s = cfg.bin_width_s;
  rec.noise = cfg.noise;
  rec.detection_efficiency = cfg.detection_efficiency;
  const auto n = static_cast<std::size_t>(std::floor(cfg.duration_s / cfg.bin_width_s + 1e-9));
  rec.samples.resize(n);
  std::size_t seg = 0;
  for (std::size_t b = 0; b < n; ++b) {
    const double t0 = b * cfg.bin_width_s, t1 = t0 + cfg.bin_width_s;
    while (seg + 1 < breaks.size() && breaks[seg + 1] <= t0)
      ++seg;
    // Exact average over [t0, t1).
    double integral = 0.0;
    for (std::size_t s = seg; s < breaks.size(); ++s) {
      const double lo = std::max(t0, breaks[s]);
      const double hi = std::min(t1, s + 1 < breaks.size() ? breaks[s + 1] : t1);
      if (hi > lo)
        integral += flux[s] * (hi - lo);
      if (s + 1 < breaks.size() && breaks[s + 1] >= t1)
        break;
    }
    const double mean = integral * cfg.detection_efficiency;
    if (cfg.noise == NoiseModel::Poisson) {
      std::poisson_distribution<long long> pois(mean);
      rec.samples[b] = mean > 0.0 ? static_cast<double>(pois(rng)) : 0.0;
    } else {
      rec.samples[b] = mean;
    }
  }
  return rec;
}

PhotonRecord synthesize_record(const std::vector<double> &mbar, double kappa, int initial_atoms,
                               const std::vector<double> &loss_times,
                               const SynthesisConfig &cfg, Rng &rng) {
  if (!std::is_sorted(loss_times.begin(), loss_times.end()))
    throw DomainError("loss times must be sorted");
  if (initial_atoms < 0 || static_cast<std::size_t>(initial_atoms) >= mbar.size())
    throw DomainError("levels do not cover the initial atom number");
  if (loss_times.size() > static_cast<std::size_t>(initial_atoms))
    throw DomainError("more loss times than atoms");
  std::vector<double> breaks{0.0}, flux{2.0 * kappa * mbar[initial_atoms]};
  RecordTruth truth;
  for (double m : mbar)
    truth.level_counts.push_back(2.0 * kappa * m * cfg.bin_width_s * cfg.detection_efficiency);
  truth.atom_numbers.push_back(initial_atoms);
  int n = initial_atoms;
  for (double t : loss_times) {
    if (t < 0.0)
      throw DomainError("loss times must be non-negative");
    --n;
    breaks.push_back(t);
    flux.push_back(2.0 * kappa * mbar[n]);
    truth.event_times.push_back(t);
    if (t < cfg.duration_s) {
      truth.change_points.push_back(static_cast<std::size_t>(std::llround(t / cfg.bin_width_s)));
      truth.atom_numbers.push_back(n);
    }
  }
  PhotonRecord rec = synthesize_flux_profile(breaks, flux, cfg, rng);
  rec.truth = std::move(truth);
  return rec;
}

} // namespace cqed
