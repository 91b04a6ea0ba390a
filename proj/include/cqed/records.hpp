#pragma once

#include "cqed/random.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cqed {

enum class NoiseModel { Poisson, Noiseless };
std::string to_string(NoiseModel m);
NoiseModel noise_model_from_string(const std::string &s);

/// Planted structure of a synthetic record.
struct RecordTruth {
  std::vector<double> level_counts;      // expected counts per bin, indexed by N
  std::vector<std::size_t> change_points; // first bin of each new segment
  std::vector<int> atom_numbers;         // per segment
  std::vector<double> event_times;       // s
};

struct PhotonRecord {
  double bin_width_s = 1e-3;
  std::vector<double> samples; // detected counts per bin
  NoiseModel noise = NoiseModel::Poisson;
  double detection_efficiency = 1.0;
  std::optional<RecordTruth> truth;

  double duration() const { return bin_width_s * static_cast<double>(samples.size()); }
  /// Counts per bin divided by the bin width.
  std::vector<double> flux() const;
};

inline constexpr double kDefaultBinWidthS = 1e-3; // 1 kHz detection bandwidth

struct SynthesisConfig {
  double duration_s = 1.0;
  double bin_width_s = kDefaultBinWidthS;
  NoiseModel noise = NoiseModel::Poisson;
  double detection_efficiency = 1.0;
};

/// Piecewise-constant photon flux, given as breakpoints t_0 < t_1 < ... and
/// the flux (s^-1) holding from each breakpoint until the next. Each bin's
/// mean is the exact time average of the flux over the bin.
PhotonRecord synthesize_flux_profile(const std::vector<double> &breakpoints,
                                     const std::vector<double> &flux,
                                     const SynthesisConfig &config, Rng &rng);

/// Staircase record: N(t) starts at initial_atoms and drops by one at each loss
/// time; mean flux is 2 kappa mbar_levels[N(t)].
PhotonRecord synthesize_record(const std::vector<double> &mbar_levels, double kappa,
                               int initial_atoms, const std::vector<double> &loss_times,
                               const SynthesisConfig &config, Rng &rng);

struct TriggerPolicy {
  enum class Kind { Significance, FixedThreshold };
  Kind kind = Kind::Significance;
  std::size_t quiet_prefix_bins = 200;
  double significance = 1e-3;   // family-wise false-trigger probability per record
  double fixed_threshold = 0.0; // counts above baseline, FixedThreshold only
  std::size_t merge_gap_bins = 5;

  static TriggerPolicy fixed(double counts_above_baseline) {
    TriggerPolicy p;
    p.kind = Kind::FixedThreshold;
    p.fixed_threshold = counts_above_baseline;
    return p;
  }
};

struct TriggerResult {
  std::vector<std::size_t> bins;
  std::vector<double> times;
  double baseline = 0.0;        // counts per bin
  double threshold_counts = 0.0; // absolute count level that fires
  bool degenerate = false;
};

/// Upward crossings above the empty-cavity baseline. Consecutive bins above
/// threshold, allowing gaps up to merge_gap_bins, are reported once at their
/// first bin.
TriggerResult detect_trigger(const PhotonRecord &record, const TriggerPolicy &policy = {});

struct PenaltyPolicy {
  /// Penalty per added change point = factor * log(n).
  double factor = 1.0;
  std::size_t min_segment_bins = 3;
  /// Explicit penalty overriding the information criterion when set.
  std::optional<double> absolute;

  double value(std::size_t n) const;
};

struct StepSegmentation {
  std::vector<std::size_t> change_points;
  std::vector<double> levels;  // mean counts per bin, per segment
  std::vector<int> atom_numbers; // empty when levels_only
  bool levels_only = false;

  std::size_t segments() const { return levels.size(); }
  /// Piecewise-constant reconstruction with the same length as the input.
  std::vector<double> reconstruction(std::size_t n) const;
};

/// Binary segmentation with a Poisson-deviance gain. When expected per-N
/// counts are supplied, segments are labelled with the nearest level and
/// adjacent segments that share a label are merged.
StepSegmentation segment_staircase(const PhotonRecord &record,
                                   const PenaltyPolicy &penalty = {},
                                   const std::vector<double> &level_counts = {});
StepSegmentation segment_counts(const std::vector<double> &counts,
                                const PenaltyPolicy &penalty = {},
                                const std::vector<double> &level_counts = {});

struct SurvivalData {
  std::vector<double> delays;
  std::vector<double> successes; // may be non-integer for expected-value data
  std::vector<double> trials;
};

struct LifetimeFit {
  double tau = 0.0;
  double tau_error = 0.0;
  double p0 = 0.0;
  double p0_error = 0.0;
  double deviance = 0.0; // binomial G^2 against the saturated model
  int dof = 0;
};

/// Binomial maximum-likelihood fit of P(t) = P0 exp(-t / tau).
LifetimeFit fit_lifetime(const SurvivalData &data);

struct RepumpFit {
  double tau = 0.0;
  double tau_error = 0.0;
  double f_eq = 0.0;
  double f_eq_error = 0.0;
  double chi2 = 0.0;
  int dof = 0;
};

/// Least-squares fit of f_eq (1 - exp(-t / tau)); sigma empty means unknown
/// equal errors estimated from the residuals.
RepumpFit fit_repump(const std::vector<double> &t, const std::vector<double> &f,
                     const std::vector<double> &sigma = {});

/// CSV (time_s,counts) plus a JSON sidecar at path + ".json".
void write_record(const std::filesystem::path &csv, const PhotonRecord &record,
                  const std::string &header = {});
PhotonRecord read_record(const std::filesystem::path &csv);

void write_survival_csv(const std::filesystem::path &csv, const SurvivalData &data,
                        const std::string &header = {});
SurvivalData read_survival_csv(const std::filesystem::path &csv);

} // namespace cqed
