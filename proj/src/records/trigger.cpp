#include "cqed/records.hpp"

#include "cqed/errors.hpp"

#include <boost/math/distributions/poisson.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cqed {

TriggerResult detect_trigger(const PhotonRecord &rec, const TriggerPolicy &policy) {
  if (rec.samples.empty())
    throw DomainError("record is empty");
  const std::size_t n = rec.samples.size();
  const std::size_t q = policy.quiet_prefix_bins;
  if (q < 10 || q >= n)
    throw CalibrationError("record too short for a quiet prefix of " + std::to_string(q) +
                           " bins");
  std::vector<double> prefix(rec.samples.begin(), rec.samples.begin() + q);
  const double mean = std::accumulate(prefix.begin(), prefix.end(), 0.0) / q;
  std::nth_element(prefix.begin(), prefix.begin() + q / 2, prefix.end());
  const double median = prefix[q / 2];

  TriggerResult r;
  r.baseline = mean;
  if (policy.kind == TriggerPolicy::Kind::FixedThreshold && policy.fixed_threshold <= 0.0) {
    r.degenerate = true;
    r.threshold_counts = mean;
    for (std::size_t b = 0; b < n; ++b) {
      r.bins.push_back(b);
      r.times.push_back(b * rec.bin_width_s);
    }
    return r;
  }

  double threshold = 0.0;
  if (policy.kind == TriggerPolicy::Kind::FixedThreshold) {
    threshold = mean + policy.fixed_threshold;
  } else {
    if (!(policy.significance > 0.0 && policy.significance < 1.0))
      throw DomainError("significance must lie in (0, 1)");
    if (!(mean > 0.0))
      throw CalibrationError("quiet prefix has zero counts; baseline unidentifiable");
    // Guard against an underestimated baseline: use a two-sigma upper bound.
    const double lam = mean + 2.0 * std::sqrt(mean / q);
    const double per_bin = policy.significance / static_cast<double>(n);
    boost::math::poisson_distribution<double> pois(lam);
    threshold = std::floor(boost::math::quantile(boost::math::complement(pois, per_bin))) + 1.0;
  }
  r.threshold_counts = threshold;

  // A prefix that already crosses the threshold is not quiet.
  if (std::abs(median - mean) > 3.0 * std::sqrt(std::max(mean, 1.0)) ||
      std::any_of(rec.samples.begin(), rec.samples.begin() + q,
                  [&](double x) { return x >= threshold; }))
    throw CalibrationError("no quiet prefix: the first " + std::to_string(q) +
                           " bins already contain signal");

  std::size_t last_above = 0;
  bool open = false;
  for (std::size_t b = q; b < n; ++b) {
    if (rec.samples[b] < threshold)
      continue;
    if (!open || b - last_above > policy.merge_gap_bins) {
      r.bins.push_back(b);
      r.times.push_back(b * rec.bin_width_s);
    }
    open = true;
    last_above = b;
  }
  return r;
}

} // namespace cqed
