#include "cqed/records.hpp"

#include "cqed/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cqed {

double PenaltyPolicy::value(std::size_t n) const {
  if (absolute)
    return *absolute;
  return factor * std::log(static_cast<double>(n));
}

std::vector<double> StepSegmentation::reconstruction(std::size_t n) const {
  std::vector<double> out(n, 0.0);
  std::size_t seg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (seg < change_points.size() && i >= change_points[seg])
      ++seg;
    out[i] = levels.empty() ? 0.0 : levels[std::min(seg, levels.size() - 1)];
  }
  return out;
}

namespace {

struct Scanner {
  std::vector<double> cum; // prefix sums
  double penalty;
  std::size_t min_seg;

  double sum(std::size_t a, std::size_t b) const { return cum[b] - cum[a]; }

  // Negative Poisson log-likelihood of [a, b) at its MLE rate, up to constants.
  double cost(std::size_t a, std::size_t b) const {
    const double s = sum(a, b);
    return s > 0.0 ? -s * std::log(s / static_cast<double>(b - a)) + s : 0.0;
  }

  void split(std::size_t a, std::size_t b, std::vector<std::size_t> &cps) const {
    if (b - a < 2 * min_seg)
      return;
    const double parent = cost(a, b);
    double best = 0.0;
    std::size_t where = 0;
    for (std::size_t s = a + min_seg; s + min_seg <= b; ++s) {
      const double gain = parent - cost(a, s) - cost(s, b);
      if (gain > best) {
        best = gain;
        where = s;
      }
    }
    if (where == 0 || !(best > penalty))
      return;
    split(a, where, cps);
    cps.push_back(where);
    split(where, b, cps);
  }
};

std::vector<double> segment_means(const std::vector<double> &cum,
                                  const std::vector<std::size_t> &cps, std::size_t n) {
  std::vector<double> means;
  std::size_t a = 0;
  for (std::size_t i = 0; i <= cps.size(); ++i) {
    const std::size_t b = i < cps.size() ? cps[i] : n;
    means.push_back((cum[b] - cum[a]) / static_cast<double>(b - a));
    a = b;
  }
  return means;
}

} // namespace

StepSegmentation segment_counts(const std::vector<double> &x, const PenaltyPolicy &penalty,
                                const std::vector<double> &level_counts) {
  if (x.size() < 10)
    throw DomainError("segmentation needs at least 10 bins");
  if (std::any_of(x.begin(), x.end(), [](double v) { return v < 0.0; }))
    throw DomainError("counts must be non-negative");
  if (penalty.min_segment_bins < 1)
    throw DomainError("min_segment_bins must be at least 1");
  Scanner sc;
  sc.cum.assign(x.size() + 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    sc.cum[i + 1] = sc.cum[i] + x[i];
  sc.penalty = penalty.value(x.size());
  sc.min_seg = penalty.min_segment_bins;

  StepSegmentation seg;
  sc.split(0, x.size(), seg.change_points);
  seg.levels = segment_means(sc.cum, seg.change_points, x.size());
  if (level_counts.empty()) {
    seg.levels_only = true;
    return seg;
  }

  auto nearest = [&](double m) {
    int best = 0;
    for (std::size_t k = 1; k < level_counts.size(); ++k)
      if (std::abs(level_counts[k] - m) < std::abs(level_counts[best] - m))
        best = static_cast<int>(k);
    return best;
  };
  std::vector<std::size_t> kept;
  std::vector<int> labels{nearest(seg.levels[0])};
  for (std::size_t i = 0; i < seg.change_points.size(); ++i) {
    const int lab = nearest(seg.levels[i + 1]);
    if (lab == labels.back())
      continue;
    kept.push_back(seg.change_points[i]);
    labels.push_back(lab);
  }
  seg.change_points = kept;
  seg.levels = segment_means(sc.cum, kept, x.size());
  seg.atom_numbers = labels;
  return seg;
}

StepSegmentation segment_staircase(const PhotonRecord &rec, const PenaltyPolicy &penalty,
                                   const std::vector<double> &level_counts) {
  return segment_counts(rec.samples, penalty, level_counts);
}

} // namespace cqed
