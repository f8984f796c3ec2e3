#include "vgecg/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace vgecg {

std::size_t feature_dimension(FeatureGroup group) {
  switch (group) {
    case FeatureGroup::II_V1: return 3;
    case FeatureGroup::RR: return 5;
    case FeatureGroup::DifII: return 6;
    case FeatureGroup::AvgII: return 7;
    case FeatureGroup::StdII: return 8;
    case FeatureGroup::Stats: return 22;
  }
  return 0;
}

std::string_view feature_group_name(FeatureGroup group) {
  switch (group) {
    case FeatureGroup::II_V1: return "II_V1";
    case FeatureGroup::RR: return "RR";
    case FeatureGroup::DifII: return "DifII";
    case FeatureGroup::AvgII: return "AvgII";
    case FeatureGroup::StdII: return "StdII";
    case FeatureGroup::Stats: return "Stats";
  }
  return "?";
}

FeatureGroup parse_feature_group(std::string_view name) {
  for (auto g : {FeatureGroup::II_V1, FeatureGroup::RR, FeatureGroup::DifII, FeatureGroup::AvgII,
                 FeatureGroup::StdII, FeatureGroup::Stats})
    if (feature_group_name(g) == name) return g;
  throw std::invalid_argument("unknown feature group '" + std::string(name) + "'");
}

std::array<double, 14> LeadStats::as_array() const {
  return {entropy, variance, stddev, mean, median, p5, p25, p75, p95, rms, kurtosis, skewness, zero_crossings,
          mean_crossings};
}

double percentile(std::span<const double> x, double q) {
  if (x.empty()) throw std::invalid_argument("percentile of empty input");
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

std::size_t sign_changes(std::span<const double> x) {
  std::size_t count = 0;
  for (std::size_t i = 1; i < x.size(); ++i)
    if ((x[i - 1] < 0.0 && x[i] > 0.0) || (x[i - 1] > 0.0 && x[i] < 0.0)) ++count;
  return count;
}

LeadStats lead_stats(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("lead_stats: empty input");
  const double n = static_cast<double>(x.size());
  LeadStats s;
  s.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double m2 = 0, m3 = 0, m4 = 0, sq = 0;
  for (double v : x) {
    const double d = v - s.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
    sq += v * v;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  s.variance = m2;
  s.stddev = std::sqrt(m2);
  s.rms = std::sqrt(sq / n);
  s.median = percentile(x, 50);
  s.p5 = percentile(x, 5);
  s.p25 = percentile(x, 25);
  s.p75 = percentile(x, 75);
  s.p95 = percentile(x, 95);
  if (m2 > 0.0) {
    s.kurtosis = m4 / (m2 * m2) - 3.0;
    const double g1 = m3 / std::pow(m2, 1.5);
    s.skewness = x.size() > 2 ? g1 * std::sqrt(n * (n - 1.0)) / (n - 2.0) : g1;
  }

  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  constexpr std::size_t kBins = 10;
  std::array<std::size_t, kBins> hist{};
  const double width = (*hi - *lo) / kBins;
  for (double v : x) {
    std::size_t bin = width > 0.0 ? static_cast<std::size_t>((v - *lo) / width) : 0;
    hist[std::min(bin, kBins - 1)]++;
  }
  for (auto c : hist) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    s.entropy -= p * std::log(p);
  }

  s.zero_crossings = static_cast<double>(sign_changes(x));
  std::vector<double> centred(x.begin(), x.end());
  for (double& v : centred) v -= s.mean;
  s.mean_crossings = static_cast<double>(sign_changes(centred));
  return s;
}

Matrix compute_features(const BeatSegment& segment, FeatureGroup group, bool normalize) {
  const std::size_t n = segment.lead_ii.size();
  if (n == 0 || segment.lead_v1.size() != n) throw std::invalid_argument("compute_features: malformed segment");
  const std::size_t d = feature_dimension(group);
  const auto level = static_cast<int>(group);
  Matrix x(n, d);

  double ii_mean = 0.0, ii_std = 0.0;
  LeadStats stats;
  if (group >= FeatureGroup::AvgII) {
    stats = lead_stats(segment.lead_ii);
    ii_mean = stats.mean;
    ii_std = stats.stddev;
    if (ii_mean == 0.0) throw std::invalid_argument("compute_features: lead II has zero mean");
    if (group >= FeatureGroup::StdII && ii_std == 0.0)
      throw std::invalid_argument("compute_features: lead II has zero standard deviation");
  }
  const auto stat_values = stats.as_array();

  for (std::size_t i = 0; i < n; ++i) {
    auto row = x.row(i);
    const double ii = segment.lead_ii[i], v1 = segment.lead_v1[i];
    row[0] = ii;
    row[1] = v1;
    row[2] = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
    if (level >= static_cast<int>(FeatureGroup::RR)) {
      row[3] = segment.rr_prev;
      row[4] = segment.rr_next;
    }
    if (level >= static_cast<int>(FeatureGroup::DifII)) row[5] = v1 - ii;
    if (level >= static_cast<int>(FeatureGroup::AvgII)) row[6] = v1 / ii_mean;
    if (level >= static_cast<int>(FeatureGroup::StdII)) row[7] = v1 / ii_std;
    if (group == FeatureGroup::Stats) std::copy(stat_values.begin(), stat_values.end(), row.begin() + 8);
  }

  if (normalize) {
    for (std::size_t c = 0; c < d; ++c) {
      double lo = x(0, c), hi = x(0, c);
      for (std::size_t i = 1; i < n; ++i) {
        lo = std::min(lo, x(i, c));
        hi = std::max(hi, x(i, c));
      }
      const double range = hi - lo;
      for (std::size_t i = 0; i < n; ++i) x(i, c) = range > 0.0 ? (x(i, c) - lo) / range : 0.0;
    }
  }
  return x;
}

}  // namespace vgecg
