#pragma once

#include <array>
#include <span>
#include <string_view>

#include "vgecg/matrix.hpp"
#include "vgecg/segment.hpp"

namespace vgecg {

// Node feature groups; each group extends the previous one.
enum class FeatureGroup { II_V1, RR, DifII, AvgII, StdII, Stats };

std::size_t feature_dimension(FeatureGroup group);
std::string_view feature_group_name(FeatureGroup group);
FeatureGroup parse_feature_group(std::string_view name);

// Beat-level statistics of a lead, in column order of the Stats group.
struct LeadStats {
  double entropy = 0, variance = 0, stddev = 0, mean = 0, median = 0;
  double p5 = 0, p25 = 0, p75 = 0, p95 = 0, rms = 0;
  double kurtosis = 0, skewness = 0;
  double zero_crossings = 0, mean_crossings = 0;

  std::array<double, 14> as_array() const;
};

// Shannon entropy (natural log) of a 10-bin equal-width histogram, population
// moments, linearly interpolated percentiles, Fisher excess kurtosis,
// adjusted Fisher-Pearson skewness and strict sign-change counts.
LeadStats lead_stats(std::span<const double> x);

// Linear-interpolation percentile, q in [0, 100].
double percentile(std::span<const double> x, double q);
std::size_t sign_changes(std::span<const double> x);

// n x d node features for one beat. With `normalize`, every column is min-max
// scaled within the beat; constant columns become 0. Throws
// std::invalid_argument when mean or std of lead II is zero and the group needs it.
Matrix compute_features(const BeatSegment& segment, FeatureGroup group, bool normalize);

}  // namespace vgecg
