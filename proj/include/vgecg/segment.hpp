#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "vgecg/ingest.hpp"
#include "vgecg/labels.hpp"

namespace vgecg {

// Fixed-width two-lead window around one annotated R-peak. The R-peak sits at
// local index y_before.
struct BeatSegment {
  std::string record_id;
  std::int64_t r_index = 0;
  AamiLabel label = AamiLabel::N;
  std::size_t y_before = 0;
  std::vector<double> lead_ii;
  std::vector<double> lead_v1;
  double rr_prev = 0.0;  // seconds
  double rr_next = 0.0;  // seconds

  std::size_t width() const { return lead_ii.size(); }
  bool operator==(const BeatSegment&) const = default;
};

// Per-lead z-score over the whole record with the population standard deviation.
// Throws DataError naming the lead when it has zero variance.
EcgRecord zscore_normalize(const EcgRecord& record);

// (x - min) / (max - min). Throws std::invalid_argument on constant or empty input.
std::vector<double> minmax_normalize(std::span<const double> values);

struct SegmentationResult {
  std::vector<BeatSegment> segments;
  std::size_t dropped = 0;  // beats whose window leaves the record
};

// One segment per beat annotation (any symbol with an AAMI class) whose window
// [r - y_before, r + y_after) lies inside the record.
SegmentationResult segment_beats(const EcgRecord& record, std::size_t y_before, std::size_t y_after);

enum class SubsampleScope {
  PerRecord,  // runs of k restart at each record boundary
  Pooled,     // runs continue across records in list order
};

// Keeps the k-th class-N beat of each complete run of k consecutive N beats
// (other classes do not interrupt a run). Non-N beats pass through; order is preserved.
std::vector<BeatSegment> subsample_class_n(std::span<const BeatSegment> segments, std::size_t k,
                                           SubsampleScope scope = SubsampleScope::Pooled);

// Seeded stratified per-class assignment for the intra-patient paradigm.
// Returns true for beats assigned to training. For record-level paradigms the
// assignment follows record membership.
std::vector<bool> assign_beats(const SplitPlan& plan, std::span<const BeatSegment> segments);

struct ClassCensus {
  std::size_t n = 0, s = 0, v = 0, f = 0, q = 0;
  std::size_t total() const { return n + s + v + f + q; }
  void add(AamiLabel label);
  bool operator==(const ClassCensus&) const = default;
};

ClassCensus census(std::span<const BeatSegment> segments);
nlohmann::json to_json(const ClassCensus& c);

nlohmann::json segment_to_json(const BeatSegment& s);
BeatSegment segment_from_json(const nlohmann::json& j);
void write_segments_jsonl(std::ostream& out, std::span<const BeatSegment> segments);
std::vector<BeatSegment> read_segments_jsonl(std::istream& in);

}  // namespace vgecg
