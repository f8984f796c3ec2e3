#include "vgecg/segment.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <stdexcept>

namespace vgecg {

EcgRecord zscore_normalize(const EcgRecord& record) {
  EcgRecord out = record;
  for (std::size_t k = 0; k < 2; ++k) {
    auto& lead = out.leads[k];
    if (lead.empty()) throw DataError("record " + record.record_id + ": empty lead " + record.lead_names[k]);
    const double n = static_cast<double>(lead.size());
    const double mean = std::accumulate(lead.begin(), lead.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : lead) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / n);
    if (!(sd > 0.0))
      throw DataError("record " + record.record_id + ": lead " + record.lead_names[k] + " has zero variance");
    for (double& x : lead) x = (x - mean) / sd;
  }
  return out;
}

std::vector<double> minmax_normalize(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("minmax_normalize: empty input");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double min = *lo, range = *hi - *lo;
  if (!(range > 0.0)) throw std::invalid_argument("minmax_normalize: constant input");
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - min) / range;
  return out;
}

SegmentationResult segment_beats(const EcgRecord& record, std::size_t y_before, std::size_t y_after) {
  if (y_before == 0 || y_after == 0) throw std::invalid_argument("segment_beats: window halves must be positive");
  struct Beat {
    std::int64_t sample;
    AamiLabel label;
  };
  std::vector<Beat> beats;
  for (const auto& a : record.annotations)
    if (auto label = map_symbol(a.symbol)) beats.push_back({a.sample, *label});

  SegmentationResult result;
  const double fs = record.sampling_rate_hz;
  const auto length = static_cast<std::int64_t>(record.length());
  const auto before = static_cast<std::int64_t>(y_before);
  const auto after = static_cast<std::int64_t>(y_after);
  for (std::size_t i = 0; i < beats.size(); ++i) {
    const std::int64_t r = beats[i].sample;
    double rr_prev = i > 0 ? (r - beats[i - 1].sample) / fs : 0.0;
    double rr_next = i + 1 < beats.size() ? (beats[i + 1].sample - r) / fs : 0.0;
    if (i == 0) rr_prev = rr_next;
    if (i + 1 == beats.size()) rr_next = rr_prev;
    const bool inside = r - before >= 0 && r + after <= length;
    if (!inside || !(rr_prev > 0.0) || !(rr_next > 0.0)) {
      ++result.dropped;
      continue;
    }
    BeatSegment seg;
    seg.record_id = record.record_id;
    seg.r_index = r;
    seg.label = beats[i].label;
    seg.y_before = y_before;
    seg.rr_prev = rr_prev;
    seg.rr_next = rr_next;
    const auto first = record.leads[0].begin() + (r - before);
    seg.lead_ii.assign(first, first + before + after);
    const auto first_v1 = record.leads[1].begin() + (r - before);
    seg.lead_v1.assign(first_v1, first_v1 + before + after);
    result.segments.push_back(std::move(seg));
  }
  return result;
}

std::vector<BeatSegment> subsample_class_n(std::span<const BeatSegment> segments, std::size_t k,
                                           SubsampleScope scope) {
  if (k == 0) throw std::invalid_argument("subsample_class_n: k must be >= 1");
  std::vector<BeatSegment> out;
  std::size_t run = 0;
  const std::string* current_record = nullptr;
  for (const auto& s : segments) {
    if (scope == SubsampleScope::PerRecord && (current_record == nullptr || *current_record != s.record_id)) {
      run = 0;
      current_record = &s.record_id;
    }
    if (s.label != AamiLabel::N) {
      out.push_back(s);
      continue;
    }
    if (++run == k) {
      out.push_back(s);
      run = 0;
    }
  }
  return out;
}

std::vector<bool> assign_beats(const SplitPlan& plan, std::span<const BeatSegment> segments) {
  std::vector<bool> is_train(segments.size(), false);
  if (plan.record_level()) {
    const std::set<std::string> train(plan.train_records.begin(), plan.train_records.end());
    for (std::size_t i = 0; i < segments.size(); ++i) is_train[i] = train.count(segments[i].record_id) > 0;
    return is_train;
  }
  std::map<AamiLabel, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < segments.size(); ++i) by_class[segments[i].label].push_back(i);
  std::mt19937_64 rng(plan.seed);
  for (auto& [label, idx] : by_class) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::llround(plan.train_fraction * static_cast<double>(idx.size())));
    for (std::size_t j = 0; j < n_train && j < idx.size(); ++j) is_train[idx[j]] = true;
  }
  return is_train;
}

void ClassCensus::add(AamiLabel label) {
  switch (label) {
    case AamiLabel::N: ++n; break;
    case AamiLabel::S: ++s; break;
    case AamiLabel::V: ++v; break;
    case AamiLabel::F: ++f; break;
    case AamiLabel::Q: ++q; break;
  }
}

ClassCensus census(std::span<const BeatSegment> segments) {
  ClassCensus c;
  for (const auto& s : segments) c.add(s.label);
  return c;
}

nlohmann::json to_json(const ClassCensus& c) {
  return {{"N", c.n}, {"S", c.s}, {"V", c.v}, {"F", c.f}, {"Q", c.q}, {"total", c.total()}};
}

nlohmann::json segment_to_json(const BeatSegment& s) {
  return {{"record_id", s.record_id}, {"r_index", s.r_index},       {"label", std::string(1, label_char(s.label))},
          {"rr_prev", s.rr_prev},     {"rr_next", s.rr_next},       {"y_before", s.y_before},
          {"lead_ii", s.lead_ii},     {"lead_v1", s.lead_v1}};
}

BeatSegment segment_from_json(const nlohmann::json& j) {
  BeatSegment s;
  s.record_id = j.at("record_id").get<std::string>();
  s.r_index = j.at("r_index").get<std::int64_t>();
  const auto label = parse_label(j.at("label").get<std::string>());
  if (!label) throw DataError("segment with unknown label " + j.at("label").dump());
  s.label = *label;
  s.rr_prev = j.at("rr_prev").get<double>();
  s.rr_next = j.at("rr_next").get<double>();
  s.lead_ii = j.at("lead_ii").get<std::vector<double>>();
  s.lead_v1 = j.at("lead_v1").get<std::vector<double>>();
  s.y_before = j.value("y_before", s.lead_ii.size() / 2);
  if (s.lead_ii.size() != s.lead_v1.size()) throw DataError("segment leads differ in length");
  return s;
}

void write_segments_jsonl(std::ostream& out, std::span<const BeatSegment> segments) {
  for (const auto& s : segments) out << segment_to_json(s).dump() << '\n';
}

std::vector<BeatSegment> read_segments_jsonl(std::istream& in) {
  std::vector<BeatSegment> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(segment_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("segment JSONL line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace vgecg
