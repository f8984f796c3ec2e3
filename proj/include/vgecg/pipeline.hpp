#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "vgecg/eval.hpp"
#include "vgecg/run_config.hpp"
#include "vgecg/segment.hpp"
#include "vgecg/train.hpp"
#include "vgecg/visibility.hpp"

namespace vgecg {

// Artifact file names inside a run's output directory.
namespace artifacts {
inline constexpr const char* kTrainSegments = "train_segments.jsonl";
inline constexpr const char* kTestSegments = "test_segments.jsonl";
inline constexpr const char* kCensus = "census.json";
inline constexpr const char* kSplit = "split.json";
inline constexpr const char* kTrainGraphs = "train_graphs.jsonl";
inline constexpr const char* kTestGraphs = "test_graphs.jsonl";
inline constexpr const char* kModel = "model.json";
inline constexpr const char* kLossLog = "loss_log.csv";
inline constexpr const char* kReportJson = "report.json";
inline constexpr const char* kReportText = "report.txt";
inline constexpr const char* kConfusion = "confusion.csv";
inline constexpr const char* kConfig = "config.txt";
}  // namespace artifacts

std::string sha256_file(const std::filesystem::path& path);

// Graph + features for one segment under the config's mapping.
BeatGraph segment_to_graph(const BeatSegment& segment, const RunConfig& config, std::size_t* perturbed = nullptr);

// Converts segments on `threads` workers; output order matches input order.
std::vector<BeatGraph> segments_to_graphs(std::span<const BeatSegment> segments, const RunConfig& config,
                                          std::size_t threads, std::size_t* perturbed = nullptr);

struct IngestSummary {
  ClassCensus train_before, test_before, train_after, test_after;
  std::size_t dropped = 0;
};

// Each command writes its artifacts and a manifest_<command>.json into config.output_dir.
IngestSummary cmd_ingest(const RunConfig& config);
void cmd_graphs(const RunConfig& config);
TrainResult cmd_train(const RunConfig& config);
EvalReport cmd_eval(const RunConfig& config, const std::filesystem::path& checkpoint);
EvalReport cmd_pipeline(const RunConfig& config);

}  // namespace vgecg
