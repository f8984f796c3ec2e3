#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vgecg/features.hpp"
#include "vgecg/gnn.hpp"
#include "vgecg/ingest.hpp"
#include "vgecg/segment.hpp"

namespace vgecg {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mapping { VG, VVG };
enum class Normalization { None, MinMaxFeatures, ZScoreSignal };

std::string_view mapping_name(Mapping m);
Mapping parse_mapping(std::string_view s);
std::string_view normalization_name(Normalization n);
Normalization parse_normalization(std::string_view s);

struct RunConfig {
  std::filesystem::path data_dir = "data/mitdb";
  std::filesystem::path output_dir = "runs/default";
  Paradigm paradigm = Paradigm::InterPatient;
  Mapping mapping = Mapping::VG;
  bool symmetrize = true;
  std::size_t y_before = 100;
  std::size_t y_after = 180;
  Normalization normalization = Normalization::ZScoreSignal;
  FeatureGroup feature_group = FeatureGroup::II_V1;
  Architecture architecture = Architecture::GCN2;
  std::size_t epochs = 150;
  double lr = 0.001;
  std::size_t batch_size = 64;
  std::uint64_t seed = 42;
  std::size_t subsample_k = 10;
  SubsampleScope subsample_scope = SubsampleScope::Pooled;
  double train_fraction = 0.5;
  std::size_t sage_sample_size = 0;
  bool sage_l2_normalize = false;
  bool relu_on_last = false;
  std::size_t threads = 0;  // 0 = hardware concurrency

  std::size_t width() const { return y_before + y_after; }
  // Throws ConfigError describing the first invalid field.
  void validate() const;

  bool operator==(const RunConfig&) const = default;
};

// Segment split for the preset widths: 100 points before the R-peak, the rest after.
void set_width(RunConfig& config, std::size_t width);

// Applies one "key = value" setting. Throws ConfigError on unknown keys or bad values.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);
// Parses a key/value file body: one "key = value" per line, '#' starts a comment.
RunConfig parse_config(std::string_view text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});
std::string config_to_text(const RunConfig& config);
std::map<std::string, std::string> config_entries(const RunConfig& config);
nlohmann::json config_to_json(const RunConfig& config);

ModelOptions model_options(const RunConfig& config);

// Named experiment grids: exp1 ... exp5. Each entry's output_dir is a
// subdirectory of base.output_dir.
struct PresetRun {
  std::string name;
  RunConfig config;
};
std::vector<PresetRun> expand_preset(std::string_view preset, const RunConfig& base);

}  // namespace vgecg
