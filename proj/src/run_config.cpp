#include "vgecg/run_config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace vgecg {

std::string_view mapping_name(Mapping m) { return m == Mapping::VG ? "vg" : "vvg"; }

Mapping parse_mapping(std::string_view s) {
  if (s == "vg") return Mapping::VG;
  if (s == "vvg") return Mapping::VVG;
  throw ConfigError("mapping must be vg or vvg, got '" + std::string(s) + "'");
}

std::string_view normalization_name(Normalization n) {
  switch (n) {
    case Normalization::None: return "none";
    case Normalization::MinMaxFeatures: return "minmax_features";
    case Normalization::ZScoreSignal: return "zscore_signal";
  }
  return "?";
}

Normalization parse_normalization(std::string_view s) {
  for (auto n : {Normalization::None, Normalization::MinMaxFeatures, Normalization::ZScoreSignal})
    if (normalization_name(n) == s) return n;
  throw ConfigError("normalization must be none, minmax_features or zscore_signal, got '" + std::string(s) + "'");
}

void RunConfig::validate() const {
  if (y_before == 0 || y_after == 0) throw ConfigError("y_before and y_after must be positive");
  if (epochs == 0) throw ConfigError("epochs must be >= 1");
  if (!(lr >= 0.0)) throw ConfigError("lr must be non-negative");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (subsample_k == 0) throw ConfigError("subsample_k must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must lie in (0, 1)");
  if (output_dir.empty()) throw ConfigError("output_dir must be set");
}

void set_width(RunConfig& config, std::size_t width) {
  if (width <= 100) throw ConfigError("width must exceed 100 points");
  config.y_before = 100;
  config.y_after = width - 100;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_int(std::string_view key, std::string_view v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("'" + std::string(key) + "' expects an integer, got '" + std::string(v) + "'");
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  const std::string s(v);
  std::size_t used = 0;
  double out = 0;
  try {
    out = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty())
    throw ConfigError("'" + std::string(key) + "' expects a number, got '" + s + "'");
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("'" + std::string(key) + "' expects true/false, got '" + std::string(v) + "'");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename F>
auto rethrow_as_config(F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

void apply_setting(RunConfig& c, std::string_view key, std::string_view value) {
  const std::string v = trim(value);
  if (key == "data_dir") c.data_dir = v;
  else if (key == "output_dir") c.output_dir = v;
  else if (key == "paradigm") c.paradigm = rethrow_as_config([&] { return parse_paradigm(v); });
  else if (key == "mapping") c.mapping = parse_mapping(v);
  else if (key == "symmetrize") c.symmetrize = parse_bool(key, v);
  else if (key == "width") set_width(c, parse_int<std::size_t>(key, v));
  else if (key == "y_before") c.y_before = parse_int<std::size_t>(key, v);
  else if (key == "y_after") c.y_after = parse_int<std::size_t>(key, v);
  else if (key == "normalization") c.normalization = parse_normalization(v);
  else if (key == "feature_group") c.feature_group = rethrow_as_config([&] { return parse_feature_group(v); });
  else if (key == "architecture") c.architecture = rethrow_as_config([&] { return parse_architecture(v); });
  else if (key == "epochs") c.epochs = parse_int<std::size_t>(key, v);
  else if (key == "lr") c.lr = parse_double(key, v);
  else if (key == "batch_size") c.batch_size = parse_int<std::size_t>(key, v);
  else if (key == "seed") c.seed = parse_int<std::uint64_t>(key, v);
  else if (key == "subsample_k") c.subsample_k = parse_int<std::size_t>(key, v);
  else if (key == "subsample_scope") {
    if (v == "pooled") c.subsample_scope = SubsampleScope::Pooled;
    else if (v == "per_record") c.subsample_scope = SubsampleScope::PerRecord;
    else throw ConfigError("subsample_scope must be pooled or per_record");
  } else if (key == "train_fraction") c.train_fraction = parse_double(key, v);
  else if (key == "sage_sample_size") c.sage_sample_size = parse_int<std::size_t>(key, v);
  else if (key == "sage_l2_normalize") c.sage_l2_normalize = parse_bool(key, v);
  else if (key == "relu_on_last") c.relu_on_last = parse_bool(key, v);
  else if (key == "threads") c.threads = parse_int<std::size_t>(key, v);
  else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    apply_setting(base, trim(std::string_view(t).substr(0, eq)), std::string_view(t).substr(eq + 1));
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::map<std::string, std::string> config_entries(const RunConfig& c) {
  return {
      {"data_dir", c.data_dir.string()},
      {"output_dir", c.output_dir.string()},
      {"paradigm", std::string(paradigm_name(c.paradigm))},
      {"mapping", std::string(mapping_name(c.mapping))},
      {"symmetrize", c.symmetrize ? "true" : "false"},
      {"y_before", std::to_string(c.y_before)},
      {"y_after", std::to_string(c.y_after)},
      {"normalization", std::string(normalization_name(c.normalization))},
      {"feature_group", std::string(feature_group_name(c.feature_group))},
      {"architecture", std::string(architecture_name(c.architecture))},
      {"epochs", std::to_string(c.epochs)},
      {"lr", format_double(c.lr)},
      {"batch_size", std::to_string(c.batch_size)},
      {"seed", std::to_string(c.seed)},
      {"subsample_k", std::to_string(c.subsample_k)},
      {"subsample_scope", c.subsample_scope == SubsampleScope::Pooled ? "pooled" : "per_record"},
      {"train_fraction", format_double(c.train_fraction)},
      {"sage_sample_size", std::to_string(c.sage_sample_size)},
      {"sage_l2_normalize", c.sage_l2_normalize ? "true" : "false"},
      {"relu_on_last", c.relu_on_last ? "true" : "false"},
      {"threads", std::to_string(c.threads)},
  };
}

std::string config_to_text(const RunConfig& c) {
  std::string out;
  for (const auto& [k, v] : config_entries(c)) out += k + " = " + v + "\n";
  return out;
}

nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json j;
  for (const auto& [k, v] : config_entries(c)) j[k] = v;
  return j;
}

ModelOptions model_options(const RunConfig& c) {
  return {c.sage_sample_size, c.sage_l2_normalize, c.relu_on_last};
}

std::vector<PresetRun> expand_preset(std::string_view preset, const RunConfig& base) {
  std::vector<PresetRun> runs;
  auto add = [&](RunConfig c, const std::string& name) {
    c.output_dir = base.output_dir / name;
    runs.push_back({name, std::move(c)});
  };
  const std::vector<Architecture> best_two = {Architecture::GCN2, Architecture::GCN7};

  if (preset == "exp1") {
    for (auto arch : {Architecture::GCN2, Architecture::GCN7, Architecture::GCN60, Architecture::GCN120,
                      Architecture::GCN240}) {
      RunConfig c = base;
      c.paradigm = Paradigm::Tuning;
      c.mapping = Mapping::VG;
      set_width(c, 280);
      c.normalization = Normalization::MinMaxFeatures;
      c.feature_group = FeatureGroup::II_V1;
      c.architecture = arch;
      add(c, "exp1_" + std::string(architecture_name(arch)));
    }
  } else if (preset == "exp2") {
    for (std::size_t width : {230, 280, 300})
      for (auto arch : best_two) {
        RunConfig c = base;
        c.paradigm = Paradigm::Tuning;
        c.mapping = Mapping::VG;
        set_width(c, width);
        c.normalization = Normalization::MinMaxFeatures;
        c.feature_group = FeatureGroup::II_V1;
        c.architecture = arch;
        add(c, "exp2_w" + std::to_string(width) + "_" + std::string(architecture_name(arch)));
      }
  } else if (preset == "exp3") {
    for (auto mapping : {Mapping::VG, Mapping::VVG})
      for (auto group : {FeatureGroup::II_V1, FeatureGroup::RR, FeatureGroup::DifII, FeatureGroup::AvgII,
                         FeatureGroup::StdII, FeatureGroup::Stats})
        for (auto arch : best_two) {
          RunConfig c = base;
          c.paradigm = Paradigm::InterPatient;
          c.mapping = mapping;
          set_width(c, 280);
          c.normalization = Normalization::ZScoreSignal;
          c.feature_group = group;
          c.architecture = arch;
          add(c, "exp3_" + std::string(mapping_name(mapping)) + "_" + std::string(feature_group_name(group)) + "_" +
                     std::string(architecture_name(arch)));
        }
  } else if (preset == "exp4" || preset == "exp5") {
    // Two best feature groups per architecture and mapping from the feature sweep.
    struct Combo {
      Mapping mapping;
      Architecture arch;
      FeatureGroup group;
    };
    const std::vector<Combo> combos = {
        {Mapping::VG, Architecture::GCN2, FeatureGroup::RR},     {Mapping::VG, Architecture::GCN2, FeatureGroup::Stats},
        {Mapping::VG, Architecture::GCN7, FeatureGroup::AvgII},  {Mapping::VG, Architecture::GCN7, FeatureGroup::Stats},
        {Mapping::VVG, Architecture::GCN2, FeatureGroup::RR},    {Mapping::VVG, Architecture::GCN2, FeatureGroup::Stats},
        {Mapping::VVG, Architecture::GCN7, FeatureGroup::StdII}, {Mapping::VVG, Architecture::GCN7, FeatureGroup::Stats},
    };
    for (const auto& combo : combos) {
      RunConfig c = base;
      c.paradigm = preset == "exp4" ? Paradigm::InterPatientSwapped : Paradigm::IntraPatient;
      c.mapping = combo.mapping;
      set_width(c, 280);
      c.normalization = Normalization::ZScoreSignal;
      c.feature_group = combo.group;
      c.architecture = combo.arch;
      add(c, std::string(preset) + "_" + std::string(mapping_name(combo.mapping)) + "_" +
                 std::string(feature_group_name(combo.group)) + "_" + std::string(architecture_name(combo.arch)));
    }
  } else {
    throw ConfigError("unknown preset '" + std::string(preset) + "' (expected exp1 ... exp5)");
  }
  return runs;
}

}  // namespace vgecg
