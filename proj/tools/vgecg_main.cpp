#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "vgecg/ingest.hpp"
#include "vgecg/pipeline.hpp"
#include "vgecg/run_config.hpp"
#include "vgecg/train.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kDivergence = 3 };

// Flags that map one-to-one onto config keys.
const std::vector<std::pair<std::string, std::string>> kFlagKeys = {
    {"--data-dir", "data_dir"},
    {"--output-dir", "output_dir"},
    {"--paradigm", "paradigm"},
    {"--mapping", "mapping"},
    {"--symmetrize", "symmetrize"},
    {"--width", "width"},
    {"--y-before", "y_before"},
    {"--y-after", "y_after"},
    {"--normalization", "normalization"},
    {"--feature-group", "feature_group"},
    {"--architecture", "architecture"},
    {"--epochs", "epochs"},
    {"--lr", "lr"},
    {"--batch-size", "batch_size"},
    {"--seed", "seed"},
    {"--subsample-k", "subsample_k"},
    {"--subsample-scope", "subsample_scope"},
    {"--train-fraction", "train_fraction"},
    {"--sage-sample-size", "sage_sample_size"},
    {"--sage-l2-normalize", "sage_l2_normalize"},
    {"--relu-on-last", "relu_on_last"},
    {"--threads", "threads"},
};

int run_one(const std::string& command, const vgecg::RunConfig& config, const std::string& checkpoint) {
  if (command == "ingest") {
    vgecg::cmd_ingest(config);
  } else if (command == "graphs") {
    vgecg::cmd_graphs(config);
  } else if (command == "train") {
    vgecg::cmd_train(config);
  } else if (command == "eval") {
    const auto ckpt = checkpoint.empty() ? config.output_dir / vgecg::artifacts::kModel : std::filesystem::path(checkpoint);
    std::cout << vgecg::report_table(vgecg::cmd_eval(config, ckpt));
  } else {
    std::cout << vgecg::report_table(vgecg::cmd_pipeline(config));
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ECG beat classification with visibility graphs and graph convolutional networks"};
  app.require_subcommand(1);

  std::string config_file, preset, checkpoint, log_level = "info";
  std::vector<std::string> settings;
  std::map<std::string, std::string> flag_values;

  app.add_option("-c,--config", config_file, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--preset", preset, "experiment grid: exp1 ... exp5");
  app.add_option("--set", settings, "extra key=value override (repeatable)");
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error");
  for (const auto& [flag, key] : kFlagKeys) app.add_option(flag, flag_values[key], "config key " + key);

  for (const char* name : {"ingest", "graphs", "train", "eval", "pipeline"}) {
    auto* sub = app.add_subcommand(name);
    sub->fallthrough();
    if (std::string(name) == "eval") sub->add_option("--checkpoint", checkpoint, "model.json to evaluate");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  const std::string command = app.get_subcommands().front()->get_name();
  std::vector<vgecg::RunConfig> configs;
  try {
    vgecg::RunConfig config;
    if (!config_file.empty()) config = vgecg::load_config(config_file);
    if (const char* env = std::getenv("VGECG_DATA_DIR"); env && *env) config.data_dir = env;
    for (const auto& [flag, key] : kFlagKeys)
      if (app.count(flag) > 0) vgecg::apply_setting(config, key, flag_values[key]);
    for (const auto& s : settings) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw vgecg::ConfigError("--set expects key=value, got '" + s + "'");
      vgecg::apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
    }
    if (preset.empty()) {
      configs.push_back(config);
    } else {
      for (auto& run : vgecg::expand_preset(preset, config)) configs.push_back(run.config);
    }
    for (const auto& c : configs) c.validate();
  } catch (const vgecg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    for (const auto& c : configs) {
      if (configs.size() > 1) spdlog::info("run {}", c.output_dir.string());
      run_one(command, c, checkpoint);
    }
  } catch (const vgecg::TrainingDivergence& e) {
    std::cerr << "training diverged: " << e.what() << "\n";
    return kDivergence;
  } catch (const vgecg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kOk;
}
