#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "test_support.hpp"
#include "vgecg/pipeline.hpp"
#include "vgecg/run_config.hpp"

using namespace vgecg;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small CSV dataset with every DS1/DS2 record present.
std::filesystem::path synthetic_dataset() {
  static const auto dir = [] {
    auto d = support::fresh_dir("dataset");
    std::uint64_t seed = 100;
    for (const auto* set : {&ds1_records(), &ds2_records()})
      for (const auto& id : *set) {
        const auto rec = support::synthetic_record(id, 14, 300, "NNNNANNVNNNNAV", seed++);
        write_csv_record(rec, csv_signal_path(d, id), csv_annotation_path(d, id));
      }
    return d;
  }();
  return dir;
}

RunConfig small_config(const std::string& name) {
  RunConfig c;
  c.data_dir = synthetic_dataset();
  c.output_dir = support::fresh_dir(name);
  c.epochs = 3;
  c.batch_size = 16;
  c.subsample_k = 3;
  c.threads = 2;
  return c;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(VGECG_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("config text round-trips") {
    RunConfig c;
    c.paradigm = Paradigm::IntraPatient;
    c.mapping = Mapping::VVG;
    c.symmetrize = false;
    c.lr = 0.1 + 0.2;
    c.train_fraction = 1.0 / 3;
    c.feature_group = FeatureGroup::StdII;
    c.architecture = Architecture::GCN120;
    c.subsample_scope = SubsampleScope::PerRecord;
    c.data_dir = "/data/with space";
    c.y_before = 7;
    c.y_after = 9;
    CHECK(parse_config(config_to_text(c)) == c);
    CHECK(parse_config(config_to_text(RunConfig{})) == RunConfig{});

    const auto parsed = parse_config("# comment\nwidth = 230\n\n epochs=4 # trailing\nmapping = vvg\n");
    CHECK(parsed.y_before == 100);
    CHECK(parsed.y_after == 130);
    CHECK(parsed.epochs == 4);
    CHECK(parsed.mapping == Mapping::VVG);

    CHECK_THROWS_AS(parse_config("colour = red"), ConfigError);
    CHECK_THROWS_AS(parse_config("epochs = 0.5"), ConfigError);
    CHECK_THROWS_AS(parse_config("just words"), ConfigError);
    CHECK_THROWS_AS(parse_config("paradigm = cross"), ConfigError);
    CHECK_THROWS_AS(parse_config("epochs = 0").validate(), ConfigError);
    CHECK_THROWS_AS(parse_config("y_after = 0").validate(), ConfigError);
  }

  TEST_CASE("experiment presets") {
    RunConfig base;
    base.output_dir = "out";
    CHECK(expand_preset("exp1", base).size() == 5);
    CHECK(expand_preset("exp2", base).size() == 6);
    CHECK(expand_preset("exp3", base).size() == 24);
    CHECK(expand_preset("exp4", base).size() == 8);
    CHECK(expand_preset("exp5", base).size() == 8);
    CHECK_THROWS_AS(expand_preset("exp6", base), ConfigError);
    for (const auto& run : expand_preset("exp2", base)) {
      CHECK(run.config.paradigm == Paradigm::Tuning);
      CHECK(run.config.y_before == 100);
      CHECK(run.config.output_dir.parent_path() == "out");
    }
    for (const auto& run : expand_preset("exp5", base)) CHECK(run.config.paradigm == Paradigm::IntraPatient);
  }

  TEST_CASE("threaded graph conversion keeps input order") {
    auto c = small_config("threads");
    const auto rec = support::synthetic_record("200", 30, 300, "NVA", 5);
    const auto segs = segment_beats(rec, 100, 180).segments;
    for (auto mapping : {Mapping::VG, Mapping::VVG}) {
      c.mapping = mapping;
      const auto one = segments_to_graphs(segs, c, 1);
      const auto four = segments_to_graphs(segs, c, 4);
      REQUIRE(one.size() == segs.size());
      for (std::size_t i = 0; i < one.size(); ++i) {
        CHECK(one[i].n == 280);
        CHECK(one[i].edges == four[i].edges);
        CHECK(one[i].features == four[i].features);
        CHECK(one[i].r_index == segs[i].r_index);
        CHECK(one[i].directed == false);
      }
    }
    c.symmetrize = false;
    CHECK(segment_to_graph(segs[0], c).directed);
  }

  TEST_CASE("pipeline artifacts, manifests and determinism") {
    auto a = small_config("pipe_a");
    a.feature_group = FeatureGroup::Stats;
    const auto report = cmd_pipeline(a);
    for (const char* name : {artifacts::kTrainSegments, artifacts::kTestSegments, artifacts::kCensus, artifacts::kSplit,
                             artifacts::kTrainGraphs, artifacts::kTestGraphs, artifacts::kModel, artifacts::kLossLog,
                             artifacts::kReportJson, artifacts::kReportText, artifacts::kConfusion, artifacts::kConfig})
      CHECK_MESSAGE(std::filesystem::exists(a.output_dir / name), name);
    for (const char* cmd : {"ingest", "graphs", "train", "eval", "pipeline"}) {
      const auto m = nlohmann::json::parse(slurp(a.output_dir / ("manifest_" + std::string(cmd) + ".json")));
      CHECK(m.at("seed") == a.seed);
      CHECK(m.at("outputs").size() >= 1);
      for (const auto& [name, hash] : m.at("outputs").items())
        if (std::filesystem::exists(a.output_dir / name)) CHECK(hash == sha256_file(a.output_dir / name));
    }
    // The stored config replays the run.
    CHECK(load_config(a.output_dir / artifacts::kConfig) == a);
    CHECK(report.total() > 0);

    {
      std::ifstream in(a.output_dir / artifacts::kTestGraphs);
      for (const auto& g : read_graphs_jsonl(in)) {
        CHECK(g.n == 280);
        CHECK(g.features.cols() == 22);
      }
    }
    const auto census = nlohmann::json::parse(slurp(a.output_dir / artifacts::kCensus));
    CHECK(census.at("train").at("N").get<std::size_t>() > 0);

    auto b = a;
    b.output_dir = support::fresh_dir("pipe_b");
    b.threads = 1;
    cmd_pipeline(b);
    CHECK(slurp(a.output_dir / artifacts::kReportJson) == slurp(b.output_dir / artifacts::kReportJson));
    CHECK(slurp(a.output_dir / artifacts::kModel) == slurp(b.output_dir / artifacts::kModel));
  }

  TEST_CASE("intra-patient and VVG runs") {
    auto c = small_config("intra");
    c.paradigm = Paradigm::IntraPatient;
    c.mapping = Mapping::VVG;
    c.architecture = Architecture::GCN7;
    c.feature_group = FeatureGroup::RR;
    c.epochs = 1;
    const auto summary = cmd_ingest(c);
    CHECK(summary.train_before.total() > summary.train_after.total());
    std::ifstream tr(c.output_dir / artifacts::kTrainSegments), te(c.output_dir / artifacts::kTestSegments);
    const auto train = read_segments_jsonl(tr), test = read_segments_jsonl(te);
    CHECK(train.size() == doctest::Approx(test.size()).epsilon(0.05));
    CHECK_NOTHROW(cmd_graphs(c));
    CHECK_NOTHROW(cmd_train(c));
  }

  TEST_CASE("downstream commands need upstream artifacts") {
    auto c = small_config("missing");
    CHECK_THROWS_AS(cmd_graphs(c), DataError);
    CHECK_THROWS_AS(cmd_train(c), DataError);
    CHECK_THROWS_AS(cmd_eval(c, c.output_dir / "model.json"), DataError);
    c.data_dir = c.output_dir / "nowhere";
    CHECK_THROWS_AS(cmd_ingest(c), DataError);
  }

  TEST_CASE("executable exit codes") {
    const auto out = support::fresh_dir("exe");
    const auto data = synthetic_dataset();
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("") == 1);
    CHECK(run_cli("frobnicate") == 1);
    CHECK(run_cli("ingest --epochs 0") == 1);
    CHECK(run_cli("ingest --data-dir " + (out / "none").string() + " --output-dir " + out.string()) == 2);
    CHECK(run_cli("graphs --output-dir " + (out / "empty").string()) == 2);
    CHECK(run_cli("pipeline --data-dir " + data.string() + " --output-dir " + out.string() +
                  " --epochs 1 --subsample-k 3 --log-level warn") == 0);
    CHECK(std::filesystem::exists(out / artifacts::kReportJson));
    CHECK(run_cli("eval --output-dir " + out.string() + " --checkpoint " + (out / "model.json").string()) == 0);

    // The environment variable overrides the config file; flags override both.
    {
      std::ofstream cfg(out / "run.cfg");
      cfg << "data_dir = /nonexistent\nepochs = 1\nsubsample_k = 3\noutput_dir = " << (out / "env").string() << "\n";
    }
    CHECK(run_cli("ingest --config " + (out / "run.cfg").string()) == 2);
    CHECK(run_cli("ingest --config " + (out / "run.cfg").string() + " --data-dir " + data.string()) == 0);
    const std::string env = "VGECG_DATA_DIR=" + data.string() + " ";
    const int status = std::system((env + VGECG_CLI_PATH + " ingest --config " + (out / "run.cfg").string() +
                                    " > /dev/null 2>&1")
                                       .c_str());
    CHECK(WEXITSTATUS(status) == 0);
  }
}
