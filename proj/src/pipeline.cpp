#include "vgecg/pipeline.hpp"

#include <atomic>
#include <exception>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include "vgecg/features.hpp"

namespace vgecg {

namespace fs = std::filesystem;

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw std::runtime_error("sha256 init failed");
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

BeatGraph segment_to_graph(const BeatSegment& segment, const RunConfig& config, std::size_t* perturbed) {
  BeatGraph g;
  if (config.mapping == Mapping::VG) {
    g = build_vg(segment.lead_ii);
  } else {
    Matrix series(segment.width(), 2);
    for (std::size_t i = 0; i < segment.width(); ++i) {
      series(i, 0) = segment.lead_ii[i];
      series(i, 1) = segment.lead_v1[i];
    }
    VvgStats stats;
    g = build_vvg(series, VvgOptions{.perturb_zero_norm = true}, &stats);
    if (perturbed) *perturbed += stats.perturbed;
    if (config.symmetrize) g = symmetrized(std::move(g));
  }
  g.label = segment.label;
  g.record_id = segment.record_id;
  g.r_index = segment.r_index;
  g.features =
      compute_features(segment, config.feature_group, config.normalization == Normalization::MinMaxFeatures);
  return g;
}

std::vector<BeatGraph> segments_to_graphs(std::span<const BeatSegment> segments, const RunConfig& config,
                                          std::size_t threads, std::size_t* perturbed) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(segments.size(), 1));

  std::vector<BeatGraph> graphs(segments.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> total_perturbed{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    std::size_t local = 0;
    try {
      for (std::size_t i = next++; i < segments.size(); i = next++) graphs[i] = segment_to_graph(segments[i], config, &local);
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = segments.size();
    }
    total_perturbed += local;
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  if (perturbed) *perturbed += total_perturbed;
  return graphs;
}

namespace {

using Hashes = std::map<std::string, std::string>;

void ensure_output_dir(const RunConfig& config) {
  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) throw DataError("cannot create output directory " + config.output_dir.string() + ": " + ec.message());
}

fs::path out_path(const RunConfig& config, const char* name) { return config.output_dir / name; }

fs::path require_input(const RunConfig& config, const char* name) {
  fs::path p = out_path(config, name);
  if (!fs::exists(p)) throw DataError("missing input " + p.string() + " (run the upstream command first)");
  return p;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot read " + p.string());
  return in;
}

void write_json(const fs::path& p, const nlohmann::json& j) {
  auto out = open_out(p);
  out << j.dump(2) << "\n";
}

nlohmann::json read_json(const fs::path& p) {
  auto in = open_in(p);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(p.string() + ": " + e.what());
  }
}

Hashes hash_outputs(const RunConfig& config, std::initializer_list<const char*> names) {
  Hashes h;
  for (const char* name : names) h[name] = sha256_file(out_path(config, name));
  return h;
}

void write_manifest(const RunConfig& config, const std::string& command, const Hashes& inputs, const Hashes& outputs) {
  {
    auto out = open_out(out_path(config, artifacts::kConfig));
    out << config_to_text(config);
  }
  nlohmann::json m;
  m["command"] = command;
  m["config"] = config_to_json(config);
  m["seed"] = config.seed;
  m["inputs"] = inputs;
  m["outputs"] = outputs;
  m["config_sha256"] = sha256_file(out_path(config, artifacts::kConfig));
  write_json(out_path(config, ("manifest_" + command + ".json").c_str()), m);
}

Hashes record_file_hashes(const RunConfig& config, const std::vector<std::string>& records) {
  Hashes h;
  for (const auto& id : records) {
    const fs::path candidates[] = {config.data_dir / (id + ".hea"), config.data_dir / (id + ".dat"),
                                   config.data_dir / (id + ".atr"), csv_signal_path(config.data_dir, id),
                                   csv_annotation_path(config.data_dir, id)};
    for (const auto& p : candidates)
      if (fs::exists(p)) h[p.filename().string()] = sha256_file(p);
  }
  return h;
}

std::vector<BeatSegment> load_segments(const RunConfig& config, const std::vector<std::string>& records,
                                       std::size_t& dropped) {
  std::vector<BeatSegment> out;
  for (const auto& id : records) {
    if (!record_available(config.data_dir, id))
      throw DataError("record " + id + " not found in " + config.data_dir.string());
    EcgRecord rec = load_record(config.data_dir, id);
    if (config.normalization == Normalization::ZScoreSignal) rec = zscore_normalize(rec);
    auto seg = segment_beats(rec, config.y_before, config.y_after);
    dropped += seg.dropped;
    for (auto& s : seg.segments) out.push_back(std::move(s));
  }
  return out;
}

std::vector<BeatSegment> read_segments(const fs::path& p) {
  auto in = open_in(p);
  return read_segments_jsonl(in);
}

std::vector<BeatGraph> read_graphs(const fs::path& p) {
  auto in = open_in(p);
  return read_graphs_jsonl(in);
}

bool classified(const BeatSegment& s) { return class_index(s.label).has_value(); }

}  // namespace

IngestSummary cmd_ingest(const RunConfig& config) {
  config.validate();
  ensure_output_dir(config);
  const SplitPlan plan = make_split(config.paradigm, config.seed, config.train_fraction);

  // Subsampling runs over the two source sets separately: the train/test record
  // sets, or DS1 and DS2 before the intra-patient beat split.
  const std::vector<std::string>& first = plan.record_level() ? plan.train_records : ds1_records();
  const std::vector<std::string>& second = plan.record_level() ? plan.test_records : ds2_records();

  IngestSummary summary;
  auto seg_a = load_segments(config, first, summary.dropped);
  auto seg_b = load_segments(config, second, summary.dropped);
  summary.train_before = census(seg_a);
  summary.test_before = census(seg_b);
  seg_a = subsample_class_n(seg_a, config.subsample_k, config.subsample_scope);
  seg_b = subsample_class_n(seg_b, config.subsample_k, config.subsample_scope);
  summary.train_after = census(seg_a);
  summary.test_after = census(seg_b);

  std::vector<BeatSegment> pooled;
  pooled.reserve(seg_a.size() + seg_b.size());
  for (auto* src : {&seg_a, &seg_b})
    for (auto& s : *src)
      if (classified(s)) pooled.push_back(std::move(s));

  std::vector<BeatSegment> train, test;
  const auto is_train = assign_beats(plan, pooled);
  for (std::size_t i = 0; i < pooled.size(); ++i) (is_train[i] ? train : test).push_back(std::move(pooled[i]));

  {
    auto out = open_out(out_path(config, artifacts::kTrainSegments));
    write_segments_jsonl(out, train);
  }
  {
    auto out = open_out(out_path(config, artifacts::kTestSegments));
    write_segments_jsonl(out, test);
  }
  nlohmann::json c;
  c["width"] = config.width();
  c["dropped_boundary_beats"] = summary.dropped;
  c["source_sets"] = {{{"records", first}, {"before_subsample", to_json(summary.train_before)},
                       {"after_subsample", to_json(summary.train_after)}},
                      {{"records", second}, {"before_subsample", to_json(summary.test_before)},
                       {"after_subsample", to_json(summary.test_after)}}};
  c["train"] = to_json(census(train));
  c["test"] = to_json(census(test));
  write_json(out_path(config, artifacts::kCensus), c);
  write_json(out_path(config, artifacts::kSplit), to_json(plan));

  spdlog::info("ingest: {} train / {} test beats (N,S,V), {} boundary beats dropped", train.size(), test.size(),
               summary.dropped);
  write_manifest(config, "ingest", record_file_hashes(config, plan.all_records()),
                 hash_outputs(config, {artifacts::kTrainSegments, artifacts::kTestSegments, artifacts::kCensus,
                                       artifacts::kSplit}));
  return summary;
}

void cmd_graphs(const RunConfig& config) {
  config.validate();
  ensure_output_dir(config);
  const auto train_in = require_input(config, artifacts::kTrainSegments);
  const auto test_in = require_input(config, artifacts::kTestSegments);
  std::size_t perturbed = 0;
  for (auto [in, name] : {std::pair{train_in, artifacts::kTrainGraphs}, std::pair{test_in, artifacts::kTestGraphs}}) {
    const auto segments = read_segments(in);
    for (const auto& s : segments)
      if (s.width() != config.width())
        throw DataError(in.string() + ": segment width " + std::to_string(s.width()) + " does not match config width " +
                        std::to_string(config.width()));
    const auto graphs = segments_to_graphs(segments, config, config.threads, &perturbed);
    auto out = open_out(out_path(config, name));
    write_graphs_jsonl(out, graphs);
  }
  if (perturbed > 0) spdlog::warn("graphs: {} zero-norm VVG vectors perturbed", perturbed);
  write_manifest(config, "graphs", hash_outputs(config, {artifacts::kTrainSegments, artifacts::kTestSegments}),
                 hash_outputs(config, {artifacts::kTrainGraphs, artifacts::kTestGraphs}));
}

TrainResult cmd_train(const RunConfig& config) {
  config.validate();
  ensure_output_dir(config);
  const auto graphs = read_graphs(require_input(config, artifacts::kTrainGraphs));
  if (graphs.empty()) throw DataError("no training graphs");
  GcnModel model =
      build_architecture(config.architecture, feature_dimension(config.feature_group), config.seed, model_options(config));
  TrainConfig tc;
  tc.epochs = config.epochs;
  tc.lr = config.lr;
  tc.batch_size = config.batch_size;
  tc.seed = config.seed;
  TrainResult result = train(std::move(model), graphs, tc);
  write_json(out_path(config, artifacts::kModel), model_to_json(result.model));
  {
    auto out = open_out(out_path(config, artifacts::kLossLog));
    write_loss_log_csv(out, result.log);
  }
  spdlog::info("train: final loss {:.6f}, train accuracy {:.2f}%", result.log.back().loss,
               100.0 * result.log.back().train_accuracy);
  write_manifest(config, "train", hash_outputs(config, {artifacts::kTrainGraphs}),
                 hash_outputs(config, {artifacts::kModel, artifacts::kLossLog}));
  return result;
}

EvalReport cmd_eval(const RunConfig& config, const fs::path& checkpoint) {
  config.validate();
  ensure_output_dir(config);
  if (!fs::exists(checkpoint)) throw DataError("missing checkpoint " + checkpoint.string());
  GcnModel model;
  try {
    model = model_from_json(read_json(checkpoint));
  } catch (const std::invalid_argument& e) {
    throw DataError(checkpoint.string() + ": " + e.what());
  }
  const auto graphs = read_graphs(require_input(config, artifacts::kTestGraphs));
  if (graphs.empty()) throw DataError("no test graphs");
  const auto predicted = predict_graphs(model, graphs);
  std::vector<std::size_t> truth;
  truth.reserve(graphs.size());
  for (const auto& g : graphs) truth.push_back(*class_index(g.label));
  const EvalReport report = compute_report(truth, predicted);

  write_json(out_path(config, artifacts::kReportJson), report_to_json(report));
  {
    auto out = open_out(out_path(config, artifacts::kReportText));
    out << report_table(report);
  }
  {
    auto out = open_out(out_path(config, artifacts::kConfusion));
    write_confusion_csv(out, report.confusion);
  }
  Hashes inputs = hash_outputs(config, {artifacts::kTestGraphs});
  inputs["checkpoint"] = sha256_file(checkpoint);
  write_manifest(config, "eval", inputs,
                 hash_outputs(config, {artifacts::kReportJson, artifacts::kReportText, artifacts::kConfusion}));
  return report;
}

EvalReport cmd_pipeline(const RunConfig& config) {
  config.validate();
  cmd_ingest(config);
  cmd_graphs(config);
  cmd_train(config);
  EvalReport report = cmd_eval(config, out_path(config, artifacts::kModel));
  const SplitPlan plan = make_split(config.paradigm, config.seed, config.train_fraction);
  write_manifest(config, "pipeline", record_file_hashes(config, plan.all_records()),
                 hash_outputs(config, {artifacts::kTrainSegments, artifacts::kTestSegments, artifacts::kCensus,
                                       artifacts::kSplit, artifacts::kTrainGraphs, artifacts::kTestGraphs,
                                       artifacts::kModel, artifacts::kLossLog, artifacts::kReportJson,
                                       artifacts::kReportText, artifacts::kConfusion}));
  return report;
}

}  // namespace vgecg
