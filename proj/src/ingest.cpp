#include "vgecg/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

namespace vgecg {

namespace fs = std::filesystem;

ParseError::ParseError(std::string file, std::size_t byte_offset, const std::string& what)
    : std::runtime_error(file + " @ byte " + std::to_string(byte_offset) + ": " + what),
      file_(std::move(file)),
      byte_offset_(byte_offset) {}

void EcgRecord::validate() const {
  if (leads[0].empty()) throw DataError("record " + record_id + ": empty signal");
  if (leads[0].size() != leads[1].size()) throw DataError("record " + record_id + ": lead lengths differ");
  if (sampling_rate_hz <= 0) throw DataError("record " + record_id + ": non-positive sampling rate");
  std::int64_t prev = -1;
  for (const auto& a : annotations) {
    if (a.sample < 0 || static_cast<std::size_t>(a.sample) >= length())
      throw DataError("record " + record_id + ": annotation at sample " + std::to_string(a.sample) +
                      " outside signal");
    // Co-located annotations (e.g. a rhythm marker on a beat) occur in MIT-BIH.
    if (a.sample < prev)
      throw DataError("record " + record_id + ": annotations out of order at sample " + std::to_string(a.sample));
    prev = a.sample;
  }
}

namespace {

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Leading numeric prefix of a field such as "360/..." or "200(0)/mV".
std::string_view numeric_prefix(std::string_view s) {
  std::size_t n = 0;
  while (n < s.size() && (std::isdigit(static_cast<unsigned char>(s[n])) || s[n] == '.' || s[n] == '-' ||
                          s[n] == '+' || s[n] == 'e' || s[n] == 'E'))
    ++n;
  return s.substr(0, n);
}

// WFDB annotation codes 0..41 (ecgcodes.h).
constexpr std::string_view kCodeSymbols = " NLRaVFJASEj/Q~ | sT*D\"=pB^t+u?![]en@xf()r";

char code_to_symbol(int code) {
  if (code >= 0 && code < static_cast<int>(kCodeSymbols.size())) return kCodeSymbols[code];
  return '?';
}

int symbol_to_code(char symbol) {
  // Skip index 0 (NOTQRS) and the unused slots, which are also spaces.
  for (std::size_t i = 1; i < kCodeSymbols.size(); ++i)
    if (kCodeSymbols[i] == symbol && symbol != ' ') return static_cast<int>(i);
  throw std::invalid_argument(std::string("no annotation code for symbol '") + symbol + "'");
}

constexpr int kSkip = 59;
constexpr int kNum = 60;
constexpr int kSub = 61;
constexpr int kChn = 62;
constexpr int kAux = 63;

}  // namespace

WfdbHeader parse_wfdb_header(std::string_view text, const std::string& file_name) {
  WfdbHeader header;
  bool have_record_line = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::size_t line_offset = pos;
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto fields = split_ws(line);
    if (fields.empty() || fields[0].front() == '#') continue;

    if (!have_record_line) {
      have_record_line = true;
      header.record_name = std::string(fields[0]);
      if (header.record_name.find('/') != std::string::npos)
        throw ParseError(file_name, line_offset, "multi-segment records are not supported");
      if (fields.size() < 2 || !parse_number(fields[1], header.num_signals) || header.num_signals < 0)
        throw ParseError(file_name, line_offset, "malformed signal count");
      if (fields.size() >= 3) {
        const auto freq = numeric_prefix(fields[2]);
        if (!parse_number(freq, header.sampling_frequency) || header.sampling_frequency <= 0)
          throw ParseError(file_name, line_offset, "malformed sampling frequency");
      }
      if (fields.size() >= 4 && !parse_number(fields[3], header.num_samples))
        throw ParseError(file_name, line_offset, "malformed sample count");
      continue;
    }

    if (static_cast<int>(header.signals.size()) >= header.num_signals)
      throw ParseError(file_name, line_offset, "more signal lines than declared");
    if (fields.size() < 2) throw ParseError(file_name, line_offset, "signal line needs file name and format");
    WfdbSignalSpec sig;
    sig.file_name = std::string(fields[0]);
    std::string_view fmt = fields[1];
    if (auto colon = fmt.find(':'); colon != std::string_view::npos) {
      if (!parse_number(fmt.substr(colon + 1), sig.byte_offset))
        throw ParseError(file_name, line_offset, "malformed byte offset");
      fmt = fmt.substr(0, colon);
    }
    if (auto skew = fmt.find('x'); skew != std::string_view::npos) fmt = fmt.substr(0, skew);
    if (!parse_number(fmt, sig.format)) throw ParseError(file_name, line_offset, "malformed signal format");

    bool explicit_baseline = false;
    if (fields.size() >= 3) {
      std::string_view g = fields[2];
      const auto gain_text = numeric_prefix(g);
      if (!parse_number(gain_text, sig.gain)) throw ParseError(file_name, line_offset, "malformed gain");
      if (sig.gain == 0.0) sig.gain = 200.0;
      if (auto open = g.find('('); open != std::string_view::npos) {
        auto close = g.find(')', open);
        if (close == std::string_view::npos || !parse_number(g.substr(open + 1, close - open - 1), sig.baseline))
          throw ParseError(file_name, line_offset, "malformed baseline");
        explicit_baseline = true;
      }
    }
    if (fields.size() >= 5 && !parse_number(fields[4], sig.adc_zero))
      throw ParseError(file_name, line_offset, "malformed ADC zero");
    if (!explicit_baseline) sig.baseline = sig.adc_zero;
    if (fields.size() >= 9) {
      // Description may contain spaces; take the rest of the line.
      const auto desc_start = fields[8].data() - line.data();
      sig.description = std::string(line.substr(static_cast<std::size_t>(desc_start)));
    }
    header.signals.push_back(std::move(sig));
  }
  if (!have_record_line) throw ParseError(file_name, 0, "missing record line");
  if (static_cast<int>(header.signals.size()) != header.num_signals)
    throw ParseError(file_name, text.size(), "fewer signal lines than declared");
  return header;
}

std::vector<int> decode_format212(std::span<const std::uint8_t> bytes) {
  auto sign12 = [](int v) { return (v & 0x800) ? v - 0x1000 : v; };
  std::vector<int> out;
  out.reserve(bytes.size() * 2 / 3 + 1);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    const int b0 = bytes[i], b1 = bytes[i + 1], b2 = bytes[i + 2];
    out.push_back(sign12(b0 | ((b1 & 0x0F) << 8)));
    out.push_back(sign12(b2 | ((b1 & 0xF0) << 4)));
  }
  if (bytes.size() - i == 2) out.push_back(sign12(bytes[i] | ((bytes[i + 1] & 0x0F) << 8)));
  return out;
}

std::vector<std::uint8_t> encode_format212(std::span<const int> samples) {
  std::vector<std::uint8_t> out;
  out.reserve(samples.size() * 3 / 2 + 2);
  for (std::size_t i = 0; i < samples.size(); i += 2) {
    const int s0 = samples[i];
    if (s0 < -2048 || s0 > 2047) throw std::out_of_range("format 212 sample out of range");
    const unsigned u0 = static_cast<unsigned>(s0) & 0xFFF;
    if (i + 1 == samples.size()) {
      out.push_back(static_cast<std::uint8_t>(u0 & 0xFF));
      out.push_back(static_cast<std::uint8_t>(u0 >> 8));
      break;
    }
    const int s1 = samples[i + 1];
    if (s1 < -2048 || s1 > 2047) throw std::out_of_range("format 212 sample out of range");
    const unsigned u1 = static_cast<unsigned>(s1) & 0xFFF;
    out.push_back(static_cast<std::uint8_t>(u0 & 0xFF));
    out.push_back(static_cast<std::uint8_t>(((u1 >> 4) & 0xF0) | (u0 >> 8)));
    out.push_back(static_cast<std::uint8_t>(u1 & 0xFF));
  }
  return out;
}

std::vector<Annotation> decode_mit_annotations(std::span<const std::uint8_t> bytes, const std::string& file_name) {
  std::vector<Annotation> out;
  std::int64_t time = 0;
  constexpr std::int64_t kMaxTime = std::numeric_limits<std::int32_t>::max();
  std::size_t i = 0;
  while (i + 2 <= bytes.size()) {
    const std::size_t word_offset = i;
    const unsigned word = bytes[i] | (static_cast<unsigned>(bytes[i + 1]) << 8);
    i += 2;
    const int code = static_cast<int>(word >> 10);
    const int value = static_cast<int>(word & 0x3FF);
    if (code == 0 && value == 0) return out;  // end of file
    switch (code) {
      case kSkip: {
        if (i + 4 > bytes.size()) throw ParseError(file_name, word_offset, "truncated SKIP interval");
        // PDP-11 long: high word first, each word little-endian.
        const std::uint32_t hi = bytes[i] | (static_cast<std::uint32_t>(bytes[i + 1]) << 8);
        const std::uint32_t lo = bytes[i + 2] | (static_cast<std::uint32_t>(bytes[i + 3]) << 8);
        const auto skip = static_cast<std::int32_t>((hi << 16) | lo);
        i += 4;
        time += skip;
        if (time < 0 || time > kMaxTime) throw ParseError(file_name, word_offset, "annotation time overflow");
        break;
      }
      case kNum:
      case kSub:
      case kChn:
        break;
      case kAux:
        i += static_cast<std::size_t>(value + (value & 1));
        if (i > bytes.size()) throw ParseError(file_name, word_offset, "truncated AUX string");
        break;
      default:
        time += value;
        if (time > kMaxTime) throw ParseError(file_name, word_offset, "annotation time overflow");
        out.push_back({time, code_to_symbol(code)});
        break;
    }
  }
  if (i != bytes.size()) throw ParseError(file_name, i, "odd trailing byte");
  return out;
}

std::vector<std::uint8_t> encode_mit_annotations(std::span<const Annotation> annotations) {
  std::vector<std::uint8_t> out;
  auto put_word = [&out](unsigned w) {
    out.push_back(static_cast<std::uint8_t>(w & 0xFF));
    out.push_back(static_cast<std::uint8_t>(w >> 8));
  };
  std::int64_t time = 0;
  for (const auto& a : annotations) {
    std::int64_t delta = a.sample - time;
    if (delta < 0) throw std::invalid_argument("annotations must be sorted");
    if (delta > 0x3FF) {
      put_word(static_cast<unsigned>(kSkip) << 10);
      const auto skip = static_cast<std::uint32_t>(delta);
      put_word(skip >> 16);
      put_word(skip & 0xFFFF);
      delta = 0;
    }
    put_word((static_cast<unsigned>(symbol_to_code(a.symbol)) << 10) | static_cast<unsigned>(delta));
    time = a.sample;
  }
  put_word(0);
  return out;
}

namespace {

// Picks the MLII and V1 channels; falls back to channels 0 and 1.
std::array<std::size_t, 2> select_leads(const WfdbHeader& header, const std::string& record_id) {
  std::size_t lead_ii = header.signals.size();
  std::size_t lead_v1 = header.signals.size();
  for (std::size_t i = 0; i < header.signals.size(); ++i) {
    if (header.signals[i].description == "MLII" && lead_ii == header.signals.size()) lead_ii = i;
    if (header.signals[i].description == "V1" && lead_v1 == header.signals.size()) lead_v1 = i;
  }
  if (lead_ii == header.signals.size()) {
    spdlog::warn("record {}: no MLII channel, using channel 0 ({}) as lead II", record_id,
                 header.signals[0].description);
    lead_ii = 0;
  }
  if (lead_v1 == header.signals.size() || lead_v1 == lead_ii) {
    lead_v1 = lead_ii == 0 ? 1 : 0;
    spdlog::debug("record {}: no V1 channel, using channel {} ({})", record_id, lead_v1,
                  header.signals[lead_v1].description);
  }
  return {lead_ii, lead_v1};
}

}  // namespace

EcgRecord read_wfdb_record(const fs::path& header_path, std::string_view annotator) {
  const std::string header_file = header_path.string();
  const WfdbHeader header = parse_wfdb_header(read_text(header_path), header_file);
  if (header.num_signals < 2)
    throw DataError(header_file + ": need two signals, header declares " + std::to_string(header.num_signals));
  for (const auto& sig : header.signals) {
    if (sig.format != 212)
      throw ParseError(header_file, 0, "unsupported signal format " + std::to_string(sig.format));
    if (sig.file_name != header.signals[0].file_name || sig.byte_offset != header.signals[0].byte_offset)
      throw ParseError(header_file, 0, "signals stored in separate files are not supported");
  }

  const fs::path dir = header_path.parent_path();
  const fs::path dat_path = dir / header.signals[0].file_name;
  const auto bytes = read_bytes(dat_path);
  const auto offset = header.signals[0].byte_offset;
  if (offset > bytes.size()) throw ParseError(dat_path.string(), offset, "byte offset beyond end of file");
  const auto raw = decode_format212(std::span(bytes).subspan(offset));

  const auto nsig = static_cast<std::size_t>(header.num_signals);
  std::size_t length = header.num_samples;
  if (length == 0) length = raw.size() / nsig;
  if (raw.size() < length * nsig)
    throw ParseError(dat_path.string(), bytes.size(),
                     "signal file holds " + std::to_string(raw.size() / nsig) + " frames, header declares " +
                         std::to_string(length));

  EcgRecord rec;
  rec.record_id = header.record_name;
  rec.sampling_rate_hz = static_cast<int>(header.sampling_frequency + 0.5);
  const auto chosen = select_leads(header, rec.record_id);
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& sig = header.signals[chosen[k]];
    rec.lead_names[k] = sig.description;
    auto& lead = rec.leads[k];
    lead.resize(length);
    for (std::size_t t = 0; t < length; ++t)
      lead[t] = (raw[t * nsig + chosen[k]] - sig.baseline) / sig.gain;
  }

  fs::path ann_path = header_path;
  ann_path.replace_extension(std::string(".") + std::string(annotator));
  const auto ann_bytes = read_bytes(ann_path);
  rec.annotations = decode_mit_annotations(ann_bytes, ann_path.string());
  rec.validate();
  return rec;
}

EcgRecord read_csv_record(const std::string& record_id, const fs::path& signal_csv, const fs::path& annotation_csv,
                          int sampling_rate_hz) {
  EcgRecord rec;
  rec.record_id = record_id;
  rec.sampling_rate_hz = sampling_rate_hz;
  rec.lead_names = {"MLII", "V1"};

  {
    std::ifstream in(signal_csv);
    if (!in) throw DataError("cannot open " + signal_csv.string());
    std::string line;
    std::size_t offset = 0;
    bool first = true;
    while (std::getline(in, line)) {
      const std::size_t line_offset = offset;
      offset += line.size() + 1;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const auto comma = line.find(',');
      double a = 0.0, b = 0.0;
      const bool ok = comma != std::string::npos &&
                      parse_number(std::string_view(line).substr(0, comma), a) &&
                      parse_number(std::string_view(line).substr(comma + 1), b);
      if (!ok) {
        if (first) {  // header row
          first = false;
          continue;
        }
        throw ParseError(signal_csv.string(), line_offset, "expected two numeric columns");
      }
      first = false;
      rec.leads[0].push_back(a);
      rec.leads[1].push_back(b);
    }
  }
  {
    std::ifstream in(annotation_csv);
    if (!in) throw DataError("cannot open " + annotation_csv.string());
    std::string line;
    std::size_t offset = 0;
    bool first = true;
    while (std::getline(in, line)) {
      const std::size_t line_offset = offset;
      offset += line.size() + 1;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const auto comma = line.find(',');
      std::int64_t sample = 0;
      const bool ok = comma != std::string::npos && comma + 2 == line.size() &&
                      parse_number(std::string_view(line).substr(0, comma), sample);
      if (!ok) {
        if (first) {
          first = false;
          continue;
        }
        throw ParseError(annotation_csv.string(), line_offset, "expected 'sample_index,symbol'");
      }
      first = false;
      rec.annotations.push_back({sample, line[comma + 1]});
    }
  }
  rec.validate();
  return rec;
}

void write_csv_record(const EcgRecord& record, const fs::path& signal_csv, const fs::path& annotation_csv) {
  std::ofstream sig(signal_csv);
  if (!sig) throw DataError("cannot write " + signal_csv.string());
  sig.precision(17);
  sig << "lead_ii,lead_v1\n";
  for (std::size_t i = 0; i < record.length(); ++i) sig << record.leads[0][i] << ',' << record.leads[1][i] << '\n';
  std::ofstream ann(annotation_csv);
  if (!ann) throw DataError("cannot write " + annotation_csv.string());
  ann << "sample_index,symbol\n";
  for (const auto& a : record.annotations) ann << a.sample << ',' << a.symbol << '\n';
}

fs::path csv_signal_path(const fs::path& data_dir, const std::string& record_id) {
  return data_dir / (record_id + "_signals.csv");
}

fs::path csv_annotation_path(const fs::path& data_dir, const std::string& record_id) {
  return data_dir / (record_id + "_annotations.csv");
}

bool record_available(const fs::path& data_dir, const std::string& record_id) {
  return fs::exists(data_dir / (record_id + ".hea")) ||
         (fs::exists(csv_signal_path(data_dir, record_id)) && fs::exists(csv_annotation_path(data_dir, record_id)));
}

EcgRecord load_record(const fs::path& data_dir, const std::string& record_id) {
  const fs::path hea = data_dir / (record_id + ".hea");
  if (fs::exists(hea)) return read_wfdb_record(hea);
  const auto sig = csv_signal_path(data_dir, record_id);
  const auto ann = csv_annotation_path(data_dir, record_id);
  if (fs::exists(sig) && fs::exists(ann)) return read_csv_record(record_id, sig, ann);
  throw DataError("record " + record_id + " not found in " + data_dir.string());
}

// ---------------------------------------------------------------------------

std::string_view paradigm_name(Paradigm p) {
  switch (p) {
    case Paradigm::InterPatient: return "inter_patient";
    case Paradigm::InterPatientSwapped: return "inter_patient_swapped";
    case Paradigm::IntraPatient: return "intra_patient";
    case Paradigm::Tuning: return "tuning";
  }
  return "?";
}

Paradigm parse_paradigm(std::string_view name) {
  for (auto p : {Paradigm::InterPatient, Paradigm::InterPatientSwapped, Paradigm::IntraPatient, Paradigm::Tuning})
    if (paradigm_name(p) == name) return p;
  throw std::invalid_argument("unknown paradigm '" + std::string(name) + "'");
}

const std::vector<std::string>& ds1_records() {
  static const std::vector<std::string> ids = {"101", "106", "108", "109", "112", "114", "115", "116",
                                               "118", "119", "122", "124", "201", "203", "205", "207",
                                               "208", "209", "215", "220", "223", "230"};
  return ids;
}

const std::vector<std::string>& ds2_records() {
  static const std::vector<std::string> ids = {"100", "103", "105", "111", "113", "117", "121", "123",
                                               "200", "202", "210", "212", "213", "214", "219", "221",
                                               "222", "228", "231", "232", "233", "234"};
  return ids;
}

const std::vector<std::string>& ds1_validation_records() {
  static const std::vector<std::string> ids = {"109", "114", "207", "223"};
  return ids;
}

const std::vector<std::string>& paced_records() {
  static const std::vector<std::string> ids = {"102", "104", "107", "217"};
  return ids;
}

std::vector<std::string> SplitPlan::all_records() const {
  std::vector<std::string> out = train_records;
  for (const auto& id : test_records)
    if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
  return out;
}

SplitPlan make_split(Paradigm paradigm, std::uint64_t seed, double train_fraction) {
  SplitPlan plan;
  plan.paradigm = paradigm;
  plan.seed = seed;
  switch (paradigm) {
    case Paradigm::InterPatient:
      plan.train_records = ds1_records();
      plan.test_records = ds2_records();
      break;
    case Paradigm::InterPatientSwapped:
      plan.train_records = ds2_records();
      plan.test_records = ds1_records();
      break;
    case Paradigm::Tuning: {
      const auto& val = ds1_validation_records();
      for (const auto& id : ds1_records())
        if (std::find(val.begin(), val.end(), id) == val.end()) plan.train_records.push_back(id);
      plan.test_records = val;
      break;
    }
    case Paradigm::IntraPatient: {
      if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("train fraction must lie in (0, 1)");
      plan.train_fraction = train_fraction;
      std::vector<std::string> all = ds1_records();
      all.insert(all.end(), ds2_records().begin(), ds2_records().end());
      plan.train_records = all;
      plan.test_records = all;
      break;
    }
  }
  return plan;
}

nlohmann::json to_json(const SplitPlan& plan) {
  nlohmann::json j;
  j["paradigm"] = std::string(paradigm_name(plan.paradigm));
  j["seed"] = plan.seed;
  j["train"] = plan.train_records;
  j["test"] = plan.test_records;
  if (plan.paradigm == Paradigm::IntraPatient) j["train_fraction"] = plan.train_fraction;
  return j;
}

SplitPlan split_plan_from_json(const nlohmann::json& j) {
  SplitPlan plan;
  plan.paradigm = parse_paradigm(j.at("paradigm").get<std::string>());
  plan.seed = j.at("seed").get<std::uint64_t>();
  plan.train_records = j.at("train").get<std::vector<std::string>>();
  plan.test_records = j.at("test").get<std::vector<std::string>>();
  plan.train_fraction = j.value("train_fraction", 0.5);
  return plan;
}

}  // namespace vgecg
