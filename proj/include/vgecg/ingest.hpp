#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace vgecg {

// Raised for malformed input files. byte_offset points at the first byte of
// the offending header line, sample group or annotation word.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string file, std::size_t byte_offset, const std::string& what);
  const std::string& file() const { return file_; }
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::string file_;
  std::size_t byte_offset_;
};

// Raised when inputs are well-formed but unusable (missing files, invariants).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Annotation {
  std::int64_t sample = 0;
  char symbol = '?';

  bool operator==(const Annotation&) const = default;
};

// Two-lead ECG record. leads[0] is the lead-II channel (MLII), leads[1] the
// V1 channel; samples are in millivolts.
struct EcgRecord {
  std::string record_id;
  int sampling_rate_hz = 360;
  std::array<std::string, 2> lead_names;
  std::array<std::vector<double>, 2> leads;
  std::vector<Annotation> annotations;

  std::size_t length() const { return leads[0].size(); }
  // Throws DataError when lead lengths differ, the record is empty, or
  // annotations are out of order / out of range.
  void validate() const;
};

struct WfdbSignalSpec {
  std::string file_name;
  int format = 0;
  std::size_t byte_offset = 0;
  double gain = 200.0;  // ADC units per mV
  int baseline = 0;
  int adc_zero = 0;
  std::string description;
};

struct WfdbHeader {
  std::string record_name;
  int num_signals = 0;
  double sampling_frequency = 250.0;
  std::size_t num_samples = 0;
  std::vector<WfdbSignalSpec> signals;
};

WfdbHeader parse_wfdb_header(std::string_view text, const std::string& file_name = "<header>");

// Format 212: pairs of 12-bit two's complement samples packed in 3 bytes.
// Sample 0 takes byte 0 plus the low nibble of byte 1, sample 1 takes byte 2
// plus the high nibble of byte 1. A trailing odd sample occupies 2 bytes.
std::vector<int> decode_format212(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_format212(std::span<const int> samples);

// MIT annotation format (16-bit little-endian words, 6-bit code, 10-bit time delta).
std::vector<Annotation> decode_mit_annotations(std::span<const std::uint8_t> bytes,
                                               const std::string& file_name = "<annotations>");
std::vector<std::uint8_t> encode_mit_annotations(std::span<const Annotation> annotations);

// Reads <record>.hea, the format-212 signal file it names, and <record>.<annotator>.
EcgRecord read_wfdb_record(const std::filesystem::path& header_path, std::string_view annotator = "atr");

// CSV fallback: one row per sample "leadII,leadV1" (values in mV, optional
// header row) and an annotation file with rows "sample_index,symbol".
EcgRecord read_csv_record(const std::string& record_id, const std::filesystem::path& signal_csv,
                          const std::filesystem::path& annotation_csv, int sampling_rate_hz = 360);
void write_csv_record(const EcgRecord& record, const std::filesystem::path& signal_csv,
                      const std::filesystem::path& annotation_csv);

// File names used for the CSV fallback inside a data directory.
std::filesystem::path csv_signal_path(const std::filesystem::path& data_dir, const std::string& record_id);
std::filesystem::path csv_annotation_path(const std::filesystem::path& data_dir, const std::string& record_id);

// Loads <data_dir>/<id>.hea when present, otherwise the CSV fallback pair.
EcgRecord load_record(const std::filesystem::path& data_dir, const std::string& record_id);
bool record_available(const std::filesystem::path& data_dir, const std::string& record_id);

// ---------------------------------------------------------------------------
// Record-level split plans

enum class Paradigm { InterPatient, InterPatientSwapped, IntraPatient, Tuning };

std::string_view paradigm_name(Paradigm p);
// Throws std::invalid_argument on unknown names.
Paradigm parse_paradigm(std::string_view name);

const std::vector<std::string>& ds1_records();
const std::vector<std::string>& ds2_records();
const std::vector<std::string>& ds1_validation_records();  // DS1.2
const std::vector<std::string>& paced_records();

struct SplitPlan {
  Paradigm paradigm = Paradigm::InterPatient;
  std::uint64_t seed = 0;
  std::vector<std::string> train_records;
  std::vector<std::string> test_records;
  // Intra-patient only: fraction of each class's beats sent to training.
  double train_fraction = 0.5;

  bool record_level() const { return paradigm != Paradigm::IntraPatient; }
  // Records whose beats are needed by the plan, in load order.
  std::vector<std::string> all_records() const;
};

SplitPlan make_split(Paradigm paradigm, std::uint64_t seed, double train_fraction = 0.5);

nlohmann::json to_json(const SplitPlan& plan);
SplitPlan split_plan_from_json(const nlohmann::json& j);

}  // namespace vgecg
