#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include <json.hpp>

#include "vgecg/labels.hpp"

namespace vgecg {

using ConfusionMatrix = std::array<std::array<std::size_t, kNumClasses>, kNumClasses>;

// Percentages; nullopt where the defining ratio has a zero denominator.
struct ClassMetrics {
  std::optional<double> ppv;  // +P
  std::optional<double> se;
  std::optional<double> fpr;
  std::optional<double> f1;

  bool operator==(const ClassMetrics&) const = default;
};

struct EvalReport {
  ConfusionMatrix confusion{};  // rows = true class, columns = predicted
  std::array<ClassMetrics, kNumClasses> per_class;
  ClassMetrics weighted;  // support-weighted; absent class metrics count as 0
  double accuracy = 0.0;

  std::size_t total() const;
  bool operator==(const EvalReport&) const = default;
};

// Labels are class indices (N=0, S=1, V=2). Throws std::invalid_argument on
// length mismatch, empty input or out-of-range labels.
EvalReport compute_report(std::span<const std::size_t> true_labels, std::span<const std::size_t> predicted);
EvalReport report_from_confusion(const ConfusionMatrix& confusion);

nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);
// Fixed-width table with one row per class plus the weighted average; absent values print as "-".
std::string report_table(const EvalReport& report);
void write_confusion_csv(std::ostream& out, const ConfusionMatrix& confusion);

}  // namespace vgecg
