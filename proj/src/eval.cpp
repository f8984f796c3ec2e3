#include "vgecg/eval.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace vgecg {

std::size_t EvalReport::total() const {
  std::size_t t = 0;
  for (const auto& row : confusion)
    for (auto c : row) t += c;
  return t;
}

EvalReport compute_report(std::span<const std::size_t> true_labels, std::span<const std::size_t> predicted) {
  if (true_labels.size() != predicted.size()) throw std::invalid_argument("compute_report: length mismatch");
  if (true_labels.empty()) throw std::invalid_argument("compute_report: empty input");
  ConfusionMatrix cm{};
  for (std::size_t i = 0; i < true_labels.size(); ++i) {
    if (true_labels[i] >= kNumClasses || predicted[i] >= kNumClasses)
      throw std::invalid_argument("compute_report: label outside {N, S, V}");
    ++cm[true_labels[i]][predicted[i]];
  }
  return report_from_confusion(cm);
}

EvalReport report_from_confusion(const ConfusionMatrix& confusion) {
  EvalReport r;
  r.confusion = confusion;
  const std::size_t total = r.total();
  if (total == 0) throw std::invalid_argument("report_from_confusion: empty confusion matrix");

  auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return 100.0 * static_cast<double>(num) / static_cast<double>(den);
  };

  std::size_t trace = 0;
  std::array<double, 4> weighted{};
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const std::size_t tp = confusion[c][c];
    std::size_t fn = 0, fp = 0;
    for (std::size_t k = 0; k < kNumClasses; ++k) {
      if (k == c) continue;
      fn += confusion[c][k];
      fp += confusion[k][c];
    }
    const std::size_t tn = total - tp - fn - fp;
    trace += tp;
    auto& m = r.per_class[c];
    m.ppv = ratio(tp, tp + fp);
    m.se = ratio(tp, tp + fn);
    m.fpr = ratio(fp, fp + tn);
    // Equals 2·P·Se/(P+Se) whenever both are defined; 0 when TP = 0.
    if (m.ppv && m.se) m.f1 = ratio(2 * tp, 2 * tp + fp + fn);

    const double w = static_cast<double>(tp + fn) / static_cast<double>(total);
    weighted[0] += w * m.ppv.value_or(0.0);
    weighted[1] += w * m.se.value_or(0.0);
    weighted[2] += w * m.fpr.value_or(0.0);
    weighted[3] += w * m.f1.value_or(0.0);
  }
  r.weighted = {weighted[0], weighted[1], weighted[2], weighted[3]};
  r.accuracy = 100.0 * static_cast<double>(trace) / static_cast<double>(total);
  return r;
}

namespace {

nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::optional<double> opt_from(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

nlohmann::json metrics_json(const ClassMetrics& m) {
  return {{"+P", opt_json(m.ppv)}, {"Se", opt_json(m.se)}, {"FPR", opt_json(m.fpr)}, {"F1", opt_json(m.f1)}};
}

ClassMetrics metrics_from(const nlohmann::json& j) {
  return {opt_from(j.at("+P")), opt_from(j.at("Se")), opt_from(j.at("FPR")), opt_from(j.at("F1"))};
}

std::string cell(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *v);
  return buf;
}

}  // namespace

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json per_class;
  for (std::size_t c = 0; c < kNumClasses; ++c)
    per_class[std::string(1, label_char(class_label(c)))] = metrics_json(report.per_class[c]);
  nlohmann::json confusion = nlohmann::json::array();
  for (const auto& row : report.confusion) confusion.push_back(row);
  return {{"classes", {"N", "S", "V"}},
          {"confusion", std::move(confusion)},
          {"per_class", std::move(per_class)},
          {"weighted", metrics_json(report.weighted)},
          {"accuracy", report.accuracy}};
}

EvalReport report_from_json(const nlohmann::json& j) {
  EvalReport r;
  const auto& cm = j.at("confusion");
  for (std::size_t i = 0; i < kNumClasses; ++i)
    for (std::size_t k = 0; k < kNumClasses; ++k) r.confusion[i][k] = cm.at(i).at(k).get<std::size_t>();
  for (std::size_t c = 0; c < kNumClasses; ++c)
    r.per_class[c] = metrics_from(j.at("per_class").at(std::string(1, label_char(class_label(c)))));
  r.weighted = metrics_from(j.at("weighted"));
  r.accuracy = j.at("accuracy").get<double>();
  return r;
}

std::string report_table(const EvalReport& report) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %8s %8s %8s %8s\n", "Class", "+P", "Se", "FPR", "F1");
  out << line;
  auto row = [&](const std::string& name, const ClassMetrics& m) {
    std::snprintf(line, sizeof line, "%-10s %8s %8s %8s %8s\n", name.c_str(), cell(m.ppv).c_str(),
                  cell(m.se).c_str(), cell(m.fpr).c_str(), cell(m.f1).c_str());
    out << line;
  };
  for (std::size_t c = 0; c < kNumClasses; ++c) row(std::string(1, label_char(class_label(c))), report.per_class[c]);
  row("Weighted", report.weighted);
  std::snprintf(line, sizeof line, "%-10s %8.2f\n", "Acc", report.accuracy);
  out << line;
  return out.str();
}

void write_confusion_csv(std::ostream& out, const ConfusionMatrix& confusion) {
  out << "true\\pred,N,S,V\n";
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    out << label_char(class_label(i));
    for (auto c : confusion[i]) out << ',' << c;
    out << '\n';
  }
}

}  // namespace vgecg
