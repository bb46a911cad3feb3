#include "lstmsvdd/eval.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace lstmsvdd {

namespace {

constexpr const char* kColumnNames[5] = {"normal", "dos", "probe", "r2l",
                                         "u2r"};

std::string fmt_accuracy(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::size_t report_index(ClassLabel label) {
  for (std::size_t k = 0; k < 5; ++k)
    if (kReportClasses[k] == label) return k;
  throw std::invalid_argument(std::string("report_index: ") +
                              to_string(label) + " is not a reportable class");
}

PerClassAccuracy per_class_accuracy(const std::vector<Score>& scores,
                                    const std::vector<ClassLabel>& labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("per_class_accuracy: " +
                                std::to_string(scores.size()) + " scores vs " +
                                std::to_string(labels.size()) + " labels");
  if (scores.empty())
    throw std::invalid_argument("per_class_accuracy: no examples");

  PerClassAccuracy out;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == ClassLabel::Unknown) continue;
    const std::size_t k = report_index(labels[i]);
    ClassStats& stats = out.counts[k];
    ++stats.total;
    const int expected = labels[i] == ClassLabel::Normal ? 1 : -1;
    if (scores[i].decision == expected) ++stats.correct;
  }
  for (std::size_t k = 0; k < 5; ++k) {
    out.present[k] = out.counts[k].total > 0;
    if (out.present[k])
      out.accuracy[k] = 100.0 * static_cast<double>(out.counts[k].correct) /
                        static_cast<double>(out.counts[k].total);
  }
  return out;
}

double w_sum(const PerClassAccuracy& acc, const std::array<double, 5>& weights) {
  double total = 0.0;
  for (std::size_t k = 0; k < 5; ++k) {
    if (weights[k] < 0.0)
      throw std::invalid_argument("w_sum: negative weight for " +
                                  std::string(kColumnNames[k]));
    if (!acc.present[k] && weights[k] != 0.0)
      throw std::invalid_argument("w_sum: nonzero weight for absent class " +
                                  std::string(kColumnNames[k]));
    total += weights[k];
  }
  if (std::fabs(total - 1.0) > 1e-9)
    throw std::invalid_argument(
        "w_sum: weights over present classes sum to " + std::to_string(total) +
        ", expected 1");

  double sum = 0.0;
  for (std::size_t k = 0; k < 5; ++k)
    if (acc.present[k]) sum += weights[k] * acc.accuracy[k];
  return sum;
}

EvalReport build_report(const std::vector<Score>& scores,
                        const std::vector<ClassLabel>& labels,
                        const std::array<double, 5>& class_weights) {
  EvalReport report;
  report.per_class = per_class_accuracy(scores, labels);

  double present_weight = 0.0;
  for (std::size_t k = 0; k < 5; ++k) {
    if (class_weights[k] < 0.0)
      throw std::invalid_argument("build_report: negative weight for " +
                                  std::string(kColumnNames[k]));
    if (report.per_class.present[k]) present_weight += class_weights[k];
  }
  if (present_weight <= 0.0)
    throw std::runtime_error(
        "build_report: no weight on any present class; nothing to summarize");

  for (std::size_t k = 0; k < 5; ++k)
    report.weights_used[k] =
        report.per_class.present[k] ? class_weights[k] / present_weight : 0.0;
  report.weighted = w_sum(report.per_class, report.weights_used);
  return report;
}

std::string report_table_csv(
    const std::vector<std::pair<std::string, EvalReport>>& rows) {
  std::string out = "name,normal,dos,probe,r2l,u2r,w_sum\n";
  for (const auto& [name, report] : rows) {
    out += name;
    for (std::size_t k = 0; k < 5; ++k) {
      out += ',';
      if (report.per_class.present[k])
        out += fmt_accuracy(report.per_class.accuracy[k]);
    }
    out += ',' + fmt_accuracy(report.weighted) + '\n';
  }
  return out;
}

std::string report_table_text(
    const std::vector<std::pair<std::string, EvalReport>>& rows) {
  std::size_t name_width = 4;  // "name"
  for (const auto& [name, report] : rows)
    name_width = std::max(name_width, name.size());

  const auto pad_left = [](const std::string& s, std::size_t width) {
    return std::string(width > s.size() ? width - s.size() : 0, ' ') + s;
  };

  std::string out = "name" + std::string(name_width - 4, ' ');
  for (const char* col : kColumnNames) out += pad_left(col, 8);
  out += pad_left("w_sum", 8);
  out += '\n';

  for (const auto& [name, report] : rows) {
    out += name + std::string(name_width - name.size(), ' ');
    for (std::size_t k = 0; k < 5; ++k)
      out += pad_left(report.per_class.present[k]
                          ? fmt_accuracy(report.per_class.accuracy[k])
                          : "-",
                      8);
    out += pad_left(fmt_accuracy(report.weighted), 8);
    out += '\n';
  }
  return out;
}

}  // namespace lstmsvdd
