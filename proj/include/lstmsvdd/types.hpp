#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lstmsvdd {

using Vector = std::vector<double>;

enum class ClassLabel { Normal, DoS, Probe, R2L, U2R, Unknown };

const char* to_string(ClassLabel label);
ClassLabel class_label_from_string(const std::string& name);

// The five reportable classes, in fixed report order.
inline constexpr ClassLabel kReportClasses[5] = {
    ClassLabel::Normal, ClassLabel::DoS, ClassLabel::Probe,
    ClassLabel::R2L, ClassLabel::U2R};

enum class Pooling { Mean, Last, Max };

const char* to_string(Pooling pooling);
Pooling pooling_from_string(const std::string& name);

// How a window inherits a class label from the records inside it.
enum class WindowLabelRule { LastRecord, MajorityAttack };

const char* to_string(WindowLabelRule rule);
WindowLabelRule window_label_rule_from_string(const std::string& name);

// An ordered window of encoded feature vectors, all of the same length.
struct SequenceWindow {
  std::uint64_t id = 0;
  std::vector<Vector> steps;
  ClassLabel label = ClassLabel::Unknown;
  bool all_normal = false;

  SequenceWindow() = default;
  SequenceWindow(std::uint64_t id_, std::vector<Vector> steps_,
                 ClassLabel label_, bool all_normal_)
      : id(id_), steps(std::move(steps_)), label(label_),
        all_normal(all_normal_) {
    if (steps.empty())
      throw std::invalid_argument("SequenceWindow: empty step list");
    const auto p = steps.front().size();
    for (const auto& s : steps)
      if (s.size() != p)
        throw std::invalid_argument("SequenceWindow: ragged step vectors");
  }

  std::size_t length() const { return steps.size(); }
  std::size_t feature_dim() const { return steps.front().size(); }
};

}  // namespace lstmsvdd
