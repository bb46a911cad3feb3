#include "lstmsvdd/types.hpp"

namespace lstmsvdd {

const char* to_string(ClassLabel label) {
  switch (label) {
    case ClassLabel::Normal: return "normal";
    case ClassLabel::DoS: return "dos";
    case ClassLabel::Probe: return "probe";
    case ClassLabel::R2L: return "r2l";
    case ClassLabel::U2R: return "u2r";
    case ClassLabel::Unknown: return "unknown";
  }
  return "unknown";
}

ClassLabel class_label_from_string(const std::string& name) {
  if (name == "normal") return ClassLabel::Normal;
  if (name == "dos") return ClassLabel::DoS;
  if (name == "probe") return ClassLabel::Probe;
  if (name == "r2l") return ClassLabel::R2L;
  if (name == "u2r") return ClassLabel::U2R;
  if (name == "unknown") return ClassLabel::Unknown;
  throw std::invalid_argument("unknown class label: " + name);
}

const char* to_string(Pooling pooling) {
  switch (pooling) {
    case Pooling::Mean: return "mean";
    case Pooling::Last: return "last";
    case Pooling::Max: return "max";
  }
  return "mean";
}

Pooling pooling_from_string(const std::string& name) {
  if (name == "mean") return Pooling::Mean;
  if (name == "last") return Pooling::Last;
  if (name == "max") return Pooling::Max;
  throw std::invalid_argument("unknown pooling method: " + name);
}

const char* to_string(WindowLabelRule rule) {
  switch (rule) {
    case WindowLabelRule::LastRecord: return "last";
    case WindowLabelRule::MajorityAttack: return "majority-attack";
  }
  return "last";
}

WindowLabelRule window_label_rule_from_string(const std::string& name) {
  if (name == "last") return WindowLabelRule::LastRecord;
  if (name == "majority-attack") return WindowLabelRule::MajorityAttack;
  throw std::invalid_argument("unknown window label rule: " + name);
}

}  // namespace lstmsvdd
