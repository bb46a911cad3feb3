#include "lstmsvdd/dataset.hpp"

#include "lstmsvdd/cache.hpp"
#include "lstmsvdd/linalg.hpp"

#include "json.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <utility>

namespace lstmsvdd {

namespace {

const std::unordered_map<std::string, ClassLabel>& attack_table() {
  static const std::unordered_map<std::string, ClassLabel> table = {
      {"normal", ClassLabel::Normal},
      // denial of service
      {"back", ClassLabel::DoS},
      {"land", ClassLabel::DoS},
      {"neptune", ClassLabel::DoS},
      {"pod", ClassLabel::DoS},
      {"smurf", ClassLabel::DoS},
      {"teardrop", ClassLabel::DoS},
      {"apache2", ClassLabel::DoS},
      {"mailbomb", ClassLabel::DoS},
      {"processtable", ClassLabel::DoS},
      {"udpstorm", ClassLabel::DoS},
      // probing
      {"ipsweep", ClassLabel::Probe},
      {"nmap", ClassLabel::Probe},
      {"portsweep", ClassLabel::Probe},
      {"satan", ClassLabel::Probe},
      {"mscan", ClassLabel::Probe},
      {"saint", ClassLabel::Probe},
      // remote-to-local
      {"ftp_write", ClassLabel::R2L},
      {"guess_passwd", ClassLabel::R2L},
      {"imap", ClassLabel::R2L},
      {"multihop", ClassLabel::R2L},
      {"phf", ClassLabel::R2L},
      {"spy", ClassLabel::R2L},
      {"warezclient", ClassLabel::R2L},
      {"warezmaster", ClassLabel::R2L},
      {"named", ClassLabel::R2L},
      {"sendmail", ClassLabel::R2L},
      {"snmpgetattack", ClassLabel::R2L},
      {"snmpguess", ClassLabel::R2L},
      {"worm", ClassLabel::R2L},
      {"xlock", ClassLabel::R2L},
      {"xsnoop", ClassLabel::R2L},
      // user-to-root
      {"buffer_overflow", ClassLabel::U2R},
      {"loadmodule", ClassLabel::U2R},
      {"perl", ClassLabel::U2R},
      {"rootkit", ClassLabel::U2R},
      {"httptunnel", ClassLabel::U2R},
      {"ps", ClassLabel::U2R},
      {"sqlattack", ClassLabel::U2R},
      {"xterm", ClassLabel::U2R},
  };
  return table;
}

bool is_symbolic_column(std::size_t col) {
  const auto& cols = FeatureEncoder::kSymbolicColumns;
  return std::find(cols.begin(), cols.end(), col) != cols.end();
}

bool parse_strict_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* begin = s.c_str();
  char* end = nullptr;
  errno = 0;
  out = std::strtod(begin, &end);
  return end == begin + s.size() && errno != ERANGE && std::isfinite(out);
}

enum class LineStatus { Ok, Blank, Malformed };

LineStatus parse_line(const std::string& raw, RawRecord& out) {
  std::string_view line(raw);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  if (line.find_first_not_of(" \t") == std::string_view::npos)
    return LineStatus::Blank;

  std::vector<std::string> fields;
  fields.reserve(42);
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      fields.emplace_back(line.substr(pos));
      break;
    }
    fields.emplace_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  if (fields.size() != FeatureEncoder::kFieldCount + 1)
    return LineStatus::Malformed;

  std::string label = std::move(fields.back());
  fields.pop_back();
  if (!label.empty() && label.back() == '.') label.pop_back();
  if (label.empty()) return LineStatus::Malformed;

  double value = 0.0;
  for (std::size_t c = 0; c < fields.size(); ++c)
    if (!is_symbolic_column(c) && !parse_strict_double(fields[c], value))
      return LineStatus::Malformed;

  out.fields = std::move(fields);
  out.attack_name = std::move(label);
  out.label = family_of(out.attack_name);
  return LineStatus::Ok;
}

DatasetSummary parse_stream(const std::string& path,
                            std::vector<RawRecord>* sink) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("parse_kdd: cannot open " + path);

  DatasetSummary summary;
  std::string line;
  RawRecord rec;
  while (std::getline(in, line)) {
    switch (parse_line(line, rec)) {
      case LineStatus::Blank:
        break;
      case LineStatus::Malformed:
        ++summary.malformed;
        break;
      case LineStatus::Ok:
        ++summary.total;
        ++summary.counts[static_cast<std::size_t>(rec.label)];
        if (rec.label == ClassLabel::Unknown) ++summary.unknown_names;
        if (sink) sink->push_back(std::move(rec));
        rec = RawRecord{};
        break;
    }
  }

  // A percent threshold alone would reject a 3-line fixture with one typo,
  // so the fatal rule needs an absolute floor as well.
  const std::size_t lines = summary.total + summary.malformed;
  if (summary.malformed > 10 &&
      static_cast<double>(summary.malformed) >
          0.01 * static_cast<double>(lines))
    throw std::runtime_error(
        "parse_kdd: " + std::to_string(summary.malformed) + " of " +
        std::to_string(lines) + " lines malformed in " + path +
        "; this does not look like a 42-field connection-record file");
  return summary;
}

void check_record_shape(const RawRecord& rec, const char* who) {
  if (rec.fields.size() != FeatureEncoder::kFieldCount)
    throw std::invalid_argument(
        std::string(who) + ": record has " +
        std::to_string(rec.fields.size()) + " fields, expected " +
        std::to_string(FeatureEncoder::kFieldCount));
}

double numeric_field(const RawRecord& rec, std::size_t col, const char* who) {
  double value = 0.0;
  if (!parse_strict_double(rec.fields[col], value))
    throw std::invalid_argument(std::string(who) + ": column " +
                                std::to_string(col + 1) + " is not numeric: '" +
                                rec.fields[col] + "'");
  return value;
}

std::size_t symbolic_slot(std::size_t col) {
  const auto& cols = FeatureEncoder::kSymbolicColumns;
  return static_cast<std::size_t>(
      std::find(cols.begin(), cols.end(), col) - cols.begin());
}

void append_escaped(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ClassLabel family_of(const std::string& attack_name) {
  const auto& table = attack_table();
  const auto it = table.find(attack_name);
  return it == table.end() ? ClassLabel::Unknown : it->second;
}

ParsedDataset parse_kdd(const std::string& path) {
  ParsedDataset out;
  out.summary = parse_stream(path, &out.records);
  return out;
}

DatasetSummary parse_kdd_summary(const std::string& path) {
  return parse_stream(path, nullptr);
}

std::size_t FeatureEncoder::constant_numeric_columns() const {
  std::size_t n = 0;
  for (std::size_t c = 0; c < kFieldCount; ++c)
    if (!is_symbolic_column(c) && col_min[c] == col_max[c]) ++n;
  return n;
}

FeatureEncoder build_encoder(const std::vector<RawRecord>& records) {
  if (records.empty())
    throw std::invalid_argument("build_encoder: no training records");

  FeatureEncoder enc;
  bool first = true;
  for (const RawRecord& rec : records) {
    check_record_shape(rec, "build_encoder");
    for (std::size_t c = 0; c < FeatureEncoder::kFieldCount; ++c) {
      if (is_symbolic_column(c)) {
        auto& vocab = enc.vocabs[symbolic_slot(c)];
        if (std::find(vocab.begin(), vocab.end(), rec.fields[c]) ==
            vocab.end())
          vocab.push_back(rec.fields[c]);
      } else {
        const double v = numeric_field(rec, c, "build_encoder");
        if (first) {
          enc.col_min[c] = enc.col_max[c] = v;
        } else {
          enc.col_min[c] = std::min(enc.col_min[c], v);
          enc.col_max[c] = std::max(enc.col_max[c], v);
        }
      }
    }
    first = false;
  }

  enc.p = FeatureEncoder::kFieldCount - FeatureEncoder::kSymbolicColumns.size();
  for (const auto& vocab : enc.vocabs) enc.p += vocab.size();
  return enc;
}

Vector encode_record(const RawRecord& rec, const FeatureEncoder& enc,
                     EncodeStats* stats) {
  check_record_shape(rec, "encode_record");
  Vector out(enc.p, 0.0);
  std::size_t at = 0;
  for (std::size_t c = 0; c < FeatureEncoder::kFieldCount; ++c) {
    if (is_symbolic_column(c)) {
      const auto& vocab = enc.vocabs[symbolic_slot(c)];
      const auto it = std::find(vocab.begin(), vocab.end(), rec.fields[c]);
      if (it != vocab.end())
        out[at + static_cast<std::size_t>(it - vocab.begin())] = 1.0;
      else if (stats)
        ++stats->oov_values;
      at += vocab.size();
    } else {
      const double v = numeric_field(rec, c, "encode_record");
      double scaled = 0.0;
      if (enc.col_min[c] != enc.col_max[c]) {
        scaled = (v - enc.col_min[c]) / (enc.col_max[c] - enc.col_min[c]);
        if (scaled < 0.0 || scaled > 1.0) {
          scaled = std::clamp(scaled, 0.0, 1.0);
          if (stats) ++stats->clipped;
        }
      }
      out[at++] = scaled;
    }
  }
  return out;
}

std::string encoder_to_json(const FeatureEncoder& enc) {
  std::string out = "{\n  \"format_version\": 1,\n  \"field_count\": ";
  out += std::to_string(FeatureEncoder::kFieldCount);
  out += ",\n  \"symbolic_columns\": [1, 2, 3],\n  \"vocabs\": [";
  for (std::size_t s = 0; s < enc.vocabs.size(); ++s) {
    out += s == 0 ? "[" : ", [";
    for (std::size_t k = 0; k < enc.vocabs[s].size(); ++k) {
      if (k) out += ", ";
      append_escaped(out, enc.vocabs[s][k]);
    }
    out += "]";
  }
  out += "],\n  \"col_min\": [";
  for (std::size_t c = 0; c < FeatureEncoder::kFieldCount; ++c) {
    if (c) out += ", ";
    out += fmt_double(enc.col_min[c]);
  }
  out += "],\n  \"col_max\": [";
  for (std::size_t c = 0; c < FeatureEncoder::kFieldCount; ++c) {
    if (c) out += ", ";
    out += fmt_double(enc.col_max[c]);
  }
  out += "],\n  \"p\": " + std::to_string(enc.p) + "\n}\n";
  return out;
}

FeatureEncoder encoder_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("encoder_from_json: not valid JSON (") +
                             e.what() + ")");
  }
  try {
    if (j.at("format_version").get<int>() != 1)
      throw std::runtime_error("encoder_from_json: unsupported format_version");
    FeatureEncoder enc;
    const auto& vocabs = j.at("vocabs");
    if (vocabs.size() != enc.vocabs.size())
      throw std::runtime_error("encoder_from_json: expected 3 vocabularies");
    for (std::size_t s = 0; s < enc.vocabs.size(); ++s)
      enc.vocabs[s] = vocabs[s].get<std::vector<std::string>>();
    const auto col_min = j.at("col_min").get<std::vector<double>>();
    const auto col_max = j.at("col_max").get<std::vector<double>>();
    if (col_min.size() != FeatureEncoder::kFieldCount ||
        col_max.size() != FeatureEncoder::kFieldCount)
      throw std::runtime_error("encoder_from_json: expected 41 column ranges");
    std::copy(col_min.begin(), col_min.end(), enc.col_min.begin());
    std::copy(col_max.begin(), col_max.end(), enc.col_max.begin());
    enc.p = j.at("p").get<std::size_t>();
    std::size_t expect =
        FeatureEncoder::kFieldCount - FeatureEncoder::kSymbolicColumns.size();
    for (const auto& vocab : enc.vocabs) expect += vocab.size();
    if (enc.p != expect)
      throw std::runtime_error(
          "encoder_from_json: p does not match the vocabularies");
    return enc;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(
        std::string("encoder_from_json: missing or mistyped field (") +
        e.what() + ")");
  }
}

void save_encoder(const FeatureEncoder& enc, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_encoder: cannot write " + path);
  const std::string text = encoder_to_json(enc);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("save_encoder: write failed for " + path);
}

FeatureEncoder load_encoder(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_encoder: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return encoder_from_json(text);
}

std::uint64_t encoder_hash(const FeatureEncoder& enc) {
  return fnv1a64(encoder_to_json(enc));
}

std::vector<SequenceWindow> windowize(const std::vector<RawRecord>& records,
                                      const FeatureEncoder& enc,
                                      std::size_t lookback, std::size_t stride,
                                      WindowLabelRule rule,
                                      EncodeStats* stats) {
  if (lookback < 1) throw std::invalid_argument("windowize: lookback must be >= 1");
  if (stride < 1) throw std::invalid_argument("windowize: stride must be >= 1");

  std::vector<SequenceWindow> windows;
  if (records.size() < lookback) return windows;

  std::vector<Vector> encoded;
  encoded.reserve(records.size());
  for (const RawRecord& rec : records)
    encoded.push_back(encode_record(rec, enc, stats));

  std::uint64_t id = 0;
  for (std::size_t start = 0; start + lookback <= records.size();
       start += stride, ++id) {
    std::vector<Vector> steps(encoded.begin() + static_cast<std::ptrdiff_t>(start),
                              encoded.begin() +
                                  static_cast<std::ptrdiff_t>(start + lookback));

    bool all_normal = true;
    for (std::size_t k = start; k < start + lookback; ++k)
      all_normal = all_normal && records[k].label == ClassLabel::Normal;

    ClassLabel label = ClassLabel::Normal;
    if (rule == WindowLabelRule::LastRecord) {
      label = records[start + lookback - 1].label;
    } else {
      // Most frequent attack family; ties go to the family seen first.
      std::array<std::size_t, 6> votes{};
      std::array<std::size_t, 6> first_seen{};
      first_seen.fill(lookback);
      for (std::size_t k = start; k < start + lookback; ++k) {
        const auto li = static_cast<std::size_t>(records[k].label);
        if (records[k].label == ClassLabel::Normal) continue;
        ++votes[li];
        first_seen[li] = std::min(first_seen[li], k - start);
      }
      std::size_t best = 0;
      for (std::size_t li = 1; li < 6; ++li) {
        if (votes[li] == 0) continue;
        if (votes[best] == 0 || votes[li] > votes[best] ||
            (votes[li] == votes[best] && first_seen[li] < first_seen[best]))
          best = li;
      }
      if (votes[best] > 0) label = static_cast<ClassLabel>(best);
    }

    windows.emplace_back(id, std::move(steps), label, all_normal);
  }
  return windows;
}

WindowSplit normal_train_split(const std::vector<SequenceWindow>& windows,
                               double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument(
        "normal_train_split: train_fraction must lie in (0,1)");

  std::vector<std::size_t> normals;
  for (std::size_t i = 0; i < windows.size(); ++i)
    if (windows[i].all_normal) normals.push_back(i);
  if (normals.empty())
    throw std::runtime_error(
        "normal_train_split: no all-normal windows; nothing to train on");

  Rng rng(seed);
  for (std::size_t i = normals.size(); i > 1; --i)
    std::swap(normals[i - 1], normals[rng.below(i)]);

  const auto train_count = static_cast<std::size_t>(std::llround(
      train_fraction * static_cast<double>(normals.size())));
  std::vector<bool> in_train(windows.size(), false);
  for (std::size_t k = 0; k < std::min(train_count, normals.size()); ++k)
    in_train[normals[k]] = true;

  WindowSplit split;
  for (std::size_t i = 0; i < windows.size(); ++i)
    (in_train[i] ? split.train : split.holdout).push_back(windows[i]);
  return split;
}

std::vector<SequenceWindow> gen_synthetic(std::size_t n_normal,
                                          std::size_t n_anomalous,
                                          std::size_t seq_len,
                                          std::uint64_t seed) {
  if (seq_len < 1)
    throw std::invalid_argument("gen_synthetic: seq_len must be >= 1");

  constexpr std::array<double, kSyntheticDim> mean = {0.45, 0.55, 0.50, 0.60};
  constexpr double ar = 0.8;
  constexpr double normal_noise = 0.03;
  constexpr double anomaly_shift = 0.35;
  constexpr double anomaly_noise = 0.15;

  Rng rng(seed);
  std::vector<SequenceWindow> windows;
  windows.reserve(n_normal + n_anomalous);

  const auto make_window = [&](std::uint64_t id, bool anomalous) {
    std::vector<Vector> steps;
    steps.reserve(seq_len);
    Vector dev(kSyntheticDim, 0.0);
    const double noise = anomalous ? anomaly_noise : normal_noise;
    const double shift = anomalous ? anomaly_shift : 0.0;
    for (std::size_t t = 0; t < seq_len; ++t) {
      Vector x(kSyntheticDim);
      for (std::size_t k = 0; k < kSyntheticDim; ++k) {
        dev[k] = ar * dev[k] + noise * rng.gaussian();
        x[k] = mean[k] + shift + dev[k];
      }
      steps.push_back(std::move(x));
    }
    return SequenceWindow(id, std::move(steps),
                          anomalous ? ClassLabel::DoS : ClassLabel::Normal,
                          !anomalous);
  };

  std::uint64_t id = 0;
  for (std::size_t k = 0; k < n_normal; ++k) windows.push_back(make_window(id++, false));
  for (std::size_t k = 0; k < n_anomalous; ++k) windows.push_back(make_window(id++, true));
  return windows;
}

}  // namespace lstmsvdd
