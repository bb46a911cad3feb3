#pragma once

#include "lstmsvdd/types.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace lstmsvdd {

// One KDD99-style connection record: 41 feature fields plus its label.
struct RawRecord {
  std::vector<std::string> fields;
  std::string attack_name;  // label field with any trailing '.' stripped
  ClassLabel label = ClassLabel::Unknown;
};

// Attack-name → family for the KDD99 train and corrected-test name sets.
// Names outside the table map to Unknown.
ClassLabel family_of(const std::string& attack_name);

struct DatasetSummary {
  std::array<std::size_t, 6> counts{};  // indexed by ClassLabel value
  std::size_t total = 0;                // records parsed
  std::size_t malformed = 0;            // lines rejected
  std::size_t unknown_names = 0;        // records whose label mapped to Unknown

  std::size_t count(ClassLabel c) const {
    return counts[static_cast<std::size_t>(c)];
  }
  double percent(ClassLabel c) const {
    return total == 0 ? 0.0
                      : 100.0 * static_cast<double>(count(c)) /
                            static_cast<double>(total);
  }
};

struct ParsedDataset {
  std::vector<RawRecord> records;
  DatasetSummary summary;
};

// Reads a CSV of 42-field lines (41 features + label, trailing period on the
// label tolerated). Malformed lines are counted, not silently dropped; a
// malformed share above 1% (beyond a small absolute floor, so tiny fixtures
// with one bad line still parse) aborts — that is almost always the wrong
// file. Unreadable path aborts.
ParsedDataset parse_kdd(const std::string& path);

// Same validation and counting without retaining records, for the
// multi-gigabyte full files where holding every field in memory is absurd.
DatasetSummary parse_kdd_summary(const std::string& path);

// Frozen feature mapping built from a training split: symbolic columns
// (protocol_type, service, flag) one-hot in first-seen order, the other
// columns min-max scaled to [0,1] with out-of-range values clipped.
struct FeatureEncoder {
  static constexpr std::size_t kFieldCount = 41;
  static constexpr std::array<std::size_t, 3> kSymbolicColumns = {1, 2, 3};

  std::array<std::vector<std::string>, 3> vocabs;
  std::array<double, kFieldCount> col_min{};
  std::array<double, kFieldCount> col_max{};
  std::size_t p = 0;

  // Columns the training split saw as constant; they encode to 0.
  std::size_t constant_numeric_columns() const;
};

struct EncodeStats {
  std::size_t oov_values = 0;  // symbolic values outside the vocabulary
  std::size_t clipped = 0;     // numeric values outside the training range
};

FeatureEncoder build_encoder(const std::vector<RawRecord>& records);

Vector encode_record(const RawRecord& rec, const FeatureEncoder& enc,
                     EncodeStats* stats = nullptr);

// Deterministic serialization (stable key order, %.17g doubles), so the hash
// identifies the encoding exactly.
std::string encoder_to_json(const FeatureEncoder& enc);
FeatureEncoder encoder_from_json(const std::string& text);
void save_encoder(const FeatureEncoder& enc, const std::string& path);
FeatureEncoder load_encoder(const std::string& path);
std::uint64_t encoder_hash(const FeatureEncoder& enc);

// Slides a lookback-length window over the records in stream order with the
// given stride, encoding each record once. Window label: LastRecord takes the
// final record's label; MajorityAttack takes the most frequent attack family
// in the window (earliest first appearance breaks ties) and Normal only when
// no attack is present. The trailing partial window is dropped; fewer records
// than lookback yields an empty result.
std::vector<SequenceWindow> windowize(
    const std::vector<RawRecord>& records, const FeatureEncoder& enc,
    std::size_t lookback, std::size_t stride,
    WindowLabelRule rule = WindowLabelRule::LastRecord,
    EncodeStats* stats = nullptr);

struct WindowSplit {
  std::vector<SequenceWindow> train;    // all-normal windows only
  std::vector<SequenceWindow> holdout;  // everything else + leftover normals
};

// Seed-deterministic: the all-normal windows are shuffled and train_fraction
// of them go to train; every window containing an attack record goes to
// holdout. Both halves come back in original stream order.
WindowSplit normal_train_split(const std::vector<SequenceWindow>& windows,
                               double train_fraction, std::uint64_t seed);

inline constexpr std::size_t kSyntheticDim = 4;

// Labeled synthetic corpus: normal windows follow a smooth autoregressive
// drift around a fixed mean, anomalous windows a shifted-mean high-variance
// version of the same process (reported under the DoS column).
std::vector<SequenceWindow> gen_synthetic(std::size_t n_normal,
                                          std::size_t n_anomalous,
                                          std::size_t seq_len,
                                          std::uint64_t seed);

}  // namespace lstmsvdd
