#pragma once

#include "lstmsvdd/svdd.hpp"
#include "lstmsvdd/types.hpp"

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace lstmsvdd {

// Index into the fixed report order Normal, DoS, Probe, R2L, U2R.
std::size_t report_index(ClassLabel label);

struct ClassStats {
  std::size_t total = 0;
  std::size_t correct = 0;
};

struct PerClassAccuracy {
  std::array<double, 5> accuracy{};  // percent; meaningful only when present
  std::array<bool, 5> present{};
  std::array<ClassStats, 5> counts{};
};

// Normal counts as correct on decision +1; every attack class counts as
// correct on decision -1. Windows labeled Unknown are not reportable and are
// ignored. Classes with no examples come back absent.
PerClassAccuracy per_class_accuracy(const std::vector<Score>& scores,
                                    const std::vector<ClassLabel>& labels);

// Weighted summary over the present classes. Weights must be nonnegative and
// sum to 1 within 1e-9 across the present classes; absent classes must carry
// weight 0 here (build_report does that renormalization).
double w_sum(const PerClassAccuracy& acc, const std::array<double, 5>& weights);

struct EvalReport {
  PerClassAccuracy per_class;
  std::array<double, 5> weights_used{};
  double weighted = 0.0;
};

// Class proportions of the 311,029-record test split (60,593 normal /
// 229,853 DoS / 4,166 probe / 16,189 R2L / 228 U2R) — the shipped default
// weighting. The weighting is deliberately an explicit input: no published
// weighting reproduces the reference summary numbers, so it must be visible.
inline constexpr std::array<double, 5> kTestSplitWeights = {
    60593.0 / 311029.0, 229853.0 / 311029.0, 4166.0 / 311029.0,
    16189.0 / 311029.0, 228.0 / 311029.0};

// Scores against labels with the given base weights; weights of absent
// classes are redistributed proportionally across the present ones.
EvalReport build_report(const std::vector<Score>& scores,
                        const std::vector<ClassLabel>& labels,
                        const std::array<double, 5>& class_weights =
                            kTestSplitWeights);

// Deterministic comparison tables, one row per named report, columns fixed:
// name, normal, dos, probe, r2l, u2r, w_sum. Accuracies print with 2
// decimals; absent classes print "-" in text and an empty CSV field.
std::string report_table_text(
    const std::vector<std::pair<std::string, EvalReport>>& rows);
std::string report_table_csv(
    const std::vector<std::pair<std::string, EvalReport>>& rows);

}  // namespace lstmsvdd
