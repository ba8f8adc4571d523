#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cuescreen/corpus.hpp"
#include "cuescreen/types.hpp"

namespace cuescreen::eval {

/// AD is the positive class.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  /// Same predictions scored with non_AD as the positive class.
  ConfusionMatrix swapped() const { return {tn, fn, fp, tp}; }
  bool operator==(const ConfusionMatrix&) const = default;
};

struct Metrics {
  double accuracy = 0.0;
  double precision_pos = 0.0;
  double recall_pos = 0.0;
  double f1_pos = 0.0;
  double precision_neg = 0.0;
  double recall_neg = 0.0;
  double f1_neg = 0.0;
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;  // by true-class support
  std::size_t support = 0;
};

/// Scores predictions against the test split of `gold`. Every test
/// participant needs exactly one prediction. Errors: MissingPrediction
/// (lists the ids), UnknownParticipant (id absent or not in the test split),
/// DuplicatePrediction.
ConfusionMatrix confuse(const std::vector<Prediction>& predictions, const corpus::Corpus& gold);

/// Zero-denominator ratios are 0. Throws Error(EmptyMatrix) for total 0.
Metrics metrics(const ConfusionMatrix& cm);

/// 100 * (candidate - baseline) / baseline, rounded to one decimal.
/// Throws Error(ZeroBaseline) when baseline <= 0.
double relative_improvement(double candidate_acc, double baseline_acc);

struct ReportRow {
  std::string name;
  Metrics metrics;
};

/// Fixed-width Method / Acc (%) / F1 (%) table, percentages to two decimals,
/// F1 is macro-F1. With a non-empty `order`, rows are emitted in that order
/// (names not in `order` follow in input order). Throws Error(EmptyReport).
std::string render_report(const std::vector<ReportRow>& rows, const std::vector<std::string>& order = {});
std::string render_csv(const std::vector<ReportRow>& rows, const std::vector<std::string>& order = {});

nlohmann::ordered_json to_json(const ConfusionMatrix& cm);
nlohmann::ordered_json to_json(const Metrics& m);

/// Reads a predictions JSONL file (participant_id, label, score, source).
std::vector<Prediction> load_predictions(const std::filesystem::path& path);
std::string predictions_jsonl(const std::vector<Prediction>& predictions);

}  // namespace cuescreen::eval
