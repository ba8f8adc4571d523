#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace cuescreen {

/// Binary screening target. AD is the positive class throughout.
enum class Label { AD, NonAD };

enum class Split { Train, Test, Unassigned };

/// Where a prediction came from.
enum class PredictionSource { Lda, Logistic, Llm, Mock };

std::string_view to_string(Label label) noexcept;
std::string_view to_string(Split split) noexcept;
std::string_view to_string(PredictionSource source) noexcept;

// Parsing accepts the canonical spelling plus common aliases
// ("non-AD", "nonAD"); returns nullopt on anything else.
std::optional<Label> parse_label_name(std::string_view text) noexcept;
std::optional<Split> parse_split_name(std::string_view text) noexcept;
std::optional<PredictionSource> parse_source_name(std::string_view text) noexcept;

inline Label label_from_score(double score) noexcept {
  // Ties go to non_AD.
  return score > 0.0 ? Label::AD : Label::NonAD;
}

struct Prediction {
  std::string participant_id;
  Label label = Label::NonAD;
  double score = 0.0;
  PredictionSource source = PredictionSource::Mock;

  bool operator==(const Prediction&) const = default;
};

nlohmann::ordered_json to_json(const Prediction& p);
/// Throws Error(MalformedRecord) on schema violations.
Prediction prediction_from_json(const nlohmann::json& j);

}  // namespace cuescreen
