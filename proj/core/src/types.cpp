#include "cuescreen/types.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "cuescreen/error.hpp"

namespace cuescreen {

std::string_view to_string(Label label) noexcept {
  return label == Label::AD ? "AD" : "non_AD";
}

std::string_view to_string(Split split) noexcept {
  switch (split) {
    case Split::Train: return "train";
    case Split::Test: return "test";
    case Split::Unassigned: return "unassigned";
  }
  return "unassigned";
}

std::string_view to_string(PredictionSource source) noexcept {
  switch (source) {
    case PredictionSource::Lda: return "lda";
    case PredictionSource::Logistic: return "logistic";
    case PredictionSource::Llm: return "llm";
    case PredictionSource::Mock: return "mock";
  }
  return "mock";
}

std::optional<Label> parse_label_name(std::string_view text) noexcept {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "ad") return Label::AD;
  if (lower == "non_ad" || lower == "non-ad" || lower == "nonad" || lower == "non ad") return Label::NonAD;
  return std::nullopt;
}

std::optional<Split> parse_split_name(std::string_view text) noexcept {
  if (text == "train") return Split::Train;
  if (text == "test") return Split::Test;
  if (text == "unassigned") return Split::Unassigned;
  return std::nullopt;
}

std::optional<PredictionSource> parse_source_name(std::string_view text) noexcept {
  if (text == "lda") return PredictionSource::Lda;
  if (text == "logistic") return PredictionSource::Logistic;
  if (text == "llm") return PredictionSource::Llm;
  if (text == "mock") return PredictionSource::Mock;
  return std::nullopt;
}

nlohmann::ordered_json to_json(const Prediction& p) {
  nlohmann::ordered_json j;
  j["participant_id"] = p.participant_id;
  j["label"] = to_string(p.label);
  j["score"] = p.score;
  j["source"] = to_string(p.source);
  return j;
}

Prediction prediction_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("participant_id") || !j["participant_id"].is_string()) {
    throw Error(ErrorCode::MalformedRecord, "prediction needs a string participant_id");
  }
  Prediction p;
  p.participant_id = j["participant_id"].get<std::string>();
  const auto label = j.contains("label") && j["label"].is_string()
                         ? parse_label_name(j["label"].get<std::string>())
                         : std::nullopt;
  if (!label) {
    throw Error(ErrorCode::MalformedRecord, "prediction for " + p.participant_id + " has no valid label");
  }
  p.label = *label;
  if (j.contains("score")) {
    if (!j["score"].is_number()) {
      throw Error(ErrorCode::MalformedRecord, "score must be numeric for " + p.participant_id);
    }
    p.score = j["score"].get<double>();
  }
  if (j.contains("source")) {
    const auto source = j["source"].is_string() ? parse_source_name(j["source"].get<std::string>())
                                                 : std::nullopt;
    if (!source) {
      throw Error(ErrorCode::MalformedRecord, "unknown prediction source for " + p.participant_id);
    }
    p.source = *source;
  }
  return p;
}

}  // namespace cuescreen
