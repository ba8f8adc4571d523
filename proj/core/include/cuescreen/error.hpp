#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cuescreen {

enum class ErrorCode {
  // chat_parser
  MissingBegin,
  UnknownSpeaker,
  MalformedTier,
  // cue_analyzer
  InvalidLexicon,
  // prompt_compiler
  MissingCueReport,
  EmptyExemplars,
  InvalidTemplate,
  // corpus_manager
  DuplicateId,
  MissingLabel,
  UnreadableFile,
  MalformedRecord,
  InfeasiblePolicy,
  // synth_generator
  InvalidConfig,
  // baseline_models
  DegenerateClass,
  SingularCovariance,
  DimensionMismatch,
  NonFiniteLoss,
  InvalidHyperparameters,
  FeatureMismatch,
  // llm_gateway
  Unreachable,
  Unparseable,
  AuthFailure,
  EndpointRejected,
  MalformedBundle,
  // evaluator
  MissingPrediction,
  UnknownParticipant,
  DuplicatePrediction,
  EmptyMatrix,
  ZeroBaseline,
  EmptyReport,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Typed failure raised by every module. `line()` is set for errors that
/// can be pinned to a 1-based line of an input file.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string detail, std::optional<std::size_t> line = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  const std::optional<std::size_t>& line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
  std::string detail_;
};

}  // namespace cuescreen
