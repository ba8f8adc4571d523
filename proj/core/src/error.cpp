#include "cuescreen/error.hpp"

#include <utility>

namespace cuescreen {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingBegin: return "MissingBegin";
    case ErrorCode::UnknownSpeaker: return "UnknownSpeaker";
    case ErrorCode::MalformedTier: return "MalformedTier";
    case ErrorCode::InvalidLexicon: return "InvalidLexicon";
    case ErrorCode::MissingCueReport: return "MissingCueReport";
    case ErrorCode::EmptyExemplars: return "EmptyExemplars";
    case ErrorCode::InvalidTemplate: return "InvalidTemplate";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::MissingLabel: return "MissingLabel";
    case ErrorCode::UnreadableFile: return "UnreadableFile";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::InfeasiblePolicy: return "InfeasiblePolicy";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::DegenerateClass: return "DegenerateClass";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::InvalidHyperparameters: return "InvalidHyperparameters";
    case ErrorCode::FeatureMismatch: return "FeatureMismatch";
    case ErrorCode::Unreachable: return "Unreachable";
    case ErrorCode::Unparseable: return "Unparseable";
    case ErrorCode::AuthFailure: return "AuthFailure";
    case ErrorCode::EndpointRejected: return "EndpointRejected";
    case ErrorCode::MalformedBundle: return "MalformedBundle";
    case ErrorCode::MissingPrediction: return "MissingPrediction";
    case ErrorCode::UnknownParticipant: return "UnknownParticipant";
    case ErrorCode::DuplicatePrediction: return "DuplicatePrediction";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::ZeroBaseline: return "ZeroBaseline";
    case ErrorCode::EmptyReport: return "EmptyReport";
  }
  return "Unknown";
}

namespace {

std::string compose(ErrorCode code, const std::string& detail, const std::optional<std::size_t>& line) {
  std::string msg{to_string(code)};
  if (line) {
    msg += " at line " + std::to_string(*line);
  }
  if (!detail.empty()) {
    msg += ": " + detail;
  }
  return msg;
}

}  // namespace

Error::Error(ErrorCode code, std::string detail, std::optional<std::size_t> line)
    : std::runtime_error(compose(code, detail, line)),
      code_(code),
      line_(line),
      detail_(std::move(detail)) {}

}  // namespace cuescreen
