#pragma once

// Reader for the subset of the CHAT transcription format used by
// picture-description corpora: @-headers, *-speaker tiers (with tab
// continuation lines), %-dependent tiers and the inline codes for pauses,
// retracing, repetition, errors, unintelligible speech and bullets.

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace cuescreen::chat {

enum class AnnotationKind {
  PauseShort,      // (.)
  PauseMed,        // (..)
  PauseLong,       // (...)
  Retrace,         // [//] together with its scoped material
  Repetition,      // [/] together with its scoped material
  ErrorCode,       // [* ...]
  Unintelligible,  // xxx / yyy
  Timestamp,       // •123_456• or the 0x15 bullet form
  OtherCode,       // any other bracketed code, &-fillers, +-terminators
};

inline constexpr std::size_t kAnnotationKindCount = 9;

std::string_view to_string(AnnotationKind kind) noexcept;

/// Half-open byte range [begin, end) into Utterance::raw_text.
struct AnnotationSpan {
  AnnotationKind kind;
  std::size_t begin;
  std::size_t end;

  bool operator==(const AnnotationSpan&) const = default;
};

struct DependentTier {
  std::string name;  // without the leading '%', e.g. "mor"
  std::string text;
};

struct Utterance {
  std::string speaker_code;
  std::string raw_text;
  std::vector<AnnotationSpan> annotations;  // sorted, non-overlapping
  std::vector<DependentTier> dependent_tiers;
  std::size_t line = 0;  // 1-based line of the *-tier
};

struct HeaderField {
  std::string keyword;  // e.g. "Participants", "Begin"
  std::string value;
};

struct TranscriptDocument {
  std::vector<HeaderField> header_fields;
  std::vector<Utterance> utterances;
  std::string source_id;

  /// Speaker codes declared by @Participants, in declaration order.
  std::vector<std::string> participants() const;
  bool declares(std::string_view speaker) const;
};

/// Removal counts indexed by AnnotationKind.
using KindCounts = std::array<std::size_t, kAnnotationKindCount>;

inline std::size_t count_of(const KindCounts& counts, AnnotationKind kind) {
  return counts[static_cast<std::size_t>(kind)];
}

struct CleanTranscript {
  std::string participant_id;
  std::string text;
  std::size_t utterance_count = 0;
  std::size_t pause_short = 0;
  std::size_t pause_med = 0;
  std::size_t pause_long = 0;
  std::size_t repetition_count = 0;
  std::size_t retrace_count = 0;

  std::size_t pause_total() const { return pause_short + pause_med + pause_long; }
  bool operator==(const CleanTranscript&) const = default;
};

/// Parses a .cha document. Throws Error with MissingBegin, UnknownSpeaker or
/// MalformedTier, always carrying the offending 1-based line.
TranscriptDocument parse_document(std::string_view raw, std::string source_id = {});

/// Locates the inline CHAT codes of one tier's text. Throws
/// Error(MalformedTier) (without a line) on unbalanced brackets or stray
/// control characters.
std::vector<AnnotationSpan> annotate(std::string_view raw_text);

struct StripResult {
  std::string clean;
  KindCounts consumed{};
};

/// Removes the annotated spans. Retraced and repeated material is dropped
/// together with its marker so the repair / single occurrence survives;
/// standalone punctuation tokens go too and whitespace collapses to single
/// spaces.
StripResult strip_annotations(std::string_view raw_text, const std::vector<AnnotationSpan>& annotations);

/// Cleaned, space-joined text of every utterance by `speaker`, in file order.
/// Throws Error(UnknownSpeaker) if `speaker` is not declared.
CleanTranscript extract_participant_text(const TranscriptDocument& doc, std::string_view speaker = "PAR");

nlohmann::ordered_json to_json(const CleanTranscript& t);
CleanTranscript clean_transcript_from_json(const nlohmann::json& j);

}  // namespace cuescreen::chat
