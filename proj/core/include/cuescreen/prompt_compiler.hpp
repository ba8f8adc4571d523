#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cuescreen/chat_parser.hpp"
#include "cuescreen/cue_analyzer.hpp"
#include "cuescreen/types.hpp"

namespace cuescreen::prompt {

enum class Mode { ZeroShot, FewShot, Cot };

std::string_view to_string(Mode mode) noexcept;
std::optional<Mode> parse_mode(std::string_view text) noexcept;

enum class Role { System, User, Assistant };

std::string_view to_string(Role role) noexcept;
std::optional<Role> parse_role(std::string_view text) noexcept;

struct Message {
  Role role;
  std::string content;

  bool operator==(const Message&) const = default;
};

struct PromptBundle {
  Mode mode = Mode::ZeroShot;
  std::vector<Message> messages;
  std::vector<std::string> exemplar_ids;
  std::string fingerprint;
  // Whose transcript this bundle screens; metadata, not part of the digest.
  std::string participant_id;

  bool operator==(const PromptBundle&) const = default;
};

/// Verdict line every template asks the model to end with.
inline constexpr std::string_view kVerdictAD = "Diagnosis: AD";
inline constexpr std::string_view kVerdictNonAD = "Diagnosis: non-AD";

/// Transcript delimiter used by every template; downstream consumers (the
/// mock endpoint) locate the transcript between a pair of these.
inline constexpr std::string_view kTranscriptFence = "\"\"\"";

/// Versioned plain-text templates with {{transcript}}, {{cue_line}} and
/// {{matched}} slots. Files: system.txt, zero_shot.txt, few_shot_query.txt,
/// few_shot_exemplar.txt, cot.txt.
class TemplateSet {
 public:
  static const std::vector<std::string>& file_names();

  /// The set compiled into the library from core/templates/<version>.
  static const TemplateSet& builtin();
  /// Loads every template from `dir`. Throws Error(InvalidTemplate) when a
  /// file is missing, or a template lacks {{transcript}} where required.
  static TemplateSet load(const std::filesystem::path& dir);

  TemplateSet(std::string version, std::map<std::string, std::string> bodies);

  const std::string& version() const { return version_; }
  const std::string& body(std::string_view name) const;
  /// Stable digest over names and bodies.
  const std::string& fingerprint() const { return fingerprint_; }

 private:
  std::string version_;
  std::map<std::string, std::string> bodies_;
  std::string fingerprint_;
};

/// Replaces every {{key}} from `slots`. Unknown placeholders are left as is.
std::string render(std::string_view tmpl, const std::map<std::string, std::string>& slots);

struct Exemplar {
  chat::CleanTranscript transcript;
  Label label;
};

/// "Cue coverage: k/12".
std::string cue_line(const cues::CueReport& report);

/// Compiles a bundle. `report` is required for Mode::Cot
/// (Error(MissingCueReport)); Mode::FewShot needs at least one exemplar
/// (Error(EmptyExemplars)); zero-shot ignores both.
PromptBundle build_prompt(Mode mode, const chat::CleanTranscript& transcript, const cues::CueReport* report,
                          std::span<const Exemplar> exemplars, const TemplateSet& templates = TemplateSet::builtin());

/// SHA-256 over the role/content sequence (length-prefixed, so message
/// boundaries are unambiguous).
std::string fingerprint(const PromptBundle& bundle);

/// Picks one training-split exemplar per class by seeded sampling, AD first.
/// Candidates are considered in participant-id order so the choice depends
/// only on (pool, seed).
struct ExemplarCandidate {
  std::string participant_id;
  Label label;
};
std::vector<std::string> select_exemplars(std::span<const ExemplarCandidate> train_pool, std::uint64_t seed);

nlohmann::ordered_json to_json(const PromptBundle& bundle);
/// Throws Error(MalformedBundle).
PromptBundle bundle_from_json(const nlohmann::json& j);

}  // namespace cuescreen::prompt
