#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cuescreen/types.hpp"

namespace cuescreen::corpus {

enum class Gender { M, F };

struct ParticipantRecord {
  std::string participant_id;
  Label label = Label::NonAD;
  Split split = Split::Unassigned;
  std::string transcript_path;
  std::optional<int> age;
  std::optional<Gender> gender;
  std::optional<int> segment_count;

  bool operator==(const ParticipantRecord&) const = default;
};

struct Corpus {
  std::vector<ParticipantRecord> records;
  std::string provenance;

  const ParticipantRecord* find(std::string_view participant_id) const;
  std::vector<const ParticipantRecord*> in_split(Split split) const;

  bool operator==(const Corpus&) const = default;
};

struct SplitPolicy {
  std::size_t train_count = 0;
  std::size_t test_count = 0;
  bool stratify_by_label = true;
  std::uint64_t seed = 0;
};

/// "TRAIN:TEST[:flat]" (stratified unless ":flat" is appended).
std::optional<SplitPolicy> parse_split_policy(std::string_view text, std::uint64_t seed);

/// Reference split of the 156-participant challenge set.
inline SplitPolicy reference_policy(std::uint64_t seed) { return {108, 48, true, seed}; }

nlohmann::ordered_json to_json(const ParticipantRecord& r);
/// Errors: MissingLabel, MalformedRecord. `line` is attached to the error.
ParticipantRecord record_from_json(const nlohmann::json& j, std::size_t line);

/// JSONL manifest, one ParticipantRecord per line. Errors: DuplicateId,
/// MissingLabel, MalformedRecord, UnreadableFile, each with the offending
/// line.
Corpus load_manifest(const std::filesystem::path& path);
std::string manifest_jsonl(const Corpus& corpus);

/// Assigns splits. Ids are ordered before shuffling so the assignment depends
/// only on the set of records and the policy. Stratified policies give each
/// class half of every count (the odd one goes to the class with more
/// remaining members, AD on a tie). Throws Error(InfeasiblePolicy).
Corpus split(const Corpus& corpus, const SplitPolicy& policy);

/// Two-column TSV with a header row: participant_id, split.
std::string split_tsv(const Corpus& corpus);
/// Applies a split TSV to `corpus`; ids missing from the TSV keep their
/// split. Throws Error(UnknownParticipant) for ids not in the corpus.
Corpus apply_split_tsv(const Corpus& corpus, std::string_view tsv);

struct ClassCounts {
  std::size_t ad = 0;
  std::size_t non_ad = 0;
  std::size_t total() const { return ad + non_ad; }
};

struct ValidationReport {
  ClassCounts all;
  ClassCounts train;
  ClassCounts test;
  std::size_t unassigned = 0;
  std::vector<std::string> missing_transcripts;  // participant ids
  std::vector<std::string> findings;
  std::string provenance_note;

  /// e.g. "train 108 / test 48; train AD 54, non-AD 54"
  std::string summary() const;
};

/// Reports class balance, split counts and transcript files that do not
/// exist (relative paths resolve against `base_dir`).
ValidationReport validate(const Corpus& corpus, const std::filesystem::path& base_dir = {});

nlohmann::ordered_json to_json(const ValidationReport& report);

}  // namespace cuescreen::corpus
