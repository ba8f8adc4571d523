#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "cuescreen/chat_parser.hpp"

namespace cuescreen::cues {

inline constexpr std::size_t kLexiconSize = 12;

struct LexiconEntry {
  std::string lemma;
  std::vector<std::string> variants;  // lowercase; includes the lemma itself
};

/// The twelve scene cues of the cookie-theft picture and their surface
/// forms. Matching is exact against the variant table: no stemming, no
/// synonyms.
class CueLexicon {
 public:
  /// Built-in table.
  static const CueLexicon& standard();

  /// Validates and indexes `entries`. Throws Error(InvalidLexicon) unless
  /// there are exactly 12 lemmas, variants are lowercase and no variant is
  /// shared between lemmas.
  explicit CueLexicon(std::vector<LexiconEntry> entries);

  /// One lemma per line: `lemma: variant, variant, ...`. The lemma is
  /// always one of its own variants. Blank lines and `#` comments are
  /// ignored.
  static CueLexicon parse(std::string_view text);
  static CueLexicon load(const std::filesystem::path& path);

  const std::vector<LexiconEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  /// Index of the lemma whose variant table contains `token`, or -1.
  int lookup(std::string_view token) const;

 private:
  std::vector<LexiconEntry> entries_;
  std::unordered_map<std::string, int> index_;
};

struct CueReport {
  std::vector<std::string> matched;           // lexicon order
  std::vector<std::size_t> per_lemma_counts;  // aligned with the lexicon
  std::vector<std::string> lemmas;            // lexicon order
  std::size_t total_tokens = 0;

  std::size_t matched_count() const { return matched.size(); }
  std::size_t lexicon_size() const { return lemmas.size(); }
  /// |matched| / |lexicon|.
  double proportion() const {
    return lemmas.empty() ? 0.0 : static_cast<double>(matched.size()) / static_cast<double>(lemmas.size());
  }

  bool operator==(const CueReport&) const = default;
};

struct FeatureVector {
  double cue_proportion = 0.0;
  std::size_t token_count = 0;
  double type_token_ratio = 0.0;
  std::size_t pause_total = 0;
  std::size_t repetition_count = 0;
  std::size_t retrace_count = 0;

  static const std::vector<std::string>& names();
  std::vector<double> values() const;

  bool operator==(const FeatureVector&) const = default;
};

/// Lowercase whitespace tokens with leading/trailing ASCII punctuation
/// stripped; inner apostrophes survive ("boy's").
std::vector<std::string> tokenize(std::string_view text);

CueReport cue_coverage(const std::vector<std::string>& tokens, const CueLexicon& lexicon = CueLexicon::standard());

FeatureVector featurize(const chat::CleanTranscript& transcript, const CueLexicon& lexicon = CueLexicon::standard());

/// One analysis record: the cue report and features for a participant.
struct Analysis {
  std::string participant_id;
  CueReport cues;
  FeatureVector features;
};

Analysis analyze(const chat::CleanTranscript& transcript, const CueLexicon& lexicon = CueLexicon::standard());

nlohmann::ordered_json to_json(const CueReport& report);
nlohmann::ordered_json to_json(const FeatureVector& features);
nlohmann::ordered_json to_json(const Analysis& analysis);
Analysis analysis_from_json(const nlohmann::json& j);

}  // namespace cuescreen::cues
