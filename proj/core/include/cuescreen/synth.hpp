#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cuescreen/corpus.hpp"

namespace cuescreen::synth {

struct SynthConfig {
  std::size_t n_per_class = 50;
  double p_cue_ad = 0.35;
  double p_cue_non_ad = 0.80;
  double disfluency_rate_ad = 1.5;      // pause + repetition markers per 10 tokens
  double disfluency_rate_non_ad = 0.5;
  std::size_t mean_tokens = 80;
  std::uint64_t seed = 1;
};

/// Throws Error(InvalidConfig) unless probabilities are in [0,1], rates are
/// finite and non-negative, n_per_class >= 1 and mean_tokens >= 5.
void validate(const SynthConfig& config);

/// What the generator injected into one transcript.
struct TruthRecord {
  std::string participant_id;
  Label label = Label::NonAD;
  std::vector<std::string> injected_lemmas;  // lexicon order
  std::size_t pause_short = 0;
  std::size_t pause_med = 0;
  std::size_t pause_long = 0;
  std::size_t repetition = 0;

  bool operator==(const TruthRecord&) const = default;
};

struct ChaFile {
  std::string name;  // e.g. "S0001.cha"
  std::string content;
};

struct SynthCorpus {
  corpus::Corpus corpus;
  std::vector<ChaFile> files;
  std::vector<TruthRecord> truth;
};

/// Vocabulary used around the injected cues; contains no lexicon variant.
const std::vector<std::string>& filler_vocabulary();

/// 2 * n_per_class participants, alternating AD / non_AD. Each transcript
/// carries every lemma independently with the class's cue probability and
/// pause / repetition markers at the class's disfluency rate. Identical
/// configs give byte-identical output.
SynthCorpus generate(const SynthConfig& config);

nlohmann::ordered_json to_json(const TruthRecord& t);
TruthRecord truth_from_json(const nlohmann::json& j);

/// Writes <dir>/<id>.cha, <dir>/manifest.jsonl and <dir>/truth.jsonl.
void write(const SynthCorpus& synth, const std::filesystem::path& dir);

nlohmann::ordered_json to_json(const SynthConfig& config);

}  // namespace cuescreen::synth
