#include "cuescreen/synth.hpp"

#include <cmath>
#include <cstdio>

#include "cuescreen/cue_analyzer.hpp"
#include "cuescreen/error.hpp"
#include "cuescreen/io.hpp"
#include "cuescreen/random.hpp"

namespace cuescreen::synth {

namespace {

bool is_probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }
bool is_rate(double r) { return std::isfinite(r) && r >= 0.0; }

std::string participant_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "S%04zu", index + 1);
  return buf;
}

struct Transcript {
  std::string cha;
  TruthRecord truth;
  std::size_t par_utterances = 0;
};

Transcript compose(const std::string& id, Label label, const SynthConfig& config, Rng& rng) {
  const auto& lexicon = cues::CueLexicon::standard();
  const auto& filler = filler_vocabulary();
  const double p_cue = label == Label::AD ? config.p_cue_ad : config.p_cue_non_ad;
  const double p_marker = std::min(1.0, (label == Label::AD ? config.disfluency_rate_ad : config.disfluency_rate_non_ad) / 10.0);

  Transcript t;
  t.truth.participant_id = id;
  t.truth.label = label;

  const std::size_t n_filler = config.mean_tokens / 2 + static_cast<std::size_t>(rng.below(config.mean_tokens + 1));
  std::vector<std::string> tokens;
  tokens.reserve(n_filler + lexicon.size());
  for (std::size_t k = 0; k < n_filler; ++k) {
    tokens.push_back(filler[rng.below(filler.size())]);
  }
  for (const auto& entry : lexicon.entries()) {
    if (!rng.bernoulli(p_cue)) continue;
    t.truth.injected_lemmas.push_back(entry.lemma);
    const auto& variant = entry.variants[rng.below(entry.variants.size())];
    tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(rng.below(tokens.size() + 1)), variant);
  }

  std::string body;
  body += "@UTF8\n@Begin\n@Languages:\teng\n@Participants:\tPAR Participant, INV Investigator\n";
  body += "@ID:\teng|synth|PAR|||||Participant|||\n@ID:\teng|synth|INV|||||Investigator|||\n";
  body += "@Media:\t" + id + ", audio\n";
  body += "*INV:\twell tell me everything you see going on in that picture .\n";

  std::size_t clock_ms = 1500;
  std::size_t pos = 0;
  while (pos < tokens.size()) {
    const std::size_t len = std::min<std::size_t>(4 + rng.below(7), tokens.size() - pos);
    std::string line;
    for (std::size_t k = pos; k < pos + len; ++k) {
      if (!line.empty()) line += ' ';
      line += tokens[k];
      if (!rng.bernoulli(p_marker)) continue;
      switch (rng.below(4)) {
        case 0: line += " (.)"; ++t.truth.pause_short; break;
        case 1: line += " (..)"; ++t.truth.pause_med; break;
        case 2: line += " (...)"; ++t.truth.pause_long; break;
        default: line += " [/] " + tokens[k]; ++t.truth.repetition; break;
      }
    }
    const std::size_t duration = 400 * len + 100 * rng.below(10);
    line += " . \xE2\x80\xA2" + std::to_string(clock_ms) + "_" + std::to_string(clock_ms + duration) + "\xE2\x80\xA2";
    clock_ms += duration + 200;
    body += "*PAR:\t" + line + "\n";
    ++t.par_utterances;
    pos += len;
    if (pos < tokens.size() && rng.bernoulli(0.2)) {
      body += "*INV:\tmhm .\n";
    }
  }
  body += "@End\n";
  t.cha = std::move(body);
  return t;
}

}  // namespace

void validate(const SynthConfig& c) {
  if (c.n_per_class < 1) throw Error(ErrorCode::InvalidConfig, "n_per_class must be >= 1");
  if (!is_probability(c.p_cue_ad) || !is_probability(c.p_cue_non_ad)) {
    throw Error(ErrorCode::InvalidConfig, "cue probabilities must lie in [0, 1]");
  }
  if (!is_rate(c.disfluency_rate_ad) || !is_rate(c.disfluency_rate_non_ad)) {
    throw Error(ErrorCode::InvalidConfig, "disfluency rates must be finite and >= 0");
  }
  if (c.mean_tokens < 5) throw Error(ErrorCode::InvalidConfig, "mean_tokens must be >= 5");
}

const std::vector<std::string>& filler_vocabulary() {
  static const std::vector<std::string> kWords{
      "the",     "a",        "boy",      "girl",     "is",      "are",     "on",       "up",
      "over",    "and",      "there",    "she",      "he",      "her",     "his",     "reaching",
      "falling", "standing", "drying",   "plate",    "floor",   "curtains", "towel",   "outside",
      "yard",    "bushes",   "tree",     "overflowing", "running", "spilling", "looking", "taking",
      "getting", "top",      "shelf",    "open",     "tipping", "somebody", "something", "going",
      "out",     "of",       "to",       "in",       "with",    "that",    "it",       "i",
      "see",     "um",       "uh",       "little",   "lady",    "cup",     "counter",  "cupboard",
  };
  return kWords;
}

SynthCorpus generate(const SynthConfig& config) {
  validate(config);
  Rng rng(config.seed);
  SynthCorpus out;
  out.corpus.provenance = "synthetic corpus (seed " + std::to_string(config.seed) + ")";
  const std::size_t total = 2 * config.n_per_class;
  for (std::size_t i = 0; i < total; ++i) {
    const std::string id = participant_name(i);
    const Label label = i % 2 == 0 ? Label::AD : Label::NonAD;
    Transcript t = compose(id, label, config, rng);

    corpus::ParticipantRecord record;
    record.participant_id = id;
    record.label = label;
    record.transcript_path = id + ".cha";
    record.age = 55 + static_cast<int>(rng.below(30));
    record.gender = rng.bernoulli(0.5) ? corpus::Gender::F : corpus::Gender::M;
    record.segment_count = static_cast<int>(t.par_utterances);

    out.corpus.records.push_back(std::move(record));
    out.files.push_back({id + ".cha", std::move(t.cha)});
    out.truth.push_back(std::move(t.truth));
  }
  return out;
}

nlohmann::ordered_json to_json(const TruthRecord& t) {
  nlohmann::ordered_json j;
  j["participant_id"] = t.participant_id;
  j["label"] = to_string(t.label);
  j["injected_lemmas"] = t.injected_lemmas;
  j["injected_annotations"] = {{"pause_short", t.pause_short},
                               {"pause_med", t.pause_med},
                               {"pause_long", t.pause_long},
                               {"repetition", t.repetition}};
  return j;
}

TruthRecord truth_from_json(const nlohmann::json& j) {
  try {
    TruthRecord t;
    t.participant_id = j.at("participant_id").get<std::string>();
    const auto label = parse_label_name(j.at("label").get<std::string>());
    if (!label) throw Error(ErrorCode::MalformedRecord, "truth record label");
    t.label = *label;
    t.injected_lemmas = j.at("injected_lemmas").get<std::vector<std::string>>();
    const auto& a = j.at("injected_annotations");
    t.pause_short = a.at("pause_short").get<std::size_t>();
    t.pause_med = a.at("pause_med").get<std::size_t>();
    t.pause_long = a.at("pause_long").get<std::size_t>();
    t.repetition = a.at("repetition").get<std::size_t>();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, std::string("truth record: ") + e.what());
  }
}

void write(const SynthCorpus& synth, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& f : synth.files) {
    io::write_file_atomic(dir / f.name, f.content);
  }
  io::write_file_atomic(dir / "manifest.jsonl", corpus::manifest_jsonl(synth.corpus));
  io::write_file_atomic(dir / "truth.jsonl",
                        io::to_jsonl(synth.truth, [](const TruthRecord& t) { return to_json(t); }));
}

nlohmann::ordered_json to_json(const SynthConfig& c) {
  nlohmann::ordered_json j;
  j["n_per_class"] = c.n_per_class;
  j["p_cue_AD"] = c.p_cue_ad;
  j["p_cue_nonAD"] = c.p_cue_non_ad;
  j["disfluency_rate_AD"] = c.disfluency_rate_ad;
  j["disfluency_rate_nonAD"] = c.disfluency_rate_non_ad;
  j["mean_tokens"] = c.mean_tokens;
  j["seed"] = c.seed;
  return j;
}

}  // namespace cuescreen::synth
