#include "cuescreen/cue_analyzer.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "cuescreen/error.hpp"
#include "cuescreen/io.hpp"

namespace cuescreen::cues {

namespace {

bool is_ascii_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u) != 0;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

const CueLexicon& CueLexicon::standard() {
  // Morphological variants of the printed lemmas only: plurals, possessives
  // and, for "wash", verb inflections.
  static const CueLexicon lexicon({
      {"stool", {"stool", "stools", "stool's"}},
      {"sink", {"sink", "sinks", "sink's"}},
      {"dish", {"dish", "dishes"}},
      {"wash", {"wash", "washes", "washed", "washing"}},
      {"jar", {"jar", "jars", "jar's"}},
      {"cookie", {"cookie", "cookies", "cookie's"}},
      {"child", {"child", "children", "child's", "children's"}},
      {"mother", {"mother", "mothers", "mother's"}},
      {"window", {"window", "windows"}},
      {"cabinet", {"cabinet", "cabinets"}},
      {"kitchen", {"kitchen", "kitchens", "kitchen's"}},
      {"water", {"water", "waters"}},
  });
  return lexicon;
}

CueLexicon::CueLexicon(std::vector<LexiconEntry> entries) : entries_(std::move(entries)) {
  if (entries_.size() != kLexiconSize) {
    throw Error(ErrorCode::InvalidLexicon,
                "expected " + std::to_string(kLexiconSize) + " lemmas, got " + std::to_string(entries_.size()));
  }
  std::set<std::string> lemmas;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    auto& entry = entries_[i];
    if (entry.lemma.empty() || !lemmas.insert(entry.lemma).second) {
      throw Error(ErrorCode::InvalidLexicon, "empty or duplicate lemma '" + entry.lemma + "'");
    }
    if (std::find(entry.variants.begin(), entry.variants.end(), entry.lemma) == entry.variants.end()) {
      entry.variants.insert(entry.variants.begin(), entry.lemma);
    }
    for (const auto& variant : entry.variants) {
      if (variant.empty() || std::any_of(variant.begin(), variant.end(), [](char c) {
            return std::isupper(static_cast<unsigned char>(c)) || std::isspace(static_cast<unsigned char>(c));
          })) {
        throw Error(ErrorCode::InvalidLexicon, "variant '" + variant + "' must be a lowercase single token");
      }
      const auto [it, inserted] = index_.emplace(variant, static_cast<int>(i));
      if (!inserted && it->second != static_cast<int>(i)) {
        throw Error(ErrorCode::InvalidLexicon,
                    "variant '" + variant + "' shared by " + entries_[it->second].lemma + " and " + entry.lemma);
      }
    }
  }
}

CueLexicon CueLexicon::parse(std::string_view text) {
  std::vector<LexiconEntry> entries;
  const auto lines = io::split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    std::string_view line = lines[n];
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    LexiconEntry entry;
    const auto colon = line.find(':');
    entry.lemma = std::string(trim(line.substr(0, colon)));
    if (colon != std::string_view::npos) {
      std::string_view rest = line.substr(colon + 1);
      while (!rest.empty()) {
        const auto comma = rest.find(',');
        const auto variant = trim(rest.substr(0, comma));
        if (!variant.empty()) entry.variants.emplace_back(variant);
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      }
    }
    if (entry.lemma.empty()) {
      throw Error(ErrorCode::InvalidLexicon, "missing lemma", n + 1);
    }
    entries.push_back(std::move(entry));
  }
  return CueLexicon(std::move(entries));
}

CueLexicon CueLexicon::load(const std::filesystem::path& path) { return parse(io::read_text_file(path)); }

int CueLexicon::lookup(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  return it == index_.end() ? -1 : it->second;
}

const std::vector<std::string>& FeatureVector::names() {
  static const std::vector<std::string> kNames{"cue_proportion", "token_count",      "type_token_ratio",
                                               "pause_total",    "repetition_count", "retrace_count"};
  return kNames;
}

std::vector<double> FeatureVector::values() const {
  return {cue_proportion,
          static_cast<double>(token_count),
          type_token_ratio,
          static_cast<double>(pause_total),
          static_cast<double>(repetition_count),
          static_cast<double>(retrace_count)};
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t b = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t e = i;
    while (b < e && is_ascii_punct(text[b])) ++b;
    while (e > b && is_ascii_punct(text[e - 1])) --e;
    if (b == e) continue;
    std::string token(text.substr(b, e - b));
    for (char& c : token) {
      const auto u = static_cast<unsigned char>(c);
      if (u < 0x80) c = static_cast<char>(std::tolower(u));
    }
    tokens.push_back(std::move(token));
  }
  return tokens;
}

CueReport cue_coverage(const std::vector<std::string>& tokens, const CueLexicon& lexicon) {
  CueReport report;
  report.total_tokens = tokens.size();
  report.per_lemma_counts.assign(lexicon.size(), 0);
  for (const auto& token : tokens) {
    if (const int idx = lexicon.lookup(token); idx >= 0) {
      ++report.per_lemma_counts[static_cast<std::size_t>(idx)];
    }
  }
  for (std::size_t i = 0; i < lexicon.size(); ++i) {
    report.lemmas.push_back(lexicon.entries()[i].lemma);
    if (report.per_lemma_counts[i] > 0) report.matched.push_back(lexicon.entries()[i].lemma);
  }
  return report;
}

FeatureVector featurize(const chat::CleanTranscript& transcript, const CueLexicon& lexicon) {
  return analyze(transcript, lexicon).features;
}

Analysis analyze(const chat::CleanTranscript& transcript, const CueLexicon& lexicon) {
  const auto tokens = tokenize(transcript.text);
  Analysis a;
  a.participant_id = transcript.participant_id;
  a.cues = cue_coverage(tokens, lexicon);
  a.features.cue_proportion = a.cues.proportion();
  a.features.token_count = tokens.size();
  if (!tokens.empty()) {
    const std::set<std::string> types(tokens.begin(), tokens.end());
    a.features.type_token_ratio = static_cast<double>(types.size()) / static_cast<double>(tokens.size());
  }
  a.features.pause_total = transcript.pause_total();
  a.features.repetition_count = transcript.repetition_count;
  a.features.retrace_count = transcript.retrace_count;
  return a;
}

nlohmann::ordered_json to_json(const CueReport& report) {
  nlohmann::ordered_json j;
  j["matched"] = report.matched;
  j["matched_count"] = report.matched_count();
  j["lexicon_size"] = report.lexicon_size();
  j["proportion"] = report.proportion();
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < report.lemmas.size(); ++i) {
    counts[report.lemmas[i]] = report.per_lemma_counts[i];
  }
  j["per_lemma_counts"] = std::move(counts);
  j["total_tokens"] = report.total_tokens;
  return j;
}

nlohmann::ordered_json to_json(const FeatureVector& f) {
  nlohmann::ordered_json j;
  j["cue_proportion"] = f.cue_proportion;
  j["token_count"] = f.token_count;
  j["type_token_ratio"] = f.type_token_ratio;
  j["pause_total"] = f.pause_total;
  j["repetition_count"] = f.repetition_count;
  j["retrace_count"] = f.retrace_count;
  return j;
}

nlohmann::ordered_json to_json(const Analysis& a) {
  nlohmann::ordered_json j;
  j["participant_id"] = a.participant_id;
  j["cue_report"] = to_json(a.cues);
  j["features"] = to_json(a.features);
  return j;
}

Analysis analysis_from_json(const nlohmann::json& j) {
  try {
    Analysis a;
    a.participant_id = j.at("participant_id").get<std::string>();
    const auto& c = j.at("cue_report");
    a.cues.matched = c.at("matched").get<std::vector<std::string>>();
    a.cues.total_tokens = c.at("total_tokens").get<std::size_t>();
    // ordered_json keeps lexicon order on write, but nlohmann::json sorts
    // keys on read; lexicon order is restored from the standard table when
    // the lemmas match it.
    std::map<std::string, std::size_t> counts = c.at("per_lemma_counts").get<std::map<std::string, std::size_t>>();
    std::vector<std::string> order;
    for (const auto& e : CueLexicon::standard().entries()) {
      if (counts.count(e.lemma)) order.push_back(e.lemma);
    }
    if (order.size() != counts.size()) {
      order.clear();
      for (const auto& [lemma, _] : counts) order.push_back(lemma);
    }
    for (const auto& lemma : order) {
      a.cues.lemmas.push_back(lemma);
      a.cues.per_lemma_counts.push_back(counts[lemma]);
    }
    const auto& f = j.at("features");
    a.features.cue_proportion = f.at("cue_proportion").get<double>();
    a.features.token_count = f.at("token_count").get<std::size_t>();
    a.features.type_token_ratio = f.at("type_token_ratio").get<double>();
    a.features.pause_total = f.at("pause_total").get<std::size_t>();
    a.features.repetition_count = f.at("repetition_count").get<std::size_t>();
    a.features.retrace_count = f.at("retrace_count").get<std::size_t>();
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, std::string("analysis record: ") + e.what());
  }
}

}  // namespace cuescreen::cues
