#include "cuescreen/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>

#include "cuescreen/error.hpp"
#include "cuescreen/io.hpp"
#include "cuescreen/random.hpp"

namespace cuescreen::corpus {

const ParticipantRecord* Corpus::find(std::string_view participant_id) const {
  const auto it = std::find_if(records.begin(), records.end(),
                               [&](const ParticipantRecord& r) { return r.participant_id == participant_id; });
  return it == records.end() ? nullptr : &*it;
}

std::vector<const ParticipantRecord*> Corpus::in_split(Split s) const {
  std::vector<const ParticipantRecord*> out;
  for (const auto& r : records) {
    if (r.split == s) out.push_back(&r);
  }
  return out;
}

std::optional<SplitPolicy> parse_split_policy(std::string_view text, std::uint64_t seed) {
  SplitPolicy policy;
  policy.seed = seed;
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  auto parse_count = [](std::string_view s, std::size_t& out) {
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
  };
  std::string_view rest = text.substr(colon + 1);
  const auto second = rest.find(':');
  if (second != std::string_view::npos) {
    if (rest.substr(second + 1) != "flat") return std::nullopt;
    policy.stratify_by_label = false;
    rest = rest.substr(0, second);
  }
  if (!parse_count(text.substr(0, colon), policy.train_count) || !parse_count(rest, policy.test_count)) {
    return std::nullopt;
  }
  return policy;
}

nlohmann::ordered_json to_json(const ParticipantRecord& r) {
  nlohmann::ordered_json j;
  j["participant_id"] = r.participant_id;
  j["label"] = to_string(r.label);
  j["split"] = to_string(r.split);
  j["transcript_path"] = r.transcript_path;
  j["age"] = r.age ? nlohmann::ordered_json(*r.age) : nlohmann::ordered_json(nullptr);
  j["gender"] = r.gender ? nlohmann::ordered_json(*r.gender == Gender::M ? "M" : "F") : nlohmann::ordered_json(nullptr);
  j["segment_count"] = r.segment_count ? nlohmann::ordered_json(*r.segment_count) : nlohmann::ordered_json(nullptr);
  return j;
}

ParticipantRecord record_from_json(const nlohmann::json& j, std::size_t line) {
  if (!j.is_object()) throw Error(ErrorCode::MalformedRecord, "record is not an object", line);
  ParticipantRecord r;
  if (!j.contains("participant_id") || !j["participant_id"].is_string() ||
      j["participant_id"].get<std::string>().empty()) {
    throw Error(ErrorCode::MalformedRecord, "missing participant_id", line);
  }
  r.participant_id = j["participant_id"].get<std::string>();
  if (!j.contains("label") || j["label"].is_null()) {
    throw Error(ErrorCode::MissingLabel, "no label for " + r.participant_id, line);
  }
  const auto label = j["label"].is_string() ? parse_label_name(j["label"].get<std::string>()) : std::nullopt;
  if (!label) throw Error(ErrorCode::MalformedRecord, "unrecognised label for " + r.participant_id, line);
  r.label = *label;
  if (j.contains("split") && !j["split"].is_null()) {
    const auto s = j["split"].is_string() ? parse_split_name(j["split"].get<std::string>()) : std::nullopt;
    if (!s) throw Error(ErrorCode::MalformedRecord, "unrecognised split for " + r.participant_id, line);
    r.split = *s;
  }
  if (j.contains("transcript_path") && j["transcript_path"].is_string()) {
    r.transcript_path = j["transcript_path"].get<std::string>();
  }
  auto optional_int = [&](const char* key) -> std::optional<int> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    if (!j[key].is_number_integer()) {
      throw Error(ErrorCode::MalformedRecord, std::string(key) + " must be an integer for " + r.participant_id, line);
    }
    return j[key].get<int>();
  };
  r.age = optional_int("age");
  r.segment_count = optional_int("segment_count");
  if (j.contains("gender") && !j["gender"].is_null()) {
    const std::string g = j["gender"].is_string() ? j["gender"].get<std::string>() : "";
    if (g == "M") {
      r.gender = Gender::M;
    } else if (g == "F") {
      r.gender = Gender::F;
    } else {
      throw Error(ErrorCode::MalformedRecord, "gender must be M or F for " + r.participant_id, line);
    }
  }
  return r;
}

Corpus load_manifest(const std::filesystem::path& path) {
  Corpus corpus;
  corpus.provenance = "manifest " + path.filename().string();
  std::map<std::string, std::size_t> seen;
  for (const auto& [line, value] : io::read_jsonl(path)) {
    auto record = record_from_json(value, line);
    const auto [it, inserted] = seen.emplace(record.participant_id, line);
    if (!inserted) {
      throw Error(ErrorCode::DuplicateId,
                  record.participant_id + " (first seen at line " + std::to_string(it->second) + ")", line);
    }
    corpus.records.push_back(std::move(record));
  }
  return corpus;
}

std::string manifest_jsonl(const Corpus& corpus) {
  return io::to_jsonl(corpus.records, [](const ParticipantRecord& r) { return to_json(r); });
}

Corpus split(const Corpus& corpus, const SplitPolicy& policy) {
  const std::size_t n = corpus.records.size();
  if (policy.train_count + policy.test_count > n) {
    throw Error(ErrorCode::InfeasiblePolicy, std::to_string(policy.train_count) + " + " +
                                                 std::to_string(policy.test_count) + " exceeds corpus of " +
                                                 std::to_string(n));
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return corpus.records[a].participant_id < corpus.records[b].participant_id;
  });

  Corpus out = corpus;
  for (auto& r : out.records) r.split = Split::Unassigned;
  Rng rng(policy.seed);

  auto assign = [&](std::vector<std::size_t>& pool, std::size_t n_test, std::size_t n_train) {
    rng.shuffle(pool);
    for (std::size_t k = 0; k < n_test; ++k) out.records[pool[k]].split = Split::Test;
    for (std::size_t k = n_test; k < n_test + n_train; ++k) out.records[pool[k]].split = Split::Train;
  };

  if (!policy.stratify_by_label) {
    assign(order, policy.test_count, policy.train_count);
    return out;
  }

  std::vector<std::size_t> ad;
  std::vector<std::size_t> non_ad;
  for (const std::size_t i : order) {
    (corpus.records[i].label == Label::AD ? ad : non_ad).push_back(i);
  }
  // Halve a count between the classes; the odd unit goes to whichever class
  // has more members left (AD on a tie).
  auto halve = [](std::size_t count, std::size_t room_ad, std::size_t room_non) {
    std::size_t a = count / 2;
    std::size_t b = count / 2;
    if (count % 2 == 1) (room_ad >= room_non ? a : b) += 1;
    return std::pair{a, b};
  };
  const auto [test_ad, test_non] = halve(policy.test_count, ad.size(), non_ad.size());
  if (test_ad > ad.size() || test_non > non_ad.size()) {
    throw Error(ErrorCode::InfeasiblePolicy, "not enough participants per class for a stratified test split");
  }
  const auto [train_ad, train_non] = halve(policy.train_count, ad.size() - test_ad, non_ad.size() - test_non);
  if (test_ad + train_ad > ad.size() || test_non + train_non > non_ad.size()) {
    throw Error(ErrorCode::InfeasiblePolicy, "not enough participants per class for a stratified train split");
  }
  assign(ad, test_ad, train_ad);
  assign(non_ad, test_non, train_non);
  return out;
}

std::string split_tsv(const Corpus& corpus) {
  std::string out = "participant_id\tsplit\n";
  for (const auto& r : corpus.records) {
    out += r.participant_id;
    out += '\t';
    out += to_string(r.split);
    out += '\n';
  }
  return out;
}

Corpus apply_split_tsv(const Corpus& corpus, std::string_view tsv) {
  Corpus out = corpus;
  const auto lines = io::split_lines(tsv);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::string& line = lines[n];
    if (line.empty() || (n == 0 && line.rfind("participant_id\t", 0) == 0)) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error(ErrorCode::MalformedRecord, "expected two tab-separated columns", n + 1);
    const std::string id = line.substr(0, tab);
    const auto s = parse_split_name(line.substr(tab + 1));
    if (!s) throw Error(ErrorCode::MalformedRecord, "unknown split '" + line.substr(tab + 1) + "'", n + 1);
    auto it = std::find_if(out.records.begin(), out.records.end(),
                           [&](const ParticipantRecord& r) { return r.participant_id == id; });
    if (it == out.records.end()) throw Error(ErrorCode::UnknownParticipant, id, n + 1);
    it->split = *s;
  }
  return out;
}

std::string ValidationReport::summary() const {
  return "train " + std::to_string(train.total()) + " / test " + std::to_string(test.total()) + "; train AD " +
         std::to_string(train.ad) + ", non-AD " + std::to_string(train.non_ad);
}

ValidationReport validate(const Corpus& corpus, const std::filesystem::path& base_dir) {
  ValidationReport report;
  for (const auto& r : corpus.records) {
    auto bump = [&](ClassCounts& c) { (r.label == Label::AD ? c.ad : c.non_ad) += 1; };
    bump(report.all);
    switch (r.split) {
      case Split::Train: bump(report.train); break;
      case Split::Test: bump(report.test); break;
      case Split::Unassigned: ++report.unassigned; break;
    }
    std::filesystem::path p = r.transcript_path;
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    if (r.transcript_path.empty() || !std::filesystem::is_regular_file(p)) {
      report.missing_transcripts.push_back(r.participant_id);
      report.findings.push_back("transcript missing for " + r.participant_id + ": '" + r.transcript_path + "'");
    }
  }
  if (report.all.ad != report.all.non_ad) {
    report.findings.push_back("class imbalance: AD " + std::to_string(report.all.ad) + ", non-AD " +
                              std::to_string(report.all.non_ad));
  }
  if (report.test.total() > 0 && report.test.ad != report.test.non_ad) {
    report.findings.push_back("test split is not label-balanced");
  }
  report.provenance_note = corpus.provenance;
  if (report.all.total() == 156 && report.train.total() == 108 && report.test.total() == 48) {
    if (!report.provenance_note.empty()) report.provenance_note += "; ";
    report.provenance_note +=
        "reference 108/48 split: published train composition of 48 AD + 48 non-AD sums to 96, not 108; "
        "this corpus uses " +
        std::to_string(report.train.ad) + " + " + std::to_string(report.train.non_ad) +
        " so that 108 + 48 = 156";
  }
  return report;
}

nlohmann::ordered_json to_json(const ValidationReport& report) {
  auto counts = [](const ClassCounts& c) {
    return nlohmann::ordered_json{{"AD", c.ad}, {"non_AD", c.non_ad}, {"total", c.total()}};
  };
  nlohmann::ordered_json j;
  j["summary"] = report.summary();
  j["all"] = counts(report.all);
  j["train"] = counts(report.train);
  j["test"] = counts(report.test);
  j["unassigned"] = report.unassigned;
  j["missing_transcripts"] = report.missing_transcripts;
  j["findings"] = report.findings;
  j["provenance_note"] = report.provenance_note;
  return j;
}

}  // namespace cuescreen::corpus
