#include "cuescreen/prompt_compiler.hpp"

#include <algorithm>

#include "cuescreen/error.hpp"
#include "cuescreen/hash.hpp"
#include "cuescreen/io.hpp"
#include "cuescreen/random.hpp"

namespace cuescreen::detail {
const std::map<std::string, std::string>& builtin_template_files();
}

namespace cuescreen::prompt {

std::string_view to_string(Mode mode) noexcept {
  switch (mode) {
    case Mode::ZeroShot: return "zero_shot";
    case Mode::FewShot: return "few_shot";
    case Mode::Cot: return "cot";
  }
  return "zero_shot";
}

std::optional<Mode> parse_mode(std::string_view text) noexcept {
  if (text == "zero_shot") return Mode::ZeroShot;
  if (text == "few_shot") return Mode::FewShot;
  if (text == "cot") return Mode::Cot;
  return std::nullopt;
}

std::string_view to_string(Role role) noexcept {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

std::optional<Role> parse_role(std::string_view text) noexcept {
  if (text == "system") return Role::System;
  if (text == "user") return Role::User;
  if (text == "assistant") return Role::Assistant;
  return std::nullopt;
}

namespace {

std::string length_prefixed(std::string_view s) { return std::to_string(s.size()) + ":" + std::string(s); }

}  // namespace

const std::vector<std::string>& TemplateSet::file_names() {
  static const std::vector<std::string> kNames{"system", "zero_shot", "few_shot_query", "few_shot_exemplar", "cot"};
  return kNames;
}

TemplateSet::TemplateSet(std::string version, std::map<std::string, std::string> bodies)
    : version_(std::move(version)), bodies_(std::move(bodies)) {
  for (const auto& name : file_names()) {
    const auto it = bodies_.find(name);
    if (it == bodies_.end()) {
      throw Error(ErrorCode::InvalidTemplate, "missing template '" + name + "'");
    }
    if (name != "system" && it->second.find("{{transcript}}") == std::string::npos) {
      throw Error(ErrorCode::InvalidTemplate, "template '" + name + "' has no {{transcript}} slot");
    }
  }
  if (bodies_.at("cot").find("{{cue_line}}") == std::string::npos) {
    throw Error(ErrorCode::InvalidTemplate, "cot template has no {{cue_line}} slot");
  }
  std::string material;
  for (const auto& [name, body] : bodies_) {
    material += length_prefixed(name);
    material += length_prefixed(body);
  }
  fingerprint_ = sha256_hex(material);
}

const TemplateSet& TemplateSet::builtin() {
  static const TemplateSet set(CUESCREEN_TEMPLATE_VERSION, detail::builtin_template_files());
  return set;
}

TemplateSet TemplateSet::load(const std::filesystem::path& dir) {
  std::map<std::string, std::string> bodies;
  for (const auto& name : file_names()) {
    const auto path = dir / (name + ".txt");
    try {
      bodies[name] = io::read_text_file(path);
    } catch (const Error&) {
      throw Error(ErrorCode::InvalidTemplate, "cannot read " + path.string());
    }
  }
  return TemplateSet(dir.filename().string(), std::move(bodies));
}

const std::string& TemplateSet::body(std::string_view name) const {
  const auto it = bodies_.find(std::string(name));
  if (it == bodies_.end()) {
    throw Error(ErrorCode::InvalidTemplate, "no template '" + std::string(name) + "'");
  }
  return it->second;
}

std::string render(std::string_view tmpl, const std::map<std::string, std::string>& slots) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    const std::size_t open = tmpl.find("{{", i);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(i));
      break;
    }
    const std::size_t close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) {
      out.append(tmpl.substr(i));
      break;
    }
    out.append(tmpl.substr(i, open - i));
    const std::string key(tmpl.substr(open + 2, close - open - 2));
    if (const auto it = slots.find(key); it != slots.end()) {
      out.append(it->second);
    } else {
      out.append(tmpl.substr(open, close + 2 - open));
    }
    i = close + 2;
  }
  return out;
}

std::string cue_line(const cues::CueReport& report) {
  return "Cue coverage: " + std::to_string(report.matched_count()) + "/" + std::to_string(report.lexicon_size());
}

PromptBundle build_prompt(Mode mode, const chat::CleanTranscript& transcript, const cues::CueReport* report,
                          std::span<const Exemplar> exemplars, const TemplateSet& templates) {
  PromptBundle bundle;
  bundle.mode = mode;
  bundle.participant_id = transcript.participant_id;
  bundle.messages.push_back({Role::System, templates.body("system")});

  switch (mode) {
    case Mode::ZeroShot:
      bundle.messages.push_back({Role::User, render(templates.body("zero_shot"), {{"transcript", transcript.text}})});
      break;
    case Mode::FewShot:
      if (exemplars.empty()) {
        throw Error(ErrorCode::EmptyExemplars, "few_shot needs at least one exemplar");
      }
      for (const auto& ex : exemplars) {
        bundle.messages.push_back(
            {Role::User, render(templates.body("few_shot_exemplar"), {{"transcript", ex.transcript.text}})});
        bundle.messages.push_back(
            {Role::Assistant, std::string(ex.label == Label::AD ? kVerdictAD : kVerdictNonAD)});
        bundle.exemplar_ids.push_back(ex.transcript.participant_id);
      }
      bundle.messages.push_back(
          {Role::User, render(templates.body("few_shot_query"), {{"transcript", transcript.text}})});
      break;
    case Mode::Cot: {
      if (report == nullptr) {
        throw Error(ErrorCode::MissingCueReport, "cot mode needs a cue report for " + transcript.participant_id);
      }
      std::string matched;
      for (const auto& lemma : report->matched) {
        if (!matched.empty()) matched += ", ";
        matched += lemma;
      }
      if (matched.empty()) matched = "none";
      bundle.messages.push_back({Role::User, render(templates.body("cot"), {{"transcript", transcript.text},
                                                                           {"cue_line", cue_line(*report)},
                                                                           {"matched", matched}})});
      break;
    }
  }
  bundle.fingerprint = fingerprint(bundle);
  return bundle;
}

std::string fingerprint(const PromptBundle& bundle) {
  std::string material;
  for (const auto& m : bundle.messages) {
    material += length_prefixed(to_string(m.role));
    material += length_prefixed(m.content);
  }
  return sha256_hex(material);
}

std::vector<std::string> select_exemplars(std::span<const ExemplarCandidate> train_pool, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> chosen;
  for (const Label label : {Label::AD, Label::NonAD}) {
    std::vector<std::string> ids;
    for (const auto& c : train_pool) {
      if (c.label == label) ids.push_back(c.participant_id);
    }
    if (ids.empty()) {
      throw Error(ErrorCode::EmptyExemplars, "training split has no " + std::string(to_string(label)) + " participant");
    }
    std::sort(ids.begin(), ids.end());
    chosen.push_back(ids[rng.below(ids.size())]);
  }
  return chosen;
}

nlohmann::ordered_json to_json(const PromptBundle& bundle) {
  nlohmann::ordered_json j;
  j["participant_id"] = bundle.participant_id;
  j["mode"] = to_string(bundle.mode);
  nlohmann::ordered_json messages = nlohmann::ordered_json::array();
  for (const auto& m : bundle.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  j["messages"] = std::move(messages);
  j["exemplar_ids"] = bundle.exemplar_ids;
  j["fingerprint"] = bundle.fingerprint;
  return j;
}

PromptBundle bundle_from_json(const nlohmann::json& j) {
  try {
    PromptBundle b;
    b.participant_id = j.value("participant_id", std::string{});
    const auto mode = parse_mode(j.at("mode").get<std::string>());
    if (!mode) throw Error(ErrorCode::MalformedBundle, "unknown mode");
    b.mode = *mode;
    for (const auto& m : j.at("messages")) {
      const auto role = parse_role(m.at("role").get<std::string>());
      if (!role) throw Error(ErrorCode::MalformedBundle, "unknown role");
      b.messages.push_back({*role, m.at("content").get<std::string>()});
    }
    if (b.messages.empty() || b.messages.front().role != Role::System) {
      throw Error(ErrorCode::MalformedBundle, "bundle must open with a system message");
    }
    b.exemplar_ids = j.value("exemplar_ids", std::vector<std::string>{});
    b.fingerprint = fingerprint(b);
    if (j.contains("fingerprint") && j.at("fingerprint").get<std::string>() != b.fingerprint) {
      throw Error(ErrorCode::MalformedBundle, "fingerprint does not match messages for " + b.participant_id);
    }
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedBundle, e.what());
  }
}

}  // namespace cuescreen::prompt
