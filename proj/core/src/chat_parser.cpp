#include "cuescreen/chat_parser.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

#include "cuescreen/error.hpp"
#include "cuescreen/io.hpp"

namespace cuescreen::chat {

std::string_view to_string(AnnotationKind kind) noexcept {
  switch (kind) {
    case AnnotationKind::PauseShort: return "pause_short";
    case AnnotationKind::PauseMed: return "pause_med";
    case AnnotationKind::PauseLong: return "pause_long";
    case AnnotationKind::Retrace: return "retrace";
    case AnnotationKind::Repetition: return "repetition";
    case AnnotationKind::ErrorCode: return "error_code";
    case AnnotationKind::Unintelligible: return "unintelligible";
    case AnnotationKind::Timestamp: return "timestamp";
    case AnnotationKind::OtherCode: return "other_code";
  }
  return "other_code";
}

namespace {

constexpr std::string_view kBullet = "\xE2\x80\xA2";  // U+2022
constexpr char kNakBullet = '\x15';

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool starts_bullet(std::string_view s, std::size_t i) {
  return s[i] == kNakBullet || s.substr(i, kBullet.size()) == kBullet;
}

// Characters that end a plain word and start (or close) a code.
bool is_word_break(std::string_view s, std::size_t i) {
  const char c = s[i];
  return is_space(c) || c == '(' || c == ')' || c == '[' || c == ']' || c == '<' || c == '>' ||
         starts_bullet(s, i);
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

bool is_unintelligible_word(std::string_view word) {
  std::size_t b = 0;
  std::size_t e = word.size();
  while (b < e && std::ispunct(static_cast<unsigned char>(word[b]))) ++b;
  while (e > b && std::ispunct(static_cast<unsigned char>(word[e - 1]))) --e;
  const std::string core = lower_ascii(word.substr(b, e - b));
  return core == "xxx" || core == "yyy";
}

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::MalformedTier, what);
}

struct Word {
  std::size_t begin;
  std::size_t end;
};

struct OpenGroup {
  std::size_t open;
};

struct ClosedGroup {
  std::size_t open;
  std::size_t close;
};

class Annotator {
 public:
  explicit Annotator(std::string_view text) : s_(text) {}

  std::vector<AnnotationSpan> run() {
    std::size_t i = 0;
    while (i < s_.size()) {
      if (is_space(s_[i])) {
        ++i;
      } else if (starts_bullet(s_, i)) {
        i = bullet(i);
      } else if (s_[i] == '(') {
        i = paren(i);
      } else if (s_[i] == '[') {
        i = bracket(i);
      } else if (s_[i] == '<') {
        settle_pending();
        groups_.push_back({i});
        words_.clear();
        ++i;
      } else if (s_[i] == '>') {
        if (groups_.empty()) malformed("'>' without matching '<'");
        settle_pending();
        pending_ = ClosedGroup{groups_.back().open, i};
        groups_.pop_back();
        ++i;
      } else if (s_[i] == ')' || s_[i] == ']') {
        malformed(std::string("unbalanced '") + s_[i] + "'");
      } else {
        i = word(i);
      }
    }
    if (!groups_.empty()) malformed("unterminated '<' group");
    settle_pending();
    std::sort(spans_.begin(), spans_.end(),
              [](const AnnotationSpan& a, const AnnotationSpan& b) { return a.begin < b.begin; });
    return std::move(spans_);
  }

 private:
  void add(AnnotationKind kind, std::size_t begin, std::size_t end) { spans_.push_back({kind, begin, end}); }

  // A closed <...> group that turned out not to scope a [/] or [//] keeps
  // its content; only the angle brackets are removed.
  void settle_pending() {
    if (pending_) {
      add(AnnotationKind::OtherCode, pending_->open, pending_->open + 1);
      add(AnnotationKind::OtherCode, pending_->close, pending_->close + 1);
      pending_.reset();
    }
  }

  std::size_t bullet(std::size_t i) {
    settle_pending();
    const std::size_t width = s_[i] == kNakBullet ? 1 : kBullet.size();
    const std::size_t close = s_[i] == kNakBullet ? s_.find(kNakBullet, i + 1) : s_.find(kBullet, i + width);
    if (close == std::string_view::npos) malformed("unterminated timestamp bullet");
    add(AnnotationKind::Timestamp, i, close + width);
    words_.clear();
    return close + width;
  }

  std::size_t paren(std::size_t i) {
    settle_pending();
    const std::size_t close = s_.find(')', i + 1);
    if (close == std::string_view::npos) malformed("unterminated '('");
    const std::string_view content = s_.substr(i + 1, close - i - 1);
    if (content.find_first_of("([<>]") != std::string_view::npos) malformed("nested code inside '( )'");
    AnnotationKind kind = AnnotationKind::OtherCode;
    if (content == ".") {
      kind = AnnotationKind::PauseShort;
    } else if (content == "..") {
      kind = AnnotationKind::PauseMed;
    } else if (content == "...") {
      kind = AnnotationKind::PauseLong;
    }
    add(kind, i, close + 1);
    words_.clear();
    return close + 1;
  }

  std::size_t bracket(std::size_t i) {
    const std::size_t close = s_.find(']', i + 1);
    if (close == std::string_view::npos) malformed("unterminated '['");
    const std::string_view content = trim(s_.substr(i + 1, close - i - 1));
    if (content.find_first_of("([<>") != std::string_view::npos) malformed("nested code inside '[ ]'");

    if (content == "/" || content == "//") {
      const auto kind = content == "/" ? AnnotationKind::Repetition : AnnotationKind::Retrace;
      std::size_t scope_begin;
      if (pending_) {
        scope_begin = pending_->open;
        pending_.reset();
      } else if (!words_.empty()) {
        const std::size_t k = kind == AnnotationKind::Repetition ? repeated_run_length(close + 1) : 1;
        scope_begin = words_[words_.size() - k].begin;
      } else {
        malformed(std::string("'[") + std::string(content) + "]' has no preceding material");
      }
      // The scoped material is removed wholesale, so codes nested inside it
      // are absorbed into this span.
      std::erase_if(spans_, [&](const AnnotationSpan& a) { return a.begin >= scope_begin; });
      add(kind, scope_begin, close + 1);
    } else {
      settle_pending();
      const auto kind = !content.empty() && content.front() == '*' ? AnnotationKind::ErrorCode
                                                                    : AnnotationKind::OtherCode;
      add(kind, i, close + 1);
    }
    words_.clear();
    return close + 1;
  }

  // Without angle brackets a [/] scopes the longest run of preceding words
  // that the speaker immediately says again; one word if nothing repeats.
  std::size_t repeated_run_length(std::size_t after) const {
    std::vector<std::string_view> following;
    std::size_t j = after;
    while (following.size() < words_.size()) {
      while (j < s_.size() && is_space(s_[j])) ++j;
      if (j >= s_.size() || is_word_break(s_, j)) break;
      const std::size_t b = j;
      while (j < s_.size() && !is_word_break(s_, j)) ++j;
      following.push_back(s_.substr(b, j - b));
    }
    for (std::size_t k = std::min(following.size(), words_.size()); k > 1; --k) {
      bool same = true;
      for (std::size_t m = 0; m < k && same; ++m) {
        const Word& w = words_[words_.size() - k + m];
        same = s_.substr(w.begin, w.end - w.begin) == following[m];
      }
      if (same) return k;
    }
    return 1;
  }

  std::size_t word(std::size_t i) {
    settle_pending();
    std::size_t j = i;
    if (s_[i] == '+') {
      // Utterance terminators and linkers (+..., +/., +<) may contain code
      // characters; they run to the next space.
      while (j < s_.size() && !is_space(s_[j])) ++j;
      add(AnnotationKind::OtherCode, i, j);
      words_.clear();
      return j;
    }
    while (j < s_.size() && !is_word_break(s_, j)) ++j;
    const std::string_view w = s_.substr(i, j - i);
    if (w.front() == '&') {
      add(AnnotationKind::OtherCode, i, j);
      words_.clear();
    } else if (is_unintelligible_word(w)) {
      add(AnnotationKind::Unintelligible, i, j);
      words_.clear();
    } else if (w.find_first_of("*%") != std::string_view::npos) {
      malformed("stray control character in '" + std::string(w) + "'");
    } else {
      words_.push_back({i, j});
    }
    return j;
  }

  std::string_view s_;
  std::vector<AnnotationSpan> spans_;
  std::vector<Word> words_;  // plain words since the last code
  std::vector<OpenGroup> groups_;
  std::optional<ClosedGroup> pending_;
};

bool is_speaker_code(std::string_view code) {
  return code.size() == 3 && std::all_of(code.begin(), code.end(), [](char c) {
           return std::isupper(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c));
         });
}

bool is_punctuation_token(std::string_view token) {
  return std::all_of(token.begin(), token.end(),
                     [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; });
}

}  // namespace

std::vector<AnnotationSpan> annotate(std::string_view raw_text) { return Annotator(raw_text).run(); }

StripResult strip_annotations(std::string_view raw_text, const std::vector<AnnotationSpan>& annotations) {
  StripResult result;
  std::string kept;
  kept.reserve(raw_text.size());
  std::size_t cursor = 0;
  for (const auto& span : annotations) {
    if (span.begin > cursor) {
      kept.append(raw_text.substr(cursor, span.begin - cursor));
    }
    kept.push_back(' ');
    cursor = std::max(cursor, span.end);
    ++result.consumed[static_cast<std::size_t>(span.kind)];
  }
  if (cursor < raw_text.size()) {
    kept.append(raw_text.substr(cursor));
  }

  std::size_t i = 0;
  while (i < kept.size()) {
    while (i < kept.size() && is_space(kept[i])) ++i;
    const std::size_t b = i;
    while (i < kept.size() && !is_space(kept[i])) ++i;
    if (b == i) break;
    const std::string_view token = std::string_view(kept).substr(b, i - b);
    if (is_punctuation_token(token)) continue;
    if (!result.clean.empty()) result.clean.push_back(' ');
    result.clean.append(token);
  }
  return result;
}

std::vector<std::string> TranscriptDocument::participants() const {
  std::vector<std::string> codes;
  for (const auto& field : header_fields) {
    if (field.keyword != "Participants") continue;
    std::string_view rest = field.value;
    while (!rest.empty()) {
      const std::size_t comma = rest.find(',');
      std::string_view entry = trim(rest.substr(0, comma));
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      const std::size_t sp = entry.find_first_of(" \t");
      const std::string_view code = entry.substr(0, sp);
      if (!code.empty()) codes.emplace_back(code);
    }
  }
  return codes;
}

bool TranscriptDocument::declares(std::string_view speaker) const {
  const auto codes = participants();
  return std::find(codes.begin(), codes.end(), speaker) != codes.end();
}

TranscriptDocument parse_document(std::string_view raw, std::string source_id) {
  if (raw.substr(0, 3) == "\xEF\xBB\xBF") raw.remove_prefix(3);

  TranscriptDocument doc;
  doc.source_id = std::move(source_id);
  const auto lines = io::split_lines(raw);

  enum class Last { None, Header, Utterance, Dependent };
  Last last = Last::None;
  bool begun = false;
  std::vector<std::string> declared;

  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::size_t line_no = n + 1;
    const std::string& line = lines[n];
    if (trim(line).empty()) continue;

    switch (line.front()) {
      case '@': {
        const std::size_t colon = line.find(':');
        HeaderField field;
        field.keyword = std::string(trim(std::string_view(line).substr(1, colon == std::string::npos ? std::string::npos : colon - 1)));
        if (colon != std::string::npos) field.value = std::string(trim(std::string_view(line).substr(colon + 1)));
        if (field.keyword == "Begin") {
          if (begun) throw Error(ErrorCode::MalformedTier, "second @Begin", line_no);
          begun = true;
        }
        doc.header_fields.push_back(std::move(field));
        if (doc.header_fields.back().keyword == "Participants") declared = doc.participants();
        last = Last::Header;
        break;
      }
      case '*': {
        if (!begun) throw Error(ErrorCode::MissingBegin, "utterance before @Begin", line_no);
        const std::size_t colon = line.find(':');
        if (colon == std::string::npos) throw Error(ErrorCode::MalformedTier, "speaker tier without ':'", line_no);
        const std::string code = line.substr(1, colon - 1);
        if (!is_speaker_code(code)) {
          throw Error(ErrorCode::MalformedTier, "bad speaker code '" + code + "'", line_no);
        }
        if (std::find(declared.begin(), declared.end(), code) == declared.end()) {
          throw Error(ErrorCode::UnknownSpeaker, "speaker " + code + " not in @Participants", line_no);
        }
        Utterance u;
        u.speaker_code = code;
        u.raw_text = std::string(trim(std::string_view(line).substr(colon + 1)));
        u.line = line_no;
        doc.utterances.push_back(std::move(u));
        last = Last::Utterance;
        break;
      }
      case '%': {
        if (doc.utterances.empty()) throw Error(ErrorCode::MalformedTier, "dependent tier before any utterance", line_no);
        const std::size_t colon = line.find(':');
        if (colon == std::string::npos) throw Error(ErrorCode::MalformedTier, "dependent tier without ':'", line_no);
        doc.utterances.back().dependent_tiers.push_back(
            {line.substr(1, colon - 1), std::string(trim(std::string_view(line).substr(colon + 1)))});
        last = Last::Dependent;
        break;
      }
      case '\t': {
        const std::string_view more = trim(line);
        auto append = [&](std::string& target) {
          if (!target.empty()) target.push_back(' ');
          target.append(more);
        };
        switch (last) {
          case Last::None: throw Error(ErrorCode::MalformedTier, "continuation line with nothing to continue", line_no);
          case Last::Header:
            append(doc.header_fields.back().value);
            if (doc.header_fields.back().keyword == "Participants") declared = doc.participants();
            break;
          case Last::Utterance: append(doc.utterances.back().raw_text); break;
          case Last::Dependent: append(doc.utterances.back().dependent_tiers.back().text); break;
        }
        break;
      }
      default:
        throw Error(ErrorCode::MalformedTier, "line starts with neither @, *, % nor a tab", line_no);
    }
  }

  if (!begun) {
    throw Error(ErrorCode::MissingBegin, "no @Begin marker", std::max<std::size_t>(1, lines.size()));
  }

  for (auto& u : doc.utterances) {
    try {
      u.annotations = annotate(u.raw_text);
    } catch (const Error& e) {
      throw Error(e.code(), e.detail(), u.line);
    }
  }
  return doc;
}

CleanTranscript extract_participant_text(const TranscriptDocument& doc, std::string_view speaker) {
  if (!doc.declares(speaker)) {
    throw Error(ErrorCode::UnknownSpeaker, "speaker " + std::string(speaker) + " not in @Participants");
  }
  CleanTranscript out;
  out.participant_id = doc.source_id;
  for (const auto& u : doc.utterances) {
    if (u.speaker_code != speaker) continue;
    ++out.utterance_count;
    const StripResult stripped = strip_annotations(u.raw_text, u.annotations);
    if (!stripped.clean.empty()) {
      if (!out.text.empty()) out.text.push_back(' ');
      out.text += stripped.clean;
    }
    out.pause_short += count_of(stripped.consumed, AnnotationKind::PauseShort);
    out.pause_med += count_of(stripped.consumed, AnnotationKind::PauseMed);
    out.pause_long += count_of(stripped.consumed, AnnotationKind::PauseLong);
    out.repetition_count += count_of(stripped.consumed, AnnotationKind::Repetition);
    out.retrace_count += count_of(stripped.consumed, AnnotationKind::Retrace);
  }
  return out;
}

nlohmann::ordered_json to_json(const CleanTranscript& t) {
  nlohmann::ordered_json j;
  j["participant_id"] = t.participant_id;
  j["text"] = t.text;
  j["utterance_count"] = t.utterance_count;
  j["pause_counts"] = {{"short", t.pause_short}, {"med", t.pause_med}, {"long", t.pause_long}};
  j["repetition_count"] = t.repetition_count;
  j["retrace_count"] = t.retrace_count;
  return j;
}

CleanTranscript clean_transcript_from_json(const nlohmann::json& j) {
  try {
    CleanTranscript t;
    t.participant_id = j.at("participant_id").get<std::string>();
    t.text = j.at("text").get<std::string>();
    t.utterance_count = j.value("utterance_count", std::size_t{0});
    if (j.contains("pause_counts")) {
      const auto& p = j.at("pause_counts");
      t.pause_short = p.value("short", std::size_t{0});
      t.pause_med = p.value("med", std::size_t{0});
      t.pause_long = p.value("long", std::size_t{0});
    }
    t.repetition_count = j.value("repetition_count", std::size_t{0});
    t.retrace_count = j.value("retrace_count", std::size_t{0});
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, std::string("transcript record: ") + e.what());
  }
}

}  // namespace cuescreen::chat
