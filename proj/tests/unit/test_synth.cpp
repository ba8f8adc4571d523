#include <cmath>
#include <map>

#include "doctest.h"

#include "cuescreen/chat_parser.hpp"
#include "cuescreen/cue_analyzer.hpp"
#include "cuescreen/error.hpp"
#include "cuescreen/io.hpp"
#include "cuescreen/synth.hpp"
#include "support/temp_dir.hpp"

using namespace cuescreen;
using namespace cuescreen::synth;

TEST_CASE("default config yields 100 participants with the configured cue rates") {
  const SynthConfig cfg;
  const auto out = generate(cfg);
  REQUIRE(out.corpus.records.size() == 100);
  REQUIRE(out.files.size() == 100);
  double sum_ad = 0;
  std::size_t n_ad = 0;
  for (const auto& t : out.truth) {
    if (t.label != Label::AD) continue;
    sum_ad += static_cast<double>(t.injected_lemmas.size()) / 12.0;
    ++n_ad;
  }
  CHECK(n_ad == 50);
  const double mean = sum_ad / static_cast<double>(n_ad);
  const double se = std::sqrt(0.35 * 0.65 / (12.0 * static_cast<double>(n_ad)));
  CHECK(std::abs(mean - 0.35) <= 3.0 * se);
}

TEST_CASE("saturated cue probability") {
  SynthConfig cfg;
  cfg.n_per_class = 5;
  cfg.p_cue_ad = cfg.p_cue_non_ad = 1.0;
  for (const auto& f : generate(cfg).files) {
    const auto t = chat::extract_participant_text(chat::parse_document(f.content, f.name));
    CHECK(cues::cue_coverage(cues::tokenize(t.text)).proportion() == 1.0);
  }
}

TEST_CASE("same config gives byte-identical output, different seeds differ") {
  SynthConfig cfg;
  cfg.n_per_class = 10;
  testing::TempDir a, b;
  write(generate(cfg), a.path());
  write(generate(cfg), b.path());
  std::size_t files = 0;
  for (const auto& e : std::filesystem::directory_iterator(a.path())) {
    ++files;
    CHECK(io::read_text_file(e.path()) == io::read_text_file(b.path() / e.path().filename()));
  }
  CHECK(files == 22);
  cfg.seed = 2;
  CHECK(generate(cfg).files[0].content != generate(SynthConfig{.n_per_class = 10}).files[0].content);
}

TEST_CASE("round trip: parse succeeds and analyzer recovers the truth") {
  SynthConfig cfg;
  cfg.n_per_class = 30;
  cfg.disfluency_rate_ad = 3.0;
  cfg.seed = 42;
  const auto out = generate(cfg);
  for (std::size_t i = 0; i < out.files.size(); ++i) {
    const auto& truth = out.truth[i];
    const auto t = chat::extract_participant_text(chat::parse_document(out.files[i].content, truth.participant_id));
    CHECK(cues::cue_coverage(cues::tokenize(t.text)).matched == truth.injected_lemmas);
    CHECK(t.pause_short == truth.pause_short);
    CHECK(t.pause_med == truth.pause_med);
    CHECK(t.pause_long == truth.pause_long);
    CHECK(t.repetition_count == truth.repetition);
    CHECK(t.retrace_count == 0);
    CHECK(out.corpus.records[i].label == truth.label);
  }
}

TEST_CASE("disfluency rate separates the classes") {
  SynthConfig cfg;
  cfg.n_per_class = 40;
  cfg.disfluency_rate_ad = 2.0;
  cfg.disfluency_rate_non_ad = 0.0;
  std::map<Label, std::size_t> markers;
  for (const auto& t : generate(cfg).truth) {
    markers[t.label] += t.pause_short + t.pause_med + t.pause_long + t.repetition;
  }
  CHECK(markers[Label::NonAD] == 0);
  CHECK(markers[Label::AD] > 0);
}

TEST_CASE("filler vocabulary contains no cue variant") {
  for (const auto& w : filler_vocabulary()) CHECK(cues::CueLexicon::standard().lookup(w) == -1);
}

TEST_CASE("invalid configs") {
  auto bad = [](auto mutate) {
    SynthConfig c;
    mutate(c);
    try {
      generate(c);
    } catch (const Error& e) {
      return e.code() == ErrorCode::InvalidConfig;
    }
    return false;
  };
  CHECK(bad([](SynthConfig& c) { c.n_per_class = 0; }));
  CHECK(bad([](SynthConfig& c) { c.p_cue_ad = 1.5; }));
  CHECK(bad([](SynthConfig& c) { c.p_cue_non_ad = -0.1; }));
  CHECK(bad([](SynthConfig& c) { c.disfluency_rate_ad = -1; }));
  CHECK(bad([](SynthConfig& c) { c.mean_tokens = 4; }));
}

TEST_CASE("truth log JSON round-trip") {
  SynthConfig cfg;
  cfg.n_per_class = 3;
  for (const auto& t : generate(cfg).truth) {
    CHECK(truth_from_json(nlohmann::json::parse(to_json(t).dump())) == t);
  }
}
