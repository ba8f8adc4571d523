#include <set>

#include "doctest.h"

#include "cuescreen/corpus.hpp"
#include "cuescreen/error.hpp"
#include "cuescreen/io.hpp"
#include "support/temp_dir.hpp"

using namespace cuescreen;
using namespace cuescreen::corpus;

namespace {

Corpus challenge() { return load_manifest(testing::fixtures() / "manifests" / "challenge_shaped.jsonl"); }

Corpus tiny(std::size_t ad, std::size_t non_ad) {
  Corpus c;
  for (std::size_t i = 0; i < ad + non_ad; ++i) {
    ParticipantRecord r;
    r.participant_id = "P" + std::to_string(100 + i);
    r.label = i < ad ? Label::AD : Label::NonAD;
    c.records.push_back(r);
  }
  return c;
}

std::vector<Split> assignment(const Corpus& c) {
  std::vector<Split> out;
  for (const auto& r : c.records) out.push_back(r.split);
  return out;
}

}  // namespace

TEST_CASE("load_manifest") {
  const auto c = challenge();
  CHECK(c.records.size() == 156);
  CHECK(validate(c).all.ad == 78);
  CHECK(validate(c).all.non_ad == 78);
  CHECK(load_manifest(testing::fixtures() / "manifests" / "empty.jsonl").records.empty());
  try {
    load_manifest(testing::fixtures() / "manifests" / "duplicate_id.jsonl");
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DuplicateId);
    CHECK(e.line() == 4u);
    CHECK(e.detail().find("A2") != std::string::npos);
  }
  try {
    load_manifest(testing::fixtures() / "manifests" / "missing_label.jsonl");
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingLabel);
    CHECK(e.line() == 2u);
  }
  CHECK_THROWS_AS(load_manifest(testing::fixtures() / "manifests" / "nope.jsonl"), Error);
}

TEST_CASE("record JSON round-trip keeps optionals") {
  ParticipantRecord r;
  r.participant_id = "X1";
  r.label = Label::AD;
  r.split = Split::Train;
  r.transcript_path = "X1.cha";
  r.age = 71;
  r.gender = Gender::F;
  const auto j = to_json(r);
  CHECK(j["segment_count"].is_null());
  CHECK(record_from_json(nlohmann::json::parse(j.dump()), 1) == r);
}

TEST_CASE("reference split gives 24 + 24 test and 54 + 54 train") {
  const auto s = split(challenge(), reference_policy(7));
  const auto report = validate(s);
  CHECK(report.test.ad == 24);
  CHECK(report.test.non_ad == 24);
  CHECK(report.train.ad == 54);
  CHECK(report.train.non_ad == 54);
  CHECK(report.summary() == "train 108 / test 48; train AD 54, non-AD 54");
  CHECK(report.provenance_note.find("96") != std::string::npos);
  CHECK(assignment(split(challenge(), reference_policy(7))) == assignment(s));
}

TEST_CASE("infeasible policies") {
  CHECK_THROWS_AS(split(tiny(5, 5), {8, 4, true, 1}), Error);
  CHECK_THROWS_AS(split(tiny(2, 8), {4, 6, true, 1}), Error);
  CHECK_NOTHROW(split(tiny(2, 8), {4, 6, false, 1}));
}

TEST_CASE("split partition and stratification over many policies") {
  const auto base = tiny(23, 30);
  for (std::size_t test = 0; test <= 20; test += 3) {
    for (std::size_t train = 0; train + test <= 40; train += 7) {
      const auto s = split(base, {train, test, true, test * 31 + train});
      const auto r = validate(s);
      CHECK(r.train.total() == train);
      CHECK(r.test.total() == test);
      CHECK(r.unassigned == base.records.size() - train - test);
      const double half = static_cast<double>(test) / 2.0;
      CHECK(std::abs(static_cast<double>(r.test.ad) - half) <= 1.0);
      CHECK(std::abs(static_cast<double>(r.test.non_ad) - half) <= 1.0);
    }
  }
}

TEST_CASE("different seeds give different assignments") {
  const auto base = challenge();
  std::set<std::vector<Split>> seen;
  for (std::uint64_t seed = 0; seed < 100; ++seed) seen.insert(assignment(split(base, reference_policy(seed))));
  CHECK(seen.size() == 100);
}

TEST_CASE("split does not depend on manifest order") {
  auto base = challenge();
  const auto a = split(base, reference_policy(3));
  std::reverse(base.records.begin(), base.records.end());
  const auto b = split(base, reference_policy(3));
  for (const auto& r : a.records) CHECK(b.find(r.participant_id)->split == r.split);
}

TEST_CASE("split policy text") {
  const auto p = parse_split_policy("108:48", 9);
  REQUIRE(p.has_value());
  CHECK(p->train_count == 108);
  CHECK(p->test_count == 48);
  CHECK(p->stratify_by_label);
  CHECK(p->seed == 9);
  CHECK_FALSE(parse_split_policy("10:5:flat", 1)->stratify_by_label);
  CHECK_FALSE(parse_split_policy("10", 1).has_value());
  CHECK_FALSE(parse_split_policy("a:b", 1).has_value());
}

TEST_CASE("split TSV round-trip") {
  const auto s = split(challenge(), reference_policy(5));
  const auto tsv = split_tsv(s);
  CHECK(tsv.rfind("participant_id\tsplit\n", 0) == 0);
  const auto restored = apply_split_tsv(challenge(), tsv);
  CHECK(assignment(restored) == assignment(s));
  CHECK_THROWS_AS(apply_split_tsv(challenge(), "participant_id\tsplit\nZZZ\ttest\n"), Error);
}

TEST_CASE("validate findings") {
  testing::TempDir dir;
  io::write_file_atomic(dir / "A.cha", "@Begin\n");
  auto c = tiny(1, 1);
  c.records[0].transcript_path = "A.cha";
  c.records[1].transcript_path = "gone.cha";
  const auto r = validate(c, dir.path());
  CHECK(r.missing_transcripts == std::vector<std::string>{c.records[1].participant_id});
  CHECK(r.findings.size() == 1);

  const auto empty = validate(Corpus{});
  CHECK(empty.all.total() == 0);
  CHECK(empty.train.total() == 0);
  CHECK(empty.test.total() == 0);
  CHECK(empty.findings.empty());
}
