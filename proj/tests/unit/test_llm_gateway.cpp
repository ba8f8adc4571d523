#include <atomic>
#include <cstdlib>
#include <mutex>

#include "doctest.h"

#include "cuescreen/error.hpp"
#include "cuescreen/llm_gateway.hpp"
#include "cuescreen/random.hpp"

using namespace cuescreen;
using namespace cuescreen::gateway;

namespace {

chat::CleanTranscript transcript(std::string id, std::string text) {
  chat::CleanTranscript t;
  t.participant_id = std::move(id);
  t.text = std::move(text);
  return t;
}

prompt::PromptBundle cot(const std::string& id, const std::string& text) {
  const auto t = transcript(id, text);
  const auto report = cues::cue_coverage(cues::tokenize(t.text));
  return prompt::build_prompt(prompt::Mode::Cot, t, &report, {});
}

const char* kFive = "the boy on the stool reaches the cookie jar while the sink overflows with water";
const char* kNine = "stool sink dishes washing jar cookies children mother window";

std::string first_n_lemmas(std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += cues::CueLexicon::standard().entries()[i].lemma + " ";
  return out + "and so on";
}

const Sleeper kNoSleep = [](std::chrono::milliseconds) {};

/// Replays a fixed list of responses, then answers from the mock model.
class ScriptedTransport final : public Transport {
 public:
  explicit ScriptedTransport(std::vector<TransportResult> script) : script_(std::move(script)) {}
  TransportResult post(const std::string& body, const std::optional<std::string>& bearer) override {
    std::lock_guard lock(mu_);
    ++calls;
    last_bearer = bearer;
    if (next_ < script_.size()) return script_[next_++];
    const auto [status, text] = handle_chat_request(body, MockRule{});
    return {true, status, text, {}};
  }
  int calls = 0;
  std::optional<std::string> last_bearer;

 private:
  std::mutex mu_;
  std::vector<TransportResult> script_;
  std::size_t next_ = 0;
};

TransportResult http(int status, std::string body = "{}") { return {true, status, std::move(body), {}}; }
TransportResult dropped() { return {false, 0, {}, "connection refused"}; }

EndpointConfig fast_config(int retries = 2) {
  EndpointConfig cfg;
  cfg.max_retries = retries;
  cfg.api_key_env = "";
  return cfg;
}

}  // namespace

TEST_CASE("parse_label") {
  CHECK(parse_label("...reasoning... Diagnosis: non-AD") == Label::NonAD);
  CHECK(parse_label("Diagnosis: AD because the description omits the sink") == Label::AD);
  CHECK(parse_label("diagnosis: Non AD") == Label::NonAD);
  CHECK(parse_label("Diagnosis: **non-AD**") == Label::NonAD);
  CHECK(parse_label("Diagnosis: non-AD\nOn reflection, Diagnosis: AD.") == Label::AD);
  CHECK(parse_label("Diagnosis: nonAD") == Label::NonAD);
  for (const char* bad : {"The patient may have dementia.", "Diagnosis: unclear", "Diagnosis: ADVANCED", ""}) {
    try {
      parse_label(bad);
      FAIL("parsed '" << bad << "'");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Unparseable);
    }
  }
}

TEST_CASE("mock rule on cot bundles") {
  CHECK(parse_label(mock_classify(cot("a", kFive))) == Label::AD);
  CHECK(parse_label(mock_classify(cot("b", first_n_lemmas(6)))) == Label::NonAD);
  CHECK(parse_label(mock_classify(cot("c", "nothing relevant"))) == Label::AD);
  CHECK(mock_classify(cot("a", kFive)) == mock_classify(cot("a", kFive)));
  CHECK(parse_label(mock_classify(cot("d", first_n_lemmas(7)), MockRule{0.75})) == Label::AD);
}

TEST_CASE("mock rule re-tokenizes other modes") {
  const auto zs = prompt::build_prompt(prompt::Mode::ZeroShot, transcript("z", kNine), nullptr, {});
  CHECK(mock_classify(zs).find("Diagnosis: non-AD") != std::string::npos);
  const std::vector<prompt::Exemplar> ex{{transcript("e1", kNine), Label::NonAD}, {transcript("e2", "um"), Label::AD}};
  const auto fs = prompt::build_prompt(prompt::Mode::FewShot, transcript("f", kFive), nullptr, ex);
  CHECK(parse_label(mock_classify(fs)) == Label::AD);
}

TEST_CASE("mock rejects bundles it cannot read") {
  prompt::PromptBundle b;
  b.mode = prompt::Mode::Cot;
  b.messages = {{prompt::Role::System, "hi"}, {prompt::Role::User, "no cue line here"}};
  try {
    mock_classify(b);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedBundle);
  }
  CHECK(handle_chat_request("{not json", MockRule{}).first == 400);
  CHECK(handle_chat_request(R"({"model":"m","messages":[]})", MockRule{}).first == 400);
}

TEST_CASE("wire protocol shapes") {
  const ChatRequest req{"m", {{prompt::Role::User, "hello"}}, 0.0, 16};
  const auto j = to_json(req);
  CHECK(j.dump() == R"({"model":"m","messages":[{"role":"user","content":"hello"}],"temperature":0.0,"max_tokens":16})");
  CHECK(chat_request_from_json(nlohmann::json::parse(j.dump())).messages == req.messages);
  const auto body = to_json(ChatResponse{"Diagnosis: AD", "stop"}, "m").dump();
  const auto back = chat_response_from_json(body);
  REQUIRE(back.has_value());
  CHECK(back->text == "Diagnosis: AD");
  CHECK(back->finish_reason == "stop");
  CHECK_FALSE(chat_response_from_json("{\"choices\":[]}").has_value());
}

TEST_CASE("classify through the in-process mock") {
  MockTransport mock;
  const auto [p, rec] = classify(cot("P5", kFive), fast_config(), mock, kNoSleep);
  CHECK(p.label == Label::AD);
  CHECK(p.score == 1.0);
  CHECK(p.source == PredictionSource::Llm);
  CHECK(rec.attempt_count == 1);
  CHECK(rec.parsed == Label::AD);
  CHECK(rec.fingerprint == cot("P5", kFive).fingerprint);
  const auto again = classify(cot("P5", kFive), fast_config(), mock, kNoSleep);
  CHECK(again.second.raw_response == rec.raw_response);
}

TEST_CASE("retries: always 500 exhausts the budget") {
  ScriptedTransport t(std::vector<TransportResult>(10, http(500)));
  std::vector<std::chrono::milliseconds> sleeps;
  try {
    classify(cot("P1", kFive), fast_config(2), t, [&](std::chrono::milliseconds d) { sleeps.push_back(d); });
    FAIL("no error");
  } catch (const GatewayError& e) {
    CHECK(e.code() == ErrorCode::Unreachable);
    CHECK(e.attempts() == 3);
  }
  CHECK(t.calls == 3);
  REQUIRE(sleeps.size() == 2);
  CHECK(sleeps[0] >= std::chrono::milliseconds(250));
  CHECK(sleeps[0] < std::chrono::milliseconds(750));
  CHECK(sleeps[1] >= std::chrono::milliseconds(500));
  CHECK(sleeps[1] < std::chrono::milliseconds(1500));
}

TEST_CASE("retries recover from transient faults") {
  ScriptedTransport t({dropped(), http(503)});
  const auto [p, rec] = classify(cot("P1", kFive), fast_config(2), t, kNoSleep);
  CHECK(rec.attempt_count == 3);
  CHECK(p.label == Label::AD);
}

TEST_CASE("unparseable verdicts are retried then reported") {
  const auto garbage = to_json(ChatResponse{"I cannot say.", "stop"}, "m").dump();
  ScriptedTransport t(std::vector<TransportResult>(3, http(200, garbage)));
  try {
    classify(cot("P1", kFive), fast_config(2), t, kNoSleep);
    FAIL("no error");
  } catch (const GatewayError& e) {
    CHECK(e.code() == ErrorCode::Unparseable);
    CHECK(e.attempts() == 3);
  }
  ScriptedTransport once({http(200, garbage)});
  CHECK(classify(cot("P1", kFive), fast_config(2), once, kNoSleep).second.attempt_count == 2);
}

TEST_CASE("auth and client errors are not retried") {
  ScriptedTransport t({http(401)});
  try {
    classify(cot("P1", kFive), fast_config(5), t, kNoSleep);
    FAIL("no error");
  } catch (const GatewayError& e) {
    CHECK(e.code() == ErrorCode::AuthFailure);
    CHECK(e.attempts() == 1);
  }
  ScriptedTransport bad({http(404)});
  CHECK_THROWS_AS(classify(cot("P1", kFive), fast_config(5), bad, kNoSleep), GatewayError);
  CHECK(bad.calls == 1);
}

TEST_CASE("retry bound holds under random fault schedules") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const int retries = static_cast<int>(rng.below(4));
    std::vector<TransportResult> script;
    for (int k = 0; k < 6; ++k) {
      switch (rng.below(4)) {
        case 0: script.push_back(dropped()); break;
        case 1: script.push_back(http(500)); break;
        case 2: script.push_back(http(200, "{}")); break;
        default: script.push_back(http(200, to_json(ChatResponse{"Diagnosis: AD", "stop"}, "m").dump())); break;
      }
    }
    ScriptedTransport t(script);
    try {
      const auto [p, rec] = classify(cot("P", kFive), fast_config(retries), t, kNoSleep);
      CHECK(rec.attempt_count <= retries + 1);
    } catch (const GatewayError& e) {
      CHECK(e.attempts() == retries + 1);
    }
    CHECK(t.calls <= retries + 1);
  }
}

TEST_CASE("credential comes from the named environment variable") {
  ::setenv("CUESCREEN_TEST_KEY", "sekret", 1);
  EndpointConfig cfg = fast_config();
  cfg.api_key_env = "CUESCREEN_TEST_KEY";
  ScriptedTransport t({});
  classify(cot("P1", kFive), cfg, t, kNoSleep);
  CHECK(t.last_bearer == std::optional<std::string>("sekret"));
  cfg.api_key_env = "CUESCREEN_TEST_KEY_UNSET";
  classify(cot("P1", kFive), cfg, t, kNoSleep);
  CHECK_FALSE(t.last_bearer.has_value());
}

TEST_CASE("config validation") {
  EndpointConfig cfg;
  cfg.timeout_seconds = 0;
  CHECK_THROWS_AS(validate(cfg), Error);
  cfg = {};
  cfg.max_retries = -1;
  CHECK_THROWS_AS(validate(cfg), Error);
  cfg = {};
  cfg.temperature = -0.5;
  CHECK_THROWS_AS(validate(cfg), Error);
}

TEST_CASE("backoff schedule") {
  EndpointConfig cfg;
  CHECK(backoff_delay(cfg, 1, 0.5) == std::chrono::milliseconds(500));
  CHECK(backoff_delay(cfg, 2, 0.5) == std::chrono::milliseconds(1000));
  CHECK(backoff_delay(cfg, 3, 0.0) == std::chrono::milliseconds(1000));
}

TEST_CASE("batch output order is independent of completion order") {
  std::vector<prompt::PromptBundle> bundles;
  for (int i = 20; i > 0; --i) bundles.push_back(cot("P" + std::to_string(100 + i), i % 2 ? kFive : kNine));
  MockTransport mock;
  const auto a = classify_all(bundles, fast_config(), mock, 1, kNoSleep);
  const auto b = classify_all(bundles, fast_config(), mock, 8, kNoSleep);
  CHECK(a.predictions == b.predictions);
  REQUIRE(a.records.size() == 20);
  for (std::size_t i = 1; i < a.predictions.size(); ++i) {
    CHECK(a.predictions[i - 1].participant_id < a.predictions[i].participant_id);
    CHECK(a.records[i].participant_id == a.predictions[i].participant_id);
  }
}

TEST_CASE("HTTP mock server speaks the wire protocol") {
  MockServer server(MockServerOptions{});
  const int port = server.start();
  REQUIRE(port > 0);
  HttpTransport http_transport(server.base_url(), 5.0);
  const auto bundle = cot("P7", kFive);
  const auto [p, rec] = classify(bundle, fast_config(), http_transport, kNoSleep);
  MockTransport local;
  CHECK(rec.raw_response == classify(bundle, fast_config(), local, kNoSleep).second.raw_response);
  CHECK(p.label == Label::AD);
  CHECK(server.requests_served() == 1);
  const auto bad = http_transport.post("{broken", std::nullopt);
  CHECK(bad.delivered);
  CHECK(bad.status == 400);
  server.stop();
}

TEST_CASE("HTTP faults: always 500 gives Unreachable after three attempts") {
  MockServerOptions opt;
  opt.fail_status = 500;
  opt.fail_first = 1000;
  MockServer server(opt);
  server.start();
  HttpTransport t(server.base_url(), 5.0);
  try {
    classify(cot("P1", kFive), fast_config(2), t, kNoSleep);
    FAIL("no error");
  } catch (const GatewayError& e) {
    CHECK(e.code() == ErrorCode::Unreachable);
    CHECK(e.attempts() == 3);
  }
  CHECK(server.requests_served() == 3);
}

TEST_CASE("HTTP faults: transient 503 then success, 401 is immediate") {
  MockServerOptions opt;
  opt.fail_status = 503;
  opt.fail_first = 2;
  MockServer flaky(opt);
  flaky.start();
  HttpTransport t(flaky.base_url(), 5.0);
  CHECK(classify(cot("P1", kFive), fast_config(2), t, kNoSleep).second.attempt_count == 3);

  opt.fail_status = 401;
  opt.fail_first = 1000;
  MockServer locked(opt);
  locked.start();
  HttpTransport t2(locked.base_url(), 5.0);
  CHECK_THROWS_AS(classify(cot("P1", kFive), fast_config(2), t2, kNoSleep), GatewayError);
  CHECK(locked.requests_served() == 1);
}

TEST_CASE("unreachable endpoint") {
  HttpTransport t("http://127.0.0.1:1/v1", 0.5);
  try {
    classify(cot("P1", kFive), fast_config(1), t, kNoSleep);
    FAIL("no error");
  } catch (const GatewayError& e) {
    CHECK(e.code() == ErrorCode::Unreachable);
    CHECK(e.attempts() == 2);
  }
}
