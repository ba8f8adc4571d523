#pragma once

// Classification through a chat-completions style endpoint: wire format,
// retry policy, verdict parsing, and the deterministic cue-threshold mock
// that stands in for a served model.

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cuescreen/cue_analyzer.hpp"
#include "cuescreen/error.hpp"
#include "cuescreen/prompt_compiler.hpp"
#include "cuescreen/types.hpp"

namespace cuescreen::gateway {

struct EndpointConfig {
  std::string base_url = "http://127.0.0.1:8080/v1";
  std::string model_name = "cuescreen-mock";
  std::string api_key_env = "CUESCREEN_API_KEY";
  double timeout_seconds = 30.0;
  int max_retries = 2;
  double temperature = 0.0;
  int max_output_tokens = 512;
  // Retry backoff: base * factor^(attempt - 1), scaled by a jitter factor
  // drawn uniformly from [0.5, 1.5).
  std::chrono::milliseconds backoff_base{500};
  double backoff_factor = 2.0;
  std::uint64_t jitter_seed = 0;
};

/// Throws Error(InvalidConfig) unless timeout > 0, max_retries >= 0 and
/// temperature >= 0.
void validate(const EndpointConfig& cfg);

// ---- wire protocol -------------------------------------------------------

struct ChatRequest {
  std::string model;
  std::vector<prompt::Message> messages;
  double temperature = 0.0;
  int max_tokens = 512;
};

struct ChatResponse {
  std::string text;
  std::string finish_reason = "stop";
};

/// {"model", "messages": [{"role","content"}], "temperature", "max_tokens"}
nlohmann::ordered_json to_json(const ChatRequest& request);
/// Throws Error(MalformedBundle).
ChatRequest chat_request_from_json(const nlohmann::json& j);

/// {"object": "chat.completion", "model", "choices": [{"index": 0,
///  "message": {"role": "assistant", "content"}, "finish_reason"}]}
nlohmann::ordered_json to_json(const ChatResponse& response, std::string_view model);
/// Returns nullopt when the body does not follow the response schema.
std::optional<ChatResponse> chat_response_from_json(std::string_view body);

// ---- transports ----------------------------------------------------------

struct TransportResult {
  bool delivered = false;  // false: connection / timeout failure
  int status = 0;          // HTTP status when delivered
  std::string body;
  std::string error;
};

/// One request-response exchange. Implementations must be safe to call from
/// several threads at once.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual TransportResult post(const std::string& json_body, const std::optional<std::string>& bearer_token) = 0;
};

/// HTTP POST to <base_url>/chat/completions.
class HttpTransport final : public Transport {
 public:
  HttpTransport(std::string base_url, double timeout_seconds);
  TransportResult post(const std::string& json_body, const std::optional<std::string>& bearer_token) override;

 private:
  std::string origin_;  // scheme://host[:port]
  std::string path_;
  double timeout_seconds_;
};

// ---- mock model ------------------------------------------------------------

struct MockRule {
  double threshold = 0.5;  // AD iff cue proportion < threshold
  const cues::CueLexicon* lexicon = &cues::CueLexicon::standard();
};

/// Deterministic verdict text. Cot bundles are judged from their
/// "Cue coverage: k/N" line; other modes re-tokenize the fenced transcript
/// of the final user message. Throws Error(MalformedBundle).
std::string mock_classify(const prompt::PromptBundle& bundle, const MockRule& rule = {});

/// Server-side handling shared by the in-process mock transport and the
/// HTTP mock server. Returns (status, body).
std::pair<int, std::string> handle_chat_request(std::string_view body, const MockRule& rule);

/// Answers requests in-process through handle_chat_request.
class MockTransport final : public Transport {
 public:
  explicit MockTransport(MockRule rule = {}) : rule_(rule) {}
  TransportResult post(const std::string& json_body, const std::optional<std::string>& bearer_token) override;

 private:
  MockRule rule_;
};

// ---- classification --------------------------------------------------------

/// Label from the last "Diagnosis:" occurrence. "non-AD" / "non AD" (any
/// case) is checked before the bare "AD". Throws Error(Unparseable).
Label parse_label(std::string_view completion);

struct CompletionRecord {
  std::string participant_id;
  std::string fingerprint;
  std::string raw_response;
  std::optional<Label> parsed;
  double latency_ms = 0.0;
  int attempt_count = 0;
};

nlohmann::ordered_json to_json(const CompletionRecord& record);

/// Failure after the retry budget, carrying how many attempts were made.
class GatewayError : public Error {
 public:
  GatewayError(ErrorCode code, std::string detail, int attempts)
      : Error(code, std::move(detail)), attempts_(attempts) {}
  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// Sleeps on the calling thread.
Sleeper real_sleeper();

/// Delay before retry number `attempt` (1-based) for the given jitter draw
/// in [0, 1).
std::chrono::milliseconds backoff_delay(const EndpointConfig& cfg, int attempt, double jitter_draw);

/// Sends the bundle, retrying transport errors, 5xx responses and
/// unparseable verdicts with exponential backoff, at most max_retries + 1
/// attempts. 401/403 fail immediately with AuthFailure; other 4xx with
/// EndpointRejected. The prediction's score is +1 / -1 by label.
std::pair<Prediction, CompletionRecord> classify(const prompt::PromptBundle& bundle, const EndpointConfig& cfg,
                                                 Transport& transport, const Sleeper& sleeper = real_sleeper());

struct BatchResult {
  std::vector<Prediction> predictions;     // sorted by participant_id
  std::vector<CompletionRecord> records;   // sorted by participant_id
};

/// Classifies with up to `max_in_flight` concurrent requests. Output order
/// is independent of completion order. If any bundle fails, the error for
/// the smallest participant_id is rethrown once all requests finish.
BatchResult classify_all(std::span<const prompt::PromptBundle> bundles, const EndpointConfig& cfg,
                         Transport& transport, std::size_t max_in_flight = 4, const Sleeper& sleeper = real_sleeper());

// ---- HTTP mock server --------------------------------------------------------

struct MockServerOptions {
  MockRule rule;
  std::string host = "127.0.0.1";
  int port = 0;               // 0: pick a free port
  int fail_status = 0;        // if non-zero, answer the first `fail_first` requests with it
  std::size_t fail_first = 0;
};

/// Serves POST /v1/chat/completions (and /chat/completions) on a background
/// thread until stopped or destroyed.
class MockServer {
 public:
  explicit MockServer(MockServerOptions options);
  ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  /// Binds and starts listening; returns the bound port.
  int start();
  void stop();
  /// Blocks serving on the calling thread (CLI use).
  void run_blocking();
  int port() const;
  std::size_t requests_served() const;
  std::string base_url() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cuescreen::gateway
