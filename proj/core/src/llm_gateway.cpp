#include "cuescreen/llm_gateway.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <regex>
#include <thread>

#include "cuescreen/hash.hpp"
#include "cuescreen/random.hpp"

namespace cuescreen::gateway {

void validate(const EndpointConfig& cfg) {
  if (!(cfg.timeout_seconds > 0.0)) throw Error(ErrorCode::InvalidConfig, "timeout must be > 0");
  if (cfg.max_retries < 0) throw Error(ErrorCode::InvalidConfig, "max_retries must be >= 0");
  if (!(cfg.temperature >= 0.0)) throw Error(ErrorCode::InvalidConfig, "temperature must be >= 0");
  if (cfg.max_output_tokens < 1) throw Error(ErrorCode::InvalidConfig, "max_output_tokens must be >= 1");
}

nlohmann::ordered_json to_json(const ChatRequest& request) {
  nlohmann::ordered_json j;
  j["model"] = request.model;
  nlohmann::ordered_json messages = nlohmann::ordered_json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", prompt::to_string(m.role)}, {"content", m.content}});
  }
  j["messages"] = std::move(messages);
  j["temperature"] = request.temperature;
  j["max_tokens"] = request.max_tokens;
  return j;
}

ChatRequest chat_request_from_json(const nlohmann::json& j) {
  try {
    ChatRequest r;
    r.model = j.value("model", std::string{});
    const auto& messages = j.at("messages");
    if (!messages.is_array() || messages.empty()) {
      throw Error(ErrorCode::MalformedBundle, "messages must be a non-empty array");
    }
    for (const auto& m : messages) {
      const auto role = prompt::parse_role(m.at("role").get<std::string>());
      if (!role) throw Error(ErrorCode::MalformedBundle, "unknown role");
      r.messages.push_back({*role, m.at("content").get<std::string>()});
    }
    r.temperature = j.value("temperature", 0.0);
    r.max_tokens = j.value("max_tokens", 512);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedBundle, e.what());
  }
}

nlohmann::ordered_json to_json(const ChatResponse& response, std::string_view model) {
  nlohmann::ordered_json j;
  j["object"] = "chat.completion";
  j["model"] = model;
  j["choices"] = nlohmann::ordered_json::array(
      {{{"index", 0},
        {"message", {{"role", "assistant"}, {"content", response.text}}},
        {"finish_reason", response.finish_reason}}});
  return j;
}

std::optional<ChatResponse> chat_response_from_json(std::string_view body) {
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("choices") || !j["choices"].is_array() ||
      j["choices"].empty()) {
    return std::nullopt;
  }
  const auto& choice = j["choices"][0];
  if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object()) return std::nullopt;
  const auto& content = choice["message"].value("content", nlohmann::json());
  if (!content.is_string()) return std::nullopt;
  ChatResponse r;
  r.text = content.get<std::string>();
  if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
    r.finish_reason = choice["finish_reason"].get<std::string>();
  }
  return r;
}

// ---- mock ------------------------------------------------------------------

namespace {

const prompt::Message* last_user_message(const prompt::PromptBundle& bundle) {
  for (auto it = bundle.messages.rbegin(); it != bundle.messages.rend(); ++it) {
    if (it->role == prompt::Role::User) return &*it;
  }
  return nullptr;
}

std::optional<std::pair<std::size_t, std::size_t>> find_cue_line(std::string_view text) {
  static const std::regex kCueLine(R"(Cue coverage:\s*(\d+)\s*/\s*(\d+))");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(text.begin(), text.end(), m, kCueLine)) return std::nullopt;
  const std::size_t k = std::stoul(m[1].str());
  const std::size_t n = std::stoul(m[2].str());
  if (n == 0 || k > n) return std::nullopt;
  return std::pair{k, n};
}

std::optional<std::string_view> fenced_transcript(std::string_view text) {
  const auto fence = prompt::kTranscriptFence;
  const auto open = text.find(fence);
  if (open == std::string_view::npos) return std::nullopt;
  const auto close = text.find(fence, open + fence.size());
  if (close == std::string_view::npos) return std::nullopt;
  return text.substr(open + fence.size(), close - open - fence.size());
}

std::string verdict_text(std::size_t k, std::size_t n, const MockRule& rule) {
  const bool ad = static_cast<double>(k) / static_cast<double>(n) < rule.threshold;
  std::string text = "The description mentions " + std::to_string(k) + " of " + std::to_string(n) +
                     " scene cues; the screening threshold is " + std::to_string(rule.threshold) + ".\n";
  text += ad ? prompt::kVerdictAD : prompt::kVerdictNonAD;
  return text;
}

}  // namespace

std::string mock_classify(const prompt::PromptBundle& bundle, const MockRule& rule) {
  const prompt::Message* user = last_user_message(bundle);
  if (user == nullptr) throw Error(ErrorCode::MalformedBundle, "bundle has no user message");
  if (bundle.mode == prompt::Mode::Cot) {
    const auto cue = find_cue_line(user->content);
    if (!cue) throw Error(ErrorCode::MalformedBundle, "cot bundle without a 'Cue coverage: k/N' line");
    return verdict_text(cue->first, cue->second, rule);
  }
  const auto transcript = fenced_transcript(user->content);
  if (!transcript) throw Error(ErrorCode::MalformedBundle, "no fenced transcript in the final user message");
  const auto report = cues::cue_coverage(cues::tokenize(*transcript), *rule.lexicon);
  return verdict_text(report.matched_count(), report.lexicon_size(), rule);
}

std::pair<int, std::string> handle_chat_request(std::string_view body, const MockRule& rule) {
  auto error_body = [](std::string_view message) {
    return nlohmann::ordered_json{{"error", {{"message", message}, {"type", "invalid_request_error"}}}}.dump();
  };
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return {400, error_body("body is not a JSON object")};
  try {
    const ChatRequest request = chat_request_from_json(j);
    prompt::PromptBundle bundle;
    bundle.messages = request.messages;
    const bool has_assistant = std::any_of(request.messages.begin(), request.messages.end(),
                                           [](const prompt::Message& m) { return m.role == prompt::Role::Assistant; });
    const prompt::Message* user = last_user_message(bundle);
    if (user != nullptr && find_cue_line(user->content)) {
      bundle.mode = prompt::Mode::Cot;
    } else {
      bundle.mode = has_assistant ? prompt::Mode::FewShot : prompt::Mode::ZeroShot;
    }
    const std::string text = mock_classify(bundle, rule);
    return {200, to_json(ChatResponse{text, "stop"}, request.model).dump()};
  } catch (const Error& e) {
    return {400, error_body(e.what())};
  }
}

TransportResult MockTransport::post(const std::string& json_body, const std::optional<std::string>&) {
  auto [status, body] = handle_chat_request(json_body, rule_);
  return {true, status, std::move(body), {}};
}

// ---- classification ----------------------------------------------------------

Label parse_label(std::string_view completion) {
  std::string lower(completion);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  const auto at = lower.rfind("diagnosis:");
  if (at == std::string::npos) throw Error(ErrorCode::Unparseable, "no 'Diagnosis:' verdict line");
  std::size_t i = at + std::string_view("diagnosis:").size();
  while (i < lower.size() && (lower[i] == ' ' || lower[i] == '\t' || lower[i] == '*' || lower[i] == '"')) ++i;
  const std::string_view rest = std::string_view(lower).substr(i);
  for (const std::string_view neg : {"non-ad", "non ad", "non_ad", "nonad"}) {
    if (rest.substr(0, neg.size()) == neg) return Label::NonAD;
  }
  if (rest.substr(0, 2) == "ad" && (rest.size() == 2 || !std::isalnum(static_cast<unsigned char>(rest[2])))) {
    return Label::AD;
  }
  throw Error(ErrorCode::Unparseable, "verdict line names neither AD nor non-AD");
}

nlohmann::ordered_json to_json(const CompletionRecord& r) {
  nlohmann::ordered_json j;
  j["participant_id"] = r.participant_id;
  j["fingerprint"] = r.fingerprint;
  j["raw_response"] = r.raw_response;
  j["parsed"] = r.parsed ? nlohmann::ordered_json(to_string(*r.parsed)) : nlohmann::ordered_json(nullptr);
  j["latency_ms"] = r.latency_ms;
  j["attempt_count"] = r.attempt_count;
  return j;
}

Sleeper real_sleeper() {
  return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::chrono::milliseconds backoff_delay(const EndpointConfig& cfg, int attempt, double jitter_draw) {
  const double base = static_cast<double>(cfg.backoff_base.count()) * std::pow(cfg.backoff_factor, attempt - 1);
  return std::chrono::milliseconds(static_cast<long long>(std::llround(base * (0.5 + jitter_draw))));
}

std::pair<Prediction, CompletionRecord> classify(const prompt::PromptBundle& bundle, const EndpointConfig& cfg,
                                                 Transport& transport, const Sleeper& sleeper) {
  validate(cfg);
  ChatRequest request{cfg.model_name, bundle.messages, cfg.temperature, cfg.max_output_tokens};
  const std::string body = to_json(request).dump();

  std::optional<std::string> bearer;
  if (!cfg.api_key_env.empty()) {
    if (const char* key = std::getenv(cfg.api_key_env.c_str()); key != nullptr && *key != '\0') bearer = key;
  }

  const std::string fp = bundle.fingerprint.empty() ? prompt::fingerprint(bundle) : bundle.fingerprint;
  Rng jitter(cfg.jitter_seed ^ std::stoull(sha256_hex(fp).substr(0, 16), nullptr, 16));

  CompletionRecord record;
  record.participant_id = bundle.participant_id;
  record.fingerprint = fp;
  const int max_attempts = cfg.max_retries + 1;
  ErrorCode last_failure = ErrorCode::Unreachable;
  std::string last_detail;
  const auto started = std::chrono::steady_clock::now();

  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    if (attempt > 1) sleeper(backoff_delay(cfg, attempt - 1, jitter.uniform()));
    record.attempt_count = attempt;
    const TransportResult result = transport.post(body, bearer);
    if (!result.delivered) {
      last_failure = ErrorCode::Unreachable;
      last_detail = result.error;
      continue;
    }
    if (result.status == 401 || result.status == 403) {
      throw GatewayError(ErrorCode::AuthFailure, "endpoint answered " + std::to_string(result.status), attempt);
    }
    if (result.status >= 500) {
      last_failure = ErrorCode::Unreachable;
      last_detail = "endpoint answered " + std::to_string(result.status);
      continue;
    }
    if (result.status != 200) {
      throw GatewayError(ErrorCode::EndpointRejected,
                         "endpoint answered " + std::to_string(result.status) + ": " + result.body, attempt);
    }
    const auto response = chat_response_from_json(result.body);
    if (!response) {
      last_failure = ErrorCode::Unparseable;
      last_detail = "response body does not follow the chat completion schema";
      continue;
    }
    record.raw_response = response->text;
    try {
      record.parsed = parse_label(response->text);
    } catch (const Error& e) {
      last_failure = ErrorCode::Unparseable;
      last_detail = e.detail();
      continue;
    }
    record.latency_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    Prediction p{bundle.participant_id, *record.parsed, *record.parsed == Label::AD ? 1.0 : -1.0,
                 PredictionSource::Llm};
    return {std::move(p), std::move(record)};
  }
  throw GatewayError(last_failure,
                     bundle.participant_id + ": " + last_detail + " after " + std::to_string(max_attempts) + " attempts",
                     max_attempts);
}

BatchResult classify_all(std::span<const prompt::PromptBundle> bundles, const EndpointConfig& cfg,
                         Transport& transport, std::size_t max_in_flight, const Sleeper& sleeper) {
  validate(cfg);
  const std::size_t n = bundles.size();
  std::vector<std::optional<std::pair<Prediction, CompletionRecord>>> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = classify(bundles[i], cfg, transport, sleeper);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(max_in_flight, n));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return bundles[a].participant_id < bundles[b].participant_id;
  });
  for (const std::size_t i : order) {
    if (errors[i]) std::rethrow_exception(errors[i]);
  }
  BatchResult out;
  for (const std::size_t i : order) {
    out.predictions.push_back(std::move(results[i]->first));
    out.records.push_back(std::move(results[i]->second));
  }
  return out;
}

}  // namespace cuescreen::gateway
