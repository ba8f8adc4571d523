#include <atomic>
#include <mutex>
#include <thread>

#include "httplib.h"

#include "cuescreen/llm_gateway.hpp"

namespace cuescreen::gateway {

namespace {

constexpr std::string_view kCompletionsPath = "/chat/completions";

// Splits "http://host:port/prefix" into origin and request path.
std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme = url.find("://");
  const std::size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
  const auto slash = url.find('/', host_start);
  std::string origin = slash == std::string::npos ? url : url.substr(0, slash);
  std::string path = slash == std::string::npos ? std::string{} : url.substr(slash);
  while (!path.empty() && path.back() == '/') path.pop_back();
  if (path.size() < kCompletionsPath.size() ||
      path.compare(path.size() - kCompletionsPath.size(), kCompletionsPath.size(), kCompletionsPath) != 0) {
    path += kCompletionsPath;
  }
  return {std::move(origin), std::move(path)};
}

}  // namespace

HttpTransport::HttpTransport(std::string base_url, double timeout_seconds) : timeout_seconds_(timeout_seconds) {
  std::tie(origin_, path_) = split_url(base_url);
}

TransportResult HttpTransport::post(const std::string& json_body, const std::optional<std::string>& bearer_token) {
  httplib::Client client(origin_);
  const auto seconds = static_cast<time_t>(timeout_seconds_);
  const auto micros = static_cast<time_t>((timeout_seconds_ - static_cast<double>(seconds)) * 1e6);
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);
  httplib::Headers headers;
  if (bearer_token) headers.emplace("Authorization", "Bearer " + *bearer_token);
  auto res = client.Post(path_, headers, json_body, "application/json");
  TransportResult out;
  if (!res) {
    out.error = httplib::to_string(res.error());
    return out;
  }
  out.delivered = true;
  out.status = res->status;
  out.body = res->body;
  return out;
}

struct MockServer::Impl {
  MockServerOptions options;
  httplib::Server server;
  std::thread thread;
  int bound_port = 0;
  std::atomic<std::size_t> served{0};
  std::atomic<std::size_t> failures_left{0};

  void install() {
    failures_left = options.fail_status != 0 ? options.fail_first : 0;
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      ++served;
      if (options.fail_status != 0) {
        std::size_t left = failures_left.load();
        while (left > 0 && !failures_left.compare_exchange_weak(left, left - 1)) {
        }
        if (left > 0) {
          res.status = options.fail_status;
          res.set_content(R"({"error":{"message":"injected fault"}})", "application/json");
          return;
        }
      }
      auto [status, body] = handle_chat_request(req.body, options.rule);
      res.status = status;
      res.set_content(body, "application/json");
    };
    server.Post("/v1/chat/completions", handler);
    server.Post("/chat/completions", handler);
    server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"status":"ok"})", "application/json");
    });
  }

  void bind() {
    if (options.port == 0) {
      bound_port = server.bind_to_any_port(options.host);
    } else if (server.bind_to_port(options.host, options.port)) {
      bound_port = options.port;
    } else {
      bound_port = -1;
    }
    if (bound_port <= 0) {
      throw Error(ErrorCode::Unreachable, "cannot bind mock server to " + options.host + ":" + std::to_string(options.port));
    }
  }
};

MockServer::MockServer(MockServerOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  impl_->install();
}

MockServer::~MockServer() { stop(); }

int MockServer::start() {
  impl_->bind();
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return impl_->bound_port;
}

void MockServer::run_blocking() {
  impl_->bind();
  impl_->server.listen_after_bind();
}

void MockServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
  if (impl_ && impl_->thread.joinable()) impl_->thread.join();
}

int MockServer::port() const { return impl_->bound_port; }

std::size_t MockServer::requests_served() const { return impl_->served.load(); }

std::string MockServer::base_url() const {
  return "http://" + impl_->options.host + ":" + std::to_string(impl_->bound_port) + "/v1";
}

}  // namespace cuescreen::gateway
