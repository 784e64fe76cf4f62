// SPDX-License-Identifier: Apache-2.0
#include <httplib.h>

#include <cstdlib>
#include <json.hpp>
#include <thread>

#include <spdlog/spdlog.h>

#include "ssv/llm.hpp"

namespace ssv {

namespace {

/// "https://host:port/v1" -> ("https://host:port", "/v1")
std::pair<std::string, std::string> splitEndpoint(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw LlmError(LlmError::Kind::Config, "endpoint needs a scheme: " + url);
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, ""};
  std::string path = url.substr(slash);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {url.substr(0, slash), path};
}

bool transient(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

HttpProvider::HttpProvider(HttpOptions opts) : opts_(std::move(opts)) {
  if (opts_.apiKey.empty()) {
    if (const char* k = std::getenv("SSV_API_KEY")) opts_.apiKey = k;
  }
  if (opts_.apiKey.empty())
    throw LlmError(LlmError::Kind::Config, "live and record modes need SSV_API_KEY to be set");
  if (opts_.maxInFlight == 0) opts_.maxInFlight = 1;
}

void HttpProvider::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return inFlight_ < opts_.maxInFlight; });
  ++inFlight_;
  if (opts_.requestsPerMinute == 0) return;
  for (;;) {
    const auto now = std::chrono::steady_clock::now();
    while (!recent_.empty() && now - recent_.front() >= std::chrono::minutes(1)) recent_.pop_front();
    if (recent_.size() < opts_.requestsPerMinute) {
      recent_.push_back(now);
      return;
    }
    cv_.wait_until(lock, recent_.front() + std::chrono::minutes(1));
  }
}

void HttpProvider::release() {
  {
    std::lock_guard lock(mu_);
    --inFlight_;
  }
  cv_.notify_all();
}

std::string HttpProvider::complete(const LlmRequest& req) {
  const auto [base, prefix] = splitEndpoint(opts_.endpoint);
  nlohmann::json body = {
      {"model", req.model},
      {"temperature", req.temperature},
      {"max_tokens", req.maxTokens},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", req.prompt}}})},
  };
  const std::string payload = body.dump();

  acquire();
  struct Release {
    HttpProvider* self;
    ~Release() { self->release(); }
  } guard{this};

  httplib::Client cli(base);
  cli.set_connection_timeout(opts_.timeoutSec, 0);
  cli.set_read_timeout(opts_.timeoutSec, 0);
  cli.set_write_timeout(opts_.timeoutSec, 0);
  cli.set_bearer_token_auth(opts_.apiKey);

  std::string lastError;
  for (int attempt = 0; attempt <= opts_.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(500 << attempt));
    auto res = cli.Post(prefix + "/chat/completions", payload, "application/json");
    if (!res) {
      lastError = httplib::to_string(res.error());
      spdlog::warn("llm request failed ({}), attempt {}", lastError, attempt + 1);
      if (res.error() == httplib::Error::Read || res.error() == httplib::Error::Write ||
          res.error() == httplib::Error::Connection || res.error() == httplib::Error::ConnectionTimeout)
        continue;
      throw LlmError(LlmError::Kind::ProviderError, "transport error: " + lastError);
    }
    if (res->status != 200) {
      lastError = "HTTP " + std::to_string(res->status);
      if (transient(res->status)) {
        spdlog::warn("llm request got {}, attempt {}", lastError, attempt + 1);
        continue;
      }
      throw LlmError(LlmError::Kind::ProviderError, lastError + ": " + res->body.substr(0, 400), res->status);
    }
    auto j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.contains("choices") || j["choices"].empty())
      throw LlmError(LlmError::Kind::ProviderError, "malformed completion response", res->status);
    return j["choices"][0]["message"].value("content", "");
  }
  if (lastError.rfind("HTTP", 0) == 0) throw LlmError(LlmError::Kind::ProviderError, lastError);
  throw LlmError(LlmError::Kind::Timeout, "no response after retries: " + lastError);
}

}  // namespace ssv
