#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <string>
#include <thread>

#include <httplib.h>

#include "parley/backend.hpp"
#include "parley/types.hpp"

namespace parley {

struct HttpBackendConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key;
    std::string model = "gpt-3.5-turbo";
    int max_retries = 5;
    std::chrono::milliseconds initial_backoff{500};
    std::chrono::milliseconds max_backoff{8000};
    std::chrono::seconds timeout{60};
    int max_tokens = 0;  // 0 = provider default
    int max_concurrent = 4;
    double requests_per_minute = 0.0;  // 0 = unlimited

    static HttpBackendConfig from_env() {
        HttpBackendConfig cfg;
        if (const char* base = std::getenv("OPENAI_BASE_URL"); base && *base) cfg.base_url = base;
        if (const char* key = std::getenv("OPENAI_API_KEY"); key && *key) cfg.api_key = key;
        return cfg;
    }
};

// Concurrent-request ceiling plus a token bucket over requests per minute.
class RateLimiter {
public:
    RateLimiter(int max_concurrent, double requests_per_minute)
        : max_concurrent_(max_concurrent > 0 ? max_concurrent : 1),
          rate_per_sec_(requests_per_minute / 60.0),
          tokens_(requests_per_minute > 0 ? 1.0 : 0.0),
          last_refill_(std::chrono::steady_clock::now()) {}

    void acquire() {
        std::unique_lock<std::mutex> lock(mu_);
        cv_.wait(lock, [&] { return in_flight_ < max_concurrent_; });
        ++in_flight_;
        if (rate_per_sec_ <= 0.0) return;
        for (;;) {
            refill();
            if (tokens_ >= 1.0) {
                tokens_ -= 1.0;
                return;
            }
            const auto wait = std::chrono::milliseconds(
                static_cast<long>(1000.0 * (1.0 - tokens_) / rate_per_sec_) + 1);
            cv_.wait_for(lock, wait);
        }
    }

    void release() {
        std::lock_guard<std::mutex> lock(mu_);
        --in_flight_;
        cv_.notify_all();
    }

    struct Guard {
        explicit Guard(RateLimiter& limiter) : limiter_(limiter) { limiter_.acquire(); }
        ~Guard() { limiter_.release(); }
        Guard(const Guard&) = delete;
        Guard& operator=(const Guard&) = delete;
        RateLimiter& limiter_;
    };

private:
    void refill() {
        const auto now = std::chrono::steady_clock::now();
        const double elapsed = std::chrono::duration<double>(now - last_refill_).count();
        last_refill_ = now;
        tokens_ = std::min(tokens_ + elapsed * rate_per_sec_, std::max(1.0, rate_per_sec_));
    }

    std::mutex mu_;
    std::condition_variable cv_;
    int max_concurrent_;
    int in_flight_ = 0;
    double rate_per_sec_;
    double tokens_;
    std::chrono::steady_clock::time_point last_refill_;
};

/// Live OpenAI-compatible chat-completions client. The system message carries
/// the role prompt, the user message the rendered task prompt; prompt text is
/// passed through byte-for-byte. Transient failures (connect/timeout, 408,
/// 429, 5xx) retry with capped exponential backoff; other client errors and
/// auth failures never retry.
class HttpBackend : public ChatBackend {
public:
    explicit HttpBackend(HttpBackendConfig config)
        : config_(std::move(config)),
          limiter_(config_.max_concurrent, config_.requests_per_minute) {
        const auto scheme_end = config_.base_url.find("://");
        const auto path_start = scheme_end == std::string::npos
                                    ? config_.base_url.find('/')
                                    : config_.base_url.find('/', scheme_end + 3);
        if (path_start == std::string::npos) {
            origin_ = config_.base_url;
        } else {
            origin_ = config_.base_url.substr(0, path_start);
            path_prefix_ = config_.base_url.substr(path_start);
            while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
        }
    }

    ChatResponse complete(const ChatRequest& req) override {
        RateLimiter::Guard guard(limiter_);

        json payload{{"model", config_.model},
                     {"messages",
                      json::array({json{{"role", "system"}, {"content", req.system_prompt}},
                                   json{{"role", "user"}, {"content", req.user_prompt}}})},
                     {"temperature", req.temperature}};
        if (config_.max_tokens > 0) payload["max_tokens"] = config_.max_tokens;
        const std::string body = payload.dump();

        std::string last_error;
        for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
            if (attempt > 0) std::this_thread::sleep_for(backoff_delay(attempt));

            httplib::Client client(origin_);
            client.set_connection_timeout(config_.timeout.count(), 0);
            client.set_read_timeout(config_.timeout.count(), 0);
            client.set_write_timeout(config_.timeout.count(), 0);
            httplib::Headers headers;
            if (!config_.api_key.empty())
                headers.emplace("Authorization", "Bearer " + config_.api_key);

            const auto started = std::chrono::steady_clock::now();
            auto res = client.Post(path_prefix_ + "/chat/completions", headers, body,
                                   "application/json");
            const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - started);

            if (!res) {
                last_error = "connection failure: " + httplib::to_string(res.error());
                logging::warn(last_error + " (attempt " + std::to_string(attempt + 1) + ")");
                continue;
            }
            if (res->status == 401 || res->status == 403)
                throw AuthError("authentication failed (HTTP " + std::to_string(res->status) +
                                "): " + res->body);
            if (res->status == 429 || res->status == 408 || res->status >= 500) {
                last_error = "HTTP " + std::to_string(res->status);
                logging::warn("retryable provider error " + last_error + " (attempt " +
                              std::to_string(attempt + 1) + ")");
                continue;
            }
            if (res->status != 200)
                throw ProtocolError("provider rejected request (HTTP " +
                                    std::to_string(res->status) + "): " + res->body);
            return parse_response(res->body, latency);
        }
        throw BackendUnavailableError("backend unavailable after " +
                                      std::to_string(config_.max_retries + 1) +
                                      " attempts; last error: " + last_error);
    }

    const HttpBackendConfig& config() const { return config_; }

private:
    std::chrono::milliseconds backoff_delay(int attempt) const {
        auto delay = config_.initial_backoff * (1LL << std::min(attempt - 1, 16));
        return std::min<std::chrono::milliseconds>(delay, config_.max_backoff);
    }

    static ChatResponse parse_response(const std::string& body,
                                       std::chrono::milliseconds latency) {
        json parsed;
        try {
            parsed = json::parse(body);
        } catch (const json::exception& ex) {
            throw ProtocolError(std::string("malformed provider JSON: ") + ex.what());
        }
        if (!parsed.contains("choices") || !parsed.at("choices").is_array() ||
            parsed.at("choices").empty())
            throw ProtocolError("provider response has no choices: " + body);
        const json& message = parsed.at("choices").at(0).at("message");
        ChatResponse resp;
        resp.text = message.value("content", "");
        if (resp.text.empty()) logging::warn("provider returned an empty completion");
        if (parsed.contains("usage")) {
            resp.usage.prompt_tokens = parsed.at("usage").value("prompt_tokens", 0L);
            resp.usage.completion_tokens = parsed.at("usage").value("completion_tokens", 0L);
        }
        resp.provider_latency = latency;
        return resp;
    }

    HttpBackendConfig config_;
    std::string origin_;
    std::string path_prefix_;
    RateLimiter limiter_;
};

}  // namespace parley
