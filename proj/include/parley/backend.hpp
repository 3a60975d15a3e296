#pragma once

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "parley/types.hpp"
#include "parley/util.hpp"

namespace parley {

class BackendError : public Error {
public:
    using Error::Error;
};

// Authentication/authorization failure; never retried.
class AuthError : public BackendError {
public:
    using BackendError::BackendError;
};

// Transient failures exhausted their retry budget.
class BackendUnavailableError : public BackendError {
public:
    using BackendError::BackendError;
};

// Provider answered but the payload was not a valid chat completion.
class ProtocolError : public BackendError {
public:
    using BackendError::BackendError;
};

class CacheMissError : public BackendError {
public:
    using BackendError::BackendError;
};

// Structured metadata carried by every request; drives scripted matching and
// leaves an audit trail in caches.
struct ChatTag {
    Role role = Role::debater;
    std::string agent_id;
    int round = 0;
    Purpose purpose = Purpose::talk;
};

struct ChatRequest {
    std::string system_prompt;
    std::string user_prompt;
    double temperature = 0.5;
    ChatTag tag;
};

struct TokenUsage {
    long prompt_tokens = 0;
    long completion_tokens = 0;
};

struct ChatResponse {
    std::string text;
    TokenUsage usage;
    std::chrono::milliseconds provider_latency{0};
};

inline void to_json(json& j, const ChatTag& t) {
    j = json{{"role", to_string(t.role)},
             {"agent_id", t.agent_id},
             {"round", t.round},
             {"purpose", to_string(t.purpose)}};
}

inline void from_json(const json& j, ChatTag& t) {
    t.role = role_from_string(j.at("role").get<std::string>());
    t.agent_id = j.at("agent_id").get<std::string>();
    t.round = j.at("round").get<int>();
    t.purpose = purpose_from_string(j.at("purpose").get<std::string>());
}

inline void to_json(json& j, const ChatRequest& r) {
    j = json{{"system_prompt", r.system_prompt},
             {"user_prompt", r.user_prompt},
             {"temperature", r.temperature},
             {"tag", r.tag}};
}

inline void from_json(const json& j, ChatRequest& r) {
    r.system_prompt = j.at("system_prompt").get<std::string>();
    r.user_prompt = j.at("user_prompt").get<std::string>();
    r.temperature = j.at("temperature").get<double>();
    r.tag = j.at("tag").get<ChatTag>();
}

inline void to_json(json& j, const ChatResponse& r) {
    j = json{{"text", r.text},
             {"prompt_tokens", r.usage.prompt_tokens},
             {"completion_tokens", r.usage.completion_tokens},
             {"latency_ms", r.provider_latency.count()}};
}

inline void from_json(const json& j, ChatResponse& r) {
    r.text = j.at("text").get<std::string>();
    r.usage.prompt_tokens = j.value("prompt_tokens", 0L);
    r.usage.completion_tokens = j.value("completion_tokens", 0L);
    r.provider_latency = std::chrono::milliseconds(j.value("latency_ms", 0L));
}

// Content digest used for record/replay keying. Identical requests collide;
// any byte change in prompts or a temperature change does not. Fields are
// length-prefixed so boundaries cannot be confused.
inline std::string record_key(const ChatRequest& req) {
    char temp_buf[32];
    std::snprintf(temp_buf, sizeof(temp_buf), "%.17g", req.temperature);
    std::string payload;
    payload.reserve(req.system_prompt.size() + req.user_prompt.size() + 48);
    payload += std::to_string(req.system_prompt.size());
    payload += ':';
    payload += req.system_prompt;
    payload += '|';
    payload += std::to_string(req.user_prompt.size());
    payload += ':';
    payload += req.user_prompt;
    payload += '|';
    payload += temp_buf;
    const uint64_t lo = util::fnv1a64(payload);
    const uint64_t hi = util::fnv1a64(payload, 0x6c62272e07bb0142ull);
    return util::to_hex(hi) + util::to_hex(lo);
}

// Abstract chat-completion backend. Implementations must tolerate concurrent
// calls; callers see a simple blocking contract.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual ChatResponse complete(const ChatRequest& req) = 0;
};

/// Deterministic backend for tests and dry runs. Responses are looked up by
/// (purpose, agent_id, round), then through registered handlers, then through
/// per-purpose defaults. Unmatched requests are an error so that a scripted
/// run can never silently invent text.
class ScriptedBackend : public ChatBackend {
public:
    using Handler = std::function<std::optional<std::string>(const ChatRequest&)>;

    ScriptedBackend() = default;

    ScriptedBackend(ScriptedBackend&& other) noexcept {
        std::lock_guard<std::mutex> lock(other.mu_);
        exact_ = std::move(other.exact_);
        defaults_ = std::move(other.defaults_);
        handlers_ = std::move(other.handlers_);
        requests_ = std::move(other.requests_);
        calls_ = other.calls_;
    }

    void script(Purpose purpose, const std::string& agent_id, int round, std::string response) {
        std::lock_guard<std::mutex> lock(mu_);
        exact_[key(purpose, agent_id, round)] = std::move(response);
    }

    void script_default(Purpose purpose, std::string response) {
        std::lock_guard<std::mutex> lock(mu_);
        defaults_[purpose] = std::move(response);
    }

    void add_handler(Handler handler) {
        std::lock_guard<std::mutex> lock(mu_);
        handlers_.push_back(std::move(handler));
    }

    ChatResponse complete(const ChatRequest& req) override {
        std::vector<Handler> handlers_snapshot;
        {
            std::lock_guard<std::mutex> lock(mu_);
            ++calls_;
            requests_.push_back(req);
            auto it = exact_.find(key(req.tag.purpose, req.tag.agent_id, req.tag.round));
            if (it != exact_.end()) return make_response(it->second);
            handlers_snapshot = handlers_;
        }
        // Handlers run unlocked so they may call back into the backend.
        for (const auto& handler : handlers_snapshot) {
            if (auto result = handler(req)) return make_response(*result);
        }
        std::lock_guard<std::mutex> lock(mu_);
        auto def = defaults_.find(req.tag.purpose);
        if (def != defaults_.end()) return make_response(def->second);
        throw BackendError("unscripted request: purpose=" + to_string(req.tag.purpose) +
                           " agent=" + req.tag.agent_id +
                           " round=" + std::to_string(req.tag.round));
    }

    int call_count() const {
        std::lock_guard<std::mutex> lock(mu_);
        return calls_;
    }

    std::vector<ChatRequest> recorded_requests() const {
        std::lock_guard<std::mutex> lock(mu_);
        return requests_;
    }

    void reset_counters() {
        std::lock_guard<std::mutex> lock(mu_);
        calls_ = 0;
        requests_.clear();
    }

private:
    static std::string key(Purpose purpose, const std::string& agent_id, int round) {
        return to_string(purpose) + "/" + agent_id + "/" + std::to_string(round);
    }

    static ChatResponse make_response(const std::string& text) {
        return ChatResponse{text, {}, std::chrono::milliseconds{0}};
    }

    mutable std::mutex mu_;
    std::map<std::string, std::string> exact_;
    std::map<Purpose, std::string> defaults_;
    std::vector<Handler> handlers_;
    std::vector<ChatRequest> requests_;
    int calls_ = 0;
};

}  // namespace parley
