#pragma once

#include <cstdlib>
#include <string>

#include <httplib.h>

#include "parley/retrieval.hpp"

namespace parley {

namespace detail {

inline std::pair<std::string, std::string> split_origin(const std::string& base_url) {
    const auto scheme_end = base_url.find("://");
    const auto path_start = scheme_end == std::string::npos
                                ? base_url.find('/')
                                : base_url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {base_url, ""};
    std::string prefix = base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base_url.substr(0, path_start), prefix};
}

}  // namespace detail

/// Google Custom Search JSON API client. Results are normalized to
/// {title, snippet, url} in provider rank order; HTTP, auth, and quota
/// failures surface as typed retrieval errors with the provider status.
class GoogleSearchProvider : public SearchProvider {
public:
    struct Config {
        std::string api_key;
        std::string engine_id;
        std::string base_url = "https://customsearch.googleapis.com";
        std::chrono::seconds timeout{30};

        static Config from_env() {
            Config cfg;
            if (const char* key = std::getenv("GOOGLE_API_KEY"); key && *key) cfg.api_key = key;
            if (const char* cx = std::getenv("GOOGLE_CSE_ID"); cx && *cx) cfg.engine_id = cx;
            return cfg;
        }
    };

    explicit GoogleSearchProvider(Config config) : config_(std::move(config)) {
        if (config_.api_key.empty() || config_.engine_id.empty())
            throw ConfigError("google search requires GOOGLE_API_KEY and GOOGLE_CSE_ID");
    }

    std::vector<SearchResult> search(const std::string& query, int k) override {
        if (k <= 0) return {};
        auto [origin, prefix] = detail::split_origin(config_.base_url);
        httplib::Client client(origin);
        client.set_connection_timeout(config_.timeout.count(), 0);
        client.set_read_timeout(config_.timeout.count(), 0);

        httplib::Params params{{"key", config_.api_key},
                               {"cx", config_.engine_id},
                               {"q", query},
                               {"num", std::to_string(std::min(k, 10))}};
        auto res = client.Get(prefix + "/customsearch/v1", params, httplib::Headers{});
        if (!res)
            throw RetrievalError("google search connection failure: " +
                                 httplib::to_string(res.error()));
        if (res->status == 429)
            throw RetrievalError("google search quota exhausted (HTTP 429)", 429);
        if (res->status != 200)
            throw RetrievalError("google search failed (HTTP " + std::to_string(res->status) +
                                     "): " + res->body,
                                 res->status);
        json parsed;
        try {
            parsed = json::parse(res->body);
        } catch (const json::exception& ex) {
            throw RetrievalError(std::string("google search returned malformed JSON: ") +
                                 ex.what());
        }
        std::vector<SearchResult> out;
        if (parsed.contains("items")) {
            for (const auto& item : parsed.at("items")) {
                if (static_cast<int>(out.size()) >= k) break;
                out.push_back({item.value("title", ""), item.value("snippet", ""),
                               item.value("link", "")});
            }
        }
        return out;
    }

private:
    Config config_;
};

/// Client for an external passage-retrieval service, for deployments that
/// host a dense retriever behind HTTP. Wire format:
///   POST <base_url>/retrieve  {"query": ..., "k": ...}
///   200 -> {"passages": [{"id": ..., "title": ..., "text": ..., "score": ...}, ...]}
class RemotePassageRetriever : public PassageRetriever {
public:
    explicit RemotePassageRetriever(std::string base_url, std::chrono::seconds timeout =
                                                              std::chrono::seconds{30})
        : base_url_(std::move(base_url)), timeout_(timeout) {}

    std::vector<Evidence> retrieve(const std::string& query, int k) override {
        if (k <= 0) return {};
        auto [origin, prefix] = detail::split_origin(base_url_);
        httplib::Client client(origin);
        client.set_connection_timeout(timeout_.count(), 0);
        client.set_read_timeout(timeout_.count(), 0);

        const json payload{{"query", query}, {"k", k}};
        auto res = client.Post(prefix + "/retrieve", payload.dump(), "application/json");
        if (!res)
            throw RetrievalError("passage service unreachable: " +
                                 httplib::to_string(res.error()));
        if (res->status != 200)
            throw RetrievalError("passage service failed (HTTP " + std::to_string(res->status) +
                                     ")",
                                 res->status);
        json parsed;
        try {
            parsed = json::parse(res->body);
        } catch (const json::exception& ex) {
            throw RetrievalError(std::string("passage service returned malformed JSON: ") +
                                 ex.what());
        }
        std::vector<Evidence> out;
        for (const auto& p : parsed.value("passages", json::array())) {
            if (static_cast<int>(out.size()) >= k) break;
            Evidence e;
            e.source = EvidenceSource::wikipedia;
            e.title = p.value("title", "");
            e.text = p.value("text", "");
            out.push_back(std::move(e));
        }
        return out;
    }

private:
    std::string base_url_;
    std::chrono::seconds timeout_;
};

}  // namespace parley
