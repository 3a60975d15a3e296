#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>

#include "parley/backend.hpp"
#include "parley/types.hpp"

namespace parley {

// Content-addressed JSONL store of {digest, request, response} entries.
class ReplayCache {
public:
    ReplayCache() = default;

    explicit ReplayCache(std::filesystem::path path) : path_(std::move(path)) {
        if (std::filesystem::exists(path_)) load();
    }

    bool contains(const std::string& digest) const {
        std::lock_guard<std::mutex> lock(mu_);
        return entries_.count(digest) > 0;
    }

    std::optional<ChatResponse> lookup(const std::string& digest) const {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = entries_.find(digest);
        if (it == entries_.end()) return std::nullopt;
        return it->second.at("response").get<ChatResponse>();
    }

    void store(const std::string& digest, const ChatRequest& req, const ChatResponse& resp) {
        json entry{{"digest", digest}, {"request", req}, {"response", resp}};
        std::lock_guard<std::mutex> lock(mu_);
        if (entries_.count(digest)) return;
        entries_[digest] = entry;
        if (path_.empty()) return;
        if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
        std::ofstream out(path_, std::ios::app | std::ios::binary);
        if (!out) throw Error("cannot append to replay cache: " + path_.string());
        out << entry.dump() << "\n";
    }

    size_t size() const {
        std::lock_guard<std::mutex> lock(mu_);
        return entries_.size();
    }

    // Recorded entries in file order, for auditing requests of a past run.
    std::vector<json> all_entries() const {
        std::lock_guard<std::mutex> lock(mu_);
        std::vector<json> out;
        out.reserve(order_.size());
        for (const auto& d : order_) out.push_back(entries_.at(d));
        return out;
    }

    const std::filesystem::path& path() const { return path_; }

private:
    void load() {
        std::ifstream in(path_, std::ios::binary);
        if (!in) throw Error("cannot open replay cache: " + path_.string());
        std::string line;
        size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (util::trim(line).empty()) continue;
            json entry;
            try {
                entry = json::parse(line);
            } catch (const json::exception& ex) {
                throw Error("replay cache " + path_.string() + " line " +
                            std::to_string(line_no) + ": " + ex.what());
            }
            const std::string digest = entry.at("digest").get<std::string>();
            if (entries_.emplace(digest, std::move(entry)).second) order_.push_back(digest);
        }
    }

    std::filesystem::path path_;
    mutable std::mutex mu_;
    std::map<std::string, json> entries_;
    std::vector<std::string> order_;
};

enum class CacheMode {
    record,         // miss -> delegate to inner backend, persist the exchange
    replay_strict,  // miss -> CacheMissError; never touches the network
};

/// Record/replay wrapper. In record mode a hit is served from the cache, so
/// resumed runs repeat zero backend calls; in strict replay mode the inner
/// backend may be null and a miss is an error.
class CacheBackend : public ChatBackend {
public:
    CacheBackend(std::shared_ptr<ReplayCache> cache, CacheMode mode,
                 ChatBackend* inner = nullptr)
        : cache_(std::move(cache)), mode_(mode), inner_(inner) {
        if (mode_ == CacheMode::record && inner_ == nullptr)
            throw ConfigError("record mode requires an inner backend");
    }

    ChatResponse complete(const ChatRequest& req) override {
        const std::string digest = record_key(req);
        if (auto hit = cache_->lookup(digest)) return *hit;
        if (mode_ == CacheMode::replay_strict)
            throw CacheMissError("replay cache miss for digest " + digest + " (purpose=" +
                                 to_string(req.tag.purpose) + ", agent=" + req.tag.agent_id +
                                 ", round=" + std::to_string(req.tag.round) + ")");
        ChatResponse resp = inner_->complete(req);
        cache_->store(digest, req, resp);
        return resp;
    }

    const ReplayCache& cache() const { return *cache_; }

private:
    std::shared_ptr<ReplayCache> cache_;
    CacheMode mode_;
    ChatBackend* inner_;
};

}  // namespace parley
