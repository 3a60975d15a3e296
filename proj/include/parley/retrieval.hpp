#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "parley/backend.hpp"
#include "parley/parse.hpp"
#include "parley/prompts.hpp"
#include "parley/types.hpp"

namespace parley {

class RetrievalError : public Error {
public:
    explicit RetrievalError(const std::string& msg, int status = 0)
        : Error(msg), status_(status) {}
    int status() const { return status_; }

private:
    int status_;
};

// Lowercased alphanumeric runs; bytes >= 0x80 are kept so non-ASCII text
// stays intact as token characters.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if (std::isalnum(c) || c >= 0x80) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

// Query terms deduplicated in first-appearance order. Scoring iterates terms
// in this order on both the index and the oracle path, so accumulated floats
// are bit-identical.
inline std::vector<std::string> unique_query_terms(std::string_view query) {
    std::vector<std::string> terms;
    for (auto& t : tokenize(query))
        if (std::find(terms.begin(), terms.end(), t) == terms.end()) terms.push_back(t);
    return terms;
}

struct CorpusDoc {
    std::string id;
    std::string title;
    std::string text;
};

// Okapi BM25 with the usual k1/b defaults and an epsilon floor on the idf.
struct Bm25Params {
    double k1 = 0.9;
    double b = 0.4;
    double idf_epsilon = 1e-6;
};

inline double bm25_idf(size_t num_docs, size_t doc_freq, const Bm25Params& p) {
    const double idf = std::log((static_cast<double>(num_docs) - static_cast<double>(doc_freq) + 0.5) /
                                (static_cast<double>(doc_freq) + 0.5));
    return std::max(p.idf_epsilon, idf);
}

inline double bm25_tf(double freq, double doc_len, double avg_doc_len, const Bm25Params& p) {
    return ((p.k1 + 1.0) * freq) / (p.k1 * ((1.0 - p.b) + p.b * (doc_len / avg_doc_len)) + freq);
}

// Passage retrieval over a local corpus.
class PassageRetriever {
public:
    virtual ~PassageRetriever() = default;
    virtual std::vector<Evidence> retrieve(const std::string& query, int k) = 0;
};

/// Inverted-index BM25 retrieval over a JSONL corpus snapshot, one object per
/// passage {id, title, text}. Deterministic: ties break on ascending document
/// ordinal (file order).
class LexicalIndex : public PassageRetriever {
public:
    static LexicalIndex build(std::vector<CorpusDoc> docs, Bm25Params params = {}) {
        LexicalIndex index;
        index.params_ = params;
        index.docs_ = std::move(docs);
        size_t total_len = 0;
        for (size_t d = 0; d < index.docs_.size(); ++d) {
            auto tokens = tokenize(index.docs_[d].title + " " + index.docs_[d].text);
            index.doc_len_.push_back(tokens.size());
            total_len += tokens.size();
            std::map<std::string, int> freqs;
            for (auto& t : tokens) ++freqs[t];
            for (auto& [term, freq] : freqs)
                index.postings_[term].push_back({static_cast<uint32_t>(d), freq});
        }
        index.avg_doc_len_ =
            index.docs_.empty() ? 0.0 : static_cast<double>(total_len) / index.docs_.size();
        return index;
    }

    static LexicalIndex load_jsonl(const std::filesystem::path& path, Bm25Params params = {}) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw RetrievalError("cannot open corpus: " + path.string());
        std::vector<CorpusDoc> docs;
        std::string line;
        size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (util::trim(line).empty()) continue;
            json j;
            try {
                j = json::parse(line);
            } catch (const json::exception& ex) {
                throw RetrievalError("corpus " + path.string() + " line " +
                                     std::to_string(line_no) + ": " + ex.what());
            }
            CorpusDoc doc;
            if (!j.contains("id"))
                doc.id = std::to_string(line_no - 1);
            else if (j.at("id").is_string())
                doc.id = j.at("id").get<std::string>();
            else
                doc.id = j.at("id").dump();
            doc.title = j.value("title", "");
            doc.text = j.at("text").get<std::string>();
            docs.push_back(std::move(doc));
        }
        return build(std::move(docs), params);
    }

    std::vector<Evidence> retrieve(const std::string& query, int k) override {
        std::vector<Evidence> out;
        for (auto [doc, score] : score_query(query, k)) {
            Evidence e;
            e.source = EvidenceSource::wikipedia;
            e.title = docs_[doc].title;
            e.text = docs_[doc].text;
            out.push_back(std::move(e));
        }
        return out;
    }

    // Ranked (doc ordinal, score) pairs; only matching documents appear.
    std::vector<std::pair<uint32_t, double>> score_query(const std::string& query, int k) const {
        if (k <= 0 || docs_.empty()) return {};
        std::vector<double> scores(docs_.size(), 0.0);
        std::vector<char> touched(docs_.size(), 0);
        for (const auto& term : unique_query_terms(query)) {
            auto it = postings_.find(term);
            if (it == postings_.end()) continue;
            const double idf = bm25_idf(docs_.size(), it->second.size(), params_);
            for (auto [doc, freq] : it->second) {
                scores[doc] += idf * bm25_tf(freq, static_cast<double>(doc_len_[doc]),
                                             avg_doc_len_, params_);
                touched[doc] = 1;
            }
        }
        std::vector<std::pair<uint32_t, double>> ranked;
        for (uint32_t d = 0; d < docs_.size(); ++d)
            if (touched[d]) ranked.push_back({d, scores[d]});
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        if (ranked.size() > static_cast<size_t>(k)) ranked.resize(static_cast<size_t>(k));
        return ranked;
    }

    const std::vector<CorpusDoc>& corpus() const { return docs_; }
    const Bm25Params& params() const { return params_; }

private:
    struct Posting {
        uint32_t doc;
        int freq;
    };

    Bm25Params params_;
    std::vector<CorpusDoc> docs_;
    std::vector<size_t> doc_len_;
    double avg_doc_len_ = 0.0;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
};

struct SearchResult {
    std::string title;
    std::string snippet;
    std::string url;
};

// Web search returning ranked snippets.
class SearchProvider {
public:
    virtual ~SearchProvider() = default;
    virtual std::vector<SearchResult> search(const std::string& query, int k) = 0;
};

/// Serves canned search results from a JSON file keyed by query string:
/// { "<query>": [{"title": ..., "snippet": ..., "url": ...}, ...], ... }
class FixtureSearchProvider : public SearchProvider {
public:
    explicit FixtureSearchProvider(const std::filesystem::path& path) {
        try {
            fixtures_ = json::parse(util::read_file(path));
        } catch (const json::exception& ex) {
            throw RetrievalError("bad search fixture " + path.string() + ": " + ex.what());
        }
        if (!fixtures_.is_object())
            throw RetrievalError("search fixture must be a JSON object keyed by query");
    }

    std::vector<SearchResult> search(const std::string& query, int k) override {
        std::vector<SearchResult> out;
        auto it = fixtures_.find(query);
        if (it == fixtures_.end()) return out;
        for (const auto& item : *it) {
            if (static_cast<int>(out.size()) >= k) break;
            out.push_back({item.value("title", ""), item.value("snippet", ""),
                           item.value("url", "")});
        }
        return out;
    }

private:
    json fixtures_;
};

// Only the brief description enters the pool; page bodies never do.
inline std::vector<Evidence> retrieve_google(SearchProvider& provider, const std::string& query,
                                             int k) {
    std::vector<Evidence> out;
    if (k <= 0) return out;
    auto results = provider.search(query, k);
    if (results.size() > static_cast<size_t>(k)) results.resize(static_cast<size_t>(k));
    for (auto& r : results) {
        Evidence e;
        e.source = EvidenceSource::google;
        e.text = std::move(r.snippet);
        e.title = std::move(r.title);
        e.url = std::move(r.url);
        out.push_back(std::move(e));
    }
    return out;
}

struct RetrieverSet {
    PassageRetriever* wikipedia = nullptr;
    SearchProvider* google = nullptr;
};

// Builds the frozen per-question pool: google results first (provider rank
// order), then wikipedia passages (descending score), indexed from 0. A
// failing source is skipped with a warning; the debate proceeds with the
// rest, or evidence-free if everything failed.
inline EvidencePool build_pool(const std::string& question_id, const std::string& question,
                               RetrievalMode mode, const RetrieverSet& retrievers, int k_google,
                               int k_wiki) {
    EvidencePool pool;
    pool.question_id = question_id;
    if (mode == RetrievalMode::none) return pool;

    const bool want_google = mode == RetrievalMode::google || mode == RetrievalMode::all;
    const bool want_wiki = mode == RetrievalMode::wiki || mode == RetrievalMode::all;
    int failures = 0;
    int sources = 0;

    if (want_google) {
        ++sources;
        if (retrievers.google == nullptr)
            throw ConfigError("retrieval mode requires a google provider");
        try {
            for (auto& e : retrieve_google(*retrievers.google, question, k_google))
                pool.items.push_back(std::move(e));
        } catch (const RetrievalError& ex) {
            ++failures;
            logging::warn("google retrieval failed for " + question_id + ": " + ex.what());
        }
    }
    if (want_wiki) {
        ++sources;
        if (retrievers.wikipedia == nullptr)
            throw ConfigError("retrieval mode requires a wikipedia retriever");
        try {
            for (auto& e : retrievers.wikipedia->retrieve(question, k_wiki))
                pool.items.push_back(std::move(e));
        } catch (const RetrievalError& ex) {
            ++failures;
            logging::warn("wikipedia retrieval failed for " + question_id + ": " + ex.what());
        }
    }
    if (failures == sources && sources > 0)
        logging::warn("all retrieval sources failed for " + question_id +
                      "; debate proceeds evidence-free");

    for (size_t i = 0; i < pool.items.size(); ++i)
        pool.items[i].pool_index = static_cast<int>(i);
    return pool;
}

// "(i) text" lines, i = pool index. Empty input renders an empty block.
inline std::string format_evidence_block(std::span<const Evidence> items) {
    std::string out;
    for (size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out.push_back('\n');
        out += "(" + std::to_string(items[i].pool_index) + ") " + items[i].text;
    }
    return out;
}

// The evidence section bound into prompts: a header line plus the block, or
// nothing at all when there is no evidence to show.
inline std::string evidence_section(std::span<const Evidence> items) {
    if (items.empty()) return "";
    return "Evidence:\n" + format_evidence_block(items);
}

struct SelectionOutcome {
    SelectionResult result;
    std::optional<Utterance> utterance;  // absent when the call was skipped
};

// One self-selection step: the debater sees the full pool and picks up to
// max_selected items. An empty pool skips the backend call entirely.
inline SelectionOutcome select_evidence(const PromptLibrary& prompts, const EvidencePool& pool,
                                        const std::string& question, const std::string& agent_id,
                                        int round, ChatBackend& backend, double temperature,
                                        int max_selected) {
    SelectionOutcome out;
    out.result.agent_id = agent_id;
    out.result.round = round;
    if (pool.empty() || max_selected <= 0) {
        out.result.no_found = true;
        return out;
    }

    ChatRequest req;
    req.system_prompt = prompts.system_prompt(Role::debater);
    req.user_prompt = prompts.render(TemplateName::self_selection,
                                     {{"evidences", evidence_section(pool.items)},
                                      {"question", question}});
    req.temperature = temperature;
    req.tag = {Role::debater, agent_id, round, Purpose::selection};
    ChatResponse resp = backend.complete(req);

    ParsedSelection parsed =
        parse_selection_reply(resp.text, pool.size(), static_cast<size_t>(max_selected));
    if (parsed.parse_failed)
        logging::warn("selection reply had no usable token (agent=" + agent_id + ", round=" +
                      std::to_string(round) + "); treating as no_found");
    out.result.indices = parsed.indices;
    out.result.no_found = parsed.no_found;

    Utterance u;
    u.agent_id = agent_id;
    u.role = Role::debater;
    u.purpose = Purpose::selection;
    u.round = round;
    u.raw_text = resp.text;
    u.selected_evidence_ids = parsed.indices;
    out.utterance = std::move(u);
    return out;
}

}  // namespace parley
