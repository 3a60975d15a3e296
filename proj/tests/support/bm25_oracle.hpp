#pragma once

// Independent ranking oracle for retrieval tests: scores every document
// directly from its token stream (no inverted index, no shared code path
// with LexicalIndex::score_query), full-sorts, truncates.

#include <random>
#include <string>
#include <vector>

#include "parley/retrieval.hpp"

namespace parley::testsupport {

inline std::vector<std::pair<uint32_t, double>> brute_force_rank(
    const std::vector<CorpusDoc>& docs, const std::string& query, int k,
    const Bm25Params& params) {
    if (k <= 0 || docs.empty()) return {};
    std::vector<std::vector<std::string>> doc_tokens;
    size_t total_len = 0;
    for (const auto& d : docs) {
        doc_tokens.push_back(tokenize(d.title + " " + d.text));
        total_len += doc_tokens.back().size();
    }
    const double avg_len = static_cast<double>(total_len) / static_cast<double>(docs.size());

    const auto terms = unique_query_terms(query);
    std::vector<std::pair<uint32_t, double>> ranked;
    for (uint32_t d = 0; d < docs.size(); ++d) {
        double score = 0.0;
        bool matched = false;
        for (const auto& term : terms) {
            size_t doc_freq = 0;
            for (uint32_t other = 0; other < docs.size(); ++other) {
                for (const auto& tok : doc_tokens[other]) {
                    if (tok == term) {
                        ++doc_freq;
                        break;
                    }
                }
            }
            size_t freq = 0;
            for (const auto& tok : doc_tokens[d])
                if (tok == term) ++freq;
            if (freq == 0 || doc_freq == 0) continue;
            matched = true;
            score += bm25_idf(docs.size(), doc_freq, params) *
                     bm25_tf(static_cast<double>(freq),
                             static_cast<double>(doc_tokens[d].size()), avg_len, params);
        }
        if (matched) ranked.push_back({d, score});
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > static_cast<size_t>(k)) ranked.resize(static_cast<size_t>(k));
    return ranked;
}

inline std::vector<CorpusDoc> synthetic_corpus(size_t n, std::mt19937& rng) {
    static const std::vector<std::string> vocab = {
        "river",  "mountain", "castle", "battle",  "treaty", "harbor", "island", "emperor",
        "bridge", "library",  "comet",  "volcano", "desert", "forest", "saint",  "cathedral",
        "siege",  "voyage",   "plague", "festival"};
    std::uniform_int_distribution<size_t> word(0, vocab.size() - 1);
    std::uniform_int_distribution<size_t> len(4, 30);
    std::vector<CorpusDoc> docs;
    for (size_t i = 0; i < n; ++i) {
        CorpusDoc d;
        d.id = std::to_string(i);
        const size_t L = len(rng);
        for (size_t w = 0; w < L; ++w) {
            if (w) d.text += " ";
            d.text += vocab[word(rng)];
        }
        docs.push_back(std::move(d));
    }
    return docs;
}

}  // namespace parley::testsupport
