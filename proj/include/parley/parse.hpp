#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "parley/util.hpp"

// Bracket parsing for model replies. Every structured signal in the protocol
// travels as a [token]: answers, judge verdicts, evidence selections, and
// eval verdicts.

namespace parley {

// All complete innermost [...] pairs, in order of appearance. Tokens never
// contain brackets themselves.
inline std::vector<std::string> bracket_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::optional<size_t> open;
    for (size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '[') {
            open = i;
        } else if (text[i] == ']' && open) {
            tokens.emplace_back(text.substr(*open + 1, i - *open - 1));
            open.reset();
        }
    }
    return tokens;
}

// Content of the last bracketed substring, trimmed. Total: any input maps to
// a value or nullopt.
inline std::optional<std::string> extract_answer(std::string_view text) {
    auto tokens = bracket_tokens(text);
    if (tokens.empty()) return std::nullopt;
    return util::trim(tokens.back());
}

// Last [Yes]/[No] token, case-insensitive. nullopt when neither appears.
inline std::optional<bool> parse_yes_no(std::string_view text) {
    std::optional<bool> verdict;
    for (const auto& tok : bracket_tokens(text)) {
        std::string t = util::to_lower(util::trim(tok));
        if (t == "yes") verdict = true;
        else if (t == "no") verdict = false;
    }
    return verdict;
}

// Last [True]/[False] token, case-insensitive. nullopt when neither appears.
inline std::optional<bool> parse_true_false(std::string_view text) {
    std::optional<bool> verdict;
    for (const auto& tok : bracket_tokens(text)) {
        std::string t = util::to_lower(util::trim(tok));
        if (t == "true") verdict = true;
        else if (t == "false") verdict = false;
    }
    return verdict;
}

struct ParsedSelection {
    std::vector<int> indices;
    bool no_found = false;
    // True when the reply had no usable token at all; callers log and fall
    // back to no_found behaviour.
    bool parse_failed = false;
};

inline std::optional<int> parse_index_token(std::string_view tok) {
    std::string t = util::trim(tok);
    if (t.empty() || t.size() > 9) return std::nullopt;
    for (char c : t) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    }
    return std::stoi(t);
}

// Selection replies list pool indices in brackets, or end with [No Found].
// Indices are deduplicated in order of appearance; out-of-range ones are
// dropped; the result is capped at max_selected. A [No Found] anywhere wins.
inline ParsedSelection parse_selection_reply(std::string_view text, size_t pool_size,
                                             size_t max_selected) {
    ParsedSelection out;
    auto tokens = bracket_tokens(text);
    for (const auto& tok : tokens) {
        if (util::iequals(util::trim(tok), "No Found")) {
            out.no_found = true;
            out.indices.clear();
            return out;
        }
    }
    for (const auto& tok : tokens) {
        auto idx = parse_index_token(tok);
        if (!idx) continue;
        if (*idx < 0 || static_cast<size_t>(*idx) >= pool_size) continue;
        if (std::find(out.indices.begin(), out.indices.end(), *idx) != out.indices.end()) continue;
        if (out.indices.size() >= max_selected) continue;
        out.indices.push_back(*idx);
    }
    if (out.indices.empty()) {
        out.no_found = true;
        out.parse_failed = true;
    }
    return out;
}

}  // namespace parley
