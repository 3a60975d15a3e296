#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "parley/util.hpp"

namespace parley {

using json = nlohmann::json;

inline constexpr int kTranscriptSchemaVersion = 1;

enum class Role { debater, judge, summarizer, evaluator };
enum class Purpose { selection, talk, judge, summary, eval };
enum class RetrievalMode { none, wiki, google, all };
enum class Verdict { consensus, no_consensus };
enum class EvidenceSource { wikipedia, google };

inline std::string to_string(Role r) {
    switch (r) {
        case Role::debater: return "debater";
        case Role::judge: return "judge";
        case Role::summarizer: return "summarizer";
        case Role::evaluator: return "evaluator";
    }
    return "debater";
}

inline Role role_from_string(const std::string& s) {
    if (s == "debater") return Role::debater;
    if (s == "judge") return Role::judge;
    if (s == "summarizer") return Role::summarizer;
    if (s == "evaluator") return Role::evaluator;
    throw ConfigError("unknown role: " + s);
}

inline std::string to_string(Purpose p) {
    switch (p) {
        case Purpose::selection: return "selection";
        case Purpose::talk: return "talk";
        case Purpose::judge: return "judge";
        case Purpose::summary: return "summary";
        case Purpose::eval: return "eval";
    }
    return "talk";
}

inline Purpose purpose_from_string(const std::string& s) {
    if (s == "selection") return Purpose::selection;
    if (s == "talk") return Purpose::talk;
    if (s == "judge") return Purpose::judge;
    if (s == "summary") return Purpose::summary;
    if (s == "eval") return Purpose::eval;
    throw ConfigError("unknown purpose: " + s);
}

inline std::string to_string(RetrievalMode m) {
    switch (m) {
        case RetrievalMode::none: return "none";
        case RetrievalMode::wiki: return "wiki";
        case RetrievalMode::google: return "google";
        case RetrievalMode::all: return "all";
    }
    return "none";
}

inline RetrievalMode retrieval_mode_from_string(const std::string& s) {
    if (s == "none") return RetrievalMode::none;
    if (s == "wiki") return RetrievalMode::wiki;
    if (s == "google") return RetrievalMode::google;
    if (s == "all") return RetrievalMode::all;
    throw ConfigError("unknown retrieval mode: " + s);
}

inline std::string to_string(Verdict v) {
    return v == Verdict::consensus ? "consensus" : "no_consensus";
}

inline Verdict verdict_from_string(const std::string& s) {
    if (s == "consensus") return Verdict::consensus;
    if (s == "no_consensus") return Verdict::no_consensus;
    throw ConfigError("unknown verdict: " + s);
}

inline std::string to_string(EvidenceSource s) {
    return s == EvidenceSource::wikipedia ? "wikipedia" : "google";
}

inline EvidenceSource evidence_source_from_string(const std::string& s) {
    if (s == "wikipedia") return EvidenceSource::wikipedia;
    if (s == "google") return EvidenceSource::google;
    throw ConfigError("unknown evidence source: " + s);
}

// Protocol hyperparameters for one debate.
struct DebateConfig {
    int n_agents = 2;
    int max_rounds = 3;  // total rounds; round 1 is simultaneous-talk
    double temperature = 0.5;
    int k_google = 5;
    int k_wiki = 10;
    int max_selected = 3;
    RetrievalMode retrieval_mode = RetrievalMode::all;
    bool self_selection_enabled = true;
    uint64_t seed = 0;

    void validate() const {
        if (n_agents < 1) throw ConfigError("n_agents must be >= 1");
        if (max_rounds < 1) throw ConfigError("max_rounds must be >= 1");
        if (max_selected < 0) throw ConfigError("max_selected must be >= 0");
        if (temperature < 0.0 || temperature > 1.0)
            throw ConfigError("temperature must be in [0,1]");
        if (k_google < 0 || k_wiki < 0) throw ConfigError("retrieval limits must be >= 0");
    }

    // Expected backend calls for a debate that executed `rounds` rounds with a
    // non-empty evidence pool: per round each debater selects (when enabled)
    // and talks, the judge checks once, and one summary call closes the debate.
    int expected_backend_calls(int rounds) const {
        const int per_round = self_selection_enabled ? 2 * n_agents + 1 : n_agents + 1;
        return rounds * per_round + 1;
    }
};

inline void to_json(json& j, const DebateConfig& c) {
    j = json{{"n_agents", c.n_agents},
             {"max_rounds", c.max_rounds},
             {"temperature", c.temperature},
             {"k_google", c.k_google},
             {"k_wiki", c.k_wiki},
             {"max_selected", c.max_selected},
             {"retrieval_mode", to_string(c.retrieval_mode)},
             {"self_selection", c.self_selection_enabled},
             {"seed", c.seed}};
}

inline void from_json(const json& j, DebateConfig& c) {
    c.n_agents = j.value("n_agents", 2);
    c.max_rounds = j.value("max_rounds", 3);
    c.temperature = j.value("temperature", 0.5);
    c.k_google = j.value("k_google", 5);
    c.k_wiki = j.value("k_wiki", 10);
    c.max_selected = j.value("max_selected", 3);
    c.retrieval_mode = retrieval_mode_from_string(j.value("retrieval_mode", "all"));
    c.self_selection_enabled = j.value("self_selection", true);
    c.seed = j.value("seed", uint64_t{0});
}

// One indexed passage or snippet in the pool. Google-sourced items carry only
// the result's brief description as text, never the page body.
struct Evidence {
    int pool_index = 0;
    EvidenceSource source = EvidenceSource::wikipedia;
    std::string text;
    std::string title;
    std::string url;
};

inline void to_json(json& j, const Evidence& e) {
    j = json{{"index", e.pool_index},
             {"source", to_string(e.source)},
             {"text", e.text},
             {"title", e.title},
             {"url", e.url}};
}

inline void from_json(const json& j, Evidence& e) {
    e.pool_index = j.at("index").get<int>();
    e.source = evidence_source_from_string(j.at("source").get<std::string>());
    e.text = j.at("text").get<std::string>();
    e.title = j.value("title", "");
    e.url = j.value("url", "");
}

// Frozen for the duration of a debate; every debater sees the same pool.
struct EvidencePool {
    std::string question_id;
    std::vector<Evidence> items;

    bool empty() const { return items.empty(); }
    size_t size() const { return items.size(); }
};

inline void to_json(json& j, const EvidencePool& p) {
    j = json{{"question_id", p.question_id}, {"items", p.items}};
}

inline void from_json(const json& j, EvidencePool& p) {
    p.question_id = j.value("question_id", "");
    p.items = j.value("items", std::vector<Evidence>{});
}

struct SelectionResult {
    std::string agent_id;
    int round = 0;
    std::vector<int> indices;
    bool no_found = false;
};

struct Utterance {
    std::string agent_id;
    Role role = Role::debater;
    Purpose purpose = Purpose::talk;
    int round = 0;
    std::string raw_text;
    std::optional<std::string> extracted_answer;
    std::vector<int> selected_evidence_ids;
};

inline void to_json(json& j, const Utterance& u) {
    j = json{{"agent_id", u.agent_id},
             {"role", to_string(u.role)},
             {"purpose", to_string(u.purpose)},
             {"round", u.round},
             {"raw_text", u.raw_text},
             {"extracted_answer", u.extracted_answer ? json(*u.extracted_answer) : json(nullptr)},
             {"selected_evidence_ids", u.selected_evidence_ids}};
}

inline void from_json(const json& j, Utterance& u) {
    u.agent_id = j.at("agent_id").get<std::string>();
    u.role = role_from_string(j.at("role").get<std::string>());
    u.purpose = purpose_from_string(j.at("purpose").get<std::string>());
    u.round = j.at("round").get<int>();
    u.raw_text = j.at("raw_text").get<std::string>();
    if (j.contains("extracted_answer") && !j.at("extracted_answer").is_null())
        u.extracted_answer = j.at("extracted_answer").get<std::string>();
    else
        u.extracted_answer.reset();
    u.selected_evidence_ids = j.value("selected_evidence_ids", std::vector<int>{});
}

struct RoundRecord {
    int round = 0;
    std::vector<Utterance> utterances;
    std::optional<Verdict> judge_verdict;

    // Talk utterances only, in speaking order.
    std::vector<const Utterance*> debater_talks() const {
        std::vector<const Utterance*> out;
        for (const auto& u : utterances)
            if (u.role == Role::debater && u.purpose == Purpose::talk) out.push_back(&u);
        return out;
    }
};

inline void to_json(json& j, const RoundRecord& r) {
    j = json{{"round", r.round},
             {"utterances", r.utterances},
             {"judge_verdict", r.judge_verdict ? json(to_string(*r.judge_verdict)) : json(nullptr)}};
}

inline void from_json(const json& j, RoundRecord& r) {
    r.round = j.at("round").get<int>();
    r.utterances = j.at("utterances").get<std::vector<Utterance>>();
    if (j.contains("judge_verdict") && !j.at("judge_verdict").is_null())
        r.judge_verdict = verdict_from_string(j.at("judge_verdict").get<std::string>());
    else
        r.judge_verdict.reset();
}

// Full replayable record of one debate.
struct DebateTranscript {
    std::string question_id;
    std::string question;
    DebateConfig config;
    EvidencePool pool;
    std::vector<RoundRecord> rounds;
    std::optional<Utterance> summary;
    std::string final_answer;
    bool final_answer_extracted = false;
    bool stopped_early = false;
    int backend_call_count = 0;
    bool failed = false;
    std::string failure_reason;
    std::string timestamp;  // ISO-8601 UTC

    bool reached_consensus() const {
        for (const auto& r : rounds)
            if (r.judge_verdict == Verdict::consensus) return true;
        return false;
    }

    int rounds_executed() const { return static_cast<int>(rounds.size()); }

    // Latest talk per agent, in agent order. Spans completed rounds plus any
    // current-round answers handed in by the caller.
    std::vector<std::pair<std::string, std::string>> latest_answers() const {
        std::vector<std::pair<std::string, std::string>> out;
        for (int agent = 0; agent < config.n_agents; ++agent) {
            const Utterance* latest = nullptr;
            for (const auto& round : rounds)
                for (const auto& u : round.utterances)
                    if (u.purpose == Purpose::talk && u.agent_id == agent_label(agent))
                        latest = &u;
            if (latest) out.emplace_back(latest->agent_id, latest->raw_text);
        }
        return out;
    }

    static std::string agent_label(int index) { return "Agent_" + std::to_string(index); }
};

inline void to_json(json& j, const DebateTranscript& t) {
    j = json{{"schema_version", kTranscriptSchemaVersion},
             {"question_id", t.question_id},
             {"question", t.question},
             {"config", t.config},
             {"pool", t.pool},
             {"rounds", t.rounds},
             {"summary", t.summary ? json(*t.summary) : json(nullptr)},
             {"final_answer", t.final_answer},
             {"final_answer_extracted", t.final_answer_extracted},
             {"stopped_early", t.stopped_early},
             {"backend_call_count", t.backend_call_count},
             {"failed", t.failed},
             {"failure_reason", t.failure_reason},
             {"timestamp", t.timestamp}};
}

inline void from_json(const json& j, DebateTranscript& t) {
    const int version = j.value("schema_version", 0);
    if (version != kTranscriptSchemaVersion)
        throw Error("unsupported transcript schema_version: " + std::to_string(version));
    t.question_id = j.at("question_id").get<std::string>();
    t.question = j.at("question").get<std::string>();
    t.config = j.at("config").get<DebateConfig>();
    t.pool = j.at("pool").get<EvidencePool>();
    t.rounds = j.at("rounds").get<std::vector<RoundRecord>>();
    if (j.contains("summary") && !j.at("summary").is_null())
        t.summary = j.at("summary").get<Utterance>();
    else
        t.summary.reset();
    t.final_answer = j.at("final_answer").get<std::string>();
    t.final_answer_extracted = j.value("final_answer_extracted", false);
    t.stopped_early = j.at("stopped_early").get<bool>();
    t.backend_call_count = j.at("backend_call_count").get<int>();
    t.failed = j.value("failed", false);
    t.failure_reason = j.value("failure_reason", "");
    t.timestamp = j.value("timestamp", "");
}

}  // namespace parley
