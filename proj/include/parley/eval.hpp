#pragma once

#include <map>
#include <string>
#include <vector>

#include "parley/backend.hpp"
#include "parley/dataset.hpp"
#include "parley/parse.hpp"
#include "parley/prompts.hpp"
#include "parley/types.hpp"

namespace parley {

enum class Grader { em, llm_judge };

inline std::string to_string(Grader g) { return g == Grader::em ? "em" : "llm_judge"; }

inline Grader grader_from_string(const std::string& s) {
    if (s == "em") return Grader::em;
    if (s == "llm_judge") return Grader::llm_judge;
    throw ConfigError("unknown grader: " + s);
}

// Grader routing is a pure function of the dataset: exact match for the
// fact-checking label space, LLM judging for generative answers.
inline Grader grader_for(Dataset d) {
    return is_fact_check(d) ? Grader::em : Grader::llm_judge;
}

struct EvalResult {
    std::string sample_id;
    std::string predicted;
    bool correct = false;
    Grader grader = Grader::em;
    bool consensus_reached = false;
    bool flagged_for_review = false;
};

inline void to_json(json& j, const EvalResult& r) {
    j = json{{"sample_id", r.sample_id},
             {"predicted", r.predicted},
             {"correct", r.correct},
             {"grader", to_string(r.grader)},
             {"consensus_reached", r.consensus_reached},
             {"flagged_for_review", r.flagged_for_review}};
}

inline void from_json(const json& j, EvalResult& r) {
    r.sample_id = j.at("sample_id").get<std::string>();
    r.predicted = j.at("predicted").get<std::string>();
    r.correct = j.at("correct").get<bool>();
    r.grader = grader_from_string(j.at("grader").get<std::string>());
    r.consensus_reached = j.value("consensus_reached", false);
    r.flagged_for_review = j.value("flagged_for_review", false);
}

// Label equality for fact-check predictions: case-insensitive, trimmed, with
// the documented FEVEROUS surface-form aliases applied to the prediction.
// A "Not Enough Info" prediction counts only when the gold label matches it.
inline bool exact_match(const std::string& predicted, const std::string& gold_label) {
    return normalize_label(predicted) == normalize_label(gold_label);
}

struct JudgeOutcome {
    bool correct = false;
    bool flagged_for_review = false;
    bool fast_path = false;  // prediction equalled a reference; no backend call
};

// LLM-judge grading for generative answers. Predictions that already equal a
// reference answer short-circuit to correct with zero backend calls; only
// non-exact cases consult the judge. An unparseable verdict grades false and
// is flagged for manual review.
inline JudgeOutcome llm_judge_eval(const PromptLibrary& prompts, const std::string& question,
                                   const std::vector<std::string>& gold_answers,
                                   const std::string& predicted, ChatBackend& backend) {
    JudgeOutcome out;
    for (const auto& gold : gold_answers) {
        if (util::loose_equals(predicted, gold)) {
            out.correct = true;
            out.fast_path = true;
            return out;
        }
    }
    std::string references;
    for (size_t i = 0; i < gold_answers.size(); ++i) {
        if (i > 0) references += ", ";
        references += gold_answers[i];
    }
    ChatRequest req;
    req.system_prompt = prompts.system_prompt(Role::evaluator);
    req.user_prompt = prompts.render(TemplateName::gpt4_eval,
                                     {{"question", question},
                                      {"reference_answers", references},
                                      {"evaluation_answer", predicted}});
    req.temperature = 0.0;
    req.tag = {Role::evaluator, "evaluator", 0, Purpose::eval};
    ChatResponse resp = backend.complete(req);

    auto verdict = parse_true_false(resp.text);
    if (!verdict) {
        logging::warn("eval reply had no [True]/[False] token; grading false and flagging");
        out.flagged_for_review = true;
        return out;
    }
    out.correct = *verdict;
    return out;
}

// Grades one debate outcome against its sample.
inline EvalResult grade(const PromptLibrary& prompts, const Sample& sample,
                        const DebateTranscript& transcript, ChatBackend& eval_backend) {
    EvalResult r;
    r.sample_id = sample.id;
    r.predicted = transcript.final_answer;
    r.consensus_reached = transcript.reached_consensus();
    r.grader = grader_for(sample.dataset);
    if (r.grader == Grader::em) {
        r.correct = exact_match(r.predicted, sample.gold_label);
    } else {
        JudgeOutcome outcome =
            llm_judge_eval(prompts, sample.question, sample.gold_answers, r.predicted, eval_backend);
        r.correct = outcome.correct;
        r.flagged_for_review = outcome.flagged_for_review;
    }
    return r;
}

struct Metrics {
    std::string dataset;
    std::string config_label;
    int n = 0;
    double accuracy = 0.0;
    int inconsistent_count = 0;  // debates still lacking consensus at the last round
    double mean_rounds = 0.0;
    double mean_backend_calls = 0.0;
};

inline void to_json(json& j, const Metrics& m) {
    j = json{{"dataset", m.dataset},
             {"config_label", m.config_label},
             {"n", m.n},
             {"accuracy", m.accuracy},
             {"inconsistent_count", m.inconsistent_count},
             {"mean_rounds", m.mean_rounds},
             {"mean_backend_calls", m.mean_backend_calls}};
}

inline void from_json(const json& j, Metrics& m) {
    m.dataset = j.at("dataset").get<std::string>();
    m.config_label = j.value("config_label", "");
    m.n = j.at("n").get<int>();
    m.accuracy = j.at("accuracy").get<double>();
    m.inconsistent_count = j.at("inconsistent_count").get<int>();
    m.mean_rounds = j.value("mean_rounds", 0.0);
    m.mean_backend_calls = j.value("mean_backend_calls", 0.0);
}

// Reduces graded results plus their transcripts into one metrics row. Results
// and transcripts must cover exactly the same sample ids. Integer sums only,
// so the reduction is permutation-invariant.
inline Metrics aggregate(const std::vector<EvalResult>& results,
                         const std::vector<DebateTranscript>& transcripts) {
    if (results.empty()) throw Error("aggregate: no results");
    std::map<std::string, const DebateTranscript*> by_id;
    for (const auto& t : transcripts) by_id[t.question_id] = &t;
    if (by_id.size() != results.size())
        throw Error("aggregate: results and transcripts differ in size");

    Metrics m;
    m.n = static_cast<int>(results.size());
    long correct = 0;
    long rounds = 0;
    long calls = 0;
    for (const auto& r : results) {
        auto it = by_id.find(r.sample_id);
        if (it == by_id.end())
            throw Error("aggregate: no transcript for sample " + r.sample_id);
        correct += r.correct ? 1 : 0;
        const DebateTranscript& t = *it->second;
        if (!t.reached_consensus()) ++m.inconsistent_count;
        rounds += t.rounds_executed();
        calls += t.backend_call_count;
    }
    m.accuracy = static_cast<double>(correct) / static_cast<double>(m.n);
    m.mean_rounds = static_cast<double>(rounds) / static_cast<double>(m.n);
    m.mean_backend_calls = static_cast<double>(calls) / static_cast<double>(m.n);
    return m;
}

}  // namespace parley
