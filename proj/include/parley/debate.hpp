#pragma once

#include <string>
#include <utility>
#include <vector>

#include "parley/backend.hpp"
#include "parley/parse.hpp"
#include "parley/prompts.hpp"
#include "parley/retrieval.hpp"
#include "parley/types.hpp"

// Debate protocol: a simultaneous-talk round where debaters answer
// independently, orderly-talk rounds where they speak in fixed order and see
// the latest answers of the others, a judge consistency check closing every
// round, and a single summary call producing the final answer.

namespace parley {

class ProtocolViolation : public Error {
public:
    using Error::Error;
};

// Counts completions issued on behalf of one debate.
class CountingBackend : public ChatBackend {
public:
    explicit CountingBackend(ChatBackend& inner) : inner_(inner) {}

    ChatResponse complete(const ChatRequest& req) override {
        ++count_;
        return inner_.complete(req);
    }

    int count() const { return count_; }

private:
    ChatBackend& inner_;
    int count_ = 0;
};

// "(Agent_i) text" lines, one per answer.
inline std::string format_agent_answers(
    const std::vector<std::pair<std::string, std::string>>& answers) {
    std::string out;
    for (size_t i = 0; i < answers.size(); ++i) {
        if (i > 0) out.push_back('\n');
        out += "(" + answers[i].first + ") " + answers[i].second;
    }
    return out;
}

// Consistency check over the debaters' latest answers. An unparseable reply
// keeps the debate going: the safe default is no consensus.
inline std::pair<Verdict, Utterance> judge_check(
    const PromptLibrary& prompts, const std::string& question,
    const std::vector<std::pair<std::string, std::string>>& latest_answers, ChatBackend& backend,
    double temperature, int round) {
    if (latest_answers.empty())
        throw ProtocolViolation("judge_check requires one answer per debater");

    ChatRequest req;
    req.system_prompt = prompts.system_prompt(Role::judge);
    req.user_prompt = prompts.render(
        TemplateName::judgement,
        {{"question", question}, {"all_answers_from_agents", format_agent_answers(latest_answers)}});
    req.temperature = temperature;
    req.tag = {Role::judge, "judge", round, Purpose::judge};
    ChatResponse resp = backend.complete(req);

    auto parsed = parse_yes_no(resp.text);
    if (!parsed)
        logging::warn("judge reply had no [Yes]/[No] token in round " + std::to_string(round) +
                      "; treating as no consensus");
    const Verdict verdict = parsed.value_or(false) ? Verdict::consensus : Verdict::no_consensus;

    Utterance u;
    u.agent_id = "judge";
    u.role = Role::judge;
    u.purpose = Purpose::judge;
    u.round = round;
    u.raw_text = resp.text;
    if (parsed) u.extracted_answer = *parsed ? "Yes" : "No";
    return {verdict, std::move(u)};
}

struct SummaryOutcome {
    std::string final_answer;
    bool extracted = false;
    Utterance utterance;
};

// Condenses all debaters' latest answers into the final answer. The engine
// never adjudicates content; whatever the summarizer concludes stands. A
// reply without a bracketed answer is kept whole and flagged unextracted.
inline SummaryOutcome summarize(const PromptLibrary& prompts, const std::string& question,
                                const std::vector<std::pair<std::string, std::string>>& latest_answers,
                                ChatBackend& backend, double temperature, int round) {
    if (latest_answers.empty())
        throw ProtocolViolation("summarize invoked without debater answers");

    ChatRequest req;
    req.system_prompt = prompts.system_prompt(Role::summarizer);
    req.user_prompt = prompts.render(TemplateName::summary,
                                     {{"examples", prompts.summary_examples()},
                                      {"question", question},
                                      {"all_answers_from_agents",
                                       format_agent_answers(latest_answers)}});
    req.temperature = temperature;
    req.tag = {Role::summarizer, "summarizer", round, Purpose::summary};
    ChatResponse resp = backend.complete(req);

    SummaryOutcome out;
    auto extracted = extract_answer(resp.text);
    if (extracted) {
        out.final_answer = *extracted;
        out.extracted = true;
    } else {
        logging::warn("summary reply had no bracketed answer; keeping raw text");
        out.final_answer = resp.text;
        out.extracted = false;
    }
    Utterance u;
    u.agent_id = "summarizer";
    u.role = Role::summarizer;
    u.purpose = Purpose::summary;
    u.round = round;
    u.raw_text = resp.text;
    u.extracted_answer = extracted;
    out.utterance = std::move(u);
    return out;
}

namespace detail {

struct AgentEvidence {
    std::vector<int> ids;         // pool indices embedded in the talk prompt
    std::string section;          // rendered evidence block (may be empty)
    std::optional<Utterance> selection_utterance;
};

// Per-debater, per-round evidence. With self-selection the debater picks from
// the frozen pool each round; disabled, the prompt embeds the whole pool.
inline AgentEvidence gather_evidence(const PromptLibrary& prompts, const EvidencePool& pool,
                                     const std::string& question, const std::string& agent_id,
                                     int round, ChatBackend& backend, const DebateConfig& config) {
    AgentEvidence out;
    if (!config.self_selection_enabled) {
        out.section = evidence_section(pool.items);
        return out;
    }
    SelectionOutcome sel = select_evidence(prompts, pool, question, agent_id, round, backend,
                                           config.temperature, config.max_selected);
    out.selection_utterance = sel.utterance;
    out.ids = sel.result.indices;
    std::vector<Evidence> chosen;
    for (int idx : sel.result.indices) chosen.push_back(pool.items.at(static_cast<size_t>(idx)));
    out.section = evidence_section(chosen);
    return out;
}

inline Utterance make_talk(const std::string& agent_id, int round, const ChatResponse& resp,
                           std::vector<int> evidence_ids) {
    Utterance u;
    u.agent_id = agent_id;
    u.role = Role::debater;
    u.purpose = Purpose::talk;
    u.round = round;
    u.raw_text = resp.text;
    u.extracted_answer = extract_answer(resp.text);
    u.selected_evidence_ids = std::move(evidence_ids);
    return u;
}

// Latest talk by agent_id in a round record, if any.
inline const Utterance* find_talk(const RoundRecord& round, const std::string& agent_id) {
    const Utterance* found = nullptr;
    for (const auto& u : round.utterances)
        if (u.purpose == Purpose::talk && u.agent_id == agent_id) found = &u;
    return found;
}

}  // namespace detail

// Round 1: debaters answer independently, each grounded only in the evidence
// of their own selection and the fixed one-shot example.
inline RoundRecord run_simultaneous_round(const PromptLibrary& prompts, const std::string& question,
                                          const EvidencePool& pool, const DebateConfig& config,
                                          ChatBackend& backend) {
    RoundRecord rec;
    rec.round = 1;
    for (int agent = 0; agent < config.n_agents; ++agent) {
        const std::string agent_id = DebateTranscript::agent_label(agent);
        auto evidence =
            detail::gather_evidence(prompts, pool, question, agent_id, 1, backend, config);
        if (evidence.selection_utterance)
            rec.utterances.push_back(*evidence.selection_utterance);

        ChatRequest req;
        req.system_prompt = prompts.system_prompt(Role::debater);
        req.user_prompt = prompts.render(TemplateName::simultaneous_talk,
                                         {{"example", prompts.simultaneous_example()},
                                          {"evidences", evidence.section},
                                          {"question", question}});
        req.temperature = config.temperature;
        req.tag = {Role::debater, agent_id, 1, Purpose::talk};
        ChatResponse resp = backend.complete(req);
        rec.utterances.push_back(detail::make_talk(agent_id, 1, resp, std::move(evidence.ids)));
    }
    return rec;
}

// Rounds >= 2: debaters speak sequentially in fixed agent order. Speaker i
// sees, for every other agent, that agent's most recent answer -- the current
// round's if that agent already spoke this round, otherwise the previous
// round's -- plus their own latest answer as history.
inline RoundRecord run_orderly_round(const PromptLibrary& prompts,
                                     const DebateTranscript& in_progress,
                                     const EvidencePool& pool, const DebateConfig& config,
                                     ChatBackend& backend, int round) {
    if (in_progress.rounds.empty())
        throw ProtocolViolation("orderly round requires at least one prior round");
    const RoundRecord& previous = in_progress.rounds.back();

    RoundRecord rec;
    rec.round = round;
    for (int agent = 0; agent < config.n_agents; ++agent) {
        const std::string agent_id = DebateTranscript::agent_label(agent);
        auto evidence = detail::gather_evidence(prompts, pool, in_progress.question, agent_id,
                                                round, backend, config);
        if (evidence.selection_utterance)
            rec.utterances.push_back(*evidence.selection_utterance);

        std::vector<std::pair<std::string, std::string>> others;
        for (int other = 0; other < config.n_agents; ++other) {
            if (other == agent) continue;
            const std::string other_id = DebateTranscript::agent_label(other);
            const Utterance* latest = detail::find_talk(rec, other_id);
            if (latest == nullptr) latest = detail::find_talk(previous, other_id);
            if (latest == nullptr)
                throw ProtocolViolation("no prior answer for " + other_id + " entering round " +
                                        std::to_string(round));
            others.emplace_back(other_id, latest->raw_text);
        }
        const Utterance* own = detail::find_talk(previous, agent_id);
        if (own == nullptr)
            throw ProtocolViolation("no prior answer for " + agent_id + " entering round " +
                                    std::to_string(round));

        std::string others_block;
        if (!others.empty())
            others_block = "Answers from other Agents:\n" + format_agent_answers(others);
        const std::string history_block = "Here is your historical answer: " + own->raw_text;

        ChatRequest req;
        req.system_prompt = prompts.system_prompt(Role::debater);
        req.user_prompt = prompts.render(TemplateName::orderly_talk,
                                         {{"evidences", evidence.section},
                                          {"answer_from_other_agents", others_block},
                                          {"your_historical_answer", history_block},
                                          {"question", in_progress.question}});
        req.temperature = config.temperature;
        req.tag = {Role::debater, agent_id, round, Purpose::talk};
        ChatResponse resp = backend.complete(req);
        rec.utterances.push_back(detail::make_talk(agent_id, round, resp, std::move(evidence.ids)));
    }
    return rec;
}

// Runs one full debate. Backend failures don't throw: they produce a failure
// transcript flagged unusable, with the rounds completed so far preserved.
inline DebateTranscript run_debate(const std::string& question_id, const std::string& question,
                                   const EvidencePool& pool, const DebateConfig& config,
                                   ChatBackend& backend, const PromptLibrary& prompts,
                                   const std::string& timestamp = "") {
    config.validate();
    DebateTranscript t;
    t.question_id = question_id;
    t.question = question;
    t.config = config;
    t.pool = pool;
    t.timestamp = timestamp;

    CountingBackend counting(backend);
    try {
        for (int round = 1; round <= config.max_rounds; ++round) {
            RoundRecord rec =
                round == 1
                    ? run_simultaneous_round(prompts, question, pool, config, counting)
                    : run_orderly_round(prompts, t, pool, config, counting, round);

            std::vector<std::pair<std::string, std::string>> round_answers;
            for (const Utterance* talk : rec.debater_talks())
                round_answers.emplace_back(talk->agent_id, talk->raw_text);
            auto [verdict, judge_utt] =
                judge_check(prompts, question, round_answers, counting, config.temperature, round);
            rec.utterances.push_back(std::move(judge_utt));
            rec.judge_verdict = verdict;
            t.rounds.push_back(std::move(rec));
            if (verdict == Verdict::consensus) break;
        }
        t.stopped_early = t.reached_consensus() && t.rounds_executed() < config.max_rounds;

        SummaryOutcome summary = summarize(prompts, question, t.latest_answers(), counting,
                                           config.temperature, t.rounds_executed());
        t.summary = summary.utterance;
        t.final_answer = summary.final_answer;
        t.final_answer_extracted = summary.extracted;
    } catch (const BackendError& ex) {
        t.failed = true;
        t.failure_reason = ex.what();
        logging::error("debate " + question_id + " aborted: " + t.failure_reason);
    }
    t.backend_call_count = counting.count();
    return t;
}

}  // namespace parley
