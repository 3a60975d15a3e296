// Acceptance suite: one criterion per section, one PASS/FAIL line each.
// Runs entirely offline except the optional live smoke check, which is
// skipped unless OPENAI_API_KEY is set.

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "parley/parley.hpp"
#include "support/bm25_oracle.hpp"

using namespace parley;
namespace fs = std::filesystem;

namespace {

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct Skip : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& msg) {
    if (!cond) throw Failure(msg);
}

template <typename T>
void require_eq(const T& actual, const T& expected, const std::string& what) {
    if (!(actual == expected)) throw Failure(what);
}

const PromptLibrary& prompts() {
    static PromptLibrary lib = PromptLibrary::load(PARLEY_PROMPT_DIR);
    return lib;
}

std::string golden(const std::string& name) {
    return util::read_file(std::string(PARLEY_GOLDEN_DIR) + "/" + name);
}

std::string data_path(const std::string& name) {
    return std::string(PARLEY_TEST_DATA_DIR) + "/" + name;
}

fs::path fresh_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / "parley_acceptance" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

Evidence make_evidence(int index, EvidenceSource source, std::string text) {
    Evidence e;
    e.pool_index = index;
    e.source = source;
    e.text = std::move(text);
    return e;
}

// --- criterion 1: golden prompts ------------------------------------------

const std::string kMoonQuestion =
    "On what date in 1969 did Neil Armstrong first set foot on the Moon?";
const std::string kAgent0Moon =
    "Based on the historical evidence provided, Neil Armstrong first set foot on the Moon on "
    "July 20, 1969. This event occurred during the Apollo 11 mission, when Armstrong and Buzz "
    "Aldrin landed the lunar module Eagle in the Sea of Tranquility. Armstrong then descended "
    "the ladder and made his famous statement. Therefore, the correct answer is [July 20, 1969].";
const std::string kAgent1Moon =
    "Based on the historical evidence, Neil Armstrong first set foot on the Moon on July 20, "
    "1969. This monumental event took place during the Apollo 11 mission. Armstrong, along with "
    "Buzz Aldrin, landed the lunar module Eagle in the Sea of Tranquility. Armstrong then "
    "descended the ladder and famously declared, \"That's one small step for man, one giant "
    "leap for mankind.\" Therefore, the answer is [July 20, 1969].";

void criterion_golden_prompts() {
    std::vector<Evidence> pool5 = {
        make_evidence(0, EvidenceSource::google,
                      "On July 20, 1969, American astronauts Neil Armstrong (1930-2012) and "
                      "Edwin \"Buzz\" Aldrin (1930-) became the first humans ever to land on "
                      "the moon."),
        make_evidence(1, EvidenceSource::google,
                      "Apollo 11 (July 16–24, 1969) was the American spaceflight that first "
                      "landed humans on the Moon. Commander Neil Armstrong and lunar module "
                      "pilot Buzz Aldrin ..."),
        make_evidence(2, EvidenceSource::google,
                      "Neil Armstrong on the Moon. At 02:56 GMT on 21 July 1969, Armstrong "
                      "became the first person to step onto the Moon. He was joined by Aldrin "
                      "19 minutes"),
        make_evidence(3, EvidenceSource::google,
                      "It reads, \"Here men from the planet Earth first set foot upon the "
                      "moon. July 1969 A.D. We came in peace for all mankind.\" Armstrong and "
                      "Aldrin"),
        make_evidence(4, EvidenceSource::google,
                      "Apollo 11 launched from Cape Kennedy on July 16, 1969, carrying "
                      "Commander Neil Armstrong, Command Module Pilot Michael Collins and "
                      "Lunar"),
    };
    require_eq(prompts().render(TemplateName::self_selection,
                                {{"evidences", evidence_section(pool5)},
                                 {"question", kMoonQuestion}}),
               golden("self_selection_moon.txt"), "self-selection render != fixture");

    std::vector<Evidence> pool3 = {
        pool5[0],
        make_evidence(1, EvidenceSource::google,
                      "Neil Armstrong on the Moon. At 02:56 GMT on 21 July 1969, Armstrong "
                      "became the first person to step onto the Moon. He was joined by Aldrin "
                      "19 minutes"),
        make_evidence(2, EvidenceSource::google,
                      "Apollo 11 (July 16–24, 1969) was the American spaceflight that first "
                      "landed humans on the Moon. Commander Neil Armstrong and lunar module "
                      "pilot Buzz Aldri"),
    };
    require_eq(prompts().render(TemplateName::simultaneous_talk,
                                {{"example", prompts().simultaneous_example()},
                                 {"evidences", evidence_section(pool3)},
                                 {"question", kMoonQuestion}}),
               golden("simultaneous_talk_moon.txt"), "simultaneous-talk render != fixture");

    std::vector<Evidence> pool1 = {pool5[0]};
    require_eq(
        prompts().render(
            TemplateName::orderly_talk,
            {{"evidences", evidence_section(pool1)},
             {"answer_from_other_agents",
              "Answers from other Agents:\n(Agent_1) On July 21, 1969, at 02:56 GMT, Neil "
              "Armstrong became the first person to step onto the Moon. He was joined by Buzz "
              "Aldrin 19 minutes later. Therefore, the answer is [July 21, 1969]."},
             {"your_historical_answer",
              "Here is your historical answer: Based on the evidence provided, Neil Armstrong "
              "first set foot on the Moon on July 20, 1969. Therefore, the answer is [July 20, "
              "1969]."},
             {"question", kMoonQuestion}}),
        golden("orderly_talk_moon.txt"), "orderly-talk render != fixture");

    const std::string block =
        format_agent_answers({{"Agent_0", kAgent0Moon}, {"Agent_1", kAgent1Moon}});
    require_eq(prompts().render(TemplateName::judgement,
                                {{"question", kMoonQuestion},
                                 {"all_answers_from_agents", block}}),
               golden("judgement_moon.txt"), "judgement render != fixture");
    require_eq(prompts().render(TemplateName::summary,
                                {{"examples", prompts().summary_examples()},
                                 {"question", kMoonQuestion},
                                 {"all_answers_from_agents", block}}),
               golden("summary_moon.txt"), "summary render != fixture");
    require_eq(
        prompts().render(TemplateName::gpt4_eval,
                         {{"question",
                           "Who was the next British Prime Minister after Arthur Balfour?"},
                          {"reference_answers", "Henry Campbell Bannerman"},
                          {"evaluation_answer", "Henry Campbell Bannerman"}}),
        golden("gpt4_eval_balfour.txt"), "gpt4-eval render != fixture");
}

// --- criteria 2 and 3: call counts and early stopping ----------------------

ScriptedBackend scripted_debate_backend(int consensus_round, int max_rounds) {
    ScriptedBackend backend;
    backend.script_default(Purpose::selection, "[0]");
    backend.script_default(Purpose::talk, "The answer is [July 20, 1969].");
    backend.script_default(Purpose::summary, "The final answer is [July 20, 1969].");
    for (int r = 1; r <= max_rounds; ++r)
        backend.script(Purpose::judge, "judge", r,
                       consensus_round > 0 && r >= consensus_round ? "[Yes]" : "[No]");
    return backend;
}

EvidencePool acceptance_pool() {
    EvidencePool pool;
    pool.question_id = "q";
    for (int i = 0; i < 3; ++i)
        pool.items.push_back(make_evidence(i, EvidenceSource::google, "snippet"));
    return pool;
}

void criterion_call_count_law() {
    for (int n : {1, 2, 3}) {
        for (int consensus_round : {1, 2, 3}) {
            for (bool selection : {true, false}) {
                DebateConfig config;
                config.n_agents = n;
                config.max_rounds = 3;
                config.self_selection_enabled = selection;
                auto backend = scripted_debate_backend(consensus_round, config.max_rounds);
                auto pool = acceptance_pool();
                DebateTranscript t = run_debate("q", "q?", pool, config, backend, prompts());
                require(!t.failed, "debate failed unexpectedly");
                const int rounds = consensus_round;
                const int expected =
                    selection ? rounds * (2 * n + 1) + 1 : rounds * (n + 1) + 1;
                require(t.backend_call_count == expected,
                        "call count " + std::to_string(t.backend_call_count) + " != " +
                            std::to_string(expected) + " for n=" + std::to_string(n) +
                            " r=" + std::to_string(rounds) +
                            " sel=" + (selection ? "on" : "off"));
            }
        }
    }
}

void criterion_early_stop() {
    for (int consensus_round : {1, 2, 3}) {
        DebateConfig config;
        auto backend = scripted_debate_backend(consensus_round, config.max_rounds);
        auto pool = acceptance_pool();
        DebateTranscript t = run_debate("q", "q?", pool, config, backend, prompts());
        require(t.rounds_executed() == consensus_round,
                "judge [Yes] at round " + std::to_string(consensus_round) + " produced " +
                    std::to_string(t.rounds_executed()) + " rounds");
        require(t.stopped_early == (consensus_round < config.max_rounds),
                "stopped_early flag wrong at round " + std::to_string(consensus_round));
    }
    DebateConfig config;
    auto backend = scripted_debate_backend(0, config.max_rounds);  // [No] forever
    auto pool = acceptance_pool();
    DebateTranscript t = run_debate("q", "q?", pool, config, backend, prompts());
    require(t.rounds_executed() == config.max_rounds, "no-consensus debate must hit the cap");
    require(!t.stopped_early, "no-consensus debate cannot stop early");
}

// --- criterion 4: parser suite ---------------------------------------------

void criterion_parsers() {
    int cases = 0;
    auto check = [&cases](bool ok, const std::string& what) {
        ++cases;
        if (!ok) throw Failure("parser case failed: " + what);
    };

    check(extract_answer("Therefore, the answer is [Bridget Driscoll].") == "Bridget Driscoll",
          "Bridget Driscoll");
    check(extract_answer("...the answer is [Letters to Cleo].") == "Letters to Cleo",
          "Letters to Cleo");
    check(extract_answer("the answer is [July 20, 1969].") == "July 20, 1969", "moon date");
    check(extract_answer("[a] then [b]") == "b", "last bracket wins");
    check(extract_answer("[ padded ]") == "padded", "trimming");
    check(extract_answer("[]") == std::string(""), "empty brackets");
    check(!extract_answer("no brackets").has_value(), "no brackets");
    check(!extract_answer("open [ only").has_value(), "unclosed");
    check(!extract_answer("] backwards [").has_value(), "reversed");
    check(extract_answer("nested [a[b]c]") == "b", "innermost pair");

    check(parse_yes_no("[Yes]") == true, "[Yes]");
    check(parse_yes_no("[NO].") == false, "[NO].");
    check(parse_yes_no("[yes]") == true, "[yes]");
    check(parse_yes_no("[ No ]") == false, "[ No ]");
    check(parse_yes_no("consistent, so [Yes] ... wait [No]") == false, "last verdict wins");
    check(!parse_yes_no("nothing").has_value(), "judge no brackets");
    check(!parse_yes_no("[maybe]").has_value(), "judge non-verdict");

    check(parse_true_false("Therefore, the answer is [True].") == true, "[True]");
    check(parse_true_false("Therefore, the answer is [False].") == false, "[False]");
    check(parse_true_false("[TRUE]") == true, "[TRUE]");
    check(parse_true_false("[false]") == false, "[false]");
    check(!parse_true_false("[Yes]").has_value(), "eval non-verdict");

    auto sel1 = parse_selection_reply("[1] \"Letters to Cleo\" ... [3] \"Screaming Trees\"", 5, 3);
    check(sel1.indices == std::vector<int>{1, 3} && !sel1.no_found, "Table-5 selection");
    auto sel2 = parse_selection_reply("[No Found]", 5, 3);
    check(sel2.no_found && sel2.indices.empty(), "[No Found]");
    auto sel3 = parse_selection_reply("[no found]", 5, 3);
    check(sel3.no_found, "[no found] case-insensitive");
    auto sel4 = parse_selection_reply("[2] [2] [7] [0] [4] [1]", 5, 3);
    check(sel4.indices == std::vector<int>{2, 0, 4}, "dedupe/drop/cap");
    auto sel5 = parse_selection_reply("nothing useful", 5, 3);
    check(sel5.no_found && sel5.parse_failed, "unusable selection reply");
    auto sel6 = parse_selection_reply("[1] but overall [No Found]", 5, 3);
    check(sel6.no_found && sel6.indices.empty(), "No Found dominates");
    auto sel7 = parse_selection_reply("[9]", 5, 3);
    check(sel7.indices.empty(), "out-of-range only");
    auto sel8 = parse_selection_reply("[0]", 1, 3);
    check(sel8.indices == std::vector<int>{0}, "minimal pool");

    check(bracket_tokens("x [1] y [2]").size() == 2, "token scan");
    check(bracket_tokens("none").empty(), "token scan empty");

    require(cases >= 30, "parser suite must cover at least 30 cases, got " +
                             std::to_string(cases));
}

// --- criterion 5: retrieval oracle equivalence ------------------------------

void criterion_retrieval_oracle() {
    std::mt19937 rng(20240801);
    auto docs = testsupport::synthetic_corpus(100, rng);
    auto index = LexicalIndex::build(docs);
    const std::vector<std::string> queries = {
        "river",   "mountain castle", "battle treaty harbor", "island emperor bridge library",
        "comet",   "volcano desert",  "forest saint",         "cathedral siege voyage",
        "plague",  "festival river",  "mountain mountain",    "castle harbor",
        "treaty",  "emperor voyage",  "bridge plague comet",  "library festival",
        "volcano", "desert forest",   "saint cathedral",      "siege battle island"};
    require(queries.size() == 20, "need 20 queries");
    for (const auto& query : queries) {
        for (int k : {1, 5, 10}) {
            auto expected = testsupport::brute_force_rank(docs, query, k, index.params());
            auto actual = index.score_query(query, k);
            require(actual.size() == expected.size(),
                    "result size mismatch for '" + query + "' k=" + std::to_string(k));
            for (size_t i = 0; i < expected.size(); ++i) {
                require(actual[i].first == expected[i].first && actual[i].second == expected[i].second,
                        "rank mismatch at " + std::to_string(i) + " for '" + query + "' k=" +
                            std::to_string(k));
            }
        }
    }
}

// --- criteria 6 and 7: oracle debater properties ----------------------------

struct SyntheticQuestion {
    std::string id;
    std::string question;
    std::string entity;
    std::string answer;
    std::string gold_text;
};

std::vector<SyntheticQuestion> synthetic_questions(int n) {
    std::vector<SyntheticQuestion> out;
    for (int i = 0; i < n; ++i) {
        SyntheticQuestion q;
        q.id = "syn-" + std::to_string(i);
        q.entity = "zqentity" + std::to_string(i);
        q.answer = "zqanswer" + std::to_string(i);
        q.question = "What does the codeword " + q.entity + " point to?";
        q.gold_text = "Codeword " + q.entity + " points to " + q.answer + " in the registry.";
        out.push_back(std::move(q));
    }
    return out;
}

std::string question_line_of(const std::string& prompt) {
    const auto pos = prompt.rfind("\nQuestion: ");
    if (pos == std::string::npos) return "";
    const auto start = pos + 1;
    const auto end = prompt.find('\n', start);
    return prompt.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

std::string entity_of(const std::string& text) {
    const auto pos = text.find("zqentity");
    if (pos == std::string::npos) return "";
    size_t end = pos + std::string("zqentity").size();
    while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
    return text.substr(pos, end - pos);
}

// Oracle debater: answers correctly iff its gold passage is among the
// evidence shown to it; when noise_sensitive, distractor passages in the
// prompt break it.
ScriptedBackend oracle_debater(bool noise_sensitive) {
    ScriptedBackend backend;
    backend.add_handler([](const ChatRequest& req) -> std::optional<std::string> {
        if (req.tag.purpose != Purpose::selection) return std::nullopt;
        const std::string entity = entity_of(question_line_of(req.user_prompt));
        std::string reply;
        size_t scan = 0;
        while (true) {
            const auto line_start = req.user_prompt.find("\n(", scan);
            if (line_start == std::string::npos) break;
            const auto close = req.user_prompt.find(')', line_start);
            const auto line_end = req.user_prompt.find('\n', line_start + 1);
            if (close == std::string::npos) break;
            const std::string line = req.user_prompt.substr(
                line_start, line_end == std::string::npos ? std::string::npos
                                                          : line_end - line_start);
            if (!entity.empty() && line.find(entity + " points to") != std::string::npos) {
                reply += "[" + req.user_prompt.substr(line_start + 2, close - line_start - 2) +
                         "] ";
            }
            scan = line_start + 1;
        }
        if (reply.empty()) return "Nothing relevant. [No Found]";
        return "Helpful: " + reply;
    });
    backend.add_handler([noise_sensitive](const ChatRequest& req)
                            -> std::optional<std::string> {
        if (req.tag.purpose != Purpose::talk) return std::nullopt;
        const std::string entity = entity_of(question_line_of(req.user_prompt));
        const bool has_gold =
            !entity.empty() &&
            req.user_prompt.find(entity + " points to") != std::string::npos;
        const bool noisy = req.user_prompt.find("zqfiller") != std::string::npos;
        if (has_gold && (!noise_sensitive || !noisy)) {
            const std::string answer = "zqanswer" + entity.substr(std::string("zqentity").size());
            return "The registry lookup gives [" + answer + "].";
        }
        return "I cannot tell. [unknown]";
    });
    backend.script_default(Purpose::judge, "[Yes]");
    backend.add_handler([](const ChatRequest& req) -> std::optional<std::string> {
        if (req.tag.purpose != Purpose::summary) return std::nullopt;
        auto token = extract_answer(req.user_prompt);
        return "Therefore, the final answer is [" + token.value_or("unknown") + "].";
    });
    return backend;
}

double synthetic_accuracy(const std::vector<SyntheticQuestion>& questions,
                          const std::function<EvidencePool(const SyntheticQuestion&)>& pool_of,
                          const DebateConfig& config, ScriptedBackend& backend) {
    int correct = 0;
    for (const auto& q : questions) {
        EvidencePool pool = pool_of(q);
        DebateTranscript t = run_debate(q.id, q.question, pool, config, backend, prompts());
        if (t.failed) throw Failure("synthetic debate failed: " + t.failure_reason);
        if (util::loose_equals(t.final_answer, q.answer)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(questions.size());
}

void criterion_retrieval_improves_accuracy() {
    auto questions = synthetic_questions(50);

    // Corpus: every gold passage plus filler documents.
    std::vector<CorpusDoc> docs;
    for (const auto& q : questions) docs.push_back({q.id, "registry entry", q.gold_text});
    for (int i = 0; i < 50; ++i)
        docs.push_back({"filler-" + std::to_string(i), "filler",
                        "Codeword zqfiller" + std::to_string(i) +
                            " mentions unrelated registry trivia."});
    auto index = LexicalIndex::build(docs);

    json fixture = json::object();
    for (const auto& q : questions)
        fixture[q.question] = json::array(
            {json{{"title", "registry"}, {"snippet", q.gold_text}, {"url", "https://x"}}});
    auto fixture_path = fresh_dir("criterion6") / "search.json";
    util::write_file(fixture_path, fixture.dump());
    FixtureSearchProvider google(fixture_path);

    RetrieverSet retrievers{&index, &google};

    DebateConfig config;  // 2 agents, selection on
    auto with_retrieval = [&](const SyntheticQuestion& q) {
        return build_pool(q.id, q.question, RetrievalMode::all, retrievers, config.k_google,
                          config.k_wiki);
    };
    auto without_retrieval = [&](const SyntheticQuestion& q) {
        return build_pool(q.id, q.question, RetrievalMode::none, retrievers, config.k_google,
                          config.k_wiki);
    };

    auto backend_all = oracle_debater(false);
    const double acc_all = synthetic_accuracy(questions, with_retrieval, config, backend_all);
    auto backend_none = oracle_debater(false);
    const double acc_none = synthetic_accuracy(questions, without_retrieval, config, backend_none);

    require(acc_all >= acc_none, "retrieval must not hurt the oracle debater");
    require(acc_all - acc_none >= 0.20,
            "expected >= 20pp improvement, got " + std::to_string(acc_all - acc_none) +
                " (all=" + std::to_string(acc_all) + ", none=" + std::to_string(acc_none) + ")");
}

void criterion_self_selection_filters_noise() {
    auto questions = synthetic_questions(50);

    // Pools salted 50% with distractor passages.
    auto salted_pool = [](const SyntheticQuestion& q) {
        EvidencePool pool;
        pool.question_id = q.id;
        pool.items.push_back(make_evidence(0, EvidenceSource::wikipedia, q.gold_text));
        pool.items.push_back(make_evidence(
            1, EvidenceSource::wikipedia,
            "Codeword zqfiller" + q.id + " mentions unrelated registry trivia."));
        return pool;
    };

    DebateConfig with_selection;
    with_selection.self_selection_enabled = true;
    auto backend_on = oracle_debater(true);
    const double acc_on = synthetic_accuracy(questions, salted_pool, with_selection, backend_on);

    DebateConfig without_selection;
    without_selection.self_selection_enabled = false;
    auto backend_off = oracle_debater(true);
    const double acc_off =
        synthetic_accuracy(questions, salted_pool, without_selection, backend_off);

    require(acc_on >= acc_off, "self-selection accuracy " + std::to_string(acc_on) +
                                   " must be >= " + std::to_string(acc_off));
    require(acc_on > 0.9, "selection-on oracle should be nearly perfect");
}

// --- criterion 8: inconsistency accounting ----------------------------------

void criterion_inconsistency_accounting() {
    for (auto [k, n] : std::vector<std::pair<int, int>>{{0, 10}, {3, 10}, {10, 10}}) {
        ScriptedBackend backend;
        backend.script_default(Purpose::selection, "[0]");
        backend.script_default(Purpose::talk, "My answer is [x].");
        backend.script_default(Purpose::summary, "The final answer is [x].");
        backend.add_handler([](const ChatRequest& req) -> std::optional<std::string> {
            if (req.tag.purpose != Purpose::judge) return std::nullopt;
            return req.user_prompt.find("stubborn") != std::string::npos ? "[No]" : "[Yes]";
        });

        std::vector<DebateTranscript> transcripts;
        std::vector<EvalResult> results;
        for (int i = 0; i < n; ++i) {
            const std::string id = "batch-" + std::to_string(i);
            const std::string question = i < k ? "stubborn item " + std::to_string(i) + "?"
                                               : "agreeable item " + std::to_string(i) + "?";
            DebateConfig config;
            auto pool = acceptance_pool();
            DebateTranscript t = run_debate(id, question, pool, config, backend, prompts());
            require(!t.failed, "batch debate failed");
            EvalResult r;
            r.sample_id = id;
            r.correct = true;
            r.consensus_reached = t.reached_consensus();
            transcripts.push_back(std::move(t));
            results.push_back(std::move(r));
        }
        Metrics m = aggregate(results, transcripts);
        require(m.inconsistent_count == k,
                "inconsistent_count " + std::to_string(m.inconsistent_count) + " != " +
                    std::to_string(k) + " for N=" + std::to_string(n));
    }
}

// --- criterion 9: determinism and replay ------------------------------------

ExperimentConfig fixture_experiment(const fs::path& out_dir) {
    ExperimentConfig cfg;
    cfg.debate.seed = 17;
    cfg.dataset_name = "hotpotqa";
    cfg.dataset_path = data_path("mini_hotpot.jsonl");
    cfg.backend.kind = "scripted";
    cfg.backend.script_file = data_path("script_basic.json");
    cfg.retrieval.wiki_kind = "lexical";
    cfg.retrieval.corpus_path = data_path("mini_corpus.jsonl");
    cfg.retrieval.google_kind = "fixture";
    cfg.retrieval.search_fixture = data_path("search_fixture.json");
    cfg.output_dir = out_dir.string();
    cfg.parallelism = 3;
    cfg.prompt_dir = PARLEY_PROMPT_DIR;
    return cfg;
}

void criterion_determinism_and_replay() {
    auto dir_a = fresh_dir("determinism_a");
    auto dir_b = fresh_dir("determinism_b");
    run_experiment(fixture_experiment(dir_a));
    run_experiment(fixture_experiment(dir_b));
    require(util::read_file(dir_a / "transcripts.jsonl") ==
                util::read_file(dir_b / "transcripts.jsonl"),
            "two scripted runs produced different transcript bytes");

    auto recorded = fresh_dir("recorded");
    auto cfg = fixture_experiment(recorded);
    cfg.backend.cache_file = (recorded / "cache.jsonl").string();
    run_experiment(cfg);
    ReplayReport report = replay_transcripts(recorded / "transcripts.jsonl",
                                             recorded / "cache.jsonl", prompts());
    require(report.checked == 5, "expected 5 replayed debates");
    require(report.divergent == 0, "replay diverged: " +
                                       (report.diffs.empty() ? std::string("?")
                                                             : report.diffs.front()));
}

// --- criterion 10: optional live smoke --------------------------------------

void criterion_live_smoke() {
    const char* key = std::getenv("OPENAI_API_KEY");
    if (key == nullptr || *key == '\0')
        throw Skip("OPENAI_API_KEY not set; live smoke skipped");

    HttpBackendConfig http = HttpBackendConfig::from_env();
    if (const char* model = std::getenv("PARLEY_MODEL"); model && *model) http.model = model;
    HttpBackend live(http);

    auto dir = fresh_dir("live_smoke");
    auto cache = std::make_shared<ReplayCache>(dir / "cache.jsonl");
    CacheBackend recording(cache, CacheMode::record, &live);

    auto samples = load_dataset(data_path("mini_hotpot.jsonl"), Dataset::hotpotqa);
    DebateConfig config;  // n_agents=2, max_rounds=3, temperature=0.5
    EvidencePool pool;
    pool.question_id = samples[0].id;
    DebateTranscript t = run_debate(samples[0].id, samples[0].question, pool, config, recording,
                                    prompts(), util::iso8601_utc(std::chrono::system_clock::now()));

    require(!t.failed, "live debate failed: " + t.failure_reason);
    require(t.final_answer_extracted, "live debate produced no bracketed final answer");
    require(t.rounds_executed() >= 1 && t.rounds_executed() <= 3, "round count out of range");

    for (const auto& entry : cache->all_entries()) {
        const json& req = entry.at("request");
        require(req.at("temperature").get<double>() == 0.5, "recorded temperature != 0.5");
        const std::string agent = req.at("tag").at("agent_id").get<std::string>();
        require(agent == "Agent_0" || agent == "Agent_1" || agent == "judge" ||
                    agent == "summarizer",
                "unexpected agent in recorded requests: " + agent);
    }

    // The recorded live run must replay with zero divergence and zero
    // further network calls.
    util::write_file(dir / "transcripts.jsonl", json(t).dump() + "\n");
    ReplayReport replayed =
        replay_transcripts(dir / "transcripts.jsonl", dir / "cache.jsonl", prompts());
    require(replayed.checked == 1 && replayed.divergent == 0,
            "recorded live run failed to replay exactly");
}

}  // namespace

int main() {
    struct Criterion {
        std::string name;
        std::function<void()> run;
    };
    const std::vector<Criterion> criteria = {
        {"golden prompt suite (byte-exact renders)", criterion_golden_prompts},
        {"call-count law over agents x rounds x selection", criterion_call_count_law},
        {"early-stop behaviour", criterion_early_stop},
        {"parser suite (>=30 cases)", criterion_parsers},
        {"retriever equals brute-force oracle", criterion_retrieval_oracle},
        {"retrieval lifts oracle-debater accuracy >= 20pp", criterion_retrieval_improves_accuracy},
        {"self-selection filters salted noise", criterion_self_selection_filters_noise},
        {"inconsistency accounting", criterion_inconsistency_accounting},
        {"determinism and replay", criterion_determinism_and_replay},
        {"live smoke (optional)", criterion_live_smoke},
    };

    int failures = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        const auto started = std::chrono::steady_clock::now();
        std::string verdict = "PASS";
        std::string note;
        try {
            criteria[i].run();
        } catch (const Skip& s) {
            verdict = "SKIP";
            note = s.what();
        } catch (const std::exception& ex) {
            verdict = "FAIL";
            note = ex.what();
            ++failures;
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        std::printf("%s  criterion %2zu: %s (%.2fs)%s%s\n", verdict.c_str(), i + 1,
                    criteria[i].name.c_str(), seconds, note.empty() ? "" : " -- ",
                    note.c_str());
    }
    return failures == 0 ? 0 : 1;
}
