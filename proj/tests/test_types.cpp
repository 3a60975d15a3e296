#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "parley/types.hpp"

using namespace parley;

TEST_CASE("debate config defaults follow the reference setup") {
    DebateConfig cfg;
    CHECK(cfg.n_agents == 2);
    CHECK(cfg.max_rounds == 3);
    CHECK(cfg.temperature == 0.5);
    CHECK(cfg.k_google == 5);
    CHECK(cfg.k_wiki == 10);
    CHECK(cfg.max_selected == 3);
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("debate config rejects out-of-range values") {
    DebateConfig cfg;
    cfg.n_agents = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.max_rounds = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.temperature = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.max_selected = -1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("expected backend calls match the call-count law") {
    DebateConfig cfg;
    cfg.n_agents = 2;
    cfg.self_selection_enabled = true;
    CHECK(cfg.expected_backend_calls(2) == 11);  // 2*(2*2+1)+1
    cfg.self_selection_enabled = false;
    CHECK(cfg.expected_backend_calls(3) == 10);  // 3*(2+1)+1
}

namespace {

DebateTranscript random_transcript(std::mt19937& rng) {
    std::uniform_int_distribution<int> small(1, 3);
    DebateTranscript t;
    t.question_id = "q-" + std::to_string(rng() % 1000);
    t.question = "what is " + std::to_string(rng() % 1000) + "?";
    t.config.n_agents = small(rng);
    t.config.seed = rng();
    t.timestamp = "2024-01-01T00:00:00Z";
    t.pool.question_id = t.question_id;
    for (int i = 0; i < small(rng); ++i) {
        Evidence e;
        e.pool_index = i;
        e.source = (rng() % 2) ? EvidenceSource::google : EvidenceSource::wikipedia;
        e.text = "passage " + std::to_string(rng() % 100);
        e.title = (rng() % 2) ? "title" : "";
        t.pool.items.push_back(e);
    }
    const int rounds = small(rng);
    for (int r = 1; r <= rounds; ++r) {
        RoundRecord rec;
        rec.round = r;
        for (int a = 0; a < t.config.n_agents; ++a) {
            Utterance u;
            u.agent_id = DebateTranscript::agent_label(a);
            u.role = Role::debater;
            u.purpose = Purpose::talk;
            u.round = r;
            u.raw_text = "the answer is [x" + std::to_string(rng() % 10) + "]";
            u.extracted_answer = "x";
            if (!t.pool.items.empty()) u.selected_evidence_ids = {0};
            rec.utterances.push_back(u);
        }
        rec.judge_verdict = (rng() % 2) ? Verdict::consensus : Verdict::no_consensus;
        t.rounds.push_back(rec);
    }
    t.final_answer = "x";
    t.final_answer_extracted = rng() % 2 == 0;
    t.stopped_early = rng() % 2 == 0;
    t.backend_call_count = static_cast<int>(rng() % 40);
    return t;
}

}  // namespace

TEST_CASE("transcript JSON round-trips exactly") {
    std::mt19937 rng(424242);
    for (int i = 0; i < 100; ++i) {
        DebateTranscript t = random_transcript(rng);
        json encoded = t;
        DebateTranscript decoded = encoded.get<DebateTranscript>();
        json reencoded = decoded;
        CHECK(encoded.dump() == reencoded.dump());
    }
}

TEST_CASE("transcript loading rejects unknown schema versions") {
    json doc = DebateTranscript{};
    doc["schema_version"] = 999;
    CHECK_THROWS(doc.get<DebateTranscript>());
}

TEST_CASE("enum string conversions round-trip") {
    for (auto mode : {RetrievalMode::none, RetrievalMode::wiki, RetrievalMode::google,
                      RetrievalMode::all})
        CHECK(retrieval_mode_from_string(to_string(mode)) == mode);
    for (auto role : {Role::debater, Role::judge, Role::summarizer, Role::evaluator})
        CHECK(role_from_string(to_string(role)) == role);
    for (auto p : {Purpose::selection, Purpose::talk, Purpose::judge, Purpose::summary,
                   Purpose::eval})
        CHECK(purpose_from_string(to_string(p)) == p);
    CHECK_THROWS_AS(retrieval_mode_from_string("both"), ConfigError);
}

TEST_CASE("latest_answers picks each agent's newest talk") {
    DebateTranscript t;
    t.config.n_agents = 2;
    RoundRecord r1;
    r1.round = 1;
    for (int a = 0; a < 2; ++a) {
        Utterance u;
        u.agent_id = DebateTranscript::agent_label(a);
        u.purpose = Purpose::talk;
        u.round = 1;
        u.raw_text = "round1-agent" + std::to_string(a);
        r1.utterances.push_back(u);
    }
    r1.judge_verdict = Verdict::no_consensus;
    RoundRecord r2 = r1;
    r2.round = 2;
    for (auto& u : r2.utterances) u.raw_text = "round2-" + u.agent_id;
    t.rounds = {r1, r2};

    auto latest = t.latest_answers();
    REQUIRE(latest.size() == 2);
    CHECK(latest[0].first == "Agent_0");
    CHECK(latest[0].second == "round2-Agent_0");
    CHECK(latest[1].second == "round2-Agent_1");
}
