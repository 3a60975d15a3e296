#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "parley/backend.hpp"
#include "parley/dataset.hpp"
#include "parley/debate.hpp"
#include "parley/eval.hpp"
#include "parley/http_backend.hpp"
#include "parley/replay.hpp"
#include "parley/retrieval.hpp"
#include "parley/retrieval_http.hpp"
#include "parley/version.hpp"

namespace parley {

inline constexpr const char* kDeterministicTimestamp = "1970-01-01T00:00:00Z";

struct BackendSettings {
    std::string kind = "live";  // live | record | replay | scripted
    std::string model = "gpt-3.5-turbo";
    std::string eval_model;  // empty = same model for evaluation
    std::string endpoint;    // empty = OPENAI_BASE_URL or provider default
    std::string script_file;
    std::string cache_file;  // empty = <output_dir>/cache.jsonl
    int max_retries = 5;
    int timeout_s = 60;
    int max_tokens = 0;
    int max_concurrent = 4;
    double requests_per_minute = 0.0;
};

inline void to_json(json& j, const BackendSettings& b) {
    j = json{{"kind", b.kind},
             {"model", b.model},
             {"eval_model", b.eval_model},
             {"endpoint", b.endpoint},
             {"script_file", b.script_file},
             {"cache_file", b.cache_file},
             {"max_retries", b.max_retries},
             {"timeout_s", b.timeout_s},
             {"max_tokens", b.max_tokens},
             {"max_concurrent", b.max_concurrent},
             {"requests_per_minute", b.requests_per_minute}};
}

inline void from_json(const json& j, BackendSettings& b) {
    b.kind = j.value("kind", "live");
    b.model = j.value("model", "gpt-3.5-turbo");
    b.eval_model = j.value("eval_model", "");
    b.endpoint = j.value("endpoint", "");
    b.script_file = j.value("script_file", "");
    b.cache_file = j.value("cache_file", "");
    b.max_retries = j.value("max_retries", 5);
    b.timeout_s = j.value("timeout_s", 60);
    b.max_tokens = j.value("max_tokens", 0);
    b.max_concurrent = j.value("max_concurrent", 4);
    b.requests_per_minute = j.value("requests_per_minute", 0.0);
}

struct RetrievalSettings {
    std::string wiki_kind = "lexical";  // lexical | service
    std::string corpus_path;
    std::string wiki_service_url;
    std::string google_kind = "fixture";  // google | fixture
    std::string search_fixture;
};

inline void to_json(json& j, const RetrievalSettings& r) {
    j = json{{"wiki_kind", r.wiki_kind},
             {"corpus_path", r.corpus_path},
             {"wiki_service_url", r.wiki_service_url},
             {"google_kind", r.google_kind},
             {"search_fixture", r.search_fixture}};
}

inline void from_json(const json& j, RetrievalSettings& r) {
    r.wiki_kind = j.value("wiki_kind", "lexical");
    r.corpus_path = j.value("corpus_path", "");
    r.wiki_service_url = j.value("wiki_service_url", "");
    r.google_kind = j.value("google_kind", "fixture");
    r.search_fixture = j.value("search_fixture", "");
}

// Everything one run needs; the resolved copy is embedded in the output
// directory so runs stay self-describing.
struct ExperimentConfig {
    DebateConfig debate;
    std::string dataset_name = "hotpotqa";
    std::string dataset_path;
    int sample_size = 0;  // 0 = every sample
    BackendSettings backend;
    RetrievalSettings retrieval;
    std::string output_dir;
    int parallelism = 4;
    std::string prompt_dir = "assets/prompts";
    std::string label;

    std::string resolved_label() const {
        return label.empty() ? dataset_name : label;
    }

    // Scripted and replay backends produce byte-stable output; transcripts
    // then carry a fixed sentinel timestamp instead of wall-clock time.
    bool deterministic_output() const {
        return backend.kind == "scripted" || backend.kind == "replay";
    }

    void validate() const {
        debate.validate();
        if (dataset_path.empty()) throw ConfigError("dataset_path is required");
        if (!std::filesystem::exists(dataset_path))
            throw ConfigError("dataset_path does not exist: " + dataset_path);
        if (output_dir.empty()) throw ConfigError("output_dir is required");
        if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
        if (backend.kind != "live" && backend.kind != "record" && backend.kind != "replay" &&
            backend.kind != "scripted")
            throw ConfigError("unknown backend kind: " + backend.kind);
        if (backend.kind == "scripted" && backend.script_file.empty())
            throw ConfigError("scripted backend requires script_file");
    }
};

inline void to_json(json& j, const ExperimentConfig& c) {
    j = json{{"debate", c.debate},
             {"dataset", c.dataset_name},
             {"dataset_path", c.dataset_path},
             {"sample_size", c.sample_size},
             {"backend", c.backend},
             {"retrieval", c.retrieval},
             {"output_dir", c.output_dir},
             {"parallelism", c.parallelism},
             {"prompt_dir", c.prompt_dir},
             {"label", c.label}};
}

inline void from_json(const json& j, ExperimentConfig& c) {
    if (j.contains("debate")) c.debate = j.at("debate").get<DebateConfig>();
    c.dataset_name = j.value("dataset", "hotpotqa");
    c.dataset_path = j.value("dataset_path", "");
    c.sample_size = j.value("sample_size", 0);
    if (j.contains("backend")) c.backend = j.at("backend").get<BackendSettings>();
    if (j.contains("retrieval")) c.retrieval = j.at("retrieval").get<RetrievalSettings>();
    c.output_dir = j.value("output_dir", "");
    c.parallelism = j.value("parallelism", 4);
    c.prompt_dir = j.value("prompt_dir", "assets/prompts");
    c.label = j.value("label", "");
}

// Digest of the resolved config, written with every run and checked by the
// report merger.
inline std::string config_digest(const ExperimentConfig& cfg) {
    return util::to_hex(util::fnv1a64(json(cfg).dump()));
}

// Scripted backend loaded from a JSON script:
//   {"defaults": {"talk": "...", ...},
//    "exact": [{"purpose": ..., "agent_id": ..., "round": ..., "text": ...}],
//    "by_question": [{"question_contains": ..., "purpose": ..., "text": ...}]}
inline std::unique_ptr<ScriptedBackend> load_scripted_backend(const std::filesystem::path& path) {
    json spec;
    try {
        spec = json::parse(util::read_file(path));
    } catch (const json::exception& ex) {
        throw ConfigError("bad script file " + path.string() + ": " + ex.what());
    }
    auto backend = std::make_unique<ScriptedBackend>();
    for (const auto& rule : spec.value("by_question", json::array())) {
        const std::string needle = rule.at("question_contains").get<std::string>();
        const Purpose purpose = purpose_from_string(rule.at("purpose").get<std::string>());
        const std::string text = rule.at("text").get<std::string>();
        backend->add_handler([needle, purpose, text](const ChatRequest& req)
                                 -> std::optional<std::string> {
            if (req.tag.purpose != purpose) return std::nullopt;
            if (req.user_prompt.find(needle) == std::string::npos) return std::nullopt;
            return text;
        });
    }
    for (const auto& rule : spec.value("exact", json::array())) {
        backend->script(purpose_from_string(rule.at("purpose").get<std::string>()),
                        rule.at("agent_id").get<std::string>(), rule.at("round").get<int>(),
                        rule.at("text").get<std::string>());
    }
    if (spec.contains("defaults"))
        for (const auto& [purpose, text] : spec.at("defaults").items())
            backend->script_default(purpose_from_string(purpose), text.get<std::string>());
    return backend;
}

// Owns the backends and retrievers assembled for one run.
struct ExperimentRuntime {
    PromptLibrary prompts;
    std::shared_ptr<ReplayCache> cache;
    std::unique_ptr<ChatBackend> raw_debate;
    std::unique_ptr<ChatBackend> raw_eval;
    std::unique_ptr<ChatBackend> debate_backend;
    std::unique_ptr<ChatBackend> eval_backend;
    std::unique_ptr<LexicalIndex> lexical;
    std::unique_ptr<RemotePassageRetriever> remote_wiki;
    std::unique_ptr<SearchProvider> google;
    RetrieverSet retrievers;

    ChatBackend& debate() { return *debate_backend; }
    ChatBackend& eval() { return *eval_backend; }
};

inline ExperimentRuntime build_runtime(const ExperimentConfig& cfg) {
    ExperimentRuntime rt;
    rt.prompts = PromptLibrary::load(cfg.prompt_dir);

    const std::string cache_path = !cfg.backend.cache_file.empty()
                                       ? cfg.backend.cache_file
                                       : cfg.output_dir + "/cache.jsonl";
    if (cfg.backend.kind == "scripted") {
        auto scripted = load_scripted_backend(cfg.backend.script_file);
        if (!cfg.backend.cache_file.empty()) {
            // Recording a scripted run yields a cache the replay command can
            // verify against, same as for live runs.
            rt.raw_debate = std::move(scripted);
            rt.cache = std::make_shared<ReplayCache>(cache_path);
            rt.debate_backend =
                std::make_unique<CacheBackend>(rt.cache, CacheMode::record, rt.raw_debate.get());
        } else {
            rt.debate_backend = std::move(scripted);
        }
        // Scripted runs grade through the same script (purpose=eval rules).
        rt.eval_backend.reset();
    } else if (cfg.backend.kind == "replay") {
        rt.cache = std::make_shared<ReplayCache>(cache_path);
        rt.debate_backend = std::make_unique<CacheBackend>(rt.cache, CacheMode::replay_strict);
        rt.eval_backend = std::make_unique<CacheBackend>(rt.cache, CacheMode::replay_strict);
    } else {  // live | record: live client behind a recording cache
        HttpBackendConfig http = HttpBackendConfig::from_env();
        if (!cfg.backend.endpoint.empty()) http.base_url = cfg.backend.endpoint;
        http.model = cfg.backend.model;
        http.max_retries = cfg.backend.max_retries;
        http.timeout = std::chrono::seconds(cfg.backend.timeout_s);
        http.max_tokens = cfg.backend.max_tokens;
        http.max_concurrent = cfg.backend.max_concurrent;
        http.requests_per_minute = cfg.backend.requests_per_minute;
        rt.raw_debate = std::make_unique<HttpBackend>(http);
        HttpBackendConfig eval_http = http;
        if (!cfg.backend.eval_model.empty()) eval_http.model = cfg.backend.eval_model;
        rt.raw_eval = std::make_unique<HttpBackend>(eval_http);

        rt.cache = std::make_shared<ReplayCache>(cache_path);
        rt.debate_backend =
            std::make_unique<CacheBackend>(rt.cache, CacheMode::record, rt.raw_debate.get());
        rt.eval_backend =
            std::make_unique<CacheBackend>(rt.cache, CacheMode::record, rt.raw_eval.get());
    }

    const bool want_google = cfg.debate.retrieval_mode == RetrievalMode::google ||
                             cfg.debate.retrieval_mode == RetrievalMode::all;
    const bool want_wiki = cfg.debate.retrieval_mode == RetrievalMode::wiki ||
                           cfg.debate.retrieval_mode == RetrievalMode::all;
    if (want_wiki) {
        if (cfg.retrieval.wiki_kind == "lexical") {
            if (cfg.retrieval.corpus_path.empty())
                throw ConfigError("lexical retrieval requires corpus_path");
            rt.lexical = std::make_unique<LexicalIndex>(
                LexicalIndex::load_jsonl(cfg.retrieval.corpus_path));
            rt.retrievers.wikipedia = rt.lexical.get();
        } else if (cfg.retrieval.wiki_kind == "service") {
            if (cfg.retrieval.wiki_service_url.empty())
                throw ConfigError("service retrieval requires wiki_service_url");
            rt.remote_wiki =
                std::make_unique<RemotePassageRetriever>(cfg.retrieval.wiki_service_url);
            rt.retrievers.wikipedia = rt.remote_wiki.get();
        } else {
            throw ConfigError("unknown wiki retriever kind: " + cfg.retrieval.wiki_kind);
        }
    }
    if (want_google) {
        if (cfg.retrieval.google_kind == "fixture") {
            if (cfg.retrieval.search_fixture.empty())
                throw ConfigError("fixture search requires search_fixture");
            rt.google = std::make_unique<FixtureSearchProvider>(cfg.retrieval.search_fixture);
        } else if (cfg.retrieval.google_kind == "google") {
            rt.google = std::make_unique<GoogleSearchProvider>(GoogleSearchProvider::Config::from_env());
        } else {
            throw ConfigError("unknown google provider kind: " + cfg.retrieval.google_kind);
        }
        rt.retrievers.google = rt.google.get();
    }
    return rt;
}

struct RunOutcome {
    Metrics metrics;
    int completed = 0;
    int skipped = 0;  // already present from an earlier run
    int failed = 0;
};

namespace detail {

// Appends lines strictly in sample order no matter which worker finishes
// first, so output bytes do not depend on scheduling. The file is always an
// order-prefix of the full run, which is what makes interrupted runs safely
// resumable.
class OrderedWriter {
public:
    OrderedWriter(std::filesystem::path transcripts, std::filesystem::path results,
                  std::filesystem::path errors, size_t first_pending)
        : transcripts_(std::move(transcripts)), results_(std::move(results)),
          errors_(std::move(errors)), next_(first_pending) {}

    void deliver(size_t index, const DebateTranscript& transcript,
                 const std::optional<EvalResult>& result) {
        std::unique_lock<std::mutex> lock(mu_);
        pending_[index] = {json(transcript).dump(),
                           result ? std::optional<std::string>(json(*result).dump())
                                  : std::nullopt};
        flush(lock);
    }

    void skip(size_t index) {  // sample already on disk from a previous run
        std::unique_lock<std::mutex> lock(mu_);
        pending_[index] = {};
        flush(lock);
    }

private:
    struct Entry {
        std::optional<std::string> transcript_line;
        std::optional<std::string> result_line;
        Entry() = default;
        Entry(std::string t, std::optional<std::string> r)
            : transcript_line(std::move(t)), result_line(std::move(r)) {}
    };

    void flush(std::unique_lock<std::mutex>&) {
        for (auto it = pending_.find(next_); it != pending_.end();
             it = pending_.find(next_)) {
            const Entry& e = it->second;
            if (e.transcript_line) {
                if (e.result_line) {
                    append(transcripts_, *e.transcript_line);
                    append(results_, *e.result_line);
                } else {
                    append(errors_, *e.transcript_line);
                }
            }
            pending_.erase(it);
            ++next_;
        }
    }

    static void append(const std::filesystem::path& path, const std::string& line) {
        std::ofstream out(path, std::ios::app | std::ios::binary);
        if (!out) throw Error("cannot append to " + path.string());
        out << line << "\n";
    }

    std::filesystem::path transcripts_;
    std::filesystem::path results_;
    std::filesystem::path errors_;
    std::map<size_t, Entry> pending_;
    size_t next_;
    std::mutex mu_;
};

inline std::vector<json> read_jsonl(const std::filesystem::path& path) {
    std::vector<json> out;
    if (!std::filesystem::exists(path)) return out;
    std::ifstream in(path, std::ios::binary);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (util::trim(line).empty()) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::exception& ex) {
            throw Error(path.string() + " line " + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return out;
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace detail

// Runs debates over the sampled subset with bounded parallelism, grades them,
// and writes transcripts, results, and metrics under cfg.output_dir. Samples
// already present in transcripts.jsonl are skipped, so reruns over a completed
// directory issue zero new backend calls.
inline RunOutcome run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const Dataset dataset = dataset_from_string(cfg.dataset_name);
    std::filesystem::create_directories(cfg.output_dir);

    ExperimentRuntime rt = build_runtime(cfg);

    std::vector<Sample> samples = load_dataset(cfg.dataset_path, dataset);
    if (cfg.sample_size > 0)
        samples = sample_subset(samples, static_cast<size_t>(cfg.sample_size), cfg.debate.seed);
    if (samples.empty()) throw Error("no samples to run");

    // Self-describing output directory.
    json config_doc{{"schema_version", kTranscriptSchemaVersion},
                    {"version", kVersion},
                    {"config_digest", config_digest(cfg)},
                    {"config", cfg}};
    util::write_file(cfg.output_dir + "/config.json", config_doc.dump(2) + "\n");

    const auto transcripts_path = std::filesystem::path(cfg.output_dir) / "transcripts.jsonl";
    const auto results_path = std::filesystem::path(cfg.output_dir) / "results.jsonl";
    const auto errors_path = std::filesystem::path(cfg.output_dir) / "errors.jsonl";

    // Resume: anything already on disk is done.
    std::map<std::string, DebateTranscript> done_transcripts;
    std::map<std::string, EvalResult> done_results;
    for (const auto& doc : detail::read_jsonl(transcripts_path)) {
        DebateTranscript t = doc.get<DebateTranscript>();
        done_transcripts[t.question_id] = std::move(t);
    }
    for (const auto& doc : detail::read_jsonl(results_path)) {
        EvalResult r = doc.get<EvalResult>();
        done_results[r.sample_id] = std::move(r);
    }

    RunOutcome outcome;
    detail::OrderedWriter writer(transcripts_path, results_path, errors_path, 0);

    std::mutex collect_mu;
    std::vector<DebateTranscript> all_transcripts;
    std::vector<EvalResult> all_results;

    std::atomic<size_t> cursor{0};
    std::atomic<int> failures{0};
    std::vector<std::string> worker_errors;
    std::mutex error_mu;

    auto work = [&]() {
        for (;;) {
            const size_t index = cursor.fetch_add(1);
            if (index >= samples.size()) return;
            const Sample& sample = samples[index];

            auto already_t = done_transcripts.find(sample.id);
            auto already_r = done_results.find(sample.id);
            if (already_t != done_transcripts.end() && already_r != done_results.end()) {
                writer.skip(index);
                std::lock_guard<std::mutex> lock(collect_mu);
                all_transcripts.push_back(already_t->second);
                all_results.push_back(already_r->second);
                ++outcome.skipped;
                continue;
            }

            try {
                EvidencePool pool =
                    build_pool(sample.id, sample.question, cfg.debate.retrieval_mode,
                               rt.retrievers, cfg.debate.k_google, cfg.debate.k_wiki);
                const std::string timestamp =
                    cfg.deterministic_output()
                        ? kDeterministicTimestamp
                        : util::iso8601_utc(std::chrono::system_clock::now());
                DebateTranscript transcript = run_debate(sample.id, sample.question, pool,
                                                         cfg.debate, rt.debate(), rt.prompts,
                                                         timestamp);
                if (transcript.failed) {
                    writer.deliver(index, transcript, std::nullopt);
                    ++failures;
                    continue;
                }
                ChatBackend& grader = rt.eval_backend ? rt.eval() : rt.debate();
                EvalResult result = grade(rt.prompts, sample, transcript, grader);
                writer.deliver(index, transcript, result);
                std::lock_guard<std::mutex> lock(collect_mu);
                all_transcripts.push_back(std::move(transcript));
                all_results.push_back(std::move(result));
                ++outcome.completed;
            } catch (const std::exception& ex) {
                ++failures;
                std::lock_guard<std::mutex> lock(error_mu);
                worker_errors.push_back(sample.id + ": " + ex.what());
                writer.skip(index);
            }
        }
    };

    const int threads = std::min<int>(cfg.parallelism, static_cast<int>(samples.size()));
    std::vector<std::thread> pool_threads;
    for (int i = 0; i < threads; ++i) pool_threads.emplace_back(work);
    for (auto& t : pool_threads) t.join();

    for (const auto& msg : worker_errors) logging::error("sample failed: " + msg);
    outcome.failed = failures.load();
    if (all_results.empty())
        throw Error("every sample failed; see " + errors_path.string());

    Metrics metrics = aggregate(all_results, all_transcripts);
    metrics.dataset = cfg.dataset_name;
    metrics.config_label = cfg.resolved_label();
    outcome.metrics = metrics;

    json metrics_doc{{"schema_version", kTranscriptSchemaVersion},
                     {"version", kVersion},
                     {"config_digest", config_digest(cfg)},
                     {"metrics", metrics}};
    util::write_file(cfg.output_dir + "/metrics.json", metrics_doc.dump(2) + "\n");

    std::string csv =
        "dataset,config_label,n,accuracy,inconsistent_count,mean_rounds,mean_backend_calls\n";
    csv += metrics.dataset + "," + metrics.config_label + "," + std::to_string(metrics.n) + "," +
           detail::format_double(metrics.accuracy) + "," +
           std::to_string(metrics.inconsistent_count) + "," +
           detail::format_double(metrics.mean_rounds) + "," +
           detail::format_double(metrics.mean_backend_calls) + "\n";
    util::write_file(cfg.output_dir + "/metrics.csv", csv);
    return outcome;
}

// Ablation axes; the cartesian product is enumerated in a fixed order
// (retrieval mode, self-selection, agent count, round cap).
struct AblationGrid {
    std::vector<RetrievalMode> retrieval_modes;
    std::vector<bool> self_selection;
    std::vector<int> n_agents;
    std::vector<int> max_rounds;

    bool empty() const {
        return retrieval_modes.empty() && self_selection.empty() && n_agents.empty() &&
               max_rounds.empty();
    }

    std::vector<std::pair<std::string, ExperimentConfig>> enumerate(
        const ExperimentConfig& base) const {
        if (empty()) throw ConfigError("ablation grid has no axes");
        const auto modes = retrieval_modes.empty()
                               ? std::vector<RetrievalMode>{base.debate.retrieval_mode}
                               : retrieval_modes;
        const auto selections = self_selection.empty()
                                    ? std::vector<bool>{base.debate.self_selection_enabled}
                                    : self_selection;
        const auto agents = n_agents.empty() ? std::vector<int>{base.debate.n_agents} : n_agents;
        const auto rounds = max_rounds.empty() ? std::vector<int>{base.debate.max_rounds}
                                               : max_rounds;

        std::vector<std::pair<std::string, ExperimentConfig>> cells;
        for (RetrievalMode mode : modes)
            for (bool selection : selections)
                for (int agent_count : agents)
                    for (int round_cap : rounds) {
                        ExperimentConfig cfg = base;
                        cfg.debate.retrieval_mode = mode;
                        cfg.debate.self_selection_enabled = selection;
                        cfg.debate.n_agents = agent_count;
                        cfg.debate.max_rounds = round_cap;
                        std::string cell = "retrieval=" + to_string(mode) +
                                           ",selection=" + (selection ? "on" : "off") +
                                           ",agents=" + std::to_string(agent_count) +
                                           ",rounds=" + std::to_string(round_cap);
                        cfg.label = base.resolved_label() + "/" + cell;
                        cfg.output_dir = base.output_dir + "/cells/" + cell;
                        cells.emplace_back(cell, std::move(cfg));
                    }
        return cells;
    }
};

struct AblationOutcome {
    std::vector<std::pair<std::string, Metrics>> cells;
    std::string table_markdown;
};

namespace detail {

// "axis=value" fragments of a cell label, e.g. "retrieval=all".
inline std::string cell_axis_value(const std::string& cell, const std::string& axis) {
    const auto pos = cell.find(axis + "=");
    const auto start = pos + axis.size() + 1;
    const auto end = cell.find(',', start);
    return cell.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

}  // namespace detail

// One run per grid cell, then comparison tables: one row per cell, plus a
// marginal section per varied axis (accuracy and inconsistency per value).
inline AblationOutcome run_ablation(const ExperimentConfig& base, const AblationGrid& grid) {
    AblationOutcome out;
    for (auto& [cell, cfg] : grid.enumerate(base)) {
        logging::info("ablation cell: " + cell);
        RunOutcome run = run_experiment(cfg);
        out.cells.emplace_back(cell, run.metrics);
    }

    std::string md = "| cell | n | accuracy | inconsistent | mean rounds |\n";
    md += "|---|---|---|---|---|\n";
    std::string csv = "cell,n,accuracy,inconsistent_count,mean_rounds\n";
    for (const auto& [cell, m] : out.cells) {
        md += "| " + cell + " | " + std::to_string(m.n) + " | " +
              detail::format_double(m.accuracy) + " | " + std::to_string(m.inconsistent_count) +
              " | " + detail::format_double(m.mean_rounds) + " |\n";
        csv += cell + "," + std::to_string(m.n) + "," + detail::format_double(m.accuracy) + "," +
               std::to_string(m.inconsistent_count) + "," + detail::format_double(m.mean_rounds) +
               "\n";
    }

    for (const std::string axis : {"retrieval", "selection", "agents", "rounds"}) {
        std::vector<std::string> values;  // distinct, in cell order
        for (const auto& [cell, m] : out.cells) {
            const std::string v = detail::cell_axis_value(cell, axis);
            if (std::find(values.begin(), values.end(), v) == values.end()) values.push_back(v);
        }
        if (values.size() < 2) continue;
        md += "\n### by " + axis + "\n\n| " + axis + " | mean accuracy | inconsistent |\n";
        md += "|---|---|---|\n";
        for (const auto& v : values) {
            double accuracy_sum = 0.0;
            int inconsistent = 0;
            int cells = 0;
            for (const auto& [cell, m] : out.cells) {
                if (detail::cell_axis_value(cell, axis) != v) continue;
                accuracy_sum += m.accuracy;
                inconsistent += m.inconsistent_count;
                ++cells;
            }
            md += "| " + v + " | " + detail::format_double(accuracy_sum / cells) + " | " +
                  std::to_string(inconsistent) + " |\n";
        }
    }

    out.table_markdown = md;
    util::write_file(base.output_dir + "/ablation.md", md);
    util::write_file(base.output_dir + "/ablation.csv", csv);
    return out;
}

// Merges completed run directories into one table, flagging the best accuracy
// per dataset. Directories with mismatched schema versions are an error; runs
// with zero results are excluded with a warning.
inline std::string render_report(const std::vector<std::string>& run_dirs) {
    struct Row {
        Metrics metrics;
        std::string digest;
        std::string dir;
    };
    std::vector<Row> rows;
    std::map<std::string, std::string> digest_by_label;
    for (const auto& dir : run_dirs) {
        const auto metrics_path = std::filesystem::path(dir) / "metrics.json";
        if (!std::filesystem::exists(metrics_path)) {
            logging::warn("skipping " + dir + ": no metrics.json");
            continue;
        }
        json doc = json::parse(util::read_file(metrics_path));
        const int version = doc.value("schema_version", 0);
        if (version != kTranscriptSchemaVersion)
            throw Error("schema version mismatch in " + dir + ": " + std::to_string(version));
        Row row{doc.at("metrics").get<Metrics>(), doc.value("config_digest", ""), dir};
        if (row.metrics.n == 0) {
            logging::warn("skipping " + dir + ": zero results");
            continue;
        }
        auto [it, inserted] =
            digest_by_label.emplace(row.metrics.config_label, row.digest);
        if (!inserted && it->second != row.digest)
            throw Error("conflicting config digests for label '" + row.metrics.config_label +
                        "' (directory " + dir + ")");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error("no usable run directories");

    std::map<std::string, double> best_accuracy;
    for (const auto& row : rows) {
        auto [it, inserted] = best_accuracy.emplace(row.metrics.dataset, row.metrics.accuracy);
        if (!inserted) it->second = std::max(it->second, row.metrics.accuracy);
    }

    std::string md =
        "| dataset | run | n | accuracy | inconsistent | mean rounds | mean calls |\n"
        "|---|---|---|---|---|---|---|\n";
    for (const auto& row : rows) {
        const Metrics& m = row.metrics;
        const bool best = m.accuracy == best_accuracy.at(m.dataset);
        const std::string acc = detail::format_double(m.accuracy);
        md += "| " + m.dataset + " | " + m.config_label + " | " + std::to_string(m.n) + " | " +
              (best ? "**" + acc + "**" : acc) + " | " + std::to_string(m.inconsistent_count) +
              " | " + detail::format_double(m.mean_rounds) + " | " +
              detail::format_double(m.mean_backend_calls) + " |\n";
    }
    return md;
}

struct ReplayReport {
    int checked = 0;
    int divergent = 0;
    int skipped_failures = 0;
    std::vector<std::string> diffs;

    bool ok() const { return divergent == 0; }
};

namespace detail {

inline void diff_json(const json& expected, const json& actual, const std::string& path,
                      std::vector<std::string>& out, size_t limit = 16) {
    if (out.size() >= limit) return;
    if (expected == actual) return;
    if (expected.is_object() && actual.is_object()) {
        for (const auto& [key, value] : expected.items()) {
            if (!actual.contains(key))
                out.push_back(path + "/" + key + ": missing in replay");
            else
                diff_json(value, actual.at(key), path + "/" + key, out, limit);
        }
        for (const auto& [key, value] : actual.items())
            if (!expected.contains(key)) out.push_back(path + "/" + key + ": unexpected in replay");
        return;
    }
    if (expected.is_array() && actual.is_array()) {
        if (expected.size() != actual.size()) {
            out.push_back(path + ": length " + std::to_string(expected.size()) + " vs " +
                          std::to_string(actual.size()));
            return;
        }
        for (size_t i = 0; i < expected.size(); ++i)
            diff_json(expected.at(i), actual.at(i), path + "/" + std::to_string(i), out, limit);
        return;
    }
    out.push_back(path + ": " + expected.dump() + " vs " + actual.dump());
}

}  // namespace detail

// Re-executes every debate in a transcript stream against the replay cache
// and verifies byte-equality with the stored records. The stored timestamp is
// carried over before comparison; everything else must reproduce exactly.
inline ReplayReport replay_transcripts(const std::filesystem::path& transcripts_path,
                                       const std::filesystem::path& cache_path,
                                       const PromptLibrary& prompts) {
    ReplayReport report;
    auto cache = std::make_shared<ReplayCache>(cache_path);
    CacheBackend backend(cache, CacheMode::replay_strict);

    for (const auto& doc : detail::read_jsonl(transcripts_path)) {
        DebateTranscript stored = doc.get<DebateTranscript>();
        if (stored.failed) {
            ++report.skipped_failures;
            continue;
        }
        ++report.checked;
        DebateTranscript replayed =
            run_debate(stored.question_id, stored.question, stored.pool, stored.config, backend,
                       prompts, stored.timestamp);
        const std::string expected = doc.dump();
        const std::string actual = json(replayed).dump();
        if (expected != actual) {
            ++report.divergent;
            std::vector<std::string> diffs;
            detail::diff_json(doc, json(replayed), stored.question_id, diffs);
            report.diffs.insert(report.diffs.end(), diffs.begin(), diffs.end());
        }
    }
    return report;
}

}  // namespace parley
