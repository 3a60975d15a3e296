// Command-line driver: run experiments, sweep ablations, merge reports, and
// verify recorded debates against the replay cache.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "parley/parley.hpp"

namespace {

using namespace parley;

struct CliOverrides {
    CLI::App* cmd = nullptr;

    std::string config_file;
    std::string dataset;
    std::string dataset_path;
    int sample_size = 0;
    std::string output_dir;
    int parallelism = 4;
    std::string prompt_dir;
    std::string label;

    int n_agents = 2;
    int max_rounds = 3;
    double temperature = 0.5;
    int k_google = 5;
    int k_wiki = 10;
    int max_selected = 3;
    std::string retrieval_mode;
    bool self_selection_on = false;
    bool self_selection_off = false;
    uint64_t seed = 0;

    std::string backend_kind;
    std::string model;
    std::string eval_model;
    std::string endpoint;
    std::string script_file;
    std::string cache_file;

    std::string wiki_kind;
    std::string corpus_path;
    std::string wiki_service_url;
    std::string google_kind;
    std::string search_fixture;

    void attach(CLI::App& app) {
        cmd = &app;
        app.add_option("--config", config_file, "JSON config file (flags override it)");
        app.add_option("--dataset", dataset, "dataset name");
        app.add_option("--dataset-path", dataset_path, "dataset JSONL path");
        app.add_option("--sample-size", sample_size, "evaluation subset size (0 = all)");
        app.add_option("--output-dir", output_dir, "run output directory");
        app.add_option("--parallelism", parallelism, "concurrent debates");
        app.add_option("--prompt-dir", prompt_dir, "prompt asset directory");
        app.add_option("--label", label, "run label for reports");

        app.add_option("--agents", n_agents, "number of debaters");
        app.add_option("--rounds", max_rounds, "maximum debate rounds");
        app.add_option("--temperature", temperature, "sampling temperature");
        app.add_option("--k-google", k_google, "google snippet limit");
        app.add_option("--k-wiki", k_wiki, "wikipedia passage limit");
        app.add_option("--max-selected", max_selected, "evidence picks per debater per round");
        app.add_option("--retrieval-mode", retrieval_mode, "none|wiki|google|all");
        app.add_flag("--self-selection", self_selection_on, "enable evidence self-selection");
        app.add_flag("--no-self-selection", self_selection_off, "disable evidence self-selection");
        app.add_option("--seed", seed, "sampling seed");

        app.add_option("--backend", backend_kind, "live|record|replay|scripted");
        app.add_option("--model", model, "chat model name");
        app.add_option("--eval-model", eval_model, "grading model name");
        app.add_option("--endpoint", endpoint, "OpenAI-compatible base URL");
        app.add_option("--script-file", script_file, "scripted backend script");
        app.add_option("--cache-file", cache_file, "replay cache path");

        app.add_option("--wiki-kind", wiki_kind, "lexical|service");
        app.add_option("--corpus", corpus_path, "local corpus JSONL");
        app.add_option("--wiki-service", wiki_service_url, "passage service URL");
        app.add_option("--google-kind", google_kind, "google|fixture");
        app.add_option("--search-fixture", search_fixture, "search fixture JSON");
    }

    bool set(const std::string& flag) const { return cmd->count(flag) > 0; }

    ExperimentConfig resolve() const {
        ExperimentConfig cfg;
        if (!config_file.empty())
            cfg = json::parse(util::read_file(config_file)).get<ExperimentConfig>();

        if (set("--dataset")) cfg.dataset_name = dataset;
        if (set("--dataset-path")) cfg.dataset_path = dataset_path;
        if (set("--sample-size")) cfg.sample_size = sample_size;
        if (set("--output-dir")) cfg.output_dir = output_dir;
        if (set("--parallelism")) cfg.parallelism = parallelism;
        if (set("--prompt-dir")) cfg.prompt_dir = prompt_dir;
        if (set("--label")) cfg.label = label;

        if (set("--agents")) cfg.debate.n_agents = n_agents;
        if (set("--rounds")) cfg.debate.max_rounds = max_rounds;
        if (set("--temperature")) cfg.debate.temperature = temperature;
        if (set("--k-google")) cfg.debate.k_google = k_google;
        if (set("--k-wiki")) cfg.debate.k_wiki = k_wiki;
        if (set("--max-selected")) cfg.debate.max_selected = max_selected;
        if (set("--retrieval-mode"))
            cfg.debate.retrieval_mode = retrieval_mode_from_string(retrieval_mode);
        if (self_selection_on) cfg.debate.self_selection_enabled = true;
        if (self_selection_off) cfg.debate.self_selection_enabled = false;
        if (set("--seed")) cfg.debate.seed = seed;

        if (set("--backend")) cfg.backend.kind = backend_kind;
        if (set("--model")) cfg.backend.model = model;
        if (set("--eval-model")) cfg.backend.eval_model = eval_model;
        if (set("--endpoint")) cfg.backend.endpoint = endpoint;
        if (set("--script-file")) cfg.backend.script_file = script_file;
        if (set("--cache-file")) cfg.backend.cache_file = cache_file;

        if (set("--wiki-kind")) cfg.retrieval.wiki_kind = wiki_kind;
        if (set("--corpus")) cfg.retrieval.corpus_path = corpus_path;
        if (set("--wiki-service")) cfg.retrieval.wiki_service_url = wiki_service_url;
        if (set("--google-kind")) cfg.retrieval.google_kind = google_kind;
        if (set("--search-fixture")) cfg.retrieval.search_fixture = search_fixture;
        return cfg;
    }
};

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string current;
    for (char c : s) {
        if (c == ',') {
            out.push_back(util::trim(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) out.push_back(util::trim(current));
    return out;
}

AblationGrid parse_grid(const std::vector<std::string>& axes) {
    AblationGrid grid;
    for (const auto& axis : axes) {
        const auto eq = axis.find('=');
        if (eq == std::string::npos)
            throw ConfigError("axis must look like name=v1,v2: " + axis);
        const std::string name = axis.substr(0, eq);
        const auto values = split_csv(axis.substr(eq + 1));
        if (values.empty()) throw ConfigError("axis has no values: " + axis);
        if (name == "retrieval_mode") {
            for (const auto& v : values)
                grid.retrieval_modes.push_back(retrieval_mode_from_string(v));
        } else if (name == "self_selection") {
            for (const auto& v : values) {
                if (v == "on" || v == "true") grid.self_selection.push_back(true);
                else if (v == "off" || v == "false") grid.self_selection.push_back(false);
                else throw ConfigError("self_selection values are on/off: " + v);
            }
        } else if (name == "n_agents") {
            for (const auto& v : values) grid.n_agents.push_back(std::stoi(v));
        } else if (name == "max_rounds") {
            for (const auto& v : values) grid.max_rounds.push_back(std::stoi(v));
        } else {
            throw ConfigError("unknown ablation axis: " + name);
        }
    }
    return grid;
}

int cmd_run(const CliOverrides& opts) {
    ExperimentConfig cfg = opts.resolve();
    RunOutcome outcome = run_experiment(cfg);
    std::cout << "run complete: " << outcome.completed << " debated, " << outcome.skipped
              << " resumed, " << outcome.failed << " failed\n";
    std::cout << "dataset=" << outcome.metrics.dataset << " n=" << outcome.metrics.n
              << " accuracy=" << outcome.metrics.accuracy
              << " inconsistent=" << outcome.metrics.inconsistent_count << "\n";
    std::cout << "outputs in " << cfg.output_dir << "\n";
    return 0;
}

int cmd_ablate(const CliOverrides& opts, const std::vector<std::string>& axes) {
    ExperimentConfig base = opts.resolve();
    AblationOutcome outcome = run_ablation(base, parse_grid(axes));
    std::cout << outcome.table_markdown;
    std::cout << "tables in " << base.output_dir << "/ablation.md\n";
    return 0;
}

int cmd_report(const std::vector<std::string>& dirs, const std::string& out_file) {
    std::string table = render_report(dirs);
    if (!out_file.empty()) util::write_file(out_file, table);
    std::cout << table;
    return 0;
}

int cmd_replay(const std::string& transcripts, std::string cache, const std::string& prompt_dir) {
    if (cache.empty())
        cache = (std::filesystem::path(transcripts).parent_path() / "cache.jsonl").string();
    PromptLibrary prompts = PromptLibrary::load(prompt_dir);
    ReplayReport report = replay_transcripts(transcripts, cache, prompts);
    std::cout << "replayed " << report.checked << " debates, " << report.divergent
              << " divergent, " << report.skipped_failures << " failure records skipped\n";
    for (const auto& diff : report.diffs) std::cout << "  diff " << diff << "\n";
    return report.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"retrieval-augmented multi-agent debate engine"};
    app.require_subcommand(1);

    CliOverrides run_opts;
    CLI::App* run = app.add_subcommand("run", "run debates over a dataset sample");
    run_opts.attach(*run);

    CliOverrides ablate_opts;
    std::vector<std::string> axes;
    CLI::App* ablate = app.add_subcommand("ablate", "run an ablation grid");
    ablate_opts.attach(*ablate);
    ablate->add_option("--axis", axes, "axis spec, e.g. retrieval_mode=none,wiki,google,all")
        ->required();

    std::vector<std::string> report_dirs;
    std::string report_out;
    CLI::App* report = app.add_subcommand("report", "merge run directories into one table");
    report->add_option("dirs", report_dirs, "completed run directories")->required();
    report->add_option("--out", report_out, "write the table to a file as well");

    std::string replay_transcripts_path;
    std::string replay_cache;
    std::string replay_prompts = "assets/prompts";
    CLI::App* replay = app.add_subcommand("replay", "re-execute recorded debates and compare");
    replay->add_option("transcripts", replay_transcripts_path, "transcripts.jsonl path")
        ->required();
    replay->add_option("--cache", replay_cache, "replay cache (default: sibling cache.jsonl)");
    replay->add_option("--prompts", replay_prompts, "prompt asset directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_opts);
        if (ablate->parsed()) return cmd_ablate(ablate_opts, axes);
        if (report->parsed()) return cmd_report(report_dirs, report_out);
        if (replay->parsed())
            return cmd_replay(replay_transcripts_path, replay_cache, replay_prompts);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    return 0;
}
