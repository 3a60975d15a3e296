#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "parley/types.hpp"
#include "parley/util.hpp"

namespace parley {

class DatasetError : public Error {
public:
    using Error::Error;
};

enum class Dataset { triviaqa, nq, hotpotqa, two_wiki_multihop, fever, feverous };
enum class TaskType { single_hop, multi_hop, fact_check };

inline std::string to_string(Dataset d) {
    switch (d) {
        case Dataset::triviaqa: return "triviaqa";
        case Dataset::nq: return "nq";
        case Dataset::hotpotqa: return "hotpotqa";
        case Dataset::two_wiki_multihop: return "2wikimultihopqa";
        case Dataset::fever: return "fever";
        case Dataset::feverous: return "feverous";
    }
    return "triviaqa";
}

inline Dataset dataset_from_string(const std::string& s) {
    if (s == "triviaqa") return Dataset::triviaqa;
    if (s == "nq") return Dataset::nq;
    if (s == "hotpotqa") return Dataset::hotpotqa;
    if (s == "2wikimultihopqa") return Dataset::two_wiki_multihop;
    if (s == "fever") return Dataset::fever;
    if (s == "feverous") return Dataset::feverous;
    throw DatasetError("unknown dataset: " + s);
}

inline TaskType task_of(Dataset d) {
    switch (d) {
        case Dataset::triviaqa:
        case Dataset::nq: return TaskType::single_hop;
        case Dataset::hotpotqa:
        case Dataset::two_wiki_multihop: return TaskType::multi_hop;
        case Dataset::fever:
        case Dataset::feverous: return TaskType::fact_check;
    }
    return TaskType::single_hop;
}

inline bool is_fact_check(Dataset d) { return task_of(d) == TaskType::fact_check; }

// Canonical label space for the fact-checking datasets. Surface forms seen in
// FEVEROUS exports (SUPPORTED/REFUTED) are folded into the FEVER names.
inline std::string normalize_label(std::string_view raw) {
    std::string label = util::trim(raw);
    std::transform(label.begin(), label.end(), label.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (label == "SUPPORTED") label = "SUPPORTS";
    if (label == "REFUTED") label = "REFUTES";
    return label;
}

inline bool is_known_label(const std::string& normalized) {
    return normalized == "SUPPORTS" || normalized == "REFUTES" || normalized == "NOT ENOUGH INFO";
}

// One dataset item. QA samples carry gold_answers; fact-check samples carry a
// normalized gold_label.
struct Sample {
    std::string id;
    std::string question;
    std::vector<std::string> gold_answers;
    std::string gold_label;
    TaskType task = TaskType::single_hop;
    Dataset dataset = Dataset::triviaqa;
};

namespace detail {

inline void push_unique(std::vector<std::string>& out, std::string value) {
    if (value.empty()) return;
    if (std::find(out.begin(), out.end(), value) == out.end()) out.push_back(std::move(value));
}

// Per-dataset JSONL field mappings:
//   triviaqa        {question_id, question, answer:{value, aliases[]}}
//   nq              {question, answer:[...]}            (open-domain export)
//   hotpotqa        {_id, question, answer}
//   2wikimultihopqa {_id, question, answer}
//   fever           {id, claim, label}
//   feverous        {id, claim, label}
// Items with no id field get "<dataset>-<line>".
inline Sample parse_sample(const json& j, Dataset dataset, size_t line_no) {
    Sample s;
    s.dataset = dataset;
    s.task = task_of(dataset);
    switch (dataset) {
        case Dataset::triviaqa: {
            s.id = j.value("question_id", "");
            s.question = j.at("question").get<std::string>();
            const json& answer = j.at("answer");
            push_unique(s.gold_answers, answer.value("value", ""));
            if (answer.contains("aliases"))
                for (const auto& alias : answer.at("aliases"))
                    push_unique(s.gold_answers, alias.get<std::string>());
            break;
        }
        case Dataset::nq: {
            s.id = j.value("id", "");
            s.question = j.at("question").get<std::string>();
            for (const auto& a : j.at("answer"))
                push_unique(s.gold_answers, a.get<std::string>());
            break;
        }
        case Dataset::hotpotqa:
        case Dataset::two_wiki_multihop: {
            s.id = j.value("_id", "");
            s.question = j.at("question").get<std::string>();
            push_unique(s.gold_answers, j.at("answer").get<std::string>());
            break;
        }
        case Dataset::fever:
        case Dataset::feverous: {
            if (j.contains("id"))
                s.id = j.at("id").is_string() ? j.at("id").get<std::string>()
                                              : std::to_string(j.at("id").get<long>());
            s.question = j.at("claim").get<std::string>();
            s.gold_label = normalize_label(j.at("label").get<std::string>());
            if (!is_known_label(s.gold_label))
                throw DatasetError("unknown label '" + s.gold_label + "'");
            break;
        }
    }
    if (s.id.empty()) s.id = to_string(dataset) + "-" + std::to_string(line_no);
    if (s.task != TaskType::fact_check && s.gold_answers.empty())
        throw DatasetError("sample has no gold answers");
    return s;
}

}  // namespace detail

inline std::vector<Sample> load_dataset(const std::filesystem::path& path, Dataset dataset) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetError("cannot open dataset: " + path.string());
    std::vector<Sample> samples;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (util::trim(line).empty()) continue;
        try {
            samples.push_back(detail::parse_sample(json::parse(line), dataset, line_no));
        } catch (const json::exception& ex) {
            throw DatasetError(path.string() + " line " + std::to_string(line_no) + ": " +
                               ex.what());
        } catch (const DatasetError& ex) {
            throw DatasetError(path.string() + " line " + std::to_string(line_no) + ": " +
                               ex.what());
        }
    }
    if (samples.empty()) logging::warn("dataset " + path.string() + " is empty");
    return samples;
}

// Uniform sample without replacement via a partial Fisher-Yates shuffle.
// Deterministic for a fixed seed on every platform (no distribution objects).
inline std::vector<Sample> sample_subset(const std::vector<Sample>& samples, size_t n,
                                         uint64_t seed) {
    if (n > samples.size())
        throw DatasetError("cannot sample " + std::to_string(n) + " items from " +
                           std::to_string(samples.size()));
    std::vector<size_t> indices(samples.size());
    for (size_t i = 0; i < indices.size(); ++i) indices[i] = i;
    std::mt19937_64 rng(seed);
    std::vector<Sample> out;
    out.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        const size_t j = i + util::bounded_draw(rng, indices.size() - i);
        std::swap(indices[i], indices[j]);
        out.push_back(samples[indices[i]]);
    }
    return out;
}

}  // namespace parley
