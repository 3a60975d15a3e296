#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "parley/types.hpp"
#include "parley/util.hpp"

namespace parley {

enum class TemplateName {
    simultaneous_talk,
    orderly_talk,
    judgement,
    summary,
    self_selection,
    gpt4_eval,
};

inline std::string to_string(TemplateName t) {
    switch (t) {
        case TemplateName::simultaneous_talk: return "simultaneous_talk";
        case TemplateName::orderly_talk: return "orderly_talk";
        case TemplateName::judgement: return "judgement";
        case TemplateName::summary: return "summary";
        case TemplateName::self_selection: return "self_selection";
        case TemplateName::gpt4_eval: return "gpt4_eval";
    }
    return "simultaneous_talk";
}

class RenderError : public Error {
public:
    using Error::Error;
};

using Bindings = std::map<std::string, std::string>;

// Substitutes {slot} markers from `bindings`. Rendering is pure: the output
// depends only on the template body and the bindings. An unbound slot is an
// error that names the slot, never a silent omission.
inline std::string render_template(std::string_view body, const Bindings& bindings,
                                   std::string_view template_name = "") {
    std::string out;
    out.reserve(body.size());
    size_t i = 0;
    while (i < body.size()) {
        if (body[i] != '{') {
            out.push_back(body[i]);
            ++i;
            continue;
        }
        size_t close = body.find('}', i + 1);
        if (close == std::string_view::npos) {
            out.append(body.substr(i));
            break;
        }
        std::string slot(body.substr(i + 1, close - i - 1));
        auto it = bindings.find(slot);
        if (it == bindings.end())
            throw RenderError("unbound slot {" + slot + "} in template " +
                              std::string(template_name));
        out.append(it->second);
        i = close + 1;
    }
    return out;
}

/// Loads the prompt templates, role prompts, and stock few-shot blocks from a
/// directory of UTF-8 text assets (newlines normalized to LF). The asset text
/// is the single source of truth for every prompt the engine sends.
class PromptLibrary {
public:
    static PromptLibrary load(const std::filesystem::path& dir) {
        PromptLibrary lib;
        lib.dir_ = dir;
        for (TemplateName t :
             {TemplateName::simultaneous_talk, TemplateName::orderly_talk,
              TemplateName::judgement, TemplateName::summary, TemplateName::self_selection,
              TemplateName::gpt4_eval}) {
            lib.templates_[t] = load_asset(dir / (to_string(t) + ".txt"));
        }
        for (Role r : {Role::debater, Role::judge, Role::summarizer, Role::evaluator}) {
            lib.roles_[r] = load_asset(dir / "roles" / (to_string(r) + ".txt"));
        }
        lib.simultaneous_example_ = load_asset(dir / "examples" / "simultaneous_talk_example.txt");
        lib.summary_examples_ = load_asset(dir / "examples" / "summary_examples.txt");
        return lib;
    }

    std::string render(TemplateName name, const Bindings& bindings) const {
        return render_template(templates_.at(name), bindings, to_string(name));
    }

    const std::string& system_prompt(Role role) const { return roles_.at(role); }

    const std::string& template_body(TemplateName name) const { return templates_.at(name); }

    // Fixed one-shot example bound to {example} in simultaneous-talk prompts.
    const std::string& simultaneous_example() const { return simultaneous_example_; }

    // Fixed few-shot block bound to {examples} in summary prompts.
    const std::string& summary_examples() const { return summary_examples_; }

    const std::filesystem::path& dir() const { return dir_; }

private:
    static std::string load_asset(const std::filesystem::path& path) {
        return util::normalize_newlines(util::read_file(path));
    }

    std::filesystem::path dir_;
    std::map<TemplateName, std::string> templates_;
    std::map<Role, std::string> roles_;
    std::string simultaneous_example_;
    std::string summary_examples_;
};

}  // namespace parley
