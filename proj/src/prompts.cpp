#include "claimex/prompts.hpp"

#include <json.hpp>

#include "claimex/error.hpp"
#include "claimex/util.hpp"

namespace claimex {

std::string_view to_string(PromptName name) {
    switch (name) {
        case PromptName::reference_eval: return "reference_eval";
        case PromptName::entailment_eval: return "entailment_eval";
        case PromptName::decontext_eval: return "decontext_eval";
        case PromptName::extract_text_only: return "extract_text_only";
        case PromptName::extract_image_text: return "extract_image_text";
        case PromptName::context_breakdown: return "context_breakdown";
    }
    return "unknown";
}

std::string PromptLibrary::normalize(std::string_view text) {
    std::vector<std::string> lines;
    std::string current;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) lines.push_back(current);
    for (std::string& line : lines) {
        size_t end = line.size();
        while (end > 0 && (line[end - 1] == ' ' || line[end - 1] == '\t' || line[end - 1] == '\r')) --end;
        line.resize(end);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    std::string out;
    for (const std::string& line : lines) {
        out += line;
        out += '\n';
    }
    return out;
}

std::string PromptLibrary::checksum(std::string_view text) {
    return sha256_hex(normalize(text));
}

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::config, "prompt manifest unreadable: " + std::string(e.what()));
    } catch (const Error& e) {
        fail(ErrorKind::config, "prompt manifest unreadable: " + std::string(e.what()));
    }

    PromptLibrary lib;
    for (PromptName name : all_prompt_names) {
        std::string key(to_string(name));
        auto it = manifest.find(key);
        if (it == manifest.end() || !it->is_string()) {
            fail(ErrorKind::config, "prompt manifest missing entry '" + key + "'");
        }
        std::string expected = it->get<std::string>();
        std::string text;
        try {
            text = normalize(read_text_file(dir / (key + ".txt")));
        } catch (const Error& e) {
            fail(ErrorKind::config,
                 "prompt template '" + key + "' unreadable: " + std::string(e.what()));
        }
        std::string actual = sha256_hex(text);
        if (actual != expected) {
            fail(ErrorKind::config,
                 "prompt template '" + key + "' checksum mismatch (have " + actual +
                     ", manifest " + expected + ")");
        }
        lib.texts_.emplace(name, std::move(text));
        lib.checksums_.emplace(std::move(key), std::move(expected));
    }
    return lib;
}

const std::string& PromptLibrary::text(PromptName name) const {
    auto it = texts_.find(name);
    if (it == texts_.end()) {
        fail(ErrorKind::config, "prompt template not loaded: " + std::string(to_string(name)));
    }
    return it->second;
}

std::string substitute(
    std::string_view tmpl,
    const std::vector<std::pair<std::string_view, std::string_view>>& replacements) {
    std::string out(tmpl);
    for (const auto& [placeholder, value] : replacements) {
        if (placeholder.empty()) continue;
        size_t pos = 0;
        while ((pos = out.find(placeholder, pos)) != std::string::npos) {
            out.replace(pos, placeholder.size(), value);
            pos += value.size();
        }
    }
    return out;
}

}  // namespace claimex
