#include "claimex/config.hpp"

#include <sstream>

#include "claimex/error.hpp"
#include "claimex/util.hpp"

namespace claimex {

BackendMode parse_mode(const std::string& name) {
    if (name == "replay") return BackendMode::replay;
    if (name == "live") return BackendMode::live;
    fail(ErrorKind::usage, "unknown backend mode \"" + name + "\" (expected replay or live)");
}

std::string to_string(BackendMode mode) {
    return mode == BackendMode::replay ? "replay" : "live";
}

void Config::validate() const {
    if (extract_models.empty()) fail(ErrorKind::config, "no extraction models configured");
    if (judge_model.empty()) fail(ErrorKind::config, "no judge model configured");
    if (image_budget < 0) fail(ErrorKind::config, "image_budget must be ≥ 0 (0 disables the cap)");
    if (workers == 0) fail(ErrorKind::config, "workers must be ≥ 1");
    if (prompts_dir.empty()) fail(ErrorKind::config, "prompts_dir must be set");
    if (fixture_dir.empty()) fail(ErrorKind::config, "fixture_dir must be set");
}

namespace {

std::string unquote(const std::string& value, const std::string& where) {
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
        return value.substr(1, value.size() - 2);
    }
    if (!value.empty() && (value.front() == '"' || value.back() == '"')) {
        fail(ErrorKind::config, where + ": unbalanced quotes in value " + value);
    }
    return value;
}

std::size_t parse_count(const std::string& value, const std::string& where) {
    try {
        std::size_t consumed = 0;
        long long n = std::stoll(value, &consumed);
        if (consumed != value.size() || n < 0) throw std::invalid_argument(value);
        return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
        fail(ErrorKind::config, where + ": expected a non-negative integer, found \"" + value + "\"");
    }
}

}  // namespace

Config parse_config(const std::string& text, const std::string& origin) {
    Config config;
    std::istringstream stream(text);
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(stream, line)) {
        ++line_number;
        std::string trimmed = trim(line);
        if (trimmed.empty() || trimmed[0] == '#') continue;
        std::string where = origin + ":" + std::to_string(line_number);

        auto eq = trimmed.find('=');
        if (eq == std::string::npos) {
            fail(ErrorKind::config, where + ": expected key = value, found \"" + trimmed + "\"");
        }
        std::string key = trim(trimmed.substr(0, eq));
        std::string value = unquote(trim(trimmed.substr(eq + 1)), where);
        if (key.empty()) fail(ErrorKind::config, where + ": empty key");

        if (key == "provider_base_url") {
            config.provider_base_url = value;
        } else if (key == "api_key_env") {
            config.api_key_env = value;
        } else if (key == "extract_models") {
            config.extract_models = split_list(value, ",");
            if (config.extract_models.empty()) {
                fail(ErrorKind::config, where + ": extract_models must name at least one model");
            }
        } else if (key == "judge_model") {
            config.judge_model = value;
        } else if (key == "vision_base_url") {
            config.vision_base_url = value;
        } else if (key == "vision_key_env") {
            config.vision_key_env = value;
        } else if (key == "shots") {
            config.shots = parse_count(value, where);
        } else if (key == "image_budget") {
            config.image_budget = static_cast<int>(parse_count(value, where));
        } else if (key == "workers") {
            config.workers = parse_count(value, where);
            if (config.workers == 0) fail(ErrorKind::config, where + ": workers must be ≥ 1");
        } else if (key == "fixture_dir") {
            config.fixture_dir = value;
        } else if (key == "prompts_dir") {
            config.prompts_dir = value;
        } else if (key == "mode") {
            config.mode = parse_mode(value);
        } else {
            fail(ErrorKind::config, where + ": unknown config key \"" + key + "\"");
        }
    }
    config.validate();
    return config;
}

Config load_config(const std::string& path) {
    return parse_config(read_text_file(path), path);
}

}  // namespace claimex
