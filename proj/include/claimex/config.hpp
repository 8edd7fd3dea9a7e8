#pragma once

#include <string>
#include <vector>

namespace claimex {

enum class BackendMode {
    replay,  // recorded fixtures only; no network
    live,    // call providers, recording every response into the fixture store
};

BackendMode parse_mode(const std::string& name);
std::string to_string(BackendMode mode);

// Runtime settings. The config file carries the NAMES of the credential
// environment variables, never the credentials themselves.
struct Config {
    std::string provider_base_url = "https://openrouter.ai/api";
    std::string api_key_env = "OPENROUTER_API_KEY";
    std::vector<std::string> extract_models = {"google/gemini-2.0-flash-001"};
    std::string judge_model = "google/gemini-2.5-flash-lite";
    std::string vision_base_url;
    std::string vision_key_env = "VISION_API_KEY";
    std::size_t shots = 5;       // demonstrations per request
    int image_budget = 30;       // total images per request, query included
    std::size_t workers = 4;     // bounded pool for per-pair work
    std::string fixture_dir = "fixtures";
    std::string prompts_dir = "assets/prompts";
    BackendMode mode = BackendMode::replay;

    void validate() const;
};

// Parse the key = value config format: one pair per line, # comments,
// optional double quotes around values, lists comma-separated. Unknown keys
// are rejected so typos fail loudly.
Config parse_config(const std::string& text, const std::string& origin);
Config load_config(const std::string& path);

}  // namespace claimex
