#include "claimex/gateway.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>

#include "claimex/error.hpp"
#include "claimex/util.hpp"

using nlohmann::json;

namespace claimex {

void ChatRequest::add_text(std::string text) {
    segments.push_back(TextSegment{std::move(text)});
}

void ChatRequest::add_image(ImagePayload image) {
    segments.push_back(ImageSegment{std::move(image)});
}

std::string ChatRequest::text() const {
    std::string out;
    for (const auto& segment : segments) {
        if (const auto* t = std::get_if<TextSegment>(&segment)) {
            if (!out.empty()) out += '\n';
            out += t->text;
        }
    }
    return out;
}

std::size_t ChatRequest::image_count() const {
    std::size_t n = 0;
    for (const auto& segment : segments) {
        if (std::holds_alternative<ImageSegment>(segment)) ++n;
    }
    return n;
}

void ChatRequest::validate() const {
    if (model.empty()) fail(ErrorKind::config, "chat request has no model");
    bool has_text = false;
    for (const auto& segment : segments) {
        if (const auto* t = std::get_if<TextSegment>(&segment)) {
            if (!t->text.empty()) has_text = true;
        }
    }
    if (!has_text) fail(ErrorKind::config, "chat request has no text content");
}

std::string canonical_request_json(const ChatRequest& request) {
    json segments = json::array();
    for (const auto& segment : request.segments) {
        if (const auto* t = std::get_if<TextSegment>(&segment)) {
            segments.push_back(json{{"kind", "text"}, {"text", t->text}});
        } else {
            const auto& img = std::get<ImageSegment>(segment).image;
            segments.push_back(json{{"kind", "image"},
                                    {"media_type", img.media_type},
                                    {"sha256", sha256_hex(img.bytes)}});
        }
    }
    json doc{{"model", request.model},
             {"temperature", request.temperature},
             {"segments", std::move(segments)}};
    return doc.dump();  // json uses std::map: keys come out sorted
}

std::string cache_key(const ChatRequest& request) {
    return sha256_hex(canonical_request_json(request));
}

FixtureStore::FixtureStore(std::filesystem::path root) : root_(std::move(root)) {
    std::filesystem::create_directories(root_);
}

std::filesystem::path FixtureStore::path_for(const std::string& key) const {
    if (key.size() < 3) fail(ErrorKind::config, "fixture key too short: " + key);
    return root_ / key.substr(0, 2) / (key + ".json");
}

bool FixtureStore::contains(const std::string& key) const {
    return std::filesystem::exists(path_for(key));
}

std::optional<ChatResponse> FixtureStore::load(const std::string& key) const {
    auto path = path_for(key);
    if (!std::filesystem::exists(path)) return std::nullopt;
    json doc;
    try {
        doc = json::parse(read_text_file(path.string()));
    } catch (const json::exception& e) {
        fail(ErrorKind::data, "corrupt fixture " + path.string() + ": " + e.what());
    }
    if (!doc.contains("response") || !doc["response"].contains("text")) {
        fail(ErrorKind::data, "fixture " + path.string() + " has no response text");
    }
    return ChatResponse{doc["response"]["text"].get<std::string>()};
}

void FixtureStore::store(const std::string& key, const ChatRequest& request,
                         const ChatResponse& response) {
    json doc{{"key", key},
             {"request", json::parse(canonical_request_json(request))},
             {"response", json{{"text", response.text}}}};
    auto path = path_for(key);
    std::lock_guard<std::mutex> lock(write_mutex_);
    std::filesystem::create_directories(path.parent_path());
    write_file_atomic(path.string(), doc.dump(2) + "\n");
}

std::vector<std::string> FixtureStore::keys() const {
    std::vector<std::string> out;
    if (!std::filesystem::exists(root_)) return out;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root_)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        out.push_back(entry.path().stem().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::size_t FixtureStore::size() const { return keys().size(); }

std::string FixtureStore::digest() const {
    std::string material;
    for (const auto& key : keys()) {
        material += key;
        material += '\n';
        material += read_text_file(path_for(key).string());
        material += '\n';
    }
    return sha256_hex(material);
}

ReplayChatBackend::ReplayChatBackend(std::shared_ptr<FixtureStore> store)
    : store_(std::move(store)) {}

ChatResponse ReplayChatBackend::complete(const ChatRequest& request) {
    std::string key = cache_key(request);
    auto hit = store_->load(key);
    if (!hit) {
        fail(ErrorKind::missing_fixture,
             "no recorded response for request " + key + " (model " + request.model +
                 ") in " + store_->root().string());
    }
    return *hit;
}

CachingChatBackend::CachingChatBackend(std::shared_ptr<FixtureStore> store,
                                       std::shared_ptr<ChatBackend> inner)
    : store_(std::move(store)), inner_(std::move(inner)) {}

ChatResponse CachingChatBackend::complete(const ChatRequest& request) {
    std::string key = cache_key(request);
    if (auto hit = store_->load(key)) return *hit;
    ChatResponse response = inner_->complete(request);
    store_->store(key, request, response);
    return response;
}

std::string chat_wire_body(const ChatRequest& request) {
    json content = json::array();
    for (const auto& segment : request.segments) {
        if (const auto* t = std::get_if<TextSegment>(&segment)) {
            content.push_back(json{{"type", "text"}, {"text", t->text}});
        } else {
            const auto& img = std::get<ImageSegment>(segment).image;
            std::string uri = "data:" + img.media_type + ";base64," + base64_encode(img.bytes);
            content.push_back(
                json{{"type", "image_url"}, {"image_url", json{{"url", uri}}}});
        }
    }
    json body{{"model", request.model},
              {"temperature", request.temperature},
              {"messages", json::array({json{{"role", "user"}, {"content", std::move(content)}}})}};
    return body.dump();
}

std::string parse_chat_reply(const std::string& body) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::exception& e) {
        fail(ErrorKind::provider, std::string("unparseable provider response: ") + e.what());
    }
    if (doc.contains("error")) {
        std::string message = doc["error"].is_object() && doc["error"].contains("message")
                                  ? doc["error"]["message"].get<std::string>()
                                  : doc["error"].dump();
        fail(ErrorKind::provider, "provider error: " + message);
    }
    if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
        fail(ErrorKind::provider, "provider response has no choices");
    }
    const auto& message = doc["choices"][0]["message"];
    if (!message.contains("content")) fail(ErrorKind::provider, "provider response has no content");
    const auto& content = message["content"];
    if (content.is_string()) return content.get<std::string>();
    if (content.is_array()) {
        std::string out;
        for (const auto& part : content) {
            if (!part.contains("text")) continue;
            if (!out.empty()) out += '\n';
            out += part["text"].get<std::string>();
        }
        return out;
    }
    fail(ErrorKind::provider, "provider response content has unexpected shape");
}

LiveChatBackend::LiveChatBackend(std::shared_ptr<HttpTransport> transport, std::string api_key,
                                 RetryPolicy retry, Sleeper sleeper)
    : transport_(std::move(transport)),
      api_key_(std::move(api_key)),
      retry_(retry),
      sleeper_(std::move(sleeper)) {}

std::unique_ptr<LiveChatBackend> LiveChatBackend::from_env(const std::string& base_url,
                                                           const std::string& api_key_env) {
    const char* key = std::getenv(api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
        fail(ErrorKind::config,
             "environment variable " + api_key_env + " is not set; cannot use the live backend");
    }
    return std::make_unique<LiveChatBackend>(
        std::shared_ptr<HttpTransport>(make_httplib_transport(base_url)), key);
}

ChatResponse LiveChatBackend::complete(const ChatRequest& request) {
    request.validate();
    HttpHeaders headers{{"Authorization", "Bearer " + api_key_}};
    HttpResponse res = post_with_retry(*transport_, "/v1/chat/completions", headers,
                                       chat_wire_body(request), "application/json", retry_,
                                       sleeper_);
    if (res.status != 200) {
        fail(ErrorKind::provider,
             "chat completion returned status " + std::to_string(res.status) + ": " + res.body);
    }
    return ChatResponse{parse_chat_reply(res.body)};
}

RecordOutcome record_fixtures(const std::vector<ChatRequest>& requests, ChatBackend& backend,
                              FixtureStore& store) {
    RecordOutcome outcome;
    for (const auto& request : requests) {
        std::string key = cache_key(request);
        if (store.contains(key)) {
            ++outcome.already_present;
            continue;
        }
        try {
            ChatResponse response = backend.complete(request);
            store.store(key, request, response);
            ++outcome.stored;
        } catch (const std::exception& e) {
            outcome.failures.emplace_back(key, e.what());
        }
    }
    return outcome;
}

}  // namespace claimex
