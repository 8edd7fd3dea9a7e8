#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "claimex/http.hpp"
#include "claimex/media.hpp"

namespace claimex {

// One part of a chat request: either prose or an attached image.
struct TextSegment {
    std::string text;
};

struct ImageSegment {
    ImagePayload image;
};

using RequestSegment = std::variant<TextSegment, ImageSegment>;

// A single-turn chat completion request. Segments keep text and images in
// the exact order they should be presented to the model.
struct ChatRequest {
    std::string model;
    double temperature = 0.0;
    std::vector<RequestSegment> segments;

    void add_text(std::string text);
    void add_image(ImagePayload image);

    // All text segments joined with newlines, in order.
    std::string text() const;
    std::size_t image_count() const;

    // A well-formed request names a model and carries at least one
    // non-empty text segment.
    void validate() const;
};

struct ChatResponse {
    std::string text;
};

// Canonical JSON form of a request: object keys sorted, image bytes replaced
// by their SHA-256 digest so the canonical form stays small and stable.
std::string canonical_request_json(const ChatRequest& request);

// Content-addressed key: SHA-256 of the canonical request JSON.
std::string cache_key(const ChatRequest& request);

// Directory of recorded request/response pairs addressed by cache key.
// Writes are atomic and serialized so concurrent workers can share a store.
class FixtureStore {
public:
    explicit FixtureStore(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }

    bool contains(const std::string& key) const;
    std::optional<ChatResponse> load(const std::string& key) const;
    void store(const std::string& key, const ChatRequest& request, const ChatResponse& response);

    std::vector<std::string> keys() const;
    std::size_t size() const;

    // Digest over every stored fixture (keys and contents, sorted), so two
    // stores with the same recordings compare equal byte-for-byte.
    std::string digest() const;

private:
    std::filesystem::path path_for(const std::string& key) const;

    std::filesystem::path root_;
    mutable std::mutex write_mutex_;
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
};

// Serves responses from a fixture store only; a request with no recording
// fails and names the missing key.
class ReplayChatBackend : public ChatBackend {
public:
    explicit ReplayChatBackend(std::shared_ptr<FixtureStore> store);
    ChatResponse complete(const ChatRequest& request) override;

private:
    std::shared_ptr<FixtureStore> store_;
};

// Serves from the store when possible, otherwise delegates to the inner
// backend and records the fresh response.
class CachingChatBackend : public ChatBackend {
public:
    CachingChatBackend(std::shared_ptr<FixtureStore> store, std::shared_ptr<ChatBackend> inner);
    ChatResponse complete(const ChatRequest& request) override;

private:
    std::shared_ptr<FixtureStore> store_;
    std::shared_ptr<ChatBackend> inner_;
};

// Talks to an OpenAI-compatible chat completions endpoint. The API key is
// read from the named environment variable at construction time.
class LiveChatBackend : public ChatBackend {
public:
    LiveChatBackend(std::shared_ptr<HttpTransport> transport, std::string api_key,
                    RetryPolicy retry = {}, Sleeper sleeper = {});

    // Convenience: build a transport for `base_url` and pull the key from
    // the environment variable `api_key_env`.
    static std::unique_ptr<LiveChatBackend> from_env(const std::string& base_url,
                                                     const std::string& api_key_env);

    ChatResponse complete(const ChatRequest& request) override;

private:
    std::shared_ptr<HttpTransport> transport_;
    std::string api_key_;
    RetryPolicy retry_;
    Sleeper sleeper_;
};

// Serialize a request to the OpenAI-compatible wire format (data-URI images).
std::string chat_wire_body(const ChatRequest& request);

// Extract the assistant text from a chat completions response body.
std::string parse_chat_reply(const std::string& body);

struct RecordOutcome {
    std::size_t stored = 0;
    std::size_t already_present = 0;
    std::vector<std::pair<std::string, std::string>> failures;  // cache key → error
};

// Ensure every request has a recording in the store, fetching the missing
// ones through `backend`. Failures are collected, not fatal.
RecordOutcome record_fixtures(const std::vector<ChatRequest>& requests, ChatBackend& backend,
                              FixtureStore& store);

}  // namespace claimex
