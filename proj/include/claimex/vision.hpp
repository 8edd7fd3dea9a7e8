#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "claimex/dataset.hpp"
#include "claimex/gateway.hpp"
#include "claimex/http.hpp"
#include "claimex/media.hpp"

namespace claimex {

struct DenseCaption {
    std::string text;                  // never empty
    std::optional<double> confidence;  // stored only when the service reports one
};

// Structured description of one image: captions, embedded text, and tags.
struct VisualSemantics {
    std::string source_ref;
    std::vector<DenseCaption> dense_captions;
    std::string ocr_text;            // may be empty when nothing is written in the image
    std::vector<std::string> tags;   // deduplicated, order of first appearance
};

// Features requested from the analysis service, in canonical order.
extern const std::vector<std::string> kVisionFeatures;

// Content-addressed key for one image analysis: hash of the image bytes
// plus the requested feature list.
std::string vision_cache_key(const ImagePayload& image);

// Map a raw image-analysis JSON payload onto VisualSemantics. Empty captions
// are dropped; OCR lines are joined with newlines; tags are deduplicated.
VisualSemantics parse_vision_payload(const std::string& body, const std::string& source_ref);

class VisionClient {
public:
    virtual ~VisionClient() = default;
    virtual VisualSemantics analyze(const ImagePayload& image) = 0;
};

// Replays recorded raw service payloads from a fixture store.
class ReplayVisionClient : public VisionClient {
public:
    explicit ReplayVisionClient(std::shared_ptr<FixtureStore> store);
    VisualSemantics analyze(const ImagePayload& image) override;

private:
    std::shared_ptr<FixtureStore> store_;
};

// Uses the store when possible, otherwise calls through and records.
class CachingVisionClient : public VisionClient {
public:
    CachingVisionClient(std::shared_ptr<FixtureStore> store, std::shared_ptr<VisionClient> inner);
    VisualSemantics analyze(const ImagePayload& image) override;

private:
    std::shared_ptr<FixtureStore> store_;
    std::shared_ptr<VisionClient> inner_;
};

// Calls an image-analysis HTTP endpoint (captioning + OCR + tagging).
// The subscription key comes from the named environment variable.
class LiveVisionClient : public VisionClient {
public:
    LiveVisionClient(std::shared_ptr<HttpTransport> transport, std::string api_key,
                     RetryPolicy retry = {}, Sleeper sleeper = {});

    static std::unique_ptr<LiveVisionClient> from_env(const std::string& base_url,
                                                      const std::string& api_key_env);

    VisualSemantics analyze(const ImagePayload& image) override;

    // Raw payload access so the caching layer can persist service output
    // verbatim rather than a lossy re-serialization.
    std::string analyze_raw(const ImagePayload& image);

private:
    std::shared_ptr<HttpTransport> transport_;
    std::string api_key_;
    RetryPolicy retry_;
    Sleeper sleeper_;
};

struct VisionAnalysis {
    std::vector<VisualSemantics> semantics;  // in image_refs order, failures dropped
    std::vector<std::string> warnings;       // one per dropped image
};

VisualSemantics analyze_image(const ImagePayload& image, VisionClient& client);

// Analyze every image of a post. Failures are collected as warnings; the
// call fails only when the post has images and none could be analyzed.
VisionAnalysis analyze_post_images(const PostClaimPair& pair, const ImageLoader& loader,
                                   VisionClient& client);

// Render per-image sections (captions, embedded text, tags) as one prompt
// block. Pure function: identical input gives byte-identical output.
std::string render_visual_block(const std::vector<VisualSemantics>& semantics);

}  // namespace claimex
