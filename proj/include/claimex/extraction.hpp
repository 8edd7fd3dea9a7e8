#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "claimex/context.hpp"
#include "claimex/dataset.hpp"
#include "claimex/gateway.hpp"
#include "claimex/media.hpp"
#include "claimex/prompts.hpp"
#include "claimex/retrieval.hpp"
#include "claimex/vision.hpp"

namespace claimex {

// The four claim-extraction methods under comparison.
enum class ExtractionMethod {
    text_only,       // prompt only, no images
    image_text,      // prompt plus post images
    image_text_icl,  // prompt plus images plus retrieved demonstrations
    mice,            // demonstrations plus visual semantics plus contextual breakdown
};

ExtractionMethod parse_method(const std::string& name);            // usage error on unknown names
std::string to_string(ExtractionMethod method);                    // stable machine id
std::string display_name(ExtractionMethod method);                 // table heading
extern const std::vector<ExtractionMethod> kAllMethods;

struct ExtractedClaims {
    std::string pair_id;
    ExtractionMethod method = ExtractionMethod::text_only;
    std::string model_id;
    std::vector<std::string> claims;      // ≥ 1 non-empty string on success
    std::string raw_response;
    std::vector<std::string> shot_ids;    // empty for non-ICL methods; never contains pair_id
    std::optional<std::string> visual_block;
    std::optional<std::string> context_block;

    bool operator==(const ExtractedClaims&) const = default;
};

// Parse a model reply into claims. Accepts {"claims": [...]} or a bare JSON
// list of strings (after fence/prose repair); anything else, or an empty
// list, is a parse error carrying the raw reply.
std::vector<std::string> parse_claims(const std::string& reply);

// Everything extract() needs beyond the pair itself. Vision client and index
// may be null for methods that do not use them.
struct ExtractionContext {
    const PromptLibrary* prompts = nullptr;
    ChatBackend* backend = nullptr;
    VisionClient* vision = nullptr;   // required for mice
    const Bm25Index* index = nullptr; // required for image_text_icl and mice
    const PairIndex* pairs = nullptr; // required alongside index
    ImageLoader loader;
    std::string model;
    std::size_t shots = 5;
    int image_budget = 30;            // total images per request, query included
};

// Assemble the chat request for one pair. Demonstrations (when given) come
// first, then the filled template — for MICE followed by the visual and
// context blocks in that order — and the post's images are attached last.
ChatRequest build_prompt(const PromptLibrary& prompts, ExtractionMethod method,
                         const PostClaimPair& pair, const std::vector<ImagePayload>& images,
                         const ShotSet* shots, const std::vector<std::vector<ImagePayload>>* shot_images,
                         const std::string* visual_block, const std::string* context_block,
                         const std::string& model);

// Run the full pipeline for one pair: stage dependencies per method, one
// extraction call, claims parsed and validated.
ExtractedClaims extract(const PostClaimPair& pair, ExtractionMethod method,
                        const ExtractionContext& ctx);

struct BatchFailure {
    std::string pair_id;
    std::string message;
};

struct BatchResult {
    std::vector<ExtractedClaims> results;  // dataset order
    std::vector<BatchFailure> failures;    // dataset order
};

// Extract every pair of the dataset; per-pair failures are recorded, never
// fatal. Output order equals dataset order regardless of worker scheduling.
BatchResult run_batch(const Dataset& dataset, ExtractionMethod method,
                      const ExtractionContext& ctx, std::size_t workers = 1);

// JSONL persistence (one record per line), round-trip stable.
std::string serialize_extractions(const std::vector<ExtractedClaims>& results);
std::vector<ExtractedClaims> parse_extractions(const std::string& text, const std::string& origin);
std::string serialize_failures(const std::vector<BatchFailure>& failures);

}  // namespace claimex
