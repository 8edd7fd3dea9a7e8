#pragma once

#include <string>
#include <vector>

#include "claimex/dataset.hpp"
#include "claimex/gateway.hpp"
#include "claimex/media.hpp"
#include "claimex/prompts.hpp"

namespace claimex {

// Second pipeline stage: the model's reading of a post's intent, tone,
// surrounding context, and what the images contribute.
class ContextualBreakdown {
public:
    // All four fields must be non-empty.
    ContextualBreakdown(std::string intent, std::string tone, std::string context,
                        std::string visual_context);

    const std::string& intent() const { return intent_; }
    const std::string& tone() const { return tone_; }
    const std::string& context() const { return context_; }
    const std::string& visual_context() const { return visual_context_; }

    bool operator==(const ContextualBreakdown&) const = default;

private:
    std::string intent_;
    std::string tone_;
    std::string context_;
    std::string visual_context_;
};

// Parse a model reply into a breakdown. Strict on the four keys (missing or
// empty → parse error carrying the raw reply); unknown keys are ignored.
ContextualBreakdown parse_breakdown(const std::string& reply);

// Build the breakdown request: the prompt template, then the post text under
// an input heading, with the post's images attached.
ChatRequest build_breakdown_request(const PromptLibrary& prompts, const PostClaimPair& pair,
                                    const std::vector<ImagePayload>& images,
                                    const std::string& model);

struct BreakdownResult {
    ContextualBreakdown breakdown;
    std::string raw_response;  // kept for audit
};

BreakdownResult run_breakdown(const PromptLibrary& prompts, const PostClaimPair& pair,
                              const std::vector<ImagePayload>& images, const std::string& model,
                              ChatBackend& backend);

// Render the labeled INTENT/TONE/CONTEXT/VISUAL_CONTEXT block appended to
// MICE extraction prompts. Pure and order-stable.
std::string render_context_block(const ContextualBreakdown& breakdown);

}  // namespace claimex
