#include "claimex/context.hpp"

#include <json.hpp>

#include "claimex/error.hpp"
#include "claimex/parsing.hpp"

using nlohmann::json;

namespace claimex {

ContextualBreakdown::ContextualBreakdown(std::string intent, std::string tone, std::string context,
                                         std::string visual_context)
    : intent_(std::move(intent)),
      tone_(std::move(tone)),
      context_(std::move(context)),
      visual_context_(std::move(visual_context)) {
    if (intent_.empty() || tone_.empty() || context_.empty() || visual_context_.empty()) {
        fail(ErrorKind::parse, "contextual breakdown requires non-empty intent, tone, context, "
                               "and visual_context");
    }
}

ContextualBreakdown parse_breakdown(const std::string& reply) {
    json doc = parse_json_lenient(reply);
    if (!doc.is_object()) {
        fail(ErrorKind::parse, "contextual breakdown reply is not a JSON object; raw reply: " + reply);
    }
    const char* keys[] = {"intent", "tone", "context", "visual_context"};
    std::string values[4];
    for (int i = 0; i < 4; ++i) {
        if (!doc.contains(keys[i]) || !doc[keys[i]].is_string()) {
            fail(ErrorKind::parse, std::string("contextual breakdown reply is missing \"") +
                                       keys[i] + "\"; raw reply: " + reply);
        }
        values[i] = doc[keys[i]].get<std::string>();
        if (values[i].empty()) {
            fail(ErrorKind::parse,
                 std::string("contextual breakdown field \"") + keys[i] + "\" is empty; raw reply: " + reply);
        }
    }
    return ContextualBreakdown(values[0], values[1], values[2], values[3]);
}

ChatRequest build_breakdown_request(const PromptLibrary& prompts, const PostClaimPair& pair,
                                    const std::vector<ImagePayload>& images,
                                    const std::string& model) {
    ChatRequest request;
    request.model = model;
    request.temperature = 0.0;
    request.add_text(prompts.text(PromptName::context_breakdown) + "\n\n# INPUT\nText: " +
                     pair.post_text);
    for (const auto& image : images) request.add_image(image);
    return request;
}

BreakdownResult run_breakdown(const PromptLibrary& prompts, const PostClaimPair& pair,
                              const std::vector<ImagePayload>& images, const std::string& model,
                              ChatBackend& backend) {
    ChatRequest request = build_breakdown_request(prompts, pair, images, model);
    ChatResponse response = backend.complete(request);
    return BreakdownResult{parse_breakdown(response.text), response.text};
}

std::string render_context_block(const ContextualBreakdown& breakdown) {
    std::string out = "# CONTEXTUAL BREAKDOWN\n";
    out += "INTENT: " + breakdown.intent() + "\n";
    out += "TONE: " + breakdown.tone() + "\n";
    out += "CONTEXT: " + breakdown.context() + "\n";
    out += "VISUAL_CONTEXT: " + breakdown.visual_context() + "\n";
    return out;
}

}  // namespace claimex
