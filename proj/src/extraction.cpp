#include "claimex/extraction.hpp"

#include <json.hpp>

#include <sstream>

#include "claimex/error.hpp"
#include "claimex/parsing.hpp"
#include "claimex/pool.hpp"
#include "claimex/util.hpp"

using nlohmann::json;
using nlohmann::ordered_json;

namespace claimex {

namespace {

constexpr const char* kPostTextPlaceholder = "<social media post text>";

// Re-throw a stage error with the stage and pair named, preserving the kind.
template <typename Fn>
auto run_stage(const char* stage, const std::string& pair_id, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(e.kind(),
                    std::string(stage) + " stage failed for pair " + pair_id + ": " + e.what());
    }
}

}  // namespace

const std::vector<ExtractionMethod> kAllMethods = {
    ExtractionMethod::text_only,
    ExtractionMethod::image_text,
    ExtractionMethod::image_text_icl,
    ExtractionMethod::mice,
};

ExtractionMethod parse_method(const std::string& name) {
    if (name == "text_only") return ExtractionMethod::text_only;
    if (name == "image_text") return ExtractionMethod::image_text;
    if (name == "image_text_icl") return ExtractionMethod::image_text_icl;
    if (name == "mice") return ExtractionMethod::mice;
    fail(ErrorKind::usage, "unknown extraction method \"" + name +
                               "\" (expected text_only, image_text, image_text_icl, or mice)");
}

std::string to_string(ExtractionMethod method) {
    switch (method) {
        case ExtractionMethod::text_only: return "text_only";
        case ExtractionMethod::image_text: return "image_text";
        case ExtractionMethod::image_text_icl: return "image_text_icl";
        case ExtractionMethod::mice: return "mice";
    }
    fail(ErrorKind::usage, "invalid extraction method value");
}

std::string display_name(ExtractionMethod method) {
    switch (method) {
        case ExtractionMethod::text_only: return "Text Only";
        case ExtractionMethod::image_text: return "Image+Text";
        case ExtractionMethod::image_text_icl: return "Image+Text ICL";
        case ExtractionMethod::mice: return "MICE";
    }
    fail(ErrorKind::usage, "invalid extraction method value");
}

std::vector<std::string> parse_claims(const std::string& reply) {
    json doc = parse_json_lenient(reply);
    const json* list = nullptr;
    if (doc.is_object() && doc.contains("claims") && doc["claims"].is_array()) {
        list = &doc["claims"];
    } else if (doc.is_array()) {
        list = &doc;
    } else {
        fail(ErrorKind::parse,
             "claims reply is neither {\"claims\": [...]} nor a list; raw reply: " + reply);
    }

    std::vector<std::string> claims;
    for (const auto& entry : *list) {
        if (!entry.is_string()) {
            fail(ErrorKind::parse, "claims list contains a non-string entry; raw reply: " + reply);
        }
        std::string claim = trim(entry.get<std::string>());
        if (claim.empty()) {
            fail(ErrorKind::parse, "claims list contains an empty claim; raw reply: " + reply);
        }
        claims.push_back(std::move(claim));
    }
    if (claims.empty()) fail(ErrorKind::parse, "claims list is empty; raw reply: " + reply);
    return claims;
}

ChatRequest build_prompt(const PromptLibrary& prompts, ExtractionMethod method,
                         const PostClaimPair& pair, const std::vector<ImagePayload>& images,
                         const ShotSet* shots, const std::vector<std::vector<ImagePayload>>* shot_images,
                         const std::string* visual_block, const std::string* context_block,
                         const std::string& model) {
    const bool wants_shots =
        method == ExtractionMethod::image_text_icl || method == ExtractionMethod::mice;
    const bool wants_blocks = method == ExtractionMethod::mice;
    if (wants_shots && shots == nullptr) {
        fail(ErrorKind::config, to_string(method) + " requires retrieved demonstrations");
    }
    if (wants_blocks && (visual_block == nullptr || context_block == nullptr)) {
        fail(ErrorKind::config, "mice requires the visual and context blocks");
    }

    ChatRequest request;
    request.model = model;
    request.temperature = 0.0;

    if (wants_shots && !shots->shots.empty()) {
        request.add_text("# DEMONSTRATIONS");
        for (std::size_t i = 0; i < shots->shots.size(); ++i) {
            const Shot& shot = shots->shots[i];
            request.add_text("Text: " + shot.post_text);
            if (shot_images != nullptr && i < shot_images->size()) {
                for (const auto& image : (*shot_images)[i]) request.add_image(image);
            }
            request.add_text(json{{"claims", json::array({shot.gold_claim})}}.dump());
            request.add_text("---");
        }
    }

    PromptName template_name = method == ExtractionMethod::text_only
                                   ? PromptName::extract_text_only
                                   : PromptName::extract_image_text;
    std::string body =
        substitute(prompts.text(template_name), {{kPostTextPlaceholder, pair.post_text}});
    if (wants_blocks) {
        if (!visual_block->empty()) body += "\n\n" + *visual_block;
        body += "\n\n" + *context_block;
    }
    request.add_text(std::move(body));

    if (method != ExtractionMethod::text_only) {
        for (const auto& image : images) request.add_image(image);
    }
    return request;
}

ExtractedClaims extract(const PostClaimPair& pair, ExtractionMethod method,
                        const ExtractionContext& ctx) {
    if (ctx.prompts == nullptr || ctx.backend == nullptr || !ctx.loader || ctx.model.empty()) {
        fail(ErrorKind::config, "extraction context is incomplete");
    }
    const bool wants_images = method != ExtractionMethod::text_only;
    const bool wants_shots =
        method == ExtractionMethod::image_text_icl || method == ExtractionMethod::mice;
    const bool wants_blocks = method == ExtractionMethod::mice;
    if (wants_shots && (ctx.index == nullptr || ctx.pairs == nullptr)) {
        fail(ErrorKind::config, to_string(method) + " requires a retrieval index");
    }
    if (wants_blocks && ctx.vision == nullptr) {
        fail(ErrorKind::config, "mice requires a vision client");
    }

    std::vector<ImagePayload> images;
    if (wants_images) {
        LoadedImages loaded = run_stage("image loading", pair.id,
                                        [&] { return load_images(pair.image_refs, ctx.loader); });
        images = std::move(loaded.images);
    }

    ShotSet shots;
    std::vector<std::vector<ImagePayload>> shot_images;
    if (wants_shots) {
        shots = run_stage("retrieval", pair.id, [&] {
            return select_shots(*ctx.index, *ctx.pairs, pair, ctx.shots, ctx.image_budget);
        });
        for (const auto& shot : shots.shots) {
            std::vector<ImagePayload> loaded;
            for (const auto& ref : shot.image_refs) {
                try {
                    loaded.push_back(ctx.loader(ref));
                } catch (const std::exception&) {
                    // A demonstration image that cannot be loaded is dropped;
                    // the demonstration text still stands.
                }
            }
            shot_images.push_back(std::move(loaded));
        }
    }

    std::optional<std::string> visual_block;
    std::optional<std::string> context_block;
    if (wants_blocks) {
        std::vector<VisualSemantics> semantics = run_stage("vision", pair.id, [&] {
            std::vector<VisualSemantics> out;
            std::exception_ptr first_failure;
            for (const auto& image : images) {
                try {
                    out.push_back(ctx.vision->analyze(image));
                } catch (const std::exception&) {
                    if (!first_failure) first_failure = std::current_exception();
                }
            }
            if (!images.empty() && out.empty() && first_failure) {
                std::rethrow_exception(first_failure);
            }
            return out;
        });
        visual_block = render_visual_block(semantics);

        BreakdownResult breakdown = run_stage("context", pair.id, [&] {
            return run_breakdown(*ctx.prompts, pair, images, ctx.model, *ctx.backend);
        });
        context_block = render_context_block(breakdown.breakdown);
    }

    ChatRequest request = build_prompt(*ctx.prompts, method, pair, images,
                                       wants_shots ? &shots : nullptr,
                                       wants_shots ? &shot_images : nullptr,
                                       visual_block ? &*visual_block : nullptr,
                                       context_block ? &*context_block : nullptr, ctx.model);
    ChatResponse response =
        run_stage("extraction", pair.id, [&] { return ctx.backend->complete(request); });

    ExtractedClaims result;
    result.pair_id = pair.id;
    result.method = method;
    result.model_id = ctx.model;
    result.claims = run_stage("claim parsing", pair.id, [&] { return parse_claims(response.text); });
    result.raw_response = response.text;
    for (const auto& shot : shots.shots) result.shot_ids.push_back(shot.pair_id);
    result.visual_block = std::move(visual_block);
    result.context_block = std::move(context_block);
    return result;
}

BatchResult run_batch(const Dataset& dataset, ExtractionMethod method,
                      const ExtractionContext& ctx, std::size_t workers) {
    const auto& pairs = dataset.pairs();
    std::vector<std::optional<ExtractedClaims>> slots(pairs.size());
    std::vector<std::optional<BatchFailure>> failure_slots(pairs.size());

    parallel_for(pairs.size(), workers, [&](std::size_t i) {
        try {
            slots[i] = extract(pairs[i], method, ctx);
        } catch (const std::exception& e) {
            failure_slots[i] = BatchFailure{pairs[i].id, e.what()};
        }
    });

    BatchResult out;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (slots[i]) out.results.push_back(std::move(*slots[i]));
        if (failure_slots[i]) out.failures.push_back(std::move(*failure_slots[i]));
    }
    return out;
}

std::string serialize_extractions(const std::vector<ExtractedClaims>& results) {
    std::string out;
    for (const auto& result : results) {
        ordered_json record;
        record["pair_id"] = result.pair_id;
        record["method"] = to_string(result.method);
        record["model_id"] = result.model_id;
        record["claims"] = result.claims;
        record["shot_ids"] = result.shot_ids;
        if (result.visual_block) record["visual_block"] = *result.visual_block;
        if (result.context_block) record["context_block"] = *result.context_block;
        record["raw_response"] = result.raw_response;
        out += record.dump();
        out += '\n';
    }
    return out;
}

std::vector<ExtractedClaims> parse_extractions(const std::string& text, const std::string& origin) {
    std::vector<ExtractedClaims> out;
    std::istringstream stream(text);
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(stream, line)) {
        ++line_number;
        if (trim(line).empty()) continue;
        std::string where = origin + ":" + std::to_string(line_number);
        json record;
        try {
            record = json::parse(line);
        } catch (const json::exception& e) {
            fail(ErrorKind::data, where + ": invalid JSON: " + e.what());
        }
        ExtractedClaims result;
        try {
            result.pair_id = record.at("pair_id").get<std::string>();
            result.method = parse_method(record.at("method").get<std::string>());
            result.model_id = record.at("model_id").get<std::string>();
            result.claims = record.at("claims").get<std::vector<std::string>>();
            result.shot_ids = record.value("shot_ids", std::vector<std::string>{});
            if (record.contains("visual_block")) {
                result.visual_block = record["visual_block"].get<std::string>();
            }
            if (record.contains("context_block")) {
                result.context_block = record["context_block"].get<std::string>();
            }
            result.raw_response = record.value("raw_response", "");
        } catch (const json::exception& e) {
            fail(ErrorKind::data, where + ": malformed extraction record: " + e.what());
        }
        if (result.claims.empty()) fail(ErrorKind::data, where + ": extraction record has no claims");
        out.push_back(std::move(result));
    }
    return out;
}

std::string serialize_failures(const std::vector<BatchFailure>& failures) {
    std::string out;
    for (const auto& failure : failures) {
        ordered_json record;
        record["pair_id"] = failure.pair_id;
        record["error"] = failure.message;
        out += record.dump();
        out += '\n';
    }
    return out;
}

}  // namespace claimex
