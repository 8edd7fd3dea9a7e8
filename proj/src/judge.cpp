#include "claimex/judge.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

#include "claimex/error.hpp"
#include "claimex/parsing.hpp"
#include "claimex/util.hpp"

using nlohmann::json;
using nlohmann::ordered_json;

namespace claimex {

namespace {

const std::vector<std::string_view> kEntailmentLabels = {
    "entailed", "partially_entailed", "not_entailed"};
const std::vector<std::string_view> kDecontextLabels = {
    "fully_decontextualized", "partially_decontextualized", "not_decontextualized"};

}  // namespace

std::string to_string(EntailmentLabel label) {
    switch (label) {
        case EntailmentLabel::entailed: return "entailed";
        case EntailmentLabel::partially_entailed: return "partially_entailed";
        case EntailmentLabel::not_entailed: return "not_entailed";
    }
    fail(ErrorKind::parse, "invalid entailment label value");
}

std::string to_string(DecontextLabel label) {
    switch (label) {
        case DecontextLabel::fully_decontextualized: return "fully_decontextualized";
        case DecontextLabel::partially_decontextualized: return "partially_decontextualized";
        case DecontextLabel::not_decontextualized: return "not_decontextualized";
    }
    fail(ErrorKind::parse, "invalid decontextualization label value");
}

EntailmentLabel parse_entailment_label(const std::string& reply) {
    auto label = find_label_token(reply, kEntailmentLabels);
    if (!label) {
        fail(ErrorKind::parse,
             "entailment reply does not contain exactly one known label; raw reply: " + reply);
    }
    if (*label == "entailed") return EntailmentLabel::entailed;
    if (*label == "partially_entailed") return EntailmentLabel::partially_entailed;
    return EntailmentLabel::not_entailed;
}

DecontextLabel parse_decontext_label(const std::string& reply) {
    auto label = find_label_token(reply, kDecontextLabels);
    if (!label) {
        fail(ErrorKind::parse,
             "decontextualization reply does not contain exactly one known label; raw reply: " +
                 reply);
    }
    if (*label == "fully_decontextualized") return DecontextLabel::fully_decontextualized;
    if (*label == "partially_decontextualized") return DecontextLabel::partially_decontextualized;
    return DecontextLabel::not_decontextualized;
}

ReferenceScore parse_reference_score(const std::string& reply) {
    json doc = parse_json_lenient(reply);
    if (!doc.is_object() || !doc.contains("score")) {
        fail(ErrorKind::parse, "reference-judge reply has no \"score\"; raw reply: " + reply);
    }
    const json& score = doc["score"];
    int value = 0;
    if (score.is_number_integer()) {
        value = score.get<int>();
    } else if (score.is_number_float()) {
        double d = score.get<double>();
        if (d != std::floor(d)) {
            fail(ErrorKind::parse, "reference score is not an integer; raw reply: " + reply);
        }
        value = static_cast<int>(d);
    } else {
        fail(ErrorKind::parse, "reference score is not a number; raw reply: " + reply);
    }
    if (value < 1 || value > 4) {
        fail(ErrorKind::parse, "reference score " + std::to_string(value) +
                                   " is outside 1-4; raw reply: " + reply);
    }
    ReferenceScore out;
    out.score = value;
    if (doc.contains("reasoning") && doc["reasoning"].is_string()) {
        out.reasoning = doc["reasoning"].get<std::string>();
    }
    return out;
}

std::size_t select_best_claim(const std::vector<CandidateScore>& candidates) {
    if (candidates.empty()) fail(ErrorKind::data, "cannot select a best claim from no candidates");
    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        if (candidates[i].reference.score > candidates[best].reference.score) best = i;
    }
    return best;
}

Judge::Judge(const PromptLibrary& prompts, ChatBackend& backend, std::string judge_model,
             ImageLoader loader)
    : prompts_(prompts),
      backend_(backend),
      judge_model_(std::move(judge_model)),
      loader_(std::move(loader)) {
    if (judge_model_.empty()) fail(ErrorKind::config, "judge model id is empty");
}

ChatRequest Judge::reference_request(const std::string& generated,
                                     const std::string& reference) const {
    ChatRequest request;
    request.model = judge_model_;
    request.temperature = 0.0;
    request.add_text(substitute(prompts_.text(PromptName::reference_eval),
                                {{"<generated claim>", generated}, {"<reference claim>", reference}}));
    return request;
}

ChatRequest Judge::entailment_request(const std::string& generated, const PostClaimPair& pair,
                                      const std::vector<ImagePayload>& images) const {
    ChatRequest request;
    request.model = judge_model_;
    request.temperature = 0.0;
    std::string placeholder = images.empty() ? "(none)" : "(attached)";
    request.add_text(substitute(prompts_.text(PromptName::entailment_eval),
                                {{"<generated claim>", generated},
                                 {"<social media post text>", pair.post_text},
                                 {"<social media post image(s)>", placeholder}}));
    for (const auto& image : images) request.add_image(image);
    return request;
}

ChatRequest Judge::decontext_request(const std::string& generated) const {
    ChatRequest request;
    request.model = judge_model_;
    request.temperature = 0.0;
    request.add_text(
        substitute(prompts_.text(PromptName::decontext_eval), {{"<generated claim>", generated}}));
    return request;
}

ReferenceScore Judge::judge_reference(const std::string& generated, const std::string& reference) {
    if (generated.empty() || reference.empty()) {
        fail(ErrorKind::data, "reference judging requires non-empty claims");
    }
    ChatResponse response = backend_.complete(reference_request(generated, reference));
    try {
        return parse_reference_score(response.text);
    } catch (const Error& e) {
        throw Error(e.kind(), std::string("reference judge: ") + e.what());
    }
}

EntailmentLabel Judge::judge_entailment(const std::string& generated, const PostClaimPair& pair,
                                        const std::vector<ImagePayload>& images) {
    if (generated.empty()) fail(ErrorKind::data, "entailment judging requires a non-empty claim");
    ChatResponse response = backend_.complete(entailment_request(generated, pair, images));
    try {
        return parse_entailment_label(response.text);
    } catch (const Error& e) {
        throw Error(e.kind(), std::string("entailment judge: ") + e.what());
    }
}

DecontextLabel Judge::judge_decontext(const std::string& generated) {
    if (generated.empty()) {
        fail(ErrorKind::data, "decontextualization judging requires a non-empty claim");
    }
    ChatResponse response = backend_.complete(decontext_request(generated));
    try {
        return parse_decontext_label(response.text);
    } catch (const Error& e) {
        throw Error(e.kind(), std::string("decontextualization judge: ") + e.what());
    }
}

ClaimEvaluation Judge::evaluate_claims(const ExtractedClaims& result, const PostClaimPair& pair) {
    if (result.claims.empty()) fail(ErrorKind::data, "no claims to evaluate for pair " + pair.id);

    ClaimEvaluation evaluation;
    evaluation.pair_id = pair.id;
    evaluation.judge_model_id = judge_model_;
    for (const auto& claim : result.claims) {
        evaluation.candidate_scores.push_back(
            CandidateScore{claim, judge_reference(claim, pair.gold_claim)});
    }
    std::size_t best = select_best_claim(evaluation.candidate_scores);
    evaluation.claim = evaluation.candidate_scores[best].claim;
    evaluation.reference = evaluation.candidate_scores[best].reference;

    std::vector<ImagePayload> images;
    if (!pair.image_refs.empty() && loader_) {
        images = load_images(pair.image_refs, loader_).images;
    }
    evaluation.entailment = judge_entailment(evaluation.claim, pair, images);
    evaluation.decontext = judge_decontext(evaluation.claim);
    return evaluation;
}

std::string serialize_evaluations(const std::vector<ClaimEvaluation>& evaluations) {
    std::string out;
    for (const auto& evaluation : evaluations) {
        ordered_json candidates = ordered_json::array();
        for (const auto& candidate : evaluation.candidate_scores) {
            ordered_json c;
            c["claim"] = candidate.claim;
            c["score"] = candidate.reference.score;
            c["reasoning"] = candidate.reference.reasoning;
            candidates.push_back(std::move(c));
        }
        ordered_json record;
        record["pair_id"] = evaluation.pair_id;
        record["claim"] = evaluation.claim;
        record["reference_score"] = evaluation.reference.score;
        record["reference_reasoning"] = evaluation.reference.reasoning;
        record["entailment"] = to_string(evaluation.entailment);
        record["decontextualization"] = to_string(evaluation.decontext);
        record["judge_model_id"] = evaluation.judge_model_id;
        record["candidate_scores"] = std::move(candidates);
        out += record.dump();
        out += '\n';
    }
    return out;
}

std::vector<ClaimEvaluation> parse_evaluations(const std::string& text, const std::string& origin) {
    std::vector<ClaimEvaluation> out;
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
        ClaimEvaluation evaluation;
        try {
            evaluation.pair_id = record.at("pair_id").get<std::string>();
            evaluation.claim = record.at("claim").get<std::string>();
            evaluation.reference.score = record.at("reference_score").get<int>();
            evaluation.reference.reasoning = record.value("reference_reasoning", "");
            evaluation.entailment = parse_entailment_label(record.at("entailment").get<std::string>());
            evaluation.decontext =
                parse_decontext_label(record.at("decontextualization").get<std::string>());
            evaluation.judge_model_id = record.value("judge_model_id", "");
            if (record.contains("candidate_scores")) {
                for (const auto& c : record["candidate_scores"]) {
                    CandidateScore candidate;
                    candidate.claim = c.at("claim").get<std::string>();
                    candidate.reference.score = c.at("score").get<int>();
                    candidate.reference.reasoning = c.value("reasoning", "");
                    evaluation.candidate_scores.push_back(std::move(candidate));
                }
            }
        } catch (const json::exception& e) {
            fail(ErrorKind::data, where + ": malformed evaluation record: " + e.what());
        }
        if (evaluation.reference.score < 1 || evaluation.reference.score > 4) {
            fail(ErrorKind::data, where + ": reference score outside 1-4");
        }
        out.push_back(std::move(evaluation));
    }
    return out;
}

}  // namespace claimex
