#pragma once

#include <string>
#include <vector>

#include "claimex/dataset.hpp"
#include "claimex/extraction.hpp"
#include "claimex/gateway.hpp"
#include "claimex/media.hpp"
#include "claimex/prompts.hpp"

namespace claimex {

// 1–4 similarity against the reference claim, with the judge's rationale.
struct ReferenceScore {
    int score = 1;  // always within [1, 4]
    std::string reasoning;

    bool operator==(const ReferenceScore&) const = default;
};

enum class EntailmentLabel { entailed, partially_entailed, not_entailed };
enum class DecontextLabel {
    fully_decontextualized,
    partially_decontextualized,
    not_decontextualized,
};

std::string to_string(EntailmentLabel label);
std::string to_string(DecontextLabel label);
EntailmentLabel parse_entailment_label(const std::string& reply);
DecontextLabel parse_decontext_label(const std::string& reply);

// Parse the reference-judge JSON reply; scores outside 1–4 are rejected.
ReferenceScore parse_reference_score(const std::string& reply);

struct CandidateScore {
    std::string claim;
    ReferenceScore reference;

    bool operator==(const CandidateScore&) const = default;
};

struct ClaimEvaluation {
    std::string pair_id;
    std::string claim;  // the selected (best) claim
    ReferenceScore reference;
    EntailmentLabel entailment = EntailmentLabel::not_entailed;
    DecontextLabel decontext = DecontextLabel::not_decontextualized;
    std::string judge_model_id;
    std::vector<CandidateScore> candidate_scores;  // audit trail, extraction order

    bool operator==(const ClaimEvaluation&) const = default;
};

// Pick the index of the best-scored claim: highest score wins, and the
// earliest candidate wins ties.
std::size_t select_best_claim(const std::vector<CandidateScore>& candidates);

class Judge {
public:
    Judge(const PromptLibrary& prompts, ChatBackend& backend, std::string judge_model,
          ImageLoader loader);

    ReferenceScore judge_reference(const std::string& generated, const std::string& reference);
    EntailmentLabel judge_entailment(const std::string& generated, const PostClaimPair& pair,
                                     const std::vector<ImagePayload>& images);
    // Sees the claim alone — the request must carry no post content.
    DecontextLabel judge_decontext(const std::string& generated);

    // Score every candidate against the gold claim, pick the best, and judge
    // that one for entailment and decontextualization.
    ClaimEvaluation evaluate_claims(const ExtractedClaims& result, const PostClaimPair& pair);

    // Request builders are exposed so tests can inspect exact prompt content.
    ChatRequest reference_request(const std::string& generated, const std::string& reference) const;
    ChatRequest entailment_request(const std::string& generated, const PostClaimPair& pair,
                                   const std::vector<ImagePayload>& images) const;
    ChatRequest decontext_request(const std::string& generated) const;

private:
    const PromptLibrary& prompts_;
    ChatBackend& backend_;
    std::string judge_model_;
    ImageLoader loader_;
};

// JSONL persistence for evaluations, round-trip stable.
std::string serialize_evaluations(const std::vector<ClaimEvaluation>& evaluations);
std::vector<ClaimEvaluation> parse_evaluations(const std::string& text, const std::string& origin);

}  // namespace claimex
