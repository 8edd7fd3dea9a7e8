#include <doctest.h>

#include <string>
#include <vector>

#include <json.hpp>

#include "claimex/error.hpp"
#include "claimex/judge.hpp"
#include "claimex/prompts.hpp"
#include "support/fakes.hpp"

using namespace claimex;
using claimex::testing::make_pair;
using claimex::testing::ScriptedBackend;
using claimex::testing::TempDir;
using claimex::testing::throws_kind;
using claimex::testing::write_tiny_png;

namespace {

const std::filesystem::path kPromptsDir = std::filesystem::path(CLAIMEX_ASSETS_DIR) / "prompts";

// Stage-distinctive phrases from the three judge templates.
constexpr const char* kReferenceNeedle = "similarity assessment";
constexpr const char* kEntailmentNeedle = "entailed by the combined content";
constexpr const char* kDecontextNeedle = "understandable in isolation";

std::string score_reply(int score, const std::string& reasoning = "because") {
    nlohmann::json doc = {{"score", score}, {"reasoning", reasoning}};
    return doc.dump();
}

CandidateScore candidate(const std::string& claim, int score) {
    return CandidateScore{claim, ReferenceScore{score, ""}};
}

}  // namespace

TEST_CASE("reference score replies parse score and reasoning") {
    ReferenceScore s = parse_reference_score(R"({"score": 3, "reasoning": "close match"})");
    CHECK(s.score == 3);
    CHECK(s.reasoning == "close match");

    // Fenced and prose-wrapped replies repair into the same parse.
    CHECK(parse_reference_score("```json\n{\"score\": 1}\n```").score == 1);
    CHECK(parse_reference_score("Here: {\"score\": 4} done").score == 4);
    // An integral float is accepted as the integer it denotes.
    CHECK(parse_reference_score(R"({"score": 2.0})").score == 2);
    // Missing reasoning is tolerated.
    CHECK(parse_reference_score(R"({"score": 2})").reasoning.empty());
}

TEST_CASE("reference scores outside 1-4 or non-integral are rejected") {
    for (const char* bad : {R"({"score": 0})", R"({"score": 5})", R"({"score": 7})",
                            R"({"score": -1})", R"({"score": 2.5})", R"({"score": "3"})",
                            R"({"points": 3})", R"({"score": null})", "not json"}) {
        CAPTURE(bad);
        std::string msg;
        CHECK(throws_kind(ErrorKind::parse, [&] { parse_reference_score(bad); }, &msg));
        CHECK(msg.find("raw reply") != std::string::npos);
    }
}

TEST_CASE("entailment labels parse from the closed set only") {
    CHECK(parse_entailment_label("entailed") == EntailmentLabel::entailed);
    CHECK(parse_entailment_label("The verdict is: Partially Entailed.") ==
          EntailmentLabel::partially_entailed);
    CHECK(parse_entailment_label("NOT_ENTAILED") == EntailmentLabel::not_entailed);
    CHECK(parse_entailment_label("not entailed") == EntailmentLabel::not_entailed);

    for (const char* bad : {"maybe", "", "entailed or not_entailed", "yes"}) {
        CAPTURE(bad);
        CHECK(throws_kind(ErrorKind::parse, [&] { parse_entailment_label(bad); }));
    }
}

TEST_CASE("decontextualization labels parse from the closed set only") {
    CHECK(parse_decontext_label("fully_decontextualized") ==
          DecontextLabel::fully_decontextualized);
    CHECK(parse_decontext_label("I judge this Partially Decontextualized") ==
          DecontextLabel::partially_decontextualized);
    CHECK(parse_decontext_label("not-decontextualized") == DecontextLabel::not_decontextualized);
    CHECK(throws_kind(ErrorKind::parse, [] { parse_decontext_label("decontextualized"); }));
    CHECK(throws_kind(ErrorKind::parse, [] {
        parse_decontext_label("fully_decontextualized but also not_decontextualized");
    }));
}

TEST_CASE("label enum names round-trip") {
    CHECK(parse_entailment_label(to_string(EntailmentLabel::partially_entailed)) ==
          EntailmentLabel::partially_entailed);
    CHECK(parse_decontext_label(to_string(DecontextLabel::fully_decontextualized)) ==
          DecontextLabel::fully_decontextualized);
}

TEST_CASE("the best claim is the highest score, earliest on ties") {
    CHECK(select_best_claim({candidate("a", 2), candidate("b", 4)}) == 1);
    CHECK(select_best_claim({candidate("a", 4), candidate("b", 2)}) == 0);
    CHECK(select_best_claim({candidate("a", 3), candidate("b", 3)}) == 0);
    CHECK(select_best_claim({candidate("a", 1)}) == 0);
    CHECK(select_best_claim({candidate("a", 2), candidate("b", 3), candidate("c", 3)}) == 1);
    CHECK(throws_kind(ErrorKind::data, [] { select_best_claim({}); }));
}

TEST_CASE("appending a strictly worse candidate never changes the selection") {
    std::vector<CandidateScore> candidates = {candidate("a", 2), candidate("b", 3)};
    std::size_t before = select_best_claim(candidates);
    for (int low = 1; low <= 2; ++low) {
        auto extended = candidates;
        extended.push_back(candidate("late", low));
        CHECK(select_best_claim(extended) == before);
    }
}

TEST_CASE("judge request builders fill the right templates") {
    PromptLibrary prompts = PromptLibrary::load(kPromptsDir);
    ScriptedBackend backend;
    Judge judge(prompts, backend, "judge-1", file_image_loader());

    SUBCASE("reference request carries both claims") {
        ChatRequest req = judge.reference_request("water rose fast", "the river flooded");
        CHECK(req.model == "judge-1");
        CHECK(req.temperature == 0.0);
        CHECK(req.image_count() == 0);
        std::string text = req.text();
        CHECK(text.find("water rose fast") != std::string::npos);
        CHECK(text.find("the river flooded") != std::string::npos);
        CHECK(text.find("<generated claim>") == std::string::npos);
        CHECK(text.find("<reference claim>") == std::string::npos);
    }

    SUBCASE("entailment request substitutes post, claim, and image marker") {
        TempDir tmp;
        std::string ref = write_tiny_png(tmp.path(), "e.png", 9);
        PostClaimPair pair = make_pair("p1", "the dam broke #news", "claim", Split::train, {ref});
        std::vector<ImagePayload> images = {file_image_loader()(ref)};

        ChatRequest req = judge.entailment_request("the dam broke", pair, images);
        CHECK(req.image_count() == 1);
        std::string text = req.text();
        CHECK(text.find("the dam broke #news") != std::string::npos);
        CHECK(text.find("(attached)") != std::string::npos);
        CHECK(text.find("<social media post image(s)>") == std::string::npos);
        CHECK(text.find("<social media post text>") == std::string::npos);

        ChatRequest bare = judge.entailment_request("the dam broke", pair, {});
        CHECK(bare.image_count() == 0);
        CHECK(bare.text().find("(none)") != std::string::npos);
    }

    SUBCASE("decontextualization request sees the claim alone") {
        PostClaimPair pair =
            make_pair("p1", "SECRET POST BODY not for the decontext judge", "claim", Split::train);
        ChatRequest req = judge.decontext_request("a standalone claim");
        CHECK(req.image_count() == 0);
        std::string text = req.text();
        CHECK(text.find("a standalone claim") != std::string::npos);
        CHECK(text.find("SECRET POST BODY") == std::string::npos);
        CHECK(text.find(kDecontextNeedle) != std::string::npos);
    }
}

TEST_CASE("judge stages raise parse errors naming the stage") {
    PromptLibrary prompts = PromptLibrary::load(kPromptsDir);
    ScriptedBackend backend;
    backend.respond_default("garbage");
    Judge judge(prompts, backend, "judge-1", file_image_loader());
    PostClaimPair pair = make_pair("p1", "text", "claim", Split::train);

    std::string msg;
    CHECK(throws_kind(ErrorKind::parse, [&] { judge.judge_reference("a", "b"); }, &msg));
    CHECK(msg.find("reference judge") != std::string::npos);
    CHECK(throws_kind(ErrorKind::parse, [&] { judge.judge_entailment("a", pair, {}); }, &msg));
    CHECK(msg.find("entailment judge") != std::string::npos);
    CHECK(throws_kind(ErrorKind::parse, [&] { judge.judge_decontext("a"); }, &msg));
    CHECK(msg.find("decontextualization judge") != std::string::npos);
}

TEST_CASE("evaluating one claim makes exactly three judge calls") {
    TempDir tmp;
    std::string ref = write_tiny_png(tmp.path(), "one.png", 1);
    PromptLibrary prompts = PromptLibrary::load(kPromptsDir);
    ScriptedBackend backend;
    backend.respond_when(kReferenceNeedle, score_reply(3, "close"));
    backend.respond_when(kEntailmentNeedle, "entailed");
    backend.respond_when(kDecontextNeedle, "fully_decontextualized");
    Judge judge(prompts, backend, "judge-1", file_image_loader());

    PostClaimPair pair = make_pair("p1", "post text", "gold claim", Split::train, {ref});
    ExtractedClaims result;
    result.pair_id = "p1";
    result.model_id = "m1";
    result.claims = {"generated claim"};

    ClaimEvaluation eval = judge.evaluate_claims(result, pair);
    CHECK(backend.calls() == 3);
    CHECK(eval.pair_id == "p1");
    CHECK(eval.claim == "generated claim");
    CHECK(eval.reference.score == 3);
    CHECK(eval.reference.reasoning == "close");
    CHECK(eval.entailment == EntailmentLabel::entailed);
    CHECK(eval.decontext == DecontextLabel::fully_decontextualized);
    CHECK(eval.judge_model_id == "judge-1");
    REQUIRE(eval.candidate_scores.size() == 1);
    CHECK(eval.candidate_scores[0].claim == "generated claim");

    // The gold claim reached the reference judge alongside the candidate.
    CHECK(backend.requests().at(0).text().find("gold claim") != std::string::npos);
    // The entailment judge saw the post images.
    CHECK(backend.requests().at(1).image_count() == 1);
    // The decontextualization judge saw no post content.
    CHECK(backend.requests().at(2).text().find("post text") == std::string::npos);
}

TEST_CASE("multi-claim evaluation scores all candidates and judges the best") {
    TempDir tmp;
    std::string ref = write_tiny_png(tmp.path(), "two.png", 2);
    PromptLibrary prompts = PromptLibrary::load(kPromptsDir);
    ScriptedBackend backend;
    // Every judge request says "Generated Claim: <claim>", so a claim name
    // alone cannot identify the stage; the reference request is the only one
    // that follows it with a reference-claim line.
    backend.respond_when("Generated Claim: weak claim\nReference Claim:", score_reply(2));
    backend.respond_when("Generated Claim: strong claim\nReference Claim:", score_reply(4));
    backend.respond_when(kEntailmentNeedle, "partially_entailed");
    backend.respond_when(kDecontextNeedle, "partially_decontextualized");
    Judge judge(prompts, backend, "judge-1", file_image_loader());

    PostClaimPair pair = make_pair("p1", "post", "gold", Split::train, {ref});
    ExtractedClaims result;
    result.pair_id = "p1";
    result.model_id = "m1";
    result.claims = {"weak claim", "strong claim"};

    ClaimEvaluation eval = judge.evaluate_claims(result, pair);
    CHECK(backend.calls() == 4);  // two references + entailment + decontext
    CHECK(eval.claim == "strong claim");
    CHECK(eval.reference.score == 4);
    REQUIRE(eval.candidate_scores.size() == 2);
    CHECK(eval.candidate_scores[0].claim == "weak claim");
    CHECK(eval.candidate_scores[0].reference.score == 2);
    CHECK(eval.candidate_scores[1].claim == "strong claim");

    // Entailment and decontextualization judged the SELECTED claim.
    CHECK(backend.requests().at(2).text().find("strong claim") != std::string::npos);
    CHECK(backend.requests().at(3).text().find("strong claim") != std::string::npos);
}

TEST_CASE("tied candidates resolve to the earliest claim") {
    TempDir tmp;
    std::string ref = write_tiny_png(tmp.path(), "three.png", 3);
    PromptLibrary prompts = PromptLibrary::load(kPromptsDir);
    ScriptedBackend backend;
    backend.respond_when(kEntailmentNeedle, "entailed");
    backend.respond_when(kDecontextNeedle, "not_decontextualized");
    backend.respond_default(score_reply(3));  // every candidate ties at 3
    Judge judge(prompts, backend, "judge-1", file_image_loader());

    PostClaimPair pair = make_pair("p1", "post", "gold", Split::train, {ref});
    ExtractedClaims result;
    result.pair_id = "p1";
    result.model_id = "m1";
    result.claims = {"first of the tie", "second of the tie"};

    ClaimEvaluation eval = judge.evaluate_claims(result, pair);
    CHECK(eval.claim == "first of the tie");
}

TEST_CASE("evaluations round-trip through jsonl") {
    ClaimEvaluation eval;
    eval.pair_id = "p1";
    eval.claim = "the best claim";
    eval.reference = {4, "spot on"};
    eval.entailment = EntailmentLabel::partially_entailed;
    eval.decontext = DecontextLabel::fully_decontextualized;
    eval.judge_model_id = "judge-1";
    eval.candidate_scores = {{"the best claim", {4, "spot on"}}, {"a lesser claim", {2, "vague"}}};

    std::string jsonl = serialize_evaluations({eval});
    auto parsed = parse_evaluations(jsonl, "evals.jsonl");
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0] == eval);
    CHECK(serialize_evaluations(parsed) == jsonl);
}

TEST_CASE("evaluation files reject bad records with their line number") {
    std::string msg;
    CHECK(throws_kind(ErrorKind::data, [&] { parse_evaluations("{]\n", "e.jsonl"); }, &msg));
    CHECK(msg.find("e.jsonl:1") != std::string::npos);

    ClaimEvaluation eval;
    eval.pair_id = "p1";
    eval.claim = "c";
    eval.reference = {2, ""};
    eval.entailment = EntailmentLabel::entailed;
    eval.decontext = DecontextLabel::not_decontextualized;
    std::string good = serialize_evaluations({eval});

    SUBCASE("score out of range") {
        std::string bad = good;
        auto pos = bad.find("\"reference_score\":2");
        REQUIRE(pos != std::string::npos);
        bad.replace(pos, std::string("\"reference_score\":2").size(), "\"reference_score\":9");
        CHECK(throws_kind(ErrorKind::data, [&] { parse_evaluations(bad, "e.jsonl"); }));
    }
    SUBCASE("unknown entailment label") {
        std::string bad = good;
        auto pos = bad.find("\"entailed\"");
        REQUIRE(pos != std::string::npos);
        bad.replace(pos, std::string("\"entailed\"").size(), "\"sort_of\"");
        CHECK(throws_kind(ErrorKind::parse, [&] { parse_evaluations(bad, "e.jsonl"); }));
    }
}
