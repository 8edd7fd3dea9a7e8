#include <doctest.h>

#include <optional>
#include <string>
#include <vector>

#include "claimex/error.hpp"
#include "claimex/parsing.hpp"
#include "support/fakes.hpp"

using namespace claimex;
using claimex::testing::throws_kind;

namespace {

const std::vector<std::string_view> kEntailment = {"entailed", "partially_entailed",
                                                   "not_entailed"};

}  // namespace

TEST_CASE("code fences are stripped when they wrap the whole reply") {
    CHECK(strip_code_fence("```json\n{\"a\":1}\n```") == "{\"a\":1}");
    CHECK(strip_code_fence("```\n{\"a\":1}\n```") == "{\"a\":1}");
    CHECK(strip_code_fence("```json\n[1,2]\n```\n") == "[1,2]");
    CHECK(strip_code_fence("{\"a\":1}") == "{\"a\":1}");
    // Inner backticks survive.
    std::string inner = "```json\n{\"a\":\"use `x`\"}\n```";
    CHECK(strip_code_fence(inner) == "{\"a\":\"use `x`\"}");
}

TEST_CASE("json slices are cut out of surrounding prose") {
    CHECK(extract_json_slice("Sure! Here is the answer: {\"claims\": [\"a\"]} Hope that helps.") ==
          "{\"claims\": [\"a\"]}");
    CHECK(extract_json_slice("the list is [1, 2, 3].") == "[1, 2, 3]");
    CHECK(extract_json_slice("{\"a\":1}") == "{\"a\":1}");
    // No JSON punctuation at all: input passes through unchanged.
    CHECK(extract_json_slice("no json here") == "no json here");
}

TEST_CASE("lenient parsing accepts clean, fenced, and prose-wrapped json") {
    CHECK(parse_json_lenient(R"({"score": 3})")["score"] == 3);
    CHECK(parse_json_lenient("```json\n{\"score\": 3}\n```")["score"] == 3);
    CHECK(parse_json_lenient("The result:\n{\"score\": 3}\nDone.")["score"] == 3);
    CHECK(parse_json_lenient("```\n[\"a\", \"b\"]\n```").size() == 2);
    // Fence AND prose inside it still parses through the slice pass.
    CHECK(parse_json_lenient("```json\nAnswer: {\"score\": 2}\n```")["score"] == 2);
}

TEST_CASE("lenient parsing failure carries the raw reply") {
    std::string msg;
    CHECK(throws_kind(ErrorKind::parse, [] { parse_json_lenient("total garbage"); }, &msg));
    CHECK(msg.find("total garbage") != std::string::npos);
    CHECK(throws_kind(ErrorKind::parse, [] { parse_json_lenient("{\"unterminated\": "); }));
    CHECK(throws_kind(ErrorKind::parse, [] { parse_json_lenient(""); }));
}

TEST_CASE("label search finds a single exact label") {
    CHECK(find_label_token("entailed", kEntailment) == "entailed");
    CHECK(find_label_token("not_entailed", kEntailment) == "not_entailed");
    CHECK(find_label_token("partially_entailed", kEntailment) == "partially_entailed");
}

TEST_CASE("label search is case-insensitive and separator-tolerant") {
    CHECK(find_label_token("Entailed", kEntailment) == "entailed");
    CHECK(find_label_token("NOT_ENTAILED", kEntailment) == "not_entailed");
    CHECK(find_label_token("Not Entailed", kEntailment) == "not_entailed");
    CHECK(find_label_token("not-entailed", kEntailment) == "not_entailed");
    CHECK(find_label_token("Partially Entailed", kEntailment) == "partially_entailed");
}

TEST_CASE("label search tolerates surrounding prose") {
    CHECK(find_label_token("The claim is clearly entailed by the post.", kEntailment) ==
          "entailed");
    CHECK(find_label_token("Verdict: NOT ENTAILED. The post never says this.", kEntailment) ==
          "not_entailed");
    CHECK(find_label_token("{\"label\": \"partially_entailed\"}", kEntailment) ==
          "partially_entailed");
}

TEST_CASE("longest label wins at a shared position") {
    // "not_entailed" must not also register its "entailed" suffix, and the
    // same for the "partially_" prefix form.
    CHECK(find_label_token("not entailed", kEntailment) == "not_entailed");
    CHECK(find_label_token("partially entailed", kEntailment) == "partially_entailed");
}

TEST_CASE("label search requires exactly one distinct label") {
    CHECK(find_label_token("either entailed or not_entailed", kEntailment) == std::nullopt);
    CHECK(find_label_token("no verdict words at all", kEntailment) == std::nullopt);
    CHECK(find_label_token("", kEntailment) == std::nullopt);
    // The same label twice is still one distinct label.
    CHECK(find_label_token("entailed — yes, entailed", kEntailment) == "entailed");
}

TEST_CASE("label matches are word-bounded") {
    CHECK(find_label_token("entailedish", kEntailment) == std::nullopt);
    CHECK(find_label_token("unentailed", kEntailment) == std::nullopt);
    CHECK(find_label_token("xentailedx", kEntailment) == std::nullopt);
    CHECK(find_label_token("(entailed)", kEntailment) == "entailed");
    CHECK(find_label_token("entailed.", kEntailment) == "entailed");
}

TEST_CASE("label search handles the decontextualization label set") {
    const std::vector<std::string_view> labels = {
        "fully_decontextualized", "partially_decontextualized", "not_decontextualized"};
    CHECK(find_label_token("The claim is FULLY DECONTEXTUALIZED.", labels) ==
          "fully_decontextualized");
    CHECK(find_label_token("partially-decontextualized", labels) ==
          "partially_decontextualized");
    CHECK(find_label_token("fully vs not_decontextualized", labels) == "not_decontextualized");
}
