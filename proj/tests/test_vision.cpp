#include <doctest.h>

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "claimex/error.hpp"
#include "claimex/media.hpp"
#include "claimex/vision.hpp"
#include "support/fakes.hpp"

using namespace claimex;
using claimex::testing::ScriptedVisionClient;
using claimex::testing::TempDir;
using claimex::testing::throws_kind;
using claimex::testing::tiny_png_bytes;
using claimex::testing::write_tiny_png;

namespace {

ImagePayload png_payload(unsigned char seed = 0) {
    ImagePayload img;
    img.source_ref = "images/seed" + std::to_string(seed) + ".png";
    img.media_type = "image/png";
    img.bytes = tiny_png_bytes(seed);
    return img;
}

std::string service_payload() {
    nlohmann::json doc = {
        {"denseCaptionsResult",
         {{"values",
           {{{"text", "a flooded street"}, {"confidence", 0.97}},
            {{"text", "people wading through water"}, {"confidence", 0.84}},
            {{"text", ""}, {"confidence", 0.5}}}}}},  // dropped: empty text
        {"readResult",
         {{"blocks",
           {{{"lines", {{{"text", "BREAKING NEWS"}}, {{"text", "City underwater"}}}}}}}}},
        {"tagsResult",
         {{"values",
           {{{"name", "water"}, {"confidence", 0.99}},
            {{"name", "street"}, {"confidence", 0.9}},
            {{"name", "water"}, {"confidence", 0.8}}}}}}};  // duplicate collapses
    return doc.dump();
}

VisualSemantics sample_semantics() {
    VisualSemantics s;
    s.source_ref = "images/a.png";
    s.dense_captions = {{"a flooded street", 0.97}, {"people wading", {}}};
    s.ocr_text = "BREAKING NEWS\nCity underwater";
    s.tags = {"water", "street"};
    return s;
}

}  // namespace

TEST_CASE("vision payloads map captions, ocr lines, and deduplicated tags") {
    VisualSemantics s = parse_vision_payload(service_payload(), "images/x.png");
    CHECK(s.source_ref == "images/x.png");
    REQUIRE(s.dense_captions.size() == 2);
    CHECK(s.dense_captions[0].text == "a flooded street");
    REQUIRE(s.dense_captions[0].confidence.has_value());
    CHECK(*s.dense_captions[0].confidence == doctest::Approx(0.97));
    CHECK(s.dense_captions[1].text == "people wading through water");
    CHECK(s.ocr_text == "BREAKING NEWS\nCity underwater");
    CHECK(s.tags == std::vector<std::string>{"water", "street"});
}

TEST_CASE("vision payloads tolerate absent sections") {
    VisualSemantics s = parse_vision_payload("{}", "ref");
    CHECK(s.dense_captions.empty());
    CHECK(s.ocr_text.empty());
    CHECK(s.tags.empty());

    CHECK(throws_kind(ErrorKind::provider, [] { parse_vision_payload("not json", "ref"); }));
}

TEST_CASE("vision cache keys depend on image bytes, not names") {
    ImagePayload a = png_payload(1);
    ImagePayload same_bytes = png_payload(1);
    same_bytes.source_ref = "somewhere/else.png";
    ImagePayload different = png_payload(2);

    CHECK(vision_cache_key(a) == vision_cache_key(same_bytes));
    CHECK(vision_cache_key(a) != vision_cache_key(different));
    CHECK(vision_cache_key(a).size() == 64);
}

TEST_CASE("caching vision client records one analysis per distinct image") {
    TempDir tmp;
    auto store = std::make_shared<FixtureStore>(tmp.path());
    auto inner = std::make_shared<ScriptedVisionClient>(sample_semantics());
    CachingVisionClient caching(store, inner);

    VisualSemantics first = caching.analyze(png_payload(1));
    CHECK(first.dense_captions.size() == 2);
    CHECK(inner->calls() == 1);

    VisualSemantics second = caching.analyze(png_payload(1));
    CHECK(inner->calls() == 1);  // cache hit
    CHECK(second.dense_captions.size() == first.dense_captions.size());
    CHECK(second.ocr_text == first.ocr_text);
    CHECK(second.tags == first.tags);

    caching.analyze(png_payload(2));
    CHECK(inner->calls() == 2);  // different bytes, different fixture
}

TEST_CASE("replay vision client serves recordings and rejects unknown images") {
    TempDir tmp;
    auto store = std::make_shared<FixtureStore>(tmp.path());
    {
        auto inner = std::make_shared<ScriptedVisionClient>(sample_semantics());
        CachingVisionClient recorder(store, inner);
        recorder.analyze(png_payload(1));
    }
    ReplayVisionClient replay(store);
    VisualSemantics s = replay.analyze(png_payload(1));
    CHECK(s.ocr_text == "BREAKING NEWS\nCity underwater");
    CHECK(s.tags == std::vector<std::string>{"water", "street"});
    CHECK(s.source_ref == png_payload(1).source_ref);  // ref follows the query image

    CHECK(throws_kind(ErrorKind::missing_fixture, [&] { replay.analyze(png_payload(9)); }));
}

TEST_CASE("post image analysis drops broken images with warnings") {
    TempDir tmp;
    std::string good1 = write_tiny_png(tmp.path(), "one.png", 1);
    std::string good2 = write_tiny_png(tmp.path(), "two.png", 2);
    std::string missing = (tmp.path() / "gone.png").string();

    ScriptedVisionClient client(sample_semantics());
    PostClaimPair pair = claimex::testing::make_pair("p1", "text", "claim", Split::train,
                                                     {good1, missing, good2});

    VisionAnalysis analysis = analyze_post_images(pair, file_image_loader(), client);
    REQUIRE(analysis.semantics.size() == 2);
    CHECK(analysis.semantics[0].source_ref == good1);
    CHECK(analysis.semantics[1].source_ref == good2);
    REQUIRE(analysis.warnings.size() == 1);
    CHECK(analysis.warnings[0].find("gone.png") != std::string::npos);
    CHECK(client.calls() == 2);
}

TEST_CASE("post image analysis fails only when every image fails") {
    TempDir tmp;
    ScriptedVisionClient client(sample_semantics());
    PostClaimPair pair = claimex::testing::make_pair(
        "p1", "text", "claim", Split::train,
        {(tmp.path() / "a.png").string(), (tmp.path() / "b.png").string()});
    CHECK(throws_kind(ErrorKind::image_access,
                      [&] { analyze_post_images(pair, file_image_loader(), client); }));
}

TEST_CASE("the visual block renders every section in a fixed layout") {
    VisualSemantics s = sample_semantics();
    std::string block = render_visual_block({s});
    CHECK(block ==
          "# VISUAL SEMANTICS\n"
          "\n"
          "## Image 1\n"
          "Captions:\n"
          "- a flooded street (confidence 0.97)\n"
          "- people wading\n"
          "Text in image:\n"
          "BREAKING NEWS\nCity underwater\n"
          "Tags: water, street\n");
    CHECK(render_visual_block({s}) == block);  // byte-identical on re-render
}

TEST_CASE("the visual block skips empty sections and numbers images") {
    VisualSemantics bare;
    bare.source_ref = "x";
    bare.dense_captions = {{"a cat", {}}};

    VisualSemantics tags_only;
    tags_only.source_ref = "y";
    tags_only.tags = {"cat", "sofa"};

    std::string block = render_visual_block({bare, tags_only});
    CHECK(block ==
          "# VISUAL SEMANTICS\n"
          "\n"
          "## Image 1\n"
          "Captions:\n"
          "- a cat\n"
          "\n"
          "## Image 2\n"
          "Tags: cat, sofa\n");
    CHECK(block.find("Text in image") == std::string::npos);
}

TEST_CASE("no analyzed images means no visual block at all") {
    CHECK(render_visual_block({}).empty());
}
