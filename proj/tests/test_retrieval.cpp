#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "claimex/error.hpp"
#include "claimex/retrieval.hpp"
#include "support/fakes.hpp"

using namespace claimex;
using claimex::testing::make_pair;
using claimex::testing::TempDir;
using claimex::testing::throws_kind;

namespace {

// Independent Okapi scorer used as the test oracle. It keeps whole token
// vectors per document and recomputes everything by brute force on each
// call — no shared code or data layout with the index under test.
struct OracleCorpus {
    std::vector<std::string> ids;
    std::vector<std::vector<std::string>> tokens;

    static OracleCorpus from(const std::vector<std::pair<std::string, std::string>>& corpus) {
        OracleCorpus out;
        for (const auto& [id, text] : corpus) {
            out.ids.push_back(id);
            out.tokens.push_back(tokenize(text));
        }
        return out;
    }

    double average_length() const {
        double total = 0;
        for (const auto& t : tokens) total += static_cast<double>(t.size());
        return tokens.empty() ? 0.0 : total / static_cast<double>(tokens.size());
    }

    double score(std::size_t doc, const std::string& query, double k1, double b) const {
        const double n = static_cast<double>(ids.size());
        const double avgdl = average_length();
        auto query_tokens = tokenize(query);
        std::set<std::string> unique(query_tokens.begin(), query_tokens.end());
        double total = 0.0;
        for (const auto& term : unique) {
            std::size_t df = 0;
            for (const auto& t : tokens) {
                if (std::find(t.begin(), t.end(), term) != t.end()) ++df;
            }
            double tf = static_cast<double>(
                std::count(tokens[doc].begin(), tokens[doc].end(), term));
            if (tf == 0.0) continue;
            double idf = std::log((n - static_cast<double>(df) + 0.5) /
                                  (static_cast<double>(df) + 0.5));
            double dl = static_cast<double>(tokens[doc].size());
            total += idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * dl / avgdl));
        }
        return total;
    }

    std::vector<ScoredDoc> rank(const std::string& query, std::size_t k,
                                const std::string& exclude, double k1, double b) const {
        std::vector<ScoredDoc> all;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (ids[i] == exclude) continue;
            all.push_back({ids[i], score(i, query, k1, b)});
        }
        std::sort(all.begin(), all.end(), [](const ScoredDoc& x, const ScoredDoc& y) {
            if (x.score != y.score) return x.score > y.score;
            return x.id < y.id;
        });
        if (all.size() > k) all.resize(k);
        return all;
    }
};

std::vector<std::pair<std::string, std::string>> random_corpus(std::mt19937& rng,
                                                               std::size_t max_docs = 50) {
    std::uniform_int_distribution<std::size_t> n_docs(2, max_docs);
    std::uniform_int_distribution<std::size_t> n_tokens(1, 40);
    std::uniform_int_distribution<int> word(0, 29);
    std::vector<std::pair<std::string, std::string>> corpus;
    std::size_t n = n_docs(rng);
    for (std::size_t i = 0; i < n; ++i) {
        std::string text;
        std::size_t len = n_tokens(rng);
        for (std::size_t t = 0; t < len; ++t) {
            if (t) text += ' ';
            text += "w" + std::to_string(word(rng));
        }
        corpus.emplace_back("doc" + std::to_string(i), text);
    }
    return corpus;
}

std::string random_query(std::mt19937& rng) {
    std::uniform_int_distribution<std::size_t> n_tokens(1, 8);
    std::uniform_int_distribution<int> word(0, 34);  // some terms miss the corpus
    std::string text;
    std::size_t len = n_tokens(rng);
    for (std::size_t t = 0; t < len; ++t) {
        if (t) text += ' ';
        text += "w" + std::to_string(word(rng));
    }
    return text;
}

}  // namespace

TEST_CASE("tokenization lowercases and splits on non-alphanumerics") {
    CHECK(tokenize("Hello, World—42!") == std::vector<std::string>{"hello", "world", "42"});
    CHECK(tokenize("A.b_C") == std::vector<std::string>{"a", "b", "c"});
    CHECK(tokenize("   ") == std::vector<std::string>{});
    CHECK(tokenize("") == std::vector<std::string>{});
    CHECK(tokenize("don't stop") == std::vector<std::string>{"don", "t", "stop"});
}

TEST_CASE("index construction enforces non-empty unique-id corpora") {
    CHECK(throws_kind(ErrorKind::data, [] { Bm25Index::build({}); }));
    CHECK(throws_kind(ErrorKind::data, [] {
        Bm25Index::build({{"a", "one"}, {"a", "two"}});
    }));
}

TEST_CASE("index statistics match hand counts") {
    auto index = Bm25Index::build({{"d1", "the cat sat"},
                                   {"d2", "the dog, the DOG!"},
                                   {"d3", "cat cat cat dog"}});
    CHECK(index.size() == 3);
    CHECK(index.document_frequency("the") == 2);
    CHECK(index.document_frequency("cat") == 2);
    CHECK(index.document_frequency("dog") == 2);
    CHECK(index.document_frequency("sat") == 1);
    CHECK(index.document_frequency("absent") == 0);
    CHECK(index.document_length(0) == 3);
    CHECK(index.document_length(1) == 4);
    CHECK(index.document_length(2) == 4);
    CHECK(index.average_length() == doctest::Approx((3 + 4 + 4) / 3.0));
    CHECK(index.params().k1 == 1.2);
    CHECK(index.params().b == 0.75);
}

TEST_CASE("a single-document score matches the formula computed by hand") {
    // One term, two docs: idf = ln((2 - 1 + 0.5) / (1 + 0.5)) = ln(1) = 0 for
    // a term in one of two docs; pick a corpus where idf is non-zero.
    auto index = Bm25Index::build({{"d1", "flood flood warning"},
                                   {"d2", "sunny day"},
                                   {"d3", "sunny again"}});
    // "flood": df=1, N=3 -> idf = ln((3-1+0.5)/(1+0.5)) = ln(5/3)
    // d1: tf=2, len=3, avgdl=(3+2+2)/3=7/3
    double idf = std::log((3.0 - 1.0 + 0.5) / (1.0 + 0.5));
    double norm = 1.2 * (1.0 - 0.75 + 0.75 * 3.0 / (7.0 / 3.0));
    double expected = idf * (2.0 * 2.2) / (2.0 + norm);
    auto hits = index.retrieve("flood", 1);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].id == "d1");
    CHECK(hits[0].score == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("queries disjoint from a document score it zero") {
    auto index = Bm25Index::build({{"d1", "alpha beta"}, {"d2", "gamma delta"}});
    auto hits = index.retrieve("alpha", 2);
    REQUIRE(hits.size() == 2);
    CHECK(hits[0].id == "d1");
    CHECK(hits[1].id == "d2");
    CHECK(hits[1].score == 0.0);
}

TEST_CASE("repeated query terms count once") {
    auto index = Bm25Index::build({{"d1", "alpha beta"}, {"d2", "alpha gamma"}});
    auto once = index.retrieve("alpha", 2);
    auto thrice = index.retrieve("alpha alpha ALPHA", 2);
    REQUIRE(once.size() == thrice.size());
    for (std::size_t i = 0; i < once.size(); ++i) {
        CHECK(once[i].id == thrice[i].id);
        CHECK(once[i].score == thrice[i].score);
    }
}

TEST_CASE("rankings agree with a brute-force oracle on random corpora") {
    std::mt19937 rng(20240817);
    for (int round = 0; round < 25; ++round) {
        auto corpus = random_corpus(rng);
        auto index = Bm25Index::build(corpus);
        OracleCorpus oracle = OracleCorpus::from(corpus);
        std::string query = random_query(rng);
        CAPTURE(round);
        CAPTURE(query);

        auto got = index.retrieve(query, corpus.size());
        auto want = oracle.rank(query, corpus.size(), "", 1.2, 0.75);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CAPTURE(i);
            CHECK(got[i].id == want[i].id);
            CHECK(got[i].score == doctest::Approx(want[i].score).epsilon(1e-9));
        }
    }
}

TEST_CASE("ties break by ascending id") {
    // Identical documents earn identical scores; order must fall back to id.
    auto index = Bm25Index::build(
        {{"zeta", "same words here"}, {"alpha", "same words here"}, {"mid", "same words here"}});
    auto hits = index.retrieve("same words", 3);
    REQUIRE(hits.size() == 3);
    CHECK(hits[0].id == "alpha");
    CHECK(hits[1].id == "mid");
    CHECK(hits[2].id == "zeta");
    CHECK(hits[0].score == hits[2].score);
}

TEST_CASE("excluding a document promotes the next best") {
    std::mt19937 rng(424242);
    int rounds = 0;
    while (rounds < 1000) {
        auto corpus = random_corpus(rng, 20);
        auto index = Bm25Index::build(corpus);
        std::string query = random_query(rng);
        std::uniform_int_distribution<std::size_t> pick(0, corpus.size() - 1);
        std::uniform_int_distribution<std::size_t> kdist(1, corpus.size());
        std::string excluded = corpus[pick(rng)].first;
        std::size_t k = kdist(rng);

        auto full = index.retrieve(query, corpus.size());
        std::vector<ScoredDoc> expected;
        for (const auto& d : full) {
            if (d.id != excluded) expected.push_back(d);
        }
        if (expected.size() > k) expected.resize(k);

        auto got = index.retrieve(query, k, excluded);
        REQUIRE(got.size() == expected.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].id == expected[i].id);
            CHECK(got[i].score == expected[i].score);
        }
        for (const auto& d : got) CHECK(d.id != excluded);
        ++rounds;
    }
}

TEST_CASE("indexes survive a save/load round trip") {
    TempDir tmp;
    std::mt19937 rng(7);
    auto corpus = random_corpus(rng);
    auto index = Bm25Index::build(corpus);
    std::string path = (tmp.path() / "index.json").string();
    index.save(path);
    auto loaded = Bm25Index::load(path);

    CHECK(loaded.size() == index.size());
    CHECK(loaded.average_length() == index.average_length());
    for (int i = 0; i < 10; ++i) {
        std::string query = random_query(rng);
        auto a = index.retrieve(query, 10);
        auto b = loaded.retrieve(query, 10);
        REQUIRE(a.size() == b.size());
        for (std::size_t j = 0; j < a.size(); ++j) {
            CHECK(a[j].id == b[j].id);
            CHECK(a[j].score == b[j].score);
        }
    }
}

namespace {

Dataset shot_dataset(const std::vector<std::size_t>& images_per_pair) {
    std::vector<PostClaimPair> pairs;
    for (std::size_t i = 0; i < images_per_pair.size(); ++i) {
        std::vector<std::string> refs;
        for (std::size_t r = 0; r < images_per_pair[i]; ++r) {
            refs.push_back("images/p" + std::to_string(i) + "_" + std::to_string(r) + ".png");
        }
        pairs.push_back(make_pair("p" + std::to_string(i),
                                  "shared flood words plus token" + std::to_string(i),
                                  "claim " + std::to_string(i), Split::train, refs));
    }
    return Dataset(pairs);
}

}  // namespace

TEST_CASE("shot selection drops tail shots until the image budget fits") {
    // Five candidates with ten images each; the query carries one image.
    // 2 shots -> 20 + 1 = 21 <= 30 fits; 3 shots -> 31 > 30 does not.
    Dataset d = shot_dataset({10, 10, 10, 10, 10, 1});
    PairIndex pairs(d);
    Bm25Index index = build_train_index(d);
    const PostClaimPair& query = d.pairs()[5];

    ShotSet shots = select_shots(index, pairs, query, 5, 30);
    CHECK(shots.shots.size() == 2);
    CHECK(shots.total_images == 20);
    for (const auto& s : shots.shots) CHECK(s.pair_id != query.id);
}

TEST_CASE("a non-positive budget disables the image cap") {
    Dataset d = shot_dataset({10, 10, 10, 10, 10, 1});
    PairIndex pairs(d);
    Bm25Index index = build_train_index(d);
    ShotSet shots = select_shots(index, pairs, d.pairs()[5], 5, 0);
    CHECK(shots.shots.size() == 5);
    CHECK(shots.total_images == 50);
    ShotSet negative = select_shots(index, pairs, d.pairs()[5], 5, -1);
    CHECK(negative.shots.size() == 5);
}

TEST_CASE("selected shots are a prefix of the leave-one-out ranking") {
    std::mt19937 rng(99);
    std::uniform_int_distribution<std::size_t> n_pairs(3, 12);
    std::uniform_int_distribution<std::size_t> n_images(1, 6);
    std::uniform_int_distribution<int> budget_dist(1, 25);

    for (int round = 0; round < 50; ++round) {
        std::vector<std::size_t> images;
        std::size_t n = n_pairs(rng);
        for (std::size_t i = 0; i < n; ++i) images.push_back(n_images(rng));
        Dataset d = shot_dataset(images);
        PairIndex pairs(d);
        Bm25Index index = build_train_index(d);
        const PostClaimPair& query = d.pairs()[0];
        int budget = budget_dist(rng);

        ShotSet shots = select_shots(index, pairs, query, 5, budget);
        auto ranking = index.retrieve(query.post_text, 5, query.id);

        // Prefix property: shot i corresponds to ranking position i.
        REQUIRE(shots.shots.size() <= ranking.size());
        std::size_t total = 0;
        for (std::size_t i = 0; i < shots.shots.size(); ++i) {
            CHECK(shots.shots[i].pair_id == ranking[i].id);
            CHECK(shots.shots[i].score == ranking[i].score);
            total += shots.shots[i].image_refs.size();
        }
        CHECK(total == shots.total_images);
        // Budget property: the total request image count fits, or no shot fits.
        std::size_t with_query = shots.total_images + query.image_refs.size();
        if (!shots.shots.empty()) CHECK(with_query <= static_cast<std::size_t>(budget));
        // Maximality: one more shot would burst the budget (when one exists).
        if (shots.shots.size() < ranking.size()) {
            const auto& next = pairs.at(ranking[shots.shots.size()].id);
            CHECK(with_query + next.image_refs.size() > static_cast<std::size_t>(budget));
        }
    }
}

TEST_CASE("shot scores arrive in non-increasing order with gold claims attached") {
    Dataset d = shot_dataset({1, 1, 1, 1});
    PairIndex pairs(d);
    Bm25Index index = build_train_index(d);
    ShotSet shots = select_shots(index, pairs, d.pairs()[0], 3, 0);
    REQUIRE(shots.shots.size() == 3);
    for (std::size_t i = 1; i < shots.shots.size(); ++i) {
        CHECK(shots.shots[i - 1].score >= shots.shots[i].score);
    }
    for (const auto& s : shots.shots) {
        const auto& src = pairs.at(s.pair_id);
        CHECK(s.post_text == src.post_text);
        CHECK(s.gold_claim == src.gold_claim);
        CHECK(s.image_refs == src.image_refs);
    }
}

TEST_CASE("the demonstration index only ever contains the train split") {
    std::vector<PostClaimPair> pairs;
    pairs.push_back(make_pair("t1", "solar flare coverage", "claim", Split::train));
    pairs.push_back(make_pair("t2", "solar panels on roofs", "claim", Split::train));
    pairs.push_back(make_pair("d1", "solar flare coverage exactly", "claim", Split::dev));
    Dataset d(pairs);

    Bm25Index index = build_train_index(d);
    CHECK(index.size() == 2);
    for (const auto& hit : index.retrieve("solar flare coverage", 10)) {
        CHECK(hit.id != "d1");
    }

    Dataset dev_only(std::vector<PostClaimPair>{make_pair("d2", "text", "claim", Split::dev)});
    CHECK(throws_kind(ErrorKind::data, [&] { build_train_index(dev_only); }));
}
