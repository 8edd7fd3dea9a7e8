#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "claimex/dataset.hpp"

namespace claimex {

// Lowercase the text and split it on runs of non-alphanumeric bytes.
// No stemming, no stopword removal.
std::vector<std::string> tokenize(const std::string& text);

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

struct ScoredDoc {
    std::string id;
    double score;
};

// Okapi BM25 index over (id, text) documents.
//
// score(d, q) = Σ over unique query terms t of
//   idf(t) · tf(t,d)·(k1+1) / (tf(t,d) + k1·(1 − b + b·len(d)/avg_len))
// with idf(t) = ln((N − df(t) + 0.5) / (df(t) + 0.5)), unclamped.
class Bm25Index {
public:
    static Bm25Index build(const std::vector<std::pair<std::string, std::string>>& corpus,
                           Bm25Params params = {});

    // Full ranking truncated to k, ties broken by ascending id; exclude_id
    // is removed before the cut so the next-best document is promoted.
    std::vector<ScoredDoc> retrieve(const std::string& query_text, std::size_t k,
                                    const std::string& exclude_id = "") const;

    double score(std::size_t doc_index, const std::vector<std::string>& query_terms) const;

    std::size_t size() const { return doc_ids_.size(); }
    const std::vector<std::string>& doc_ids() const { return doc_ids_; }
    double average_length() const { return average_length_; }
    const Bm25Params& params() const { return params_; }
    std::size_t document_frequency(const std::string& term) const;
    std::size_t document_length(std::size_t doc_index) const { return doc_lengths_[doc_index]; }

    void save(const std::string& path) const;
    static Bm25Index load(const std::string& path);

private:
    Bm25Index() = default;
    void finalize();

    Bm25Params params_;
    std::vector<std::string> doc_ids_;
    std::vector<std::unordered_map<std::string, std::size_t>> term_counts_;
    std::vector<std::size_t> doc_lengths_;
    std::unordered_map<std::string, std::size_t> doc_frequencies_;
    double average_length_ = 0.0;
};

struct Shot {
    std::string pair_id;
    std::string post_text;
    std::vector<std::string> image_refs;
    std::string gold_claim;
    double score = 0.0;
};

struct ShotSet {
    std::vector<Shot> shots;          // scores non-increasing
    std::size_t total_images = 0;     // images carried by the shots alone
};

// Pick demonstrations for a query pair: top-k retrieval with the query's own
// id excluded, then drop shots from the tail until shot images plus the
// query's images fit the budget. image_budget ≤ 0 disables the cap.
ShotSet select_shots(const Bm25Index& index, const PairIndex& pairs, const PostClaimPair& query,
                     std::size_t k, int image_budget);

// Index over the train split's post texts (demonstrations never come from dev).
Bm25Index build_train_index(const Dataset& dataset, Bm25Params params = {});

}  // namespace claimex
