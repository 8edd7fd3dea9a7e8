#include "claimex/retrieval.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_set>

#include "claimex/error.hpp"
#include "claimex/util.hpp"

using nlohmann::json;

namespace claimex {

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            current += static_cast<char>(std::tolower(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

Bm25Index Bm25Index::build(const std::vector<std::pair<std::string, std::string>>& corpus,
                           Bm25Params params) {
    if (corpus.empty()) fail(ErrorKind::data, "cannot build a BM25 index over an empty corpus");

    Bm25Index index;
    index.params_ = params;

    std::unordered_set<std::string> seen_ids;
    for (const auto& [id, text] : corpus) {
        if (!seen_ids.insert(id).second) {
            fail(ErrorKind::data, "duplicate document id in BM25 corpus: " + id);
        }
        index.doc_ids_.push_back(id);
        std::unordered_map<std::string, std::size_t> counts;
        auto tokens = tokenize(text);
        for (const auto& token : tokens) ++counts[token];
        index.doc_lengths_.push_back(tokens.size());
        index.term_counts_.push_back(std::move(counts));
    }
    index.finalize();
    return index;
}

void Bm25Index::finalize() {
    doc_frequencies_.clear();
    std::size_t total_length = 0;
    for (std::size_t d = 0; d < doc_ids_.size(); ++d) {
        total_length += doc_lengths_[d];
        for (const auto& [term, count] : term_counts_[d]) {
            (void)count;
            ++doc_frequencies_[term];
        }
    }
    average_length_ = doc_ids_.empty()
                          ? 0.0
                          : static_cast<double>(total_length) / static_cast<double>(doc_ids_.size());
}

std::size_t Bm25Index::document_frequency(const std::string& term) const {
    auto it = doc_frequencies_.find(term);
    return it == doc_frequencies_.end() ? 0 : it->second;
}

double Bm25Index::score(std::size_t doc_index, const std::vector<std::string>& query_terms) const {
    const auto& counts = term_counts_[doc_index];
    const double n = static_cast<double>(doc_ids_.size());
    const double dl = static_cast<double>(doc_lengths_[doc_index]);
    const double norm = params_.k1 * (1.0 - params_.b + params_.b * dl / average_length_);

    double total = 0.0;
    for (const auto& term : query_terms) {
        auto tf_it = counts.find(term);
        if (tf_it == counts.end()) continue;
        const double tf = static_cast<double>(tf_it->second);
        const double df = static_cast<double>(doc_frequencies_.at(term));
        const double idf = std::log((n - df + 0.5) / (df + 0.5));
        total += idf * tf * (params_.k1 + 1.0) / (tf + norm);
    }
    return total;
}

std::vector<ScoredDoc> Bm25Index::retrieve(const std::string& query_text, std::size_t k,
                                           const std::string& exclude_id) const {
    auto tokens = tokenize(query_text);
    std::vector<std::string> unique_terms;
    {
        std::unordered_set<std::string> seen;
        for (auto& token : tokens) {
            if (seen.insert(token).second) unique_terms.push_back(token);
        }
    }

    std::vector<ScoredDoc> ranked;
    ranked.reserve(doc_ids_.size());
    for (std::size_t d = 0; d < doc_ids_.size(); ++d) {
        if (doc_ids_[d] == exclude_id) continue;
        ranked.push_back(ScoredDoc{doc_ids_[d], score(d, unique_terms)});
    }
    std::sort(ranked.begin(), ranked.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

void Bm25Index::save(const std::string& path) const {
    json docs = json::array();
    for (std::size_t d = 0; d < doc_ids_.size(); ++d) {
        json tf = json::object();
        for (const auto& [term, count] : term_counts_[d]) tf[term] = count;
        docs.push_back(json{{"id", doc_ids_[d]}, {"length", doc_lengths_[d]}, {"tf", std::move(tf)}});
    }
    json doc{{"k1", params_.k1}, {"b", params_.b}, {"docs", std::move(docs)}};
    write_file_atomic(path, doc.dump(2) + "\n");
}

Bm25Index Bm25Index::load(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        fail(ErrorKind::data, "corrupt BM25 index file " + path + ": " + e.what());
    }

    Bm25Index index;
    index.params_.k1 = doc.value("k1", 1.2);
    index.params_.b = doc.value("b", 0.75);
    if (!doc.contains("docs") || !doc["docs"].is_array() || doc["docs"].empty()) {
        fail(ErrorKind::data, "BM25 index file " + path + " has no documents");
    }
    std::unordered_set<std::string> seen_ids;
    for (const auto& entry : doc["docs"]) {
        std::string id = entry.at("id").get<std::string>();
        if (!seen_ids.insert(id).second) {
            fail(ErrorKind::data, "duplicate document id in BM25 index file: " + id);
        }
        index.doc_ids_.push_back(std::move(id));
        index.doc_lengths_.push_back(entry.at("length").get<std::size_t>());
        std::unordered_map<std::string, std::size_t> counts;
        for (const auto& [term, count] : entry.at("tf").items()) {
            counts[term] = count.get<std::size_t>();
        }
        index.term_counts_.push_back(std::move(counts));
    }
    index.finalize();
    return index;
}

ShotSet select_shots(const Bm25Index& index, const PairIndex& pairs, const PostClaimPair& query,
                     std::size_t k, int image_budget) {
    auto ranked = index.retrieve(query.post_text, k, query.id);

    ShotSet out;
    for (const auto& scored : ranked) {
        const PostClaimPair* pair = pairs.find(scored.id);
        if (pair == nullptr) {
            fail(ErrorKind::data, "BM25 index references unknown pair id " + scored.id);
        }
        Shot shot;
        shot.pair_id = pair->id;
        shot.post_text = pair->post_text;
        shot.image_refs = pair->image_refs;
        shot.gold_claim = pair->gold_claim;
        shot.score = scored.score;
        out.total_images += shot.image_refs.size();
        out.shots.push_back(std::move(shot));
    }

    if (image_budget > 0) {
        const std::size_t budget = static_cast<std::size_t>(image_budget);
        const std::size_t query_images = query.image_refs.size();
        while (!out.shots.empty() && out.total_images + query_images > budget) {
            out.total_images -= out.shots.back().image_refs.size();
            out.shots.pop_back();
        }
    }
    return out;
}

Bm25Index build_train_index(const Dataset& dataset, Bm25Params params) {
    std::vector<std::pair<std::string, std::string>> corpus;
    for (const auto& pair : dataset.pairs()) {
        if (pair.split == Split::train) corpus.emplace_back(pair.id, pair.post_text);
    }
    if (corpus.empty()) fail(ErrorKind::data, "dataset has no train pairs to index");
    return Bm25Index::build(corpus, params);
}

}  // namespace claimex
