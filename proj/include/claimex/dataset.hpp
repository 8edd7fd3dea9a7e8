#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace claimex {

/// Calendar date, ISO "YYYY-MM-DD" on the wire.
struct Date {
    int year = 0;
    int month = 0;
    int day = 0;

    static Date parse(std::string_view iso);  // throws Error(data)
    std::string to_string() const;

    auto operator<=>(const Date&) const = default;
};

enum class Split { train, dev };

Split parse_split(std::string_view s);  // throws Error(data)
std::string_view to_string(Split s);

/// One post–claim record: the post's text and images plus the gold claim a
/// fact-checking article extracted for it.
struct PostClaimPair {
    std::string id;
    std::string post_text;
    std::string original_language;
    std::string platform;
    std::string source_url;
    std::vector<std::string> image_refs;  // length >= 1; local paths or URLs
    std::string gold_claim;
    Split split = Split::train;
    bool intent_critical = false;
    std::optional<Date> post_date;

    bool operator==(const PostClaimPair&) const = default;
};

struct DatasetCounts {
    std::size_t total = 0;
    std::size_t train = 0;
    std::size_t dev = 0;
    std::size_t intent_critical = 0;

    bool operator==(const DatasetCounts&) const = default;
};

/// Immutable after construction; safe to share read-only across workers.
class Dataset {
public:
    Dataset() = default;

    /// Validates per-pair invariants and id uniqueness. Throws Error(data).
    explicit Dataset(std::vector<PostClaimPair> pairs);

    const std::vector<PostClaimPair>& pairs() const { return pairs_; }
    const DatasetCounts& counts() const { return counts_; }
    std::size_t size() const { return pairs_.size(); }
    bool empty() const { return pairs_.empty(); }

    bool operator==(const Dataset& other) const { return pairs_ == other.pairs_; }

private:
    std::vector<PostClaimPair> pairs_;
    DatasetCounts counts_;
};

/// Ordered id -> pair lookup over a dataset the caller keeps alive.
class PairIndex {
public:
    explicit PairIndex(const Dataset& dataset);
    const PostClaimPair* find(std::string_view id) const;
    const PostClaimPair& at(std::string_view id) const;  // throws Error(data)

private:
    std::unordered_map<std::string, const PostClaimPair*> by_id_;
};

/// All criteria are conjoined; an absent criterion matches everything.
struct FilterSpec {
    std::optional<Split> split;
    std::optional<std::string> platform;
    std::optional<bool> intent_critical;
    std::optional<std::pair<Date, Date>> date_range;  // inclusive; pairs without a date are excluded

    bool empty() const {
        return !split && !platform && !intent_critical && !date_range;
    }
};

/// Parses one JSONL document. `origin` names the source in error messages.
Dataset parse_dataset(std::string_view jsonl, std::string_view origin = "<memory>");

Dataset load_dataset(const std::filesystem::path& path);

/// One JSON object per line, schema field order, UTF-8.
std::string serialize_dataset(const Dataset& dataset);

Dataset filter(const Dataset& dataset, const FilterSpec& spec);

struct Summary {
    std::size_t total = 0;
    // (name, count) sorted by descending count, then name
    std::vector<std::pair<std::string, std::size_t>> platforms;
    std::vector<std::pair<std::string, std::size_t>> languages;
    std::vector<std::pair<std::string, std::size_t>> splits;
    std::size_t intent_critical = 0;
};

/// Platform and split counts sum to the total. A pair listing several
/// languages ("English / Hindi") counts under each, so language counts may
/// exceed the total.
Summary summarize(const Dataset& dataset);

std::string render_summary(const Summary& summary);

}  // namespace claimex
