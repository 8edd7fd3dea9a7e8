#include "claimex/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "claimex/error.hpp"
#include "claimex/util.hpp"

namespace claimex {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

Date Date::parse(std::string_view iso) {
    int y = 0, m = 0, d = 0;
    char extra = 0;
    std::string s(iso);
    if (std::sscanf(s.c_str(), "%4d-%2d-%2d%c", &y, &m, &d, &extra) != 3 || s.size() != 10) {
        fail(ErrorKind::data, "invalid date (want YYYY-MM-DD): '" + s + "'");
    }
    static constexpr int days_in_month[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    int max_day = (m >= 1 && m <= 12) ? days_in_month[m - 1] + (m == 2 && leap ? 1 : 0) : 0;
    if (m < 1 || m > 12 || d < 1 || d > max_day) {
        fail(ErrorKind::data, "invalid calendar date: '" + s + "'");
    }
    return Date{y, m, d};
}

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

Split parse_split(std::string_view s) {
    if (s == "train") return Split::train;
    if (s == "dev") return Split::dev;
    fail(ErrorKind::data, "invalid split (want train|dev): '" + std::string(s) + "'");
}

std::string_view to_string(Split s) {
    return s == Split::train ? "train" : "dev";
}

namespace {

DatasetCounts tally(const std::vector<PostClaimPair>& pairs) {
    DatasetCounts c;
    c.total = pairs.size();
    for (const auto& p : pairs) {
        if (p.split == Split::train) ++c.train; else ++c.dev;
        if (p.intent_critical) ++c.intent_critical;
    }
    return c;
}

void check_pair(const PostClaimPair& p, const std::string& where) {
    if (p.id.empty()) fail(ErrorKind::data, where + ": empty id");
    if (trim(p.post_text).empty()) fail(ErrorKind::data, where + ": empty post_text");
    if (trim(p.gold_claim).empty()) fail(ErrorKind::data, where + ": empty gold_claim");
    if (p.image_refs.empty()) fail(ErrorKind::data, where + ": image_refs must not be empty");
    for (const auto& ref : p.image_refs) {
        if (trim(ref).empty()) fail(ErrorKind::data, where + ": blank image reference");
    }
}

const json& require_field(const json& record, const char* name, const std::string& where) {
    auto it = record.find(name);
    if (it == record.end()) {
        fail(ErrorKind::data, where + ": missing required field '" + name + "'");
    }
    return *it;
}

std::string require_string(const json& record, const char* name, const std::string& where) {
    const json& v = require_field(record, name, where);
    if (!v.is_string()) fail(ErrorKind::data, where + ": field '" + name + "' must be a string");
    return v.get<std::string>();
}

PostClaimPair parse_pair(const json& record, const std::string& where) {
    if (!record.is_object()) fail(ErrorKind::data, where + ": record must be a JSON object");
    PostClaimPair p;
    p.id = require_string(record, "id", where);
    p.post_text = require_string(record, "post_text", where);
    p.original_language = require_string(record, "original_language", where);
    p.platform = require_string(record, "platform", where);
    p.source_url = require_string(record, "source_url", where);

    const json& refs = require_field(record, "image_refs", where);
    if (!refs.is_array()) fail(ErrorKind::data, where + ": field 'image_refs' must be an array");
    for (const json& r : refs) {
        if (!r.is_string()) fail(ErrorKind::data, where + ": image_refs entries must be strings");
        p.image_refs.push_back(r.get<std::string>());
    }

    p.gold_claim = require_string(record, "gold_claim", where);
    try {
        p.split = parse_split(require_string(record, "split", where));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::data && std::string_view(e.what()).find(where) != 0) {
            fail(ErrorKind::data, where + ": " + e.what());
        }
        throw;
    }

    const json& ic = require_field(record, "intent_critical", where);
    if (!ic.is_boolean()) fail(ErrorKind::data, where + ": field 'intent_critical' must be a boolean");
    p.intent_critical = ic.get<bool>();

    auto date_it = record.find("post_date");
    if (date_it != record.end() && !date_it->is_null()) {
        if (!date_it->is_string()) fail(ErrorKind::data, where + ": field 'post_date' must be a string or null");
        try {
            p.post_date = Date::parse(date_it->get<std::string>());
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::data && std::string_view(e.what()).find(where) != 0) {
                fail(ErrorKind::data, where + ": " + e.what());
            }
            throw;
        }
    }

    check_pair(p, where);
    return p;
}

}  // namespace

Dataset::Dataset(std::vector<PostClaimPair> pairs) : pairs_(std::move(pairs)) {
    std::unordered_set<std::string_view> seen;
    for (const auto& p : pairs_) {
        check_pair(p, "pair '" + p.id + "'");
        if (!seen.insert(p.id).second) {
            fail(ErrorKind::data, "duplicate id '" + p.id + "'");
        }
    }
    counts_ = tally(pairs_);
}

PairIndex::PairIndex(const Dataset& dataset) {
    by_id_.reserve(dataset.size());
    for (const auto& p : dataset.pairs()) by_id_.emplace(p.id, &p);
}

const PostClaimPair* PairIndex::find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : it->second;
}

const PostClaimPair& PairIndex::at(std::string_view id) const {
    const PostClaimPair* p = find(id);
    if (!p) fail(ErrorKind::data, "unknown pair id '" + std::string(id) + "'");
    return *p;
}

Dataset parse_dataset(std::string_view jsonl, std::string_view origin) {
    std::vector<PostClaimPair> pairs;
    std::unordered_set<std::string> seen;
    size_t line_no = 0;
    size_t pos = 0;
    while (pos <= jsonl.size()) {
        size_t nl = jsonl.find('\n', pos);
        std::string_view line = jsonl.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? jsonl.size() + 1 : nl + 1;
        ++line_no;
        if (trim(line).empty()) continue;

        std::string where = std::string(origin) + ":" + std::to_string(line_no);
        json record;
        try {
            record = json::parse(line);
        } catch (const json::exception& e) {
            fail(ErrorKind::data, where + ": malformed JSON: " + e.what());
        }
        PostClaimPair p = parse_pair(record, where);
        if (!seen.insert(p.id).second) {
            fail(ErrorKind::data, where + ": duplicate id '" + p.id + "'");
        }
        pairs.push_back(std::move(p));
    }
    return Dataset(std::move(pairs));
}

Dataset load_dataset(const std::filesystem::path& path) {
    return parse_dataset(read_text_file(path), path.string());
}

std::string serialize_dataset(const Dataset& dataset) {
    std::string out;
    for (const auto& p : dataset.pairs()) {
        ordered_json record;
        record["id"] = p.id;
        record["post_text"] = p.post_text;
        record["original_language"] = p.original_language;
        record["platform"] = p.platform;
        record["source_url"] = p.source_url;
        record["image_refs"] = p.image_refs;
        record["gold_claim"] = p.gold_claim;
        record["split"] = std::string(to_string(p.split));
        record["intent_critical"] = p.intent_critical;
        record["post_date"] = p.post_date ? json(p.post_date->to_string()) : json(nullptr);
        out += record.dump();
        out += '\n';
    }
    return out;
}

Dataset filter(const Dataset& dataset, const FilterSpec& spec) {
    std::vector<PostClaimPair> kept;
    for (const auto& p : dataset.pairs()) {
        if (spec.split && p.split != *spec.split) continue;
        if (spec.platform && p.platform != *spec.platform) continue;
        if (spec.intent_critical && p.intent_critical != *spec.intent_critical) continue;
        if (spec.date_range) {
            if (!p.post_date) continue;
            if (*p.post_date < spec.date_range->first || spec.date_range->second < *p.post_date) continue;
        }
        kept.push_back(p);
    }
    return Dataset(std::move(kept));
}

namespace {

std::vector<std::pair<std::string, std::size_t>> sorted_counts(const std::map<std::string, std::size_t>& m) {
    std::vector<std::pair<std::string, std::size_t>> out(m.begin(), m.end());
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return out;
}

}  // namespace

Summary summarize(const Dataset& dataset) {
    std::map<std::string, std::size_t> platforms, languages, splits;
    for (const auto& p : dataset.pairs()) {
        ++platforms[p.platform];
        ++splits[std::string(to_string(p.split))];
        for (const std::string& lang : split_list(p.original_language, ",;/")) {
            ++languages[lang];
        }
    }
    Summary s;
    s.total = dataset.size();
    s.platforms = sorted_counts(platforms);
    s.languages = sorted_counts(languages);
    s.splits = sorted_counts(splits);
    s.intent_critical = dataset.counts().intent_critical;
    return s;
}

std::string render_summary(const Summary& summary) {
    std::ostringstream out;
    out << "pairs: " << summary.total << "\n";
    out << "splits:";
    for (const auto& [name, n] : summary.splits) out << " " << name << "=" << n;
    out << "\n";
    out << "intent_critical: " << summary.intent_critical << "\n";
    out << "platforms:\n";
    for (const auto& [name, n] : summary.platforms) out << "  " << name << ": " << n << "\n";
    out << "languages:\n";
    for (const auto& [name, n] : summary.languages) out << "  " << name << ": " << n << "\n";
    return std::move(out).str();
}

}  // namespace claimex
