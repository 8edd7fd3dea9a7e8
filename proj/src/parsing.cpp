#include "claimex/parsing.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "claimex/error.hpp"
#include "claimex/util.hpp"

namespace claimex {

std::string strip_code_fence(std::string_view text) {
    std::string body = trim(text);
    if (!starts_with(body, "```")) return body;
    size_t first_nl = body.find('\n');
    if (first_nl == std::string::npos) return body;
    size_t closing = body.rfind("```");
    if (closing <= first_nl) return body;
    return trim(std::string_view(body).substr(first_nl + 1, closing - first_nl - 1));
}

std::string extract_json_slice(std::string_view text) {
    size_t open = text.find_first_of("{[");
    if (open == std::string_view::npos) return std::string(text);
    char open_ch = text[open];
    char close_ch = open_ch == '{' ? '}' : ']';
    size_t close = text.find_last_of(close_ch);
    if (close == std::string_view::npos || close < open) return std::string(text);
    return std::string(text.substr(open, close - open + 1));
}

nlohmann::json parse_json_lenient(const std::string& raw) {
    try {
        return nlohmann::json::parse(raw);
    } catch (const nlohmann::json::exception&) {
        // repair pass
    }
    std::string repaired = extract_json_slice(strip_code_fence(raw));
    try {
        return nlohmann::json::parse(repaired);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::parse,
             std::string("model reply is not valid JSON after repair: ") + e.what() +
                 "; raw reply: " + raw);
    }
}

namespace {

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Matches label chars against text at pos; '_' in the label also accepts
// ' ' and '-'. Returns the matched length, or 0.
size_t match_label_at(std::string_view text, size_t pos, std::string_view label) {
    if (pos + label.size() > text.size()) return 0;
    for (size_t i = 0; i < label.size(); ++i) {
        char t = static_cast<char>(std::tolower(static_cast<unsigned char>(text[pos + i])));
        char l = label[i];
        if (l == '_') {
            if (t != '_' && t != ' ' && t != '-') return 0;
        } else if (t != l) {
            return 0;
        }
    }
    // word boundaries on both sides
    if (pos > 0 && is_word_char(text[pos - 1])) return 0;
    size_t end = pos + label.size();
    if (end < text.size() && is_word_char(text[end])) return 0;
    return label.size();
}

}  // namespace

std::optional<std::string> find_label_token(std::string_view text,
                                            const std::vector<std::string_view>& labels) {
    std::vector<std::string_view> by_length(labels);
    std::sort(by_length.begin(), by_length.end(),
              [](std::string_view a, std::string_view b) { return a.size() > b.size(); });

    std::set<std::string> found;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t advanced = 1;
        for (std::string_view label : by_length) {
            size_t len = match_label_at(text, pos, label);
            if (len > 0) {
                found.insert(std::string(label));
                advanced = len;
                break;
            }
        }
        pos += advanced;
    }
    if (found.size() == 1) return *found.begin();
    return std::nullopt;
}

}  // namespace claimex
