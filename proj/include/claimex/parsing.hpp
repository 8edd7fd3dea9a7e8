#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace claimex {

/// Strips a surrounding markdown code fence (``` or ```json) if present.
std::string strip_code_fence(std::string_view text);

/// Cuts the slice from the first '{' or '[' to the last matching '}' or ']'.
/// Returns the input unchanged when no such slice exists.
std::string extract_json_slice(std::string_view text);

/// Parses model output as JSON. First tries the raw text; on failure makes
/// one repair pass (fence stripping, then prose trimming) and retries.
/// Throws Error(parse) carrying the raw text when both attempts fail.
nlohmann::json parse_json_lenient(const std::string& raw);

/// Finds a label from a closed set inside free text. Matching is
/// case-insensitive, word-bounded, and separator-tolerant ('_' in the label
/// also matches ' ' or '-'). At each position the longest label wins, so
/// "not_entailed" never double-counts its "entailed" suffix. Returns the
/// label only when exactly one distinct label occurs.
std::optional<std::string> find_label_token(std::string_view text,
                                            const std::vector<std::string_view>& labels);

}  // namespace claimex
