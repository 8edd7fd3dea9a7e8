#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace claimex {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

/// Splits on a single separator; pieces are trimmed, empties dropped.
std::vector<std::string> split_list(std::string_view s, std::string_view separators);

bool starts_with(std::string_view s, std::string_view prefix);

/// SHA-256 of the given bytes as a lowercase hex string.
std::string sha256_hex(std::string_view bytes);

std::string base64_encode(std::string_view bytes);

std::string read_text_file(const std::filesystem::path& path);
std::string read_binary_file(const std::filesystem::path& path);

/// Writes via a temp file in the same directory, then renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Fixed-decimal rendering ("3.25", "54.9"); used for human-facing tables.
std::string format_fixed(double v, int decimals);

/// Shortest round-trippable decimal rendering; used for machine output.
std::string format_full(double v);

/// Replaces every character outside [A-Za-z0-9._-] with '_' (artifact paths).
std::string sanitize_path_component(std::string_view s);

}  // namespace claimex
