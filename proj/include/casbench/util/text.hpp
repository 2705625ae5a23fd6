#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace casbench::util {

/// Splits on '\n' keeping empty pieces: "a\n" -> {"a", ""}, "" -> {""}.
std::vector<std::string> split_lines(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view separator);

inline bool starts_with(std::string_view text, std::string_view prefix) {
    return text.substr(0, prefix.size()) == prefix;
}

std::string_view trim(std::string_view text);

std::string to_lower(std::string_view text);

/// Replaces every invalid UTF-8 sequence with U+FFFD.
std::string sanitize_utf8(std::string_view bytes);

bool is_valid_utf8(std::string_view bytes);

/// Splits on runs of ASCII whitespace.
std::vector<std::string> split_whitespace(std::string_view text);

}  // namespace casbench::util
