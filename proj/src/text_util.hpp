#pragma once

// Line-oriented helpers shared by the plain-text fixture and label parsers.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mfhar::detail {

std::string read_text_file(const std::filesystem::path& path);

std::string_view trim(std::string_view s) noexcept;

std::vector<std::string_view> split_ws(std::string_view s);

/// Calls fn(line_number, line) for every non-blank line with `#` comments removed.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (!line.empty()) {
            fn(line_no, line);
        }
    }
}

/// Like for_each_line, but hands over whitespace-separated fields.
template <typename Fn>
void for_each_record(std::string_view text, Fn&& fn) {
    for_each_line(text, [&](std::size_t line_no, std::string_view line) { fn(line_no, split_ws(line)); });
}

/// Shortest text that round-trips to the same double.
std::string format_double(double v);

std::int64_t parse_int(std::string_view field, const std::string& where, const char* what);
double parse_double(std::string_view field, const std::string& where, const char* what);

}  // namespace mfhar::detail
