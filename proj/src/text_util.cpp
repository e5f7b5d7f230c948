#include "text_util.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mfhar/error.hpp"

namespace mfhar::detail {

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError(path.string(), "cannot open file");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string_view trim(std::string_view s) noexcept {
    constexpr std::string_view ws = " \t\r\n\f\v";
    const auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(ws);
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    constexpr std::string_view ws = " \t\r\n\f\v";
    std::size_t pos = 0;
    while (true) {
        const auto start = s.find_first_not_of(ws, pos);
        if (start == std::string_view::npos) break;
        const auto end = s.find_first_of(ws, start);
        out.push_back(s.substr(start, end == std::string_view::npos ? s.size() - start : end - start));
        if (end == std::string_view::npos) break;
        pos = end;
    }
    return out;
}

std::int64_t parse_int(std::string_view field, const std::string& where, const char* what) {
    std::int64_t value = 0;
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw ParseError(where, std::string("invalid ") + what + " '" + std::string(field) + "'");
    }
    return value;
}

double parse_double(std::string_view field, const std::string& where, const char* what) {
    double value = 0.0;
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw ParseError(where, std::string("invalid ") + what + " '" + std::string(field) + "'");
    }
    return value;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace mfhar::detail
