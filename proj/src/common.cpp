#include "cloneaudit/common.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <tuple>

namespace cloneaudit {

namespace {

bool parse_uint(std::string_view s, int& out) {
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace

std::optional<Date> Date::parse(std::string_view text) {
    if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    if (text.size() > 10 && text[10] != 'T' && text[10] != ' ') return std::nullopt;
    int y = 0, m = 0, d = 0;
    if (!parse_uint(text.substr(0, 4), y) || !parse_uint(text.substr(5, 2), m) ||
        !parse_uint(text.substr(8, 2), d))
        return std::nullopt;
    Date date(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
    if (!date.ok()) return std::nullopt;
    return date;
}

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year(), month(), day());
    return buf;
}

void Diagnostics::merge(const Diagnostics& other) {
    for (const auto& [k, v] : other.counts) counts[k] += v;
    messages.insert(messages.end(), other.messages.begin(), other.messages.end());
}

std::string_view to_string(DetectorKind d) {
    return d == DetectorKind::token ? "token" : "line";
}

std::optional<DetectorKind> parse_detector(std::string_view s) {
    if (s == "token") return DetectorKind::token;
    if (s == "line") return DetectorKind::line;
    return std::nullopt;
}

bool canonical_less(const ClonePair& a, const ClonePair& b) {
    return std::tie(a.left, a.right, a.detector) < std::tie(b.left, b.right, b.detector);
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    if (text.empty()) return lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            if (start < text.size()) {
                auto line = text.substr(start);
                if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
                lines.emplace_back(line);
            }
            break;
        }
        auto line = text.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.emplace_back(line);
        start = nl + 1;
    }
    return lines;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(std::string_view s) {
    auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace cloneaudit
