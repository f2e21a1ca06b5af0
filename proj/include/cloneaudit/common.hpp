#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cloneaudit {

/// Calendar date without time-of-day. Serialized as YYYY-MM-DD.
class Date {
public:
    Date() = default;
    explicit Date(std::chrono::year_month_day ymd) : ymd_(ymd) {}
    Date(int y, unsigned m, unsigned d)
        : ymd_(std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}) {}

    /// Accepts "YYYY-MM-DD" optionally followed by a time part ("T..." or " ...").
    static std::optional<Date> parse(std::string_view text);

    int year() const { return static_cast<int>(ymd_.year()); }
    unsigned month() const { return static_cast<unsigned>(ymd_.month()); }
    unsigned day() const { return static_cast<unsigned>(ymd_.day()); }
    bool ok() const { return ymd_.ok(); }

    std::string to_string() const;

    friend auto operator<=>(const Date&, const Date&) = default;

private:
    std::chrono::year_month_day ymd_{std::chrono::year{1970}, std::chrono::month{1},
                                     std::chrono::day{1}};
};

/// Named counters plus free-form messages. Not thread-safe; each worker keeps its own
/// and merges.
struct Diagnostics {
    std::map<std::string, std::size_t> counts;
    std::vector<std::string> messages;

    void count(const std::string& key, std::size_t n = 1) { counts[key] += n; }
    void note(const std::string& key, std::string message) {
        counts[key] += 1;
        messages.push_back(std::move(message));
    }
    std::size_t get(const std::string& key) const {
        auto it = counts.find(key);
        return it == counts.end() ? 0 : it->second;
    }
    void merge(const Diagnostics& other);
};

/// A contiguous region of one source unit, in original (1-based, inclusive) line numbers.
struct CodeFragment {
    std::string unit_id;
    std::string corpus_id;
    std::uint32_t start_line = 0;
    std::uint32_t end_line = 0;

    std::uint32_t line_count() const { return end_line >= start_line ? end_line - start_line + 1 : 0; }
    bool same_unit(const CodeFragment& o) const {
        return unit_id == o.unit_id && corpus_id == o.corpus_id;
    }
    friend auto operator<=>(const CodeFragment&, const CodeFragment&) = default;
};

enum class DetectorKind { token, line };

std::string_view to_string(DetectorKind d);
std::optional<DetectorKind> parse_detector(std::string_view s);

/// Two fragments reported similar by one detector. `left` is always the snippet side.
struct ClonePair {
    CodeFragment left;
    CodeFragment right;
    DetectorKind detector = DetectorKind::token;
    double similarity = 1.0;

    friend bool operator==(const ClonePair&, const ClonePair&) = default;
};

/// Canonical report order: snippet fragment, then origin fragment, then detector.
bool canonical_less(const ClonePair& a, const ClonePair& b);

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised on invalid user input (bad config values, invalid records).
class ValidationError : public Error {
public:
    using Error::Error;
};

// small string helpers shared across modules
std::vector<std::string> split_lines(std::string_view text);
std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

}  // namespace cloneaudit
