#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cloneaudit/common.hpp"
#include "cloneaudit/merge.hpp"

namespace cloneaudit::license {

inline constexpr std::string_view kSeeFile = "SeeFile";
inline constexpr std::string_view kUnknown = "Unknown";
inline constexpr std::string_view kNone = "None";

/// One way of recognizing a license: every `all_of` phrase occurs in some header
/// sentence and no `none_of` phrase occurs in any.
struct Rule {
    std::vector<std::string> all_of;
    std::vector<std::string> none_of;
};

struct CatalogEntry {
    std::string id;
    std::vector<Rule> rules;  ///< any rule suffices
};

/// Entries in priority order (first hit wins).
struct Catalog {
    std::vector<CatalogEntry> entries;
    std::vector<std::string> pointer_phrases;  ///< "see the LICENSE file" style
    std::vector<std::string> license_like_phrases;
    std::uint32_t header_lines = 60;

    static Catalog builtin();
    static Catalog from_json(std::string_view json_text);
    static Catalog load(const std::filesystem::path& path);
    bool contains(std::string_view id) const;
};

struct LicenseFinding {
    std::string unit_id;
    std::string license = std::string(kNone);
    std::string matched_sentence;
};

/// Lowercased comment text of the lines in [first, last], markers stripped, split into
/// sentences on ". " and on blank comment lines.
std::vector<std::string> comment_sentences(std::string_view text, std::uint32_t first_line,
                                           std::uint32_t last_line);

LicenseFinding identify_license(std::string_view text, const Catalog& catalog = Catalog::builtin());

enum class Verdict { Compatible, Incompatible, Unknown };

std::string_view to_string(Verdict v);
std::optional<Verdict> parse_verdict(std::string_view s);

struct ConflictMatrix {
    std::string site_default_license = "CC-BY-SA-3.0";
    /// "ORIGIN / SNIPPET" -> verdict, checked before the built-in rules.
    std::map<std::string, Verdict> overrides;

    /// Reads `site_default_license = "..."` and an `[overrides]` table of
    /// `"ORIGIN / SNIPPET" = "Verdict"` lines. Throws ValidationError on bad input.
    static ConflictMatrix parse(std::string_view text);
    static ConflictMatrix load(const std::filesystem::path& path);
};

std::string effective_snippet_license(const LicenseFinding& f, const ConflictMatrix& m = {});

struct ConflictVerdict {
    std::string origin_license;
    std::string snippet_license;
    std::string snippet_license_effective;
    Verdict verdict = Verdict::Unknown;
};

ConflictVerdict classify_conflict(const LicenseFinding& origin, const LicenseFinding& snippet,
                                  const ConflictMatrix& m = {});

/// Findings keyed by (corpus id, unit id).
using FindingMap = std::map<std::pair<std::string, std::string>, LicenseFinding>;

struct ReportRow {
    std::string snippet_unit;
    std::string origin_corpus;
    std::string origin_unit;
    std::vector<std::uint64_t> pair_ids;
    std::string pattern;  ///< pattern of the lowest pair id, empty if unknown
    ConflictVerdict verdict;
};

struct AggregateKey {
    Verdict verdict;
    std::string origin_license;
    std::string snippet_license;
    std::string pattern;
    friend auto operator<=>(const AggregateKey&, const AggregateKey&) = default;
};

struct LicenseReport {
    std::vector<ReportRow> rows;
    std::map<AggregateKey, std::size_t> aggregates;
    Diagnostics diagnostics;
};

LicenseReport license_report(const std::vector<merge::ConsolidatedPair>& pairs, const FindingMap& findings,
                             const ConflictMatrix& matrix = {},
                             const std::map<std::uint64_t, std::string>& patterns = {});

}  // namespace cloneaudit::license
