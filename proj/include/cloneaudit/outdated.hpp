#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "cloneaudit/common.hpp"
#include "cloneaudit/ingest.hpp"
#include "cloneaudit/merge.hpp"

namespace cloneaudit::outdated {

enum class Modification {
    StatementModification,
    StatementAddition,
    StatementRemoval,
    MethodSignatureChange,
    MethodRewriting,
    FileDeletion,
};

std::string_view to_string(Modification m);
std::optional<Modification> parse_modification(std::string_view s);

enum class LocationStatus { Located, FileDeleted, RegionDeleted };

std::string_view to_string(LocationStatus s);

struct LineSpan {
    std::uint32_t start = 0;
    std::uint32_t end = 0;
    friend bool operator==(const LineSpan&, const LineSpan&) = default;
};

struct OriginLocation {
    LocationStatus status = LocationStatus::FileDeleted;
    std::optional<std::string> latest_path;
    std::optional<LineSpan> latest_span;  ///< original lines of the latest file
    std::string anchor;                   ///< "file", "method:<name>" or "line:<text>"
    // normalized regions used for diffing
    std::vector<std::string> old_lines;
    std::vector<std::string> new_lines;
    std::vector<std::string> old_signature;
    std::vector<std::string> new_signature;
};

/// A scanned latest-version corpus, indexed by file base name.
class LatestCorpus {
public:
    static LatestCorpus build(const std::vector<ingest::SourceFile>& files);

    const std::vector<ingest::NormalizedSource>& units() const { return units_; }
    std::vector<std::size_t> by_base_name(const std::string& name) const;
    /// Number of lines across the corpus with this token key.
    std::size_t line_frequency(const std::string& key) const;

private:
    std::vector<ingest::NormalizedSource> units_;
    std::unordered_map<std::string, std::vector<std::size_t>> base_names_;
    std::unordered_map<std::string, std::size_t> line_freq_;
};

class AmbiguousMatch : public Error {
public:
    AmbiguousMatch(const std::string& origin, std::vector<std::string> candidates);
    const std::vector<std::string>& candidates() const { return candidates_; }

private:
    std::vector<std::string> candidates_;
};

/// Finds the origin fragment in the latest corpus. `release_unit` is the normalized
/// release-version file the fragment's lines refer to. Throws AmbiguousMatch.
OriginLocation locate_latest(const CodeFragment& origin, const ingest::NormalizedSource& release_unit,
                             const LatestCorpus& latest);

/// Region edit, as offsets into the old and new line lists (0-based, half-open).
struct Hunk {
    std::uint32_t old_start = 0;
    std::uint32_t old_count = 0;
    std::uint32_t new_start = 0;
    std::uint32_t new_count = 0;
    friend bool operator==(const Hunk&, const Hunk&) = default;
};

struct OutdatedVerdict {
    bool outdated = false;
    std::set<Modification> modifications;
    std::vector<Hunk> diff_hunks;
};

struct DiffResult {
    std::vector<Hunk> hunks;
    std::size_t lcs = 0;
};

/// Myers diff over line equality.
DiffResult diff_lines(const std::vector<std::string>& a, const std::vector<std::string>& b);

OutdatedVerdict diff_classify(const std::vector<std::string>& old_region, const std::vector<std::string>& new_region,
                              const std::vector<std::string>& old_signature,
                              const std::vector<std::string>& new_signature, double rewrite_threshold = 0.2);

/// Whole months from release to post, floored; negative when the post is earlier.
int clone_age_months(const Date& origin_release, const Date& post_date);

enum class Intent { Enhancement, Deprecation, Bug, Refactoring, CodingStyle, DataChange, Unlabeled };

std::string_view to_string(Intent i);
std::optional<Intent> parse_intent(std::string_view s);

struct ChangeIntent {
    Intent intent = Intent::Unlabeled;
    std::optional<std::string> issue_id;
};

/// Release-version corpus of one origin project.
struct ReleaseCorpus {
    std::optional<Date> release_date;
    std::map<std::string, ingest::NormalizedSource> units;  ///< by unit id (relative path)
};

struct OutdatedConfig {
    double rewrite_threshold = 0.2;
    unsigned jobs = 1;
};

struct ReportRow {
    std::uint64_t pair_id = 0;
    CodeFragment snippet;
    CodeFragment origin;
    bool skipped = false;
    std::string skip_reason;
    OriginLocation location;
    OutdatedVerdict verdict;
    bool dead = false;
    std::optional<int> age_months;
    std::optional<ChangeIntent> intent;
};

struct ProjectCounts {
    std::size_t rows = 0;
    std::size_t outdated = 0;
    std::size_t skipped = 0;
};

struct OutdatedReport {
    std::vector<ReportRow> rows;
    std::map<std::string, ProjectCounts> by_project;
    std::map<Modification, std::size_t> by_modification;
    Diagnostics diagnostics;
};

struct OutdatedInputs {
    std::map<std::string, ReleaseCorpus> release;  ///< by origin corpus id
    std::map<std::string, LatestCorpus> latest;    ///< by origin corpus id
    std::map<std::string, Date> post_dates;        ///< by snippet unit id
    std::map<std::uint64_t, ChangeIntent> intents; ///< by consolidated pair id
};

OutdatedReport outdated_report(const std::vector<merge::ConsolidatedPair>& pairs, const OutdatedInputs& inputs,
                               const OutdatedConfig& cfg = {});

}  // namespace cloneaudit::outdated
