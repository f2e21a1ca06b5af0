#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cloneaudit/common.hpp"

namespace cloneaudit::triage {

enum class Pattern { QS, SQ, EX, UD, BP, IN, NC };
enum class BoilerplateKind { APIConstraints, Templating, DesignPatterns };

std::string_view to_string(Pattern p);
std::optional<Pattern> parse_pattern(std::string_view s);
std::string_view to_string(BoilerplateKind k);
std::optional<BoilerplateKind> parse_boilerplate_kind(std::string_view s);

inline constexpr Pattern kAllPatterns[] = {Pattern::QS, Pattern::SQ, Pattern::EX, Pattern::UD,
                                           Pattern::BP, Pattern::IN, Pattern::NC};

struct ClassificationRecord {
    std::uint64_t pair_id = 0;
    std::string reviewer_id;
    Pattern pattern = Pattern::NC;
    std::optional<BoilerplateKind> boilerplate_kind;
    std::string evidence_note;
    std::optional<std::string> evidence_url;
    std::string timestamp;  ///< set by the store when empty

    /// Throws ValidationError unless boilerplate_kind is set exactly when pattern is BP
    /// and reviewer_id is non-empty.
    void validate() const;
    friend bool operator==(const ClassificationRecord&, const ClassificationRecord&) = default;
};

enum class ConflictKind { TruthConflict, PatternConflict };
std::string_view to_string(ConflictKind k);

struct ConflictItem {
    std::uint64_t pair_id = 0;
    ConflictKind kind = ConflictKind::PatternConflict;
    std::vector<ClassificationRecord> records;  ///< the disagreeing records, by reviewer
    std::optional<ClassificationRecord> resolution;
};

// ---------------------------------------------------------------------------
// evidence ranking

struct EvidenceCandidate {
    std::string origin_id;
    std::string project;
    std::string path;
    std::vector<std::string> identifiers;  ///< class and method names
};

struct EvidenceRanking {
    std::uint64_t pair_id = 0;
    std::vector<std::pair<std::string, double>> candidates;  ///< (origin id, cosine)
};

/// Lowercased terms split on non-alphanumerics and camel-case humps, Java keywords dropped.
std::vector<std::string> evidence_terms(std::string_view text);

/// Candidates ordered by tf-idf cosine to the post text, ties by origin id.
EvidenceRanking rank_evidence(std::string_view post_text, const std::vector<EvidenceCandidate>& candidates);

// ---------------------------------------------------------------------------
// store

/// Everything a reviewer needs to judge one consolidated pair.
struct PairContext {
    std::uint64_t pair_id = 0;
    CodeFragment snippet;
    std::vector<CodeFragment> origins;
    std::vector<std::string> contributors;
    std::size_t merged_count = 1;  ///< merged pairs folded into this one
    std::string snippet_code;
    std::vector<std::string> origin_code;  ///< parallel to origins
    std::string question_title;
    std::string question_text;
    std::string answer_text;
    std::string post_url;
    EvidenceRanking ranking;
};

struct PairBundle {
    PairContext context;
    std::vector<ClassificationRecord> records;
    std::optional<Pattern> effective_pattern;
    std::optional<ConflictItem> conflict;
};

struct ClassificationReport {
    std::map<Pattern, std::size_t> before_consolidation;
    std::map<Pattern, std::size_t> after_consolidation;
    std::size_t classified = 0;
    std::size_t unclassified = 0;
    /// QS and UD pairs per origin project.
    std::map<std::string, std::map<Pattern, std::size_t>> by_project;
};

class UnknownPair : public Error {
public:
    explicit UnknownPair(std::uint64_t id) : Error("unknown pair " + std::to_string(id)) {}
};

class NoConflict : public Error {
public:
    explicit NoConflict(std::uint64_t id) : Error("pair " + std::to_string(id) + " has no conflict") {}
};

/// Append-only journal of pairs, classifications and resolutions. Readers work on an
/// immutable snapshot; writers are serialized and each mutation is flushed to disk
/// before it becomes visible.
class TriageStore {
public:
    struct Options {
        /// When set, conflicts compare only these two reviewers.
        std::optional<std::pair<std::string, std::string>> designated;
        bool sync = true;
    };

    /// Fails if `path` already exists.
    static std::unique_ptr<TriageStore> create(const std::filesystem::path& path, std::vector<PairContext> pairs,
                                               Options opts);
    static std::unique_ptr<TriageStore> create(const std::filesystem::path& path, std::vector<PairContext> pairs) {
        return create(path, std::move(pairs), Options{});
    }
    static std::unique_ptr<TriageStore> open(const std::filesystem::path& path, Options opts);
    static std::unique_ptr<TriageStore> open(const std::filesystem::path& path) { return open(path, Options{}); }

    ~TriageStore();
    TriageStore(const TriageStore&) = delete;
    TriageStore& operator=(const TriageStore&) = delete;

    std::vector<std::uint64_t> pair_ids() const;
    std::optional<PairBundle> pair(std::uint64_t id) const;
    /// Lowest-id pair without a record from `reviewer`; nullopt when the queue is empty.
    std::optional<PairBundle> next_unclassified(const std::string& reviewer) const;

    ClassificationRecord record_classification(ClassificationRecord rec);
    std::vector<ConflictItem> conflicts() const;
    ConflictItem resolve_conflict(std::uint64_t pair_id, ClassificationRecord final_record);

    std::optional<Pattern> effective_pattern(std::uint64_t id) const;
    std::map<std::uint64_t, Pattern> effective_patterns() const;
    ClassificationReport export_classified() const;

    /// Journal entries in write order.
    std::vector<std::string> audit_trail() const;
    std::size_t record_count() const;

private:
    struct State;
    TriageStore() = default;

    std::shared_ptr<const State> snapshot() const;
    void publish(std::shared_ptr<const State> s);
    void append(const std::string& line);

    std::filesystem::path path_;
    Options opts_;
    int fd_ = -1;
    std::shared_ptr<const std::map<std::uint64_t, PairContext>> pairs_;
    mutable std::mutex snapshot_mu_;  // guards the state_ pointer only
    std::shared_ptr<const State> state_;
    mutable std::mutex write_mu_;
};

}  // namespace cloneaudit::triage
