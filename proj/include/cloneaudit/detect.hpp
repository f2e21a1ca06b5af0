#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "cloneaudit/common.hpp"
#include "cloneaudit/ingest.hpp"
#include "cloneaudit/lexer.hpp"

namespace cloneaudit::detect {

struct DetectorConfig {
    std::uint32_t min_clone_lines = 10;
    double token_similarity = 0.80;
    lexer::LineNormOptions line_norm{};
    unsigned jobs = 1;

    /// Throws ValidationError when a field is out of its domain.
    void validate() const;
};

/// |bag1 ⊓ bag2| / max(|bag1|, |bag2|). Zero when either bag is empty; the
/// both-empty case also bumps `degenerate_input` in diag when given.
double overlap_similarity(const lexer::TokenBag& a, const lexer::TokenBag& b,
                          Diagnostics* diag = nullptr);

/// Number of query tokens probed for a query of `n` tokens at threshold `theta`:
/// n - ceil(theta * n) + 1, clamped to [0, n].
std::size_t prefix_length(std::size_t n, double theta);

/// Inverted index over corpus-side fragments. Immutable after build; const queries are
/// safe from many threads.
class CloneIndex {
public:
    struct Posting {
        std::uint32_t fragment;
        std::uint32_t tf;
    };

    static CloneIndex build(std::vector<lexer::BlockFragment> fragments);

    std::size_t fragment_count() const { return fragments_.size(); }
    const lexer::BlockFragment& fragment(std::uint32_t id) const { return fragments_[id]; }
    std::uint32_t fragment_size(std::uint32_t id) const { return sizes_[id]; }
    const std::vector<Posting>* postings(std::string_view lexeme) const;

    /// Global probe order: lexemes sorted by ascending index frequency, ties by lexeme.
    /// Lexemes absent from the index rank first.
    std::uint64_t rank(std::string_view lexeme) const;

    /// Lexemes the query probes at `theta` (distinct, in probe order).
    std::vector<std::string> probe_tokens(const lexer::TokenBag& query, double theta) const;

    /// Fragment ids sharing at least one probed token with the query.
    std::vector<std::uint32_t> candidates(const lexer::TokenBag& query, double theta) const;

private:
    std::vector<lexer::BlockFragment> fragments_;
    std::vector<std::uint32_t> sizes_;
    std::unordered_map<std::string, std::uint32_t> term_ids_;
    std::vector<std::vector<Posting>> postings_;
    std::vector<std::uint64_t> term_rank_;
};

std::vector<ClonePair> detect_token_clones(const std::vector<lexer::BlockFragment>& queries,
                                           const CloneIndex& index, const DetectorConfig& cfg);

std::vector<ClonePair> detect_line_clones(const std::vector<ingest::NormalizedSource>& side_a,
                                          const std::vector<ingest::NormalizedSource>& side_b,
                                          const DetectorConfig& cfg);

struct Corpus {
    std::string id;
    std::vector<ingest::NormalizedSource> units;
};

struct ReportStats {
    std::size_t pairs = 0;
    double avg_snippet_lines = 0;
    double avg_origin_lines = 0;
};

ReportStats report_stats(const std::vector<ClonePair>& report);

struct DetectionResult {
    std::vector<ClonePair> token_report;
    std::vector<ClonePair> line_report;
    std::size_t snippet_fragments = 0;
    std::size_t corpus_fragments = 0;
};

/// Runs both detectors between the snippet corpus and one or more project corpora.
/// Throws ValidationError if any project corpus shares the snippet corpus id.
DetectionResult run_detection(const Corpus& snippets, const std::vector<Corpus>& projects,
                              const DetectorConfig& cfg);

}  // namespace cloneaudit::detect
