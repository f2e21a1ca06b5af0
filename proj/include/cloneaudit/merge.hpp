#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "cloneaudit/common.hpp"

namespace cloneaudit::merge {

enum class MergeStrategy { components, greedy };

struct MergeConfig {
    double t = 0.5;
    MergeStrategy strategy = MergeStrategy::components;

    void validate() const;
};

std::string_view to_string(MergeStrategy s);
std::optional<MergeStrategy> parse_strategy(std::string_view s);

/// |lines(cf1) ∩ lines(cf2)| / |lines(cf1)|; 0 across units.
double contained(const CodeFragment& cf1, const CodeFragment& cf2);

/// min over both sides of max(contained(a, b), contained(b, a)).
double ok_value(const ClonePair& cp1, const ClonePair& cp2);

bool is_ok_match(const ClonePair& cp1, const ClonePair& cp2, double t);

/// An ok-match between token report entry `token_pair` and line report entry `line_pair`
/// (indices into the inputs of merge_reports).
struct OkEdge {
    std::size_t token_pair;
    std::size_t line_pair;
    double ok;

    friend bool operator==(const OkEdge&, const OkEdge&) = default;
};

struct MergedClonePair {
    ClonePair representative;
    std::set<DetectorKind> contributors;
    std::vector<OkEdge> ok_partners;
    std::vector<std::size_t> token_members;
    std::vector<std::size_t> line_members;
};

/// Unifies cross-report ok-matches (ok >= t and ok > 0). Output sorted by representative.
std::vector<MergedClonePair> merge_reports(const std::vector<ClonePair>& token_report,
                                           const std::vector<ClonePair>& line_report,
                                           const MergeConfig& cfg, unsigned jobs = 1);

struct MergeSummary {
    std::size_t token_pairs = 0;
    std::size_t line_pairs = 0;
    std::size_t merged = 0;
    std::size_t common = 0;  ///< groups with both contributors
    std::size_t token_only = 0;
    std::size_t line_only = 0;
};

MergeSummary summarize(const std::vector<ClonePair>& token_report,
                       const std::vector<ClonePair>& line_report,
                       const std::vector<MergedClonePair>& merged);

struct ConsolidatedPair {
    std::uint64_t pair_id = 0;
    CodeFragment snippet_fragment;
    std::vector<CodeFragment> origins;  ///< sorted, distinct
    std::set<DetectorKind> contributors;
};

/// Groups by snippet fragment; ids are assigned 1..n in (snippet unit, start, end) order.
std::vector<ConsolidatedPair> consolidate(const std::vector<MergedClonePair>& pairs);

/// Percentage of a snippet's lines covered by the given snippet-side fragments.
double cloned_ratio(std::uint32_t snippet_line_count, const std::vector<CodeFragment>& fragments);

}  // namespace cloneaudit::merge
