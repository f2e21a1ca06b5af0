#include "cloneaudit/merge.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <tuple>

#include "cloneaudit/parallel.hpp"

namespace cloneaudit::merge {

void MergeConfig::validate() const {
    if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("merge threshold t must be in [0, 1]");
}

std::string_view to_string(MergeStrategy s) {
    return s == MergeStrategy::components ? "components" : "greedy";
}

std::optional<MergeStrategy> parse_strategy(std::string_view s) {
    if (s == "components") return MergeStrategy::components;
    if (s == "greedy") return MergeStrategy::greedy;
    return std::nullopt;
}

double contained(const CodeFragment& cf1, const CodeFragment& cf2) {
    if (!cf1.same_unit(cf2)) return 0.0;
    auto n = cf1.line_count();
    if (n == 0) return 0.0;
    auto lo = std::max(cf1.start_line, cf2.start_line);
    auto hi = std::min(cf1.end_line, cf2.end_line);
    if (lo > hi) return 0.0;
    return static_cast<double>(hi - lo + 1) / n;
}

double ok_value(const ClonePair& cp1, const ClonePair& cp2) {
    if (!cp1.left.same_unit(cp2.left)) return 0.0;
    double left = std::max(contained(cp1.left, cp2.left), contained(cp2.left, cp1.left));
    double right = std::max(contained(cp1.right, cp2.right), contained(cp2.right, cp1.right));
    return std::min(left, right);
}

bool is_ok_match(const ClonePair& cp1, const ClonePair& cp2, double t) {
    return ok_value(cp1, cp2) >= t;
}

namespace {

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

// Larger snippet span wins; then token before line; then fragment order.
bool better_representative(const ClonePair& a, const ClonePair& b) {
    auto la = a.left.line_count(), lb = b.left.line_count();
    if (la != lb) return la > lb;
    if (a.detector != b.detector) return a.detector == DetectorKind::token;
    return std::tie(a.left, a.right) < std::tie(b.left, b.right);
}

using UnitKey = std::pair<std::string, std::string>;

UnitKey unit_of(const ClonePair& p) { return {p.left.corpus_id, p.left.unit_id}; }

std::vector<OkEdge> edges_for_unit(const std::vector<ClonePair>& token_report,
                                   const std::vector<ClonePair>& line_report,
                                   const std::vector<std::size_t>& tokens,
                                   const std::vector<std::size_t>& lines, double t) {
    std::vector<OkEdge> edges;
    for (auto ti : tokens)
        for (auto li : lines) {
            double ok = ok_value(token_report[ti], line_report[li]);
            if (ok > 0.0 && ok >= t) edges.push_back({ti, li, ok});
        }
    return edges;
}

std::vector<OkEdge> greedy_matching(std::vector<OkEdge> edges) {
    std::sort(edges.begin(), edges.end(), [](const OkEdge& a, const OkEdge& b) {
        if (a.ok != b.ok) return a.ok > b.ok;
        return std::tie(a.token_pair, a.line_pair) < std::tie(b.token_pair, b.line_pair);
    });
    std::set<std::size_t> used_t, used_l;
    std::vector<OkEdge> kept;
    for (const auto& e : edges) {
        if (used_t.contains(e.token_pair) || used_l.contains(e.line_pair)) continue;
        used_t.insert(e.token_pair);
        used_l.insert(e.line_pair);
        kept.push_back(e);
    }
    return kept;
}

}  // namespace

std::vector<MergedClonePair> merge_reports(const std::vector<ClonePair>& token_report,
                                           const std::vector<ClonePair>& line_report,
                                           const MergeConfig& cfg, unsigned jobs) {
    cfg.validate();
    std::map<UnitKey, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> units;
    for (std::size_t i = 0; i < token_report.size(); ++i) units[unit_of(token_report[i])].first.push_back(i);
    for (std::size_t i = 0; i < line_report.size(); ++i) units[unit_of(line_report[i])].second.push_back(i);

    std::vector<const std::pair<std::vector<std::size_t>, std::vector<std::size_t>>*> parts;
    for (const auto& [_, v] : units) parts.push_back(&v);
    std::vector<std::vector<OkEdge>> part_edges(parts.size());
    parallel_for(parts.size(), jobs, [&](std::size_t k) {
        auto edges = edges_for_unit(token_report, line_report, parts[k]->first, parts[k]->second, cfg.t);
        if (cfg.strategy == MergeStrategy::greedy) edges = greedy_matching(std::move(edges));
        part_edges[k] = std::move(edges);
    });

    // nodes: token pairs [0, T), line pairs [T, T + L)
    const std::size_t T = token_report.size();
    UnionFind uf(T + line_report.size());
    std::vector<OkEdge> all_edges;
    for (auto& v : part_edges)
        for (auto& e : v) {
            uf.unite(e.token_pair, T + e.line_pair);
            all_edges.push_back(e);
        }

    std::map<std::size_t, MergedClonePair> groups;
    for (std::size_t n = 0; n < T + line_report.size(); ++n) {
        auto& g = groups[uf.find(n)];
        if (n < T) {
            g.token_members.push_back(n);
            g.contributors.insert(DetectorKind::token);
        } else {
            g.line_members.push_back(n - T);
            g.contributors.insert(DetectorKind::line);
        }
    }
    for (const auto& e : all_edges) groups[uf.find(e.token_pair)].ok_partners.push_back(e);

    std::vector<MergedClonePair> out;
    out.reserve(groups.size());
    for (auto& [_, g] : groups) {
        const ClonePair* best = nullptr;
        for (auto i : g.token_members)
            if (!best || better_representative(token_report[i], *best)) best = &token_report[i];
        for (auto i : g.line_members)
            if (!best || better_representative(line_report[i], *best)) best = &line_report[i];
        g.representative = *best;
        std::sort(g.ok_partners.begin(), g.ok_partners.end(), [](const OkEdge& a, const OkEdge& b) {
            return std::tie(a.token_pair, a.line_pair) < std::tie(b.token_pair, b.line_pair);
        });
        out.push_back(std::move(g));
    }
    std::sort(out.begin(), out.end(), [](const MergedClonePair& a, const MergedClonePair& b) {
        if (canonical_less(a.representative, b.representative)) return true;
        if (canonical_less(b.representative, a.representative)) return false;
        return std::tie(a.token_members, a.line_members) < std::tie(b.token_members, b.line_members);
    });
    return out;
}

MergeSummary summarize(const std::vector<ClonePair>& token_report,
                       const std::vector<ClonePair>& line_report,
                       const std::vector<MergedClonePair>& merged) {
    MergeSummary s;
    s.token_pairs = token_report.size();
    s.line_pairs = line_report.size();
    s.merged = merged.size();
    for (const auto& m : merged) {
        if (m.contributors.size() == 2)
            ++s.common;
        else if (m.contributors.contains(DetectorKind::token))
            ++s.token_only;
        else
            ++s.line_only;
    }
    return s;
}

std::vector<ConsolidatedPair> consolidate(const std::vector<MergedClonePair>& pairs) {
    std::map<std::tuple<std::string, std::string, std::uint32_t, std::uint32_t>, ConsolidatedPair> groups;
    for (const auto& m : pairs) {
        const auto& left = m.representative.left;
        auto& c = groups[{left.unit_id, left.corpus_id, left.start_line, left.end_line}];
        c.snippet_fragment = left;
        c.origins.push_back(m.representative.right);
        c.contributors.insert(m.contributors.begin(), m.contributors.end());
    }
    std::vector<ConsolidatedPair> out;
    out.reserve(groups.size());
    std::uint64_t next_id = 1;
    for (auto& [_, c] : groups) {
        std::sort(c.origins.begin(), c.origins.end());
        c.origins.erase(std::unique(c.origins.begin(), c.origins.end()), c.origins.end());
        c.pair_id = next_id++;
        out.push_back(std::move(c));
    }
    return out;
}

double cloned_ratio(std::uint32_t snippet_line_count, const std::vector<CodeFragment>& fragments) {
    if (snippet_line_count == 0) return 0.0;
    std::vector<bool> covered(snippet_line_count, false);
    for (const auto& f : fragments) {
        auto lo = std::max<std::uint32_t>(f.start_line, 1);
        auto hi = std::min(f.end_line, snippet_line_count);
        for (auto l = lo; l <= hi; ++l) covered[l - 1] = true;
    }
    auto n = std::count(covered.begin(), covered.end(), true);
    return 100.0 * static_cast<double>(n) / snippet_line_count;
}

}  // namespace cloneaudit::merge
