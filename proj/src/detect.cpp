#include "cloneaudit/detect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "cloneaudit/parallel.hpp"

namespace cloneaudit::detect {

void DetectorConfig::validate() const {
    if (min_clone_lines < 1) throw ValidationError("min_clone_lines must be >= 1");
    if (!(token_similarity > 0.0 && token_similarity <= 1.0))
        throw ValidationError("token_similarity must be in (0, 1]");
}

double overlap_similarity(const lexer::TokenBag& a, const lexer::TokenBag& b, Diagnostics* diag) {
    if (a.empty() && b.empty()) {
        if (diag) diag->count("degenerate_input");
        return 0.0;
    }
    if (a.empty() || b.empty()) return 0.0;
    std::uint64_t size_a = 0, size_b = 0, common = 0;
    for (const auto& [_, n] : a) size_a += n;
    for (const auto& [_, n] : b) size_b += n;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        int c = ia->first.compare(ib->first);
        if (c < 0) {
            ++ia;
        } else if (c > 0) {
            ++ib;
        } else {
            common += std::min(ia->second, ib->second);
            ++ia;
            ++ib;
        }
    }
    return static_cast<double>(common) / static_cast<double>(std::max(size_a, size_b));
}

namespace {

// Smallest overlap that can still reach theta against a bag of size n. The slack only
// ever lowers the bound, so prefix filtering stays lossless under rounding.
std::size_t min_overlap(std::size_t n, double theta) {
    auto need = static_cast<std::size_t>(std::ceil(theta * static_cast<double>(n) - 1e-9));
    return std::max<std::size_t>(need, 1);
}

std::uint64_t bag_size(const lexer::TokenBag& bag) {
    std::uint64_t n = 0;
    for (const auto& [_, c] : bag) n += c;
    return n;
}

}  // namespace

std::size_t prefix_length(std::size_t n, double theta) {
    if (n == 0) return 0;
    std::size_t need = min_overlap(n, theta);
    if (need > n) return 0;
    return n - need + 1;
}

// ---------------------------------------------------------------------------
// index

CloneIndex CloneIndex::build(std::vector<lexer::BlockFragment> fragments) {
    CloneIndex idx;
    idx.fragments_ = std::move(fragments);
    idx.sizes_.reserve(idx.fragments_.size());
    std::vector<std::string> lexemes;
    for (std::uint32_t f = 0; f < idx.fragments_.size(); ++f) {
        const auto& bag = idx.fragments_[f].token_bag;
        idx.sizes_.push_back(static_cast<std::uint32_t>(bag_size(bag)));
        for (const auto& [lex, tf] : bag) {
            auto [it, inserted] = idx.term_ids_.try_emplace(lex, static_cast<std::uint32_t>(lexemes.size()));
            if (inserted) {
                lexemes.push_back(lex);
                idx.postings_.emplace_back();
            }
            idx.postings_[it->second].push_back({f, tf});
        }
    }
    std::vector<std::uint32_t> order(lexemes.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t x, std::uint32_t y) {
        auto fx = idx.postings_[x].size(), fy = idx.postings_[y].size();
        return fx != fy ? fx < fy : lexemes[x] < lexemes[y];
    });
    idx.term_rank_.assign(lexemes.size(), 0);
    for (std::size_t r = 0; r < order.size(); ++r) idx.term_rank_[order[r]] = r + 1;
    return idx;
}

const std::vector<CloneIndex::Posting>* CloneIndex::postings(std::string_view lexeme) const {
    auto it = term_ids_.find(std::string(lexeme));
    return it == term_ids_.end() ? nullptr : &postings_[it->second];
}

std::uint64_t CloneIndex::rank(std::string_view lexeme) const {
    auto it = term_ids_.find(std::string(lexeme));
    return it == term_ids_.end() ? 0 : term_rank_[it->second];
}

std::vector<std::string> CloneIndex::probe_tokens(const lexer::TokenBag& query, double theta) const {
    std::vector<std::pair<std::uint64_t, const std::string*>> ordered;
    ordered.reserve(query.size());
    for (const auto& [lex, _] : query) ordered.emplace_back(rank(lex), &lex);
    std::sort(ordered.begin(), ordered.end(), [](const auto& x, const auto& y) {
        return std::tie(x.first, *x.second) < std::tie(y.first, *y.second);
    });
    std::size_t remaining = prefix_length(bag_size(query), theta);
    std::vector<std::string> probes;
    for (const auto& [_, lex] : ordered) {
        if (remaining == 0) break;
        probes.push_back(*lex);
        auto count = query.find(*lex)->second;
        remaining -= std::min<std::size_t>(remaining, count);
    }
    return probes;
}

std::vector<std::uint32_t> CloneIndex::candidates(const lexer::TokenBag& query, double theta) const {
    std::vector<std::uint32_t> out;
    for (const auto& lex : probe_tokens(query, theta)) {
        if (const auto* p = postings(lex))
            for (const auto& posting : *p) out.push_back(posting.fragment);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// token detector

namespace {

CodeFragment to_fragment(const lexer::BlockFragment& b) {
    return {b.unit_id, b.corpus_id, b.orig_start_line, b.orig_end_line};
}

}  // namespace

std::vector<ClonePair> detect_token_clones(const std::vector<lexer::BlockFragment>& queries,
                                           const CloneIndex& index, const DetectorConfig& cfg) {
    cfg.validate();
    std::vector<std::vector<ClonePair>> per_query(queries.size());
    parallel_for(queries.size(), cfg.jobs, [&](std::size_t qi) {
        const auto& q = queries[qi];
        if (q.line_count() < cfg.min_clone_lines) return;
        const auto n = bag_size(q.token_bag);
        if (n == 0) return;
        for (auto id : index.candidates(q.token_bag, cfg.token_similarity)) {
            const auto& c = index.fragment(id);
            if (c.corpus_id == q.corpus_id) continue;
            if (c.line_count() < cfg.min_clone_lines) continue;
            const std::size_t m = index.fragment_size(id);
            if (std::min<std::size_t>(n, m) < min_overlap(std::max<std::size_t>(n, m), cfg.token_similarity))
                continue;
            double sim = overlap_similarity(q.token_bag, c.token_bag);
            if (sim >= cfg.token_similarity)
                per_query[qi].push_back({to_fragment(q), to_fragment(c), DetectorKind::token, sim});
        }
    });
    std::vector<ClonePair> out;
    for (auto& v : per_query) out.insert(out.end(), v.begin(), v.end());
    std::sort(out.begin(), out.end(), canonical_less);
    return out;
}

// ---------------------------------------------------------------------------
// line detector

namespace {

struct CanonUnit {
    const ingest::NormalizedSource* src;
    std::vector<std::uint32_t> ids;  // interned canonical lines
};

struct Run {
    std::uint32_t a_start, b_start, length;
};

std::uint64_t window_key(const std::vector<std::uint32_t>& ids, std::size_t at, std::size_t w) {
    std::uint64_t h = 1469598103934665603ull;
    for (std::size_t k = at; k < at + w; ++k) {
        h ^= ids[k];
        h *= 1099511628211ull;
        h ^= h >> 29;
    }
    return h;
}

bool overlaps(std::uint32_t s1, std::uint32_t l1, std::uint32_t s2, std::uint32_t l2) {
    return s1 < s2 + l2 && s2 < s1 + l1;
}

}  // namespace

std::vector<ClonePair> detect_line_clones(const std::vector<ingest::NormalizedSource>& side_a,
                                          const std::vector<ingest::NormalizedSource>& side_b,
                                          const DetectorConfig& cfg) {
    cfg.validate();
    const std::size_t w = cfg.min_clone_lines;
    std::unordered_map<std::string, std::uint32_t> interned;
    auto canon = [&](const std::vector<ingest::NormalizedSource>& side) {
        std::vector<CanonUnit> out;
        out.reserve(side.size());
        for (const auto& u : side) {
            CanonUnit cu{&u, {}};
            cu.ids.reserve(u.lines.size());
            for (const auto& line : u.lines) {
                auto key = lexer::normalize_line(line, cfg.line_norm);
                auto [it, _] = interned.try_emplace(std::move(key), static_cast<std::uint32_t>(interned.size()));
                cu.ids.push_back(it->second);
            }
            out.push_back(std::move(cu));
        }
        return out;
    };
    auto a_units = canon(side_a);
    auto b_units = canon(side_b);

    std::unordered_map<std::uint64_t, std::vector<std::pair<std::uint32_t, std::uint32_t>>> windows;
    for (std::uint32_t u = 0; u < b_units.size(); ++u) {
        const auto& ids = b_units[u].ids;
        for (std::size_t j = 0; j + w <= ids.size(); ++j)
            windows[window_key(ids, j, w)].emplace_back(u, static_cast<std::uint32_t>(j));
    }

    std::vector<std::vector<ClonePair>> per_unit(a_units.size());
    parallel_for(a_units.size(), cfg.jobs, [&](std::size_t ua) {
        const auto& a = a_units[ua];
        std::map<std::uint32_t, std::vector<Run>> runs;  // by b unit
        for (std::size_t i = 0; i + w <= a.ids.size(); ++i) {
            auto hit = windows.find(window_key(a.ids, i, w));
            if (hit == windows.end()) continue;
            for (auto [ub, j] : hit->second) {
                const auto& b = b_units[ub];
                if (b.src->corpus_id == a.src->corpus_id) continue;
                if (!std::equal(a.ids.begin() + i, a.ids.begin() + i + w, b.ids.begin() + j)) continue;
                if (i > 0 && j > 0 && a.ids[i - 1] == b.ids[j - 1]) continue;  // not a run start
                std::size_t len = w;
                while (i + len < a.ids.size() && j + len < b.ids.size() && a.ids[i + len] == b.ids[j + len]) ++len;
                runs[ub].push_back({static_cast<std::uint32_t>(i), j, static_cast<std::uint32_t>(len)});
            }
        }
        for (auto& [ub, list] : runs) {
            std::sort(list.begin(), list.end(), [](const Run& x, const Run& y) {
                return std::tie(y.length, x.a_start, x.b_start) < std::tie(x.length, y.a_start, y.b_start);
            });
            std::vector<Run> kept;
            for (const auto& r : list) {
                bool clash = std::any_of(kept.begin(), kept.end(), [&](const Run& k) {
                    return overlaps(r.a_start, r.length, k.a_start, k.length) &&
                           overlaps(r.b_start, r.length, k.b_start, k.length);
                });
                if (!clash) kept.push_back(r);
            }
            const auto& sa = *a.src;
            const auto& sb = *b_units[ub].src;
            for (const auto& r : kept) {
                CodeFragment left{sa.unit_id, sa.corpus_id, sa.line_map[r.a_start], sa.line_map[r.a_start + r.length - 1]};
                CodeFragment right{sb.unit_id, sb.corpus_id, sb.line_map[r.b_start], sb.line_map[r.b_start + r.length - 1]};
                per_unit[ua].push_back({std::move(left), std::move(right), DetectorKind::line, 1.0});
            }
        }
    });
    std::vector<ClonePair> out;
    for (auto& v : per_unit) out.insert(out.end(), v.begin(), v.end());
    std::sort(out.begin(), out.end(), canonical_less);
    return out;
}

// ---------------------------------------------------------------------------

ReportStats report_stats(const std::vector<ClonePair>& report) {
    ReportStats s;
    s.pairs = report.size();
    if (report.empty()) return s;
    double left = 0, right = 0;
    for (const auto& p : report) {
        left += p.left.line_count();
        right += p.right.line_count();
    }
    s.avg_snippet_lines = left / static_cast<double>(report.size());
    s.avg_origin_lines = right / static_cast<double>(report.size());
    return s;
}

DetectionResult run_detection(const Corpus& snippets, const std::vector<Corpus>& projects,
                              const DetectorConfig& cfg) {
    cfg.validate();
    for (const auto& p : projects)
        if (p.id == snippets.id)
            throw ValidationError("snippet corpus and project corpus share the id '" + p.id + "'");

    auto fragments_of = [&](const std::vector<const ingest::NormalizedSource*>& units) {
        std::vector<std::vector<lexer::BlockFragment>> per(units.size());
        parallel_for(units.size(), cfg.jobs, [&](std::size_t k) {
            for (auto& f : lexer::split_blocks(*units[k], cfg.min_clone_lines))
                if (f.line_count() >= cfg.min_clone_lines) per[k].push_back(std::move(f));
        });
        std::vector<lexer::BlockFragment> all;
        for (auto& v : per)
            for (auto& f : v) all.push_back(std::move(f));
        return all;
    };

    std::vector<const ingest::NormalizedSource*> snippet_units, project_units;
    std::vector<ingest::NormalizedSource> project_copy;
    for (const auto& u : snippets.units) snippet_units.push_back(&u);
    for (const auto& p : projects)
        for (const auto& u : p.units) project_units.push_back(&u);

    DetectionResult result;
    auto queries = fragments_of(snippet_units);
    auto corpus_fragments = fragments_of(project_units);
    result.snippet_fragments = queries.size();
    result.corpus_fragments = corpus_fragments.size();
    auto index = CloneIndex::build(std::move(corpus_fragments));
    result.token_report = detect_token_clones(queries, index, cfg);

    for (const auto& p : projects) project_copy.insert(project_copy.end(), p.units.begin(), p.units.end());
    result.line_report = detect_line_clones(snippets.units, project_copy, cfg);
    return result;
}

}  // namespace cloneaudit::detect
