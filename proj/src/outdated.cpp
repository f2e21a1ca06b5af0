#include "cloneaudit/outdated.hpp"

#include <algorithm>
#include <filesystem>

#include "cloneaudit/lexer.hpp"
#include "cloneaudit/parallel.hpp"

namespace cloneaudit::outdated {

std::string_view to_string(Modification m) {
    switch (m) {
        case Modification::StatementModification: return "StatementModification";
        case Modification::StatementAddition: return "StatementAddition";
        case Modification::StatementRemoval: return "StatementRemoval";
        case Modification::MethodSignatureChange: return "MethodSignatureChange";
        case Modification::MethodRewriting: return "MethodRewriting";
        case Modification::FileDeletion: return "FileDeletion";
    }
    return "";
}

std::optional<Modification> parse_modification(std::string_view s) {
    for (auto m : {Modification::StatementModification, Modification::StatementAddition,
                   Modification::StatementRemoval, Modification::MethodSignatureChange,
                   Modification::MethodRewriting, Modification::FileDeletion})
        if (to_string(m) == s) return m;
    return std::nullopt;
}

std::string_view to_string(LocationStatus s) {
    switch (s) {
        case LocationStatus::Located: return "Located";
        case LocationStatus::FileDeleted: return "FileDeleted";
        case LocationStatus::RegionDeleted: return "RegionDeleted";
    }
    return "";
}

std::string_view to_string(Intent i) {
    switch (i) {
        case Intent::Enhancement: return "Enhancement";
        case Intent::Deprecation: return "Deprecation";
        case Intent::Bug: return "Bug";
        case Intent::Refactoring: return "Refactoring";
        case Intent::CodingStyle: return "CodingStyle";
        case Intent::DataChange: return "DataChange";
        case Intent::Unlabeled: return "Unlabeled";
    }
    return "";
}

std::optional<Intent> parse_intent(std::string_view s) {
    for (auto i : {Intent::Enhancement, Intent::Deprecation, Intent::Bug, Intent::Refactoring,
                   Intent::CodingStyle, Intent::DataChange, Intent::Unlabeled})
        if (to_string(i) == s) return i;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// latest corpus

namespace {

std::string base_name(const std::string& path) { return std::filesystem::path(path).filename().string(); }

std::vector<std::string> components(const std::string& path) {
    std::vector<std::string> out;
    for (const auto& part : std::filesystem::path(path)) out.push_back(part.string());
    return out;
}

std::size_t common_suffix(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::size_t n = 0;
    while (n < a.size() && n < b.size() && a[a.size() - 1 - n] == b[b.size() - 1 - n]) ++n;
    return n;
}

}  // namespace

LatestCorpus LatestCorpus::build(const std::vector<ingest::SourceFile>& files) {
    LatestCorpus c;
    c.units_.reserve(files.size());
    for (const auto& f : files) {
        c.units_.push_back(ingest::normalize(f.text, f.path, f.corpus_id));
        c.base_names_[base_name(f.path)].push_back(c.units_.size() - 1);
        for (const auto& line : c.units_.back().lines) ++c.line_freq_[lexer::token_key(line)];
    }
    return c;
}

std::vector<std::size_t> LatestCorpus::by_base_name(const std::string& name) const {
    auto it = base_names_.find(name);
    return it == base_names_.end() ? std::vector<std::size_t>{} : it->second;
}

std::size_t LatestCorpus::line_frequency(const std::string& key) const {
    auto it = line_freq_.find(key);
    return it == line_freq_.end() ? 0 : it->second;
}

namespace {

std::string candidate_list(const std::vector<std::string>& c) {
    std::string s;
    for (const auto& x : c) s += (s.empty() ? "" : ", ") + x;
    return s;
}

}  // namespace

AmbiguousMatch::AmbiguousMatch(const std::string& origin, std::vector<std::string> candidates)
    : Error("ambiguous latest-version match for " + origin + ": " + candidate_list(candidates)),
      candidates_(std::move(candidates)) {}

// ---------------------------------------------------------------------------
// locating

namespace {

std::vector<std::string> keys_of(const ingest::NormalizedSource& u, std::uint32_t first, std::uint32_t last) {
    std::vector<std::string> out;
    for (auto k = first; k <= last; ++k) out.push_back(lexer::token_key(u.lines[k - 1]));
    return out;
}

std::size_t token_count(const std::string& key) {
    if (key.empty()) return 0;
    return static_cast<std::size_t>(std::count(key.begin(), key.end(), ' ')) + 1;
}

// Shifts [start, end] by aligning `from` to `to`, clamped to [1, n].
std::optional<LineSpan> aligned(long start, long end, long n) {
    start = std::max(start, 1L);
    end = std::min(end, n);
    if (start > end) return std::nullopt;
    return LineSpan{static_cast<std::uint32_t>(start), static_cast<std::uint32_t>(end)};
}

}  // namespace

OriginLocation locate_latest(const CodeFragment& origin, const ingest::NormalizedSource& release_unit,
                             const LatestCorpus& latest) {
    OriginLocation loc;
    loc.anchor = "file";
    auto cands = latest.by_base_name(base_name(origin.unit_id));
    if (cands.empty()) {
        loc.status = LocationStatus::FileDeleted;
        return loc;
    }
    auto origin_parts = components(origin.unit_id);
    std::size_t best = 0;
    std::vector<std::size_t> best_cands;
    for (auto c : cands) {
        auto score = common_suffix(origin_parts, components(latest.units()[c].unit_id));
        if (score > best || best_cands.empty()) {
            best = score;
            best_cands = {c};
        } else if (score == best) {
            best_cands.push_back(c);
        }
    }
    if (best_cands.size() > 1) {
        std::vector<std::string> names;
        for (auto c : best_cands) names.push_back(latest.units()[c].unit_id);
        std::sort(names.begin(), names.end());
        throw AmbiguousMatch(origin.unit_id, std::move(names));
    }
    const auto& L = latest.units()[best_cands.front()];
    loc.latest_path = L.unit_id;
    loc.status = LocationStatus::RegionDeleted;

    // old region in normalized lines
    std::uint32_t ns = 0, ne = 0;
    for (std::uint32_t k = 1; k <= release_unit.lines.size(); ++k) {
        auto orig = release_unit.line_map[k - 1];
        if (orig < origin.start_line || orig > origin.end_line) continue;
        if (ns == 0) ns = k;
        ne = k;
    }
    if (ns == 0 || L.lines.empty()) return loc;
    loc.old_lines = keys_of(release_unit, ns, ne);
    const long n = static_cast<long>(L.lines.size());

    std::optional<LineSpan> span;
    auto old_methods = lexer::method_blocks(release_unit);
    auto new_methods = lexer::method_blocks(L);
    const lexer::MethodBlock* old_m = nullptr;
    for (const auto& m : old_methods)
        if (m.start_line >= ns && m.start_line <= ne) {
            old_m = &m;
            break;
        }
    if (old_m) {
        loc.old_signature = old_m->signature;
        const lexer::MethodBlock* new_m = nullptr;
        for (const auto& m : new_methods) {
            if (m.name != old_m->name) continue;
            if (m.signature == old_m->signature) {
                new_m = &m;
                break;
            }
            if (!new_m) new_m = &m;
        }
        if (new_m) {
            long start = static_cast<long>(new_m->start_line) - (static_cast<long>(old_m->start_line) - ns);
            long end = static_cast<long>(new_m->end_line) + (static_cast<long>(ne) - old_m->end_line);
            span = aligned(start, end, n);
            if (span) {
                loc.anchor = "method:" + old_m->name;
                loc.new_signature = new_m->signature;
            }
        }
    }
    if (!span) {
        // distinctive line: rarest in the latest corpus, then longest, then earliest
        std::vector<std::string> latest_keys = keys_of(L, 1, static_cast<std::uint32_t>(n));
        std::optional<std::size_t> pick;
        std::size_t pick_freq = 0;
        long pick_at = 0;
        for (std::size_t k = 0; k < loc.old_lines.size(); ++k) {
            const auto& key = loc.old_lines[k];
            if (token_count(key) < 3) continue;
            auto at = std::find(latest_keys.begin(), latest_keys.end(), key);
            if (at == latest_keys.end()) continue;
            auto freq = latest.line_frequency(key);
            if (!pick || freq < pick_freq ||
                (freq == pick_freq && key.size() > loc.old_lines[*pick].size())) {
                pick = k;
                pick_freq = freq;
                pick_at = at - latest_keys.begin() + 1;
            }
        }
        if (pick) {
            long start = pick_at - static_cast<long>(*pick);
            span = aligned(start, start + static_cast<long>(ne - ns), n);
            if (span) {
                loc.anchor = "line:" + loc.old_lines[*pick];
                if (old_m) {
                    for (const auto& m : new_methods)
                        if (m.start_line >= span->start && m.start_line <= span->end) {
                            loc.new_signature = m.signature;
                            break;
                        }
                }
            }
        }
    }
    if (!span) {
        loc.new_signature.clear();
        return loc;
    }
    loc.status = LocationStatus::Located;
    loc.new_lines = keys_of(L, span->start, span->end);
    loc.latest_span = LineSpan{L.line_map[span->start - 1], L.line_map[span->end - 1]};
    return loc;
}

// ---------------------------------------------------------------------------
// diff

DiffResult diff_lines(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    const long n = static_cast<long>(a.size()), m = static_cast<long>(b.size());
    const long max = n + m;
    const long off = max + 1;
    std::vector<long> v(2 * max + 3, 0);
    std::vector<std::vector<long>> trace;
    long found_d = -1;
    for (long d = 0; d <= max && found_d < 0; ++d) {
        trace.push_back(v);
        for (long k = -d; k <= d; k += 2) {
            long x = (k == -d || (k != d && v[off + k - 1] < v[off + k + 1])) ? v[off + k + 1] : v[off + k - 1] + 1;
            long y = x - k;
            while (x < n && y < m && a[x] == b[y]) ++x, ++y;
            v[off + k] = x;
            if (x >= n && y >= m) {
                found_d = d;
                break;
            }
        }
    }

    // backtrack into ops: 0 equal, 1 delete, 2 insert
    std::vector<char> ops;
    long x = n, y = m;
    for (long d = found_d; d > 0; --d) {
        const auto& pv = trace[d];
        long k = x - y;
        long prev_k = (k == -d || (k != d && pv[off + k - 1] < pv[off + k + 1])) ? k + 1 : k - 1;
        long prev_x = pv[off + prev_k];
        long prev_y = prev_x - prev_k;
        while (x > prev_x && y > prev_y) {
            ops.push_back(0);
            --x, --y;
        }
        ops.push_back(x == prev_x ? 2 : 1);
        x = prev_x;
        y = prev_y;
    }
    while (x > 0 && y > 0) {
        ops.push_back(0);
        --x, --y;
    }
    std::reverse(ops.begin(), ops.end());

    DiffResult r;
    std::uint32_t i = 0, j = 0;
    std::optional<Hunk> open;
    for (char op : ops) {
        if (op == 0) {
            if (open) r.hunks.push_back(*open), open.reset();
            ++i, ++j, ++r.lcs;
            continue;
        }
        if (!open) open = Hunk{i, 0, j, 0};
        if (op == 1)
            ++open->old_count, ++i;
        else
            ++open->new_count, ++j;
    }
    if (open) r.hunks.push_back(*open);
    return r;
}

OutdatedVerdict diff_classify(const std::vector<std::string>& old_region, const std::vector<std::string>& new_region,
                              const std::vector<std::string>& old_signature,
                              const std::vector<std::string>& new_signature, double rewrite_threshold) {
    OutdatedVerdict v;
    auto diff = diff_lines(old_region, new_region);
    v.diff_hunks = diff.hunks;
    for (const auto& h : diff.hunks) {
        if (h.old_count > 0 && h.new_count > 0)
            v.modifications.insert(Modification::StatementModification);
        else if (h.new_count > 0)
            v.modifications.insert(Modification::StatementAddition);
        else
            v.modifications.insert(Modification::StatementRemoval);
    }
    if (!diff.hunks.empty()) {
        double retained = old_region.empty() ? 0.0 : static_cast<double>(diff.lcs) / old_region.size();
        if (retained < rewrite_threshold) {
            v.modifications.clear();
            v.modifications.insert(Modification::MethodRewriting);
        }
    }
    if (old_signature != new_signature) v.modifications.insert(Modification::MethodSignatureChange);
    v.outdated = !v.modifications.empty();
    return v;
}

int clone_age_months(const Date& origin_release, const Date& post_date) {
    int months = 12 * (post_date.year() - origin_release.year()) +
                 (static_cast<int>(post_date.month()) - static_cast<int>(origin_release.month()));
    if (post_date.day() < origin_release.day()) --months;
    return months;
}

// ---------------------------------------------------------------------------
// report

OutdatedReport outdated_report(const std::vector<merge::ConsolidatedPair>& pairs, const OutdatedInputs& inputs,
                               const OutdatedConfig& cfg) {
    OutdatedReport report;
    report.rows.resize(pairs.size());
    std::vector<Diagnostics> diags(pairs.size());
    parallel_for(pairs.size(), cfg.jobs, [&](std::size_t i) {
        const auto& p = pairs[i];
        auto& row = report.rows[i];
        auto& diag = diags[i];
        row.pair_id = p.pair_id;
        row.snippet = p.snippet_fragment;
        row.origin = p.origins.front();
        for (const auto& o : p.origins)
            if (inputs.latest.contains(o.corpus_id)) {
                row.origin = o;
                break;
            }
        if (auto it = inputs.intents.find(p.pair_id); it != inputs.intents.end()) row.intent = it->second;

        auto skip = [&](std::string reason, std::string message) {
            row.skipped = true;
            row.skip_reason = reason;
            diag.note(reason, std::move(message));
        };
        auto latest = inputs.latest.find(row.origin.corpus_id);
        if (latest == inputs.latest.end()) {
            skip("no_latest_corpus", "no latest corpus for project " + row.origin.corpus_id);
            return;
        }
        auto release = inputs.release.find(row.origin.corpus_id);
        const ingest::NormalizedSource* unit = nullptr;
        if (release != inputs.release.end()) {
            auto u = release->second.units.find(row.origin.unit_id);
            if (u != release->second.units.end()) unit = &u->second;
            auto post = inputs.post_dates.find(row.snippet.unit_id);
            if (release->second.release_date && post != inputs.post_dates.end())
                row.age_months = clone_age_months(*release->second.release_date, post->second);
        }
        if (!unit) {
            skip("missing_release_unit", "release file not found: " + row.origin.corpus_id + ":" + row.origin.unit_id);
            return;
        }
        try {
            row.location = locate_latest(row.origin, *unit, latest->second);
        } catch (const AmbiguousMatch& e) {
            skip("ambiguous_match", e.what());
            return;
        }
        switch (row.location.status) {
            case LocationStatus::FileDeleted:
                row.verdict.outdated = true;
                row.verdict.modifications = {Modification::FileDeletion};
                row.dead = true;
                break;
            case LocationStatus::RegionDeleted:
                row.verdict.outdated = true;
                row.verdict.modifications = {Modification::StatementRemoval};
                row.verdict.diff_hunks = {Hunk{0, static_cast<std::uint32_t>(row.location.old_lines.size()), 0, 0}};
                row.dead = true;
                break;
            case LocationStatus::Located:
                row.verdict = diff_classify(row.location.old_lines, row.location.new_lines, row.location.old_signature,
                                            row.location.new_signature, cfg.rewrite_threshold);
                break;
        }
    });
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const auto& row = report.rows[i];
        report.diagnostics.merge(diags[i]);
        auto& counts = report.by_project[row.origin.corpus_id];
        ++counts.rows;
        if (row.skipped) {
            ++counts.skipped;
            continue;
        }
        if (row.verdict.outdated) ++counts.outdated;
        for (auto m : row.verdict.modifications) ++report.by_modification[m];
    }
    return report;
}

}  // namespace cloneaudit::outdated
