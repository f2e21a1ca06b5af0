#include <iomanip>
#include <set>
#include <sstream>

#include "cloneaudit/pipeline.hpp"

namespace cloneaudit::pipeline {

namespace {

std::string num(double v, int digits = 2) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

void missing(std::ostringstream& os, const std::string& file) { os << "  (no " << file << " found)\n"; }

void clone_section(std::ostringstream& os, const fs::path& dir) {
    os << "Clone pairs\n";
    std::map<std::string, std::uint32_t> snippet_lines;
    if (fs::exists(dir / "snippets.jsonl"))
        for (const auto& s : from_records<ingest::Snippet>(read_jsonl(dir / "snippets.jsonl")))
            snippet_lines[s.snippet_id] = static_cast<std::uint32_t>(s.line_count);
    bool any = false;
    for (const auto& [label, file] : {std::pair{"token", "clones.token.jsonl"}, std::pair{"line", "clones.line.jsonl"}}) {
        if (!fs::exists(dir / file)) {
            missing(os, file);
            continue;
        }
        any = true;
        auto pairs = from_records<ClonePair>(read_jsonl(dir / file));
        auto stats = detect::report_stats(pairs);
        std::map<std::string, std::vector<CodeFragment>> by_snippet;
        std::set<std::string> projects;
        for (const auto& p : pairs) {
            by_snippet[p.left.unit_id].push_back(p.left);
            projects.insert(p.right.corpus_id);
        }
        double ratio_sum = 0;
        std::size_t ratio_n = 0;
        for (const auto& [unit, frags] : by_snippet) {
            auto it = snippet_lines.find(unit);
            if (it == snippet_lines.end()) continue;
            ratio_sum += merge::cloned_ratio(it->second, frags);
            ++ratio_n;
        }
        os << "  " << label << ": " << stats.pairs << " pairs, " << by_snippet.size() << " snippets, " << projects.size()
           << " projects, avg lines "
           << num(stats.avg_snippet_lines) << " (snippet) / " << num(stats.avg_origin_lines) << " (origin)";
        if (ratio_n) os << ", avg cloned ratio " << num(ratio_sum / ratio_n) << "%";
        os << "\n";
    }
    if (any && !snippet_lines.empty()) os << "  snippets ingested: " << snippet_lines.size() << "\n";
}

void merge_section(std::ostringstream& os, const fs::path& dir) {
    os << "Detector overlap\n";
    if (!fs::exists(dir / "merge_summary.json")) return missing(os, "merge_summary.json");
    auto s = read_json(dir / "merge_summary.json");
    os << "  token only: " << s.value("token_only", 0) << "\n"
       << "  both:       " << s.value("common", 0) << "\n"
       << "  line only:  " << s.value("line_only", 0) << "\n"
       << "  merged pairs: " << s.value("merged", 0) << ", consolidated: " << s.value("consolidated", 0) << "\n";
}

void pattern_section(std::ostringstream& os, const fs::path& dir) {
    os << "Reuse patterns\n";
    if (!fs::exists(dir / "classification.json")) return missing(os, "classification.json");
    auto r = read_json(dir / "classification.json").at("report");
    os << "  pattern  before  after\n";
    for (const auto& [p, n] : r.at("before_consolidation").items())
        os << "  " << std::left << std::setw(7) << p << std::right << std::setw(7) << n.get<std::size_t>()
           << std::setw(7) << r.at("after_consolidation").at(p).get<std::size_t>() << "\n";
    os << "  classified: " << r.value("classified", 0) << ", unclassified: " << r.value("unclassified", 0) << "\n";
}

void outdated_section(std::ostringstream& os, const fs::path& dir) {
    os << "Outdated clones\n";
    if (!fs::exists(dir / "outdated_summary.json")) return missing(os, "outdated_summary.json");
    auto s = read_json(dir / "outdated_summary.json");
    for (const auto& [proj, c] : s.at("by_project").items())
        os << "  " << proj << ": " << c.value("outdated", 0) << " of " << c.value("rows", 0) << " outdated"
           << (c.value("skipped", 0) ? " (" + std::to_string(c.value("skipped", 0)) + " skipped)" : "") << "\n";
    os << "  total outdated: " << s.value("outdated", 0) << ", dead: " << s.value("dead", 0) << "\n";
    for (const auto& [m, n] : s.at("by_modification").items())
        if (n.get<std::size_t>()) os << "  " << m << ": " << n.get<std::size_t>() << "\n";
}

void license_section(std::ostringstream& os, const fs::path& dir) {
    os << "License conflicts\n";
    if (!fs::exists(dir / "license_summary.json")) return missing(os, "license_summary.json");
    auto s = read_json(dir / "license_summary.json");
    for (const auto& [v, n] : s.at("verdicts").items()) os << "  " << v << ": " << n.get<std::size_t>() << "\n";
    for (const auto& a : s.at("aggregates"))
        os << "  " << a.at("verdict").get<std::string>() << "  " << a.at("origin_license").get<std::string>()
           << " <- " << a.at("snippet_license").get<std::string>() << "  [" << a.at("pattern").get<std::string>()
           << "] x" << a.at("count").get<std::size_t>() << "\n";
}

}  // namespace

std::string summarize(const fs::path& dir) {
    std::ostringstream os;
    clone_section(os, dir);
    merge_section(os, dir);
    pattern_section(os, dir);
    outdated_section(os, dir);
    license_section(os, dir);
    return os.str();
}

}  // namespace cloneaudit::pipeline
