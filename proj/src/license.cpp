#include "cloneaudit/license.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cloneaudit/ingest.hpp"
#include "license_catalog_data.hpp"

namespace cloneaudit::license {

using nlohmann::json;

// ---------------------------------------------------------------------------
// catalog

Catalog Catalog::builtin() {
    static const Catalog c = from_json(kBuiltinCatalogJson);
    return c;
}

Catalog Catalog::from_json(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("license catalog: ") + e.what());
    }
    Catalog c;
    auto lowered = [](const json& arr) {
        std::vector<std::string> out;
        for (const auto& s : arr) out.push_back(to_lower(s.get<std::string>()));
        return out;
    };
    try {
        c.header_lines = j.value("header_lines", 60u);
        c.pointer_phrases = lowered(j.value("pointer_phrases", json::array()));
        c.license_like_phrases = lowered(j.value("license_like_phrases", json::array()));
        for (const auto& e : j.at("licenses")) {
            CatalogEntry entry{e.at("id").get<std::string>(), {}};
            for (const auto& r : e.at("rules")) {
                Rule rule{lowered(r.at("all_of")), lowered(r.value("none_of", json::array()))};
                if (rule.all_of.empty()) throw ValidationError("license catalog: empty all_of for " + entry.id);
                entry.rules.push_back(std::move(rule));
            }
            c.entries.push_back(std::move(entry));
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("license catalog: ") + e.what());
    }
    return c;
}

Catalog Catalog::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read license catalog " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

bool Catalog::contains(std::string_view id) const {
    return std::any_of(entries.begin(), entries.end(), [&](const CatalogEntry& e) { return e.id == id; });
}

// ---------------------------------------------------------------------------
// sentences

namespace {

std::string strip_markers(std::string_view line) {
    std::string s = trim(line);
    std::string_view v = s;
    if (v.starts_with("/*")) {
        v.remove_prefix(2);
        while (v.starts_with("*")) v.remove_prefix(1);
    } else if (v.starts_with("//")) {
        while (v.starts_with("/")) v.remove_prefix(1);
    } else {
        while (v.starts_with("*") && !v.starts_with("*/")) v.remove_prefix(1);
    }
    if (v.ends_with("*/")) v.remove_suffix(2);
    while (v.ends_with("*")) v.remove_suffix(1);
    return trim(v);
}

bool decorative(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return c == '*' || c == '-' || c == '=' || c == '#' || c == '_' || c == '/' || std::isspace(c);
    });
}

void split_paragraph(const std::string& para, std::vector<std::string>& out) {
    std::string collapsed;
    for (unsigned char c : para) {
        if (std::isspace(c)) {
            if (!collapsed.empty() && collapsed.back() != ' ') collapsed += ' ';
        } else {
            collapsed += static_cast<char>(std::tolower(c));
        }
    }
    std::size_t pos = 0;
    while (pos < collapsed.size()) {
        auto cut = collapsed.find(". ", pos);
        auto piece = trim(std::string_view(collapsed).substr(pos, cut == std::string::npos ? std::string::npos : cut - pos));
        while (!piece.empty() && piece.back() == '.') piece.pop_back();
        if (!piece.empty()) out.push_back(std::move(piece));
        if (cut == std::string::npos) break;
        pos = cut + 2;
    }
}

bool contains_phrase(const std::vector<std::string>& sentences, const std::string& phrase) {
    return std::any_of(sentences.begin(), sentences.end(),
                       [&](const std::string& s) { return s.find(phrase) != std::string::npos; });
}

const std::string* first_with(const std::vector<std::string>& sentences, const std::vector<std::string>& phrases) {
    for (const auto& s : sentences)
        for (const auto& p : phrases)
            if (s.find(p) != std::string::npos) return &s;
    return nullptr;
}

const std::string* match_rule(const Rule& r, const std::vector<std::string>& sentences) {
    for (const auto& p : r.all_of)
        if (!contains_phrase(sentences, p)) return nullptr;
    for (const auto& p : r.none_of)
        if (contains_phrase(sentences, p)) return nullptr;
    return first_with(sentences, {r.all_of.front()});
}

struct Hit {
    std::string id;
    std::string sentence;
};

std::optional<Hit> catalog_hit(const Catalog& c, const std::vector<std::string>& sentences) {
    for (const auto& e : c.entries)
        for (const auto& r : e.rules)
            if (const auto* s = match_rule(r, sentences)) return Hit{e.id, *s};
    return std::nullopt;
}

}  // namespace

std::vector<std::string> comment_sentences(std::string_view text, std::uint32_t first_line,
                                           std::uint32_t last_line) {
    std::vector<std::string> out;
    for (const auto& comment : ingest::extract_comments(text)) {
        if (comment.end_line < first_line || comment.start_line > last_line) continue;
        std::string para;
        auto lines = split_lines(comment.text);
        for (std::size_t k = 0; k < lines.size(); ++k) {
            auto line_no = comment.start_line + static_cast<std::uint32_t>(k);
            if (line_no < first_line || line_no > last_line) continue;
            auto s = strip_markers(lines[k]);
            if (s.empty() || decorative(s)) {
                split_paragraph(para, out);
                para.clear();
                continue;
            }
            if (!para.empty()) para += ' ';
            para += s;
        }
        split_paragraph(para, out);
    }
    return out;
}

LicenseFinding identify_license(std::string_view text, const Catalog& catalog) {
    LicenseFinding f;
    auto head = comment_sentences(text, 1, catalog.header_lines);
    if (auto hit = catalog_hit(catalog, head)) {
        f.license = hit->id;
        f.matched_sentence = hit->sentence;
        return f;
    }
    if (const auto* s = first_with(head, catalog.pointer_phrases)) {
        f.license = kSeeFile;
        f.matched_sentence = *s;
        return f;
    }
    if (const auto* s = first_with(head, catalog.license_like_phrases)) {
        f.license = kUnknown;
        f.matched_sentence = *s;
        return f;
    }
    auto tail = comment_sentences(text, catalog.header_lines + 1, UINT32_MAX);
    const std::string* evidence = nullptr;
    auto hit = catalog_hit(catalog, tail);
    if (hit) {
        f.license = kSeeFile;
        f.matched_sentence = hit->sentence;
        return f;
    }
    if ((evidence = first_with(tail, catalog.pointer_phrases)) ||
        (evidence = first_with(tail, catalog.license_like_phrases))) {
        f.license = kSeeFile;
        f.matched_sentence = *evidence;
    }
    return f;
}

// ---------------------------------------------------------------------------
// conflicts

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::Compatible: return "Compatible";
        case Verdict::Incompatible: return "Incompatible";
        case Verdict::Unknown: return "Unknown";
    }
    return "Unknown";
}

std::optional<Verdict> parse_verdict(std::string_view s) {
    if (s == "Compatible") return Verdict::Compatible;
    if (s == "Incompatible") return Verdict::Incompatible;
    if (s == "Unknown") return Verdict::Unknown;
    return std::nullopt;
}

namespace {

std::string override_key(std::string_view origin, std::string_view snippet) {
    return trim(origin) + " / " + trim(snippet);
}

std::optional<std::string> parse_toml_string(std::string_view v) {
    auto s = trim(v);
    if (s.size() < 2 || s.front() != '"' || s.back() != '"') return std::nullopt;
    return s.substr(1, s.size() - 2);
}

// Drops a trailing `# comment` that is outside quotes.
std::string_view strip_toml_comment(std::string_view line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

bool undetermined(std::string_view id) { return id == kUnknown || id == kSeeFile; }

}  // namespace

ConflictMatrix ConflictMatrix::parse(std::string_view text) {
    ConflictMatrix m;
    std::string section;
    std::size_t line_no = 0;
    for (const auto& raw : split_lines(text)) {
        ++line_no;
        auto line = trim(strip_toml_comment(raw));
        if (line.empty()) continue;
        auto where = " (line " + std::to_string(line_no) + ")";
        if (line.front() == '[') {
            if (line != "[overrides]") throw ValidationError("license matrix: unknown table " + line + where);
            section = "overrides";
            continue;
        }
        auto eq = line.find('=');
        // keys may be quoted and contain '=' only in theory; ids never do
        if (line.front() == '"') eq = line.find('=', line.find('"', 1));
        if (eq == std::string::npos) throw ValidationError("license matrix: expected key = value" + where);
        auto key_text = trim(std::string_view(line).substr(0, eq));
        auto value = parse_toml_string(std::string_view(line).substr(eq + 1));
        if (!value) throw ValidationError("license matrix: value must be a quoted string" + where);
        std::string key = key_text;
        if (!key.empty() && key.front() == '"') {
            auto unq = parse_toml_string(key);
            if (!unq) throw ValidationError("license matrix: bad key" + where);
            key = *unq;
        }
        if (section.empty()) {
            if (key != "site_default_license") throw ValidationError("license matrix: unknown key " + key + where);
            m.site_default_license = *value;
        } else {
            auto slash = key.find('/');
            if (slash == std::string::npos) throw ValidationError("license matrix: key must be ORIGIN / SNIPPET" + where);
            auto verdict = parse_verdict(*value);
            if (!verdict) throw ValidationError("license matrix: unknown verdict " + *value + where);
            m.overrides[override_key(key.substr(0, slash), key.substr(slash + 1))] = *verdict;
        }
    }
    return m;
}

ConflictMatrix ConflictMatrix::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read license matrix " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string effective_snippet_license(const LicenseFinding& f, const ConflictMatrix& m) {
    return f.license == kNone ? m.site_default_license : f.license;
}

ConflictVerdict classify_conflict(const LicenseFinding& origin, const LicenseFinding& snippet,
                                  const ConflictMatrix& m) {
    ConflictVerdict v;
    v.origin_license = origin.license;
    v.snippet_license = snippet.license;
    v.snippet_license_effective = effective_snippet_license(snippet, m);

    for (const auto* s : {&v.snippet_license, &v.snippet_license_effective}) {
        auto it = m.overrides.find(override_key(v.origin_license, *s));
        if (it != m.overrides.end()) {
            v.verdict = it->second;
            return v;
        }
    }

    const auto& o = v.origin_license;
    const auto& s = v.snippet_license_effective;
    if (o == v.snippet_license || o == s)
        v.verdict = Verdict::Compatible;
    else if (undetermined(v.snippet_license) || o == kSeeFile)
        v.verdict = Verdict::Unknown;
    else if (o == kNone)
        v.verdict = Verdict::Compatible;
    else
        v.verdict = Verdict::Incompatible;
    return v;
}

LicenseReport license_report(const std::vector<merge::ConsolidatedPair>& pairs, const FindingMap& findings,
                             const ConflictMatrix& matrix, const std::map<std::uint64_t, std::string>& patterns) {
    LicenseReport report;
    std::map<std::tuple<std::string, std::string, std::string, std::string>, ReportRow> rows;
    for (const auto& p : pairs) {
        const auto& s = p.snippet_fragment;
        for (const auto& o : p.origins) {
            auto& row = rows[{s.corpus_id, s.unit_id, o.corpus_id, o.unit_id}];
            row.snippet_unit = s.unit_id;
            row.origin_corpus = o.corpus_id;
            row.origin_unit = o.unit_id;
            if (row.pair_ids.empty() || row.pair_ids.back() != p.pair_id) row.pair_ids.push_back(p.pair_id);
        }
    }
    for (auto& [key, row] : rows) {
        std::sort(row.pair_ids.begin(), row.pair_ids.end());
        auto pat = patterns.find(row.pair_ids.front());
        if (pat != patterns.end()) row.pattern = pat->second;

        bool missing_any = false;
        auto lookup = [&](const std::string& corpus, const std::string& unit) {
            auto it = findings.find({corpus, unit});
            if (it != findings.end()) return it->second;
            missing_any = true;
            report.diagnostics.note("missing_finding", "no license finding for " + corpus + ":" + unit);
            LicenseFinding missing;
            missing.unit_id = unit;
            missing.license = kUnknown;
            return missing;
        };
        auto snippet = lookup(std::get<0>(key), std::get<1>(key));
        auto origin = lookup(std::get<2>(key), std::get<3>(key));
        row.verdict = classify_conflict(origin, snippet, matrix);
        if (missing_any) row.verdict.verdict = Verdict::Unknown;
        ++report.aggregates[{row.verdict.verdict, row.verdict.origin_license, row.verdict.snippet_license, row.pattern}];
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace cloneaudit::license
