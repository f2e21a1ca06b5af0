#include <openssl/evp.h>

#include <fstream>
#include <iomanip>
#include <sstream>

#include "cloneaudit/json_io.hpp"

namespace cloneaudit {

namespace {

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
    if (v)
        j[key] = *v;
    else
        j[key] = nullptr;
}

template <typename T>
std::optional<T> get_optional(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->template get<T>();
}

std::vector<std::string> detector_names(const std::set<DetectorKind>& ds) {
    std::vector<std::string> out;
    for (auto d : ds) out.emplace_back(to_string(d));
    return out;
}

std::set<DetectorKind> parse_detectors(const json& arr) {
    std::set<DetectorKind> out;
    for (const auto& s : arr) {
        auto d = parse_detector(s.get<std::string>());
        if (!d) throw ValidationError("unknown detector " + s.get<std::string>());
        out.insert(*d);
    }
    return out;
}

}  // namespace

void to_json(json& j, const CodeFragment& f) {
    j = json{{"unit", f.unit_id}, {"corpus", f.corpus_id}, {"start", f.start_line}, {"end", f.end_line}};
}

void from_json(const json& j, CodeFragment& f) {
    f.unit_id = j.at("unit").get<std::string>();
    f.corpus_id = j.at("corpus").get<std::string>();
    f.start_line = j.at("start").get<std::uint32_t>();
    f.end_line = j.at("end").get<std::uint32_t>();
    if (f.start_line == 0 || f.end_line < f.start_line) throw ValidationError("bad fragment span in " + f.unit_id);
}

void to_json(json& j, const ClonePair& p) {
    j = json{{"snippet", p.left},
             {"origin", p.right},
             {"detector", to_string(p.detector)},
             {"similarity", p.similarity}};
}

void from_json(const json& j, ClonePair& p) {
    p.left = j.at("snippet").get<CodeFragment>();
    p.right = j.at("origin").get<CodeFragment>();
    auto d = parse_detector(j.at("detector").get<std::string>());
    if (!d) throw ValidationError("unknown detector");
    p.detector = *d;
    p.similarity = j.value("similarity", 1.0);
}

void to_json(json& j, const Diagnostics& d) {
    j = json::object();
    for (const auto& [k, v] : d.counts) j[k] = v;
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path.string());
    std::vector<json> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::exception& e) {
            throw ValidationError(path.string() + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + path.string());
        out << text;
        if (!out) throw Error("write failed for " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& records) {
    std::string text;
    for (const auto& r : records) {
        text += r.dump();
        text += '\n';
    }
    write_text(path, text);
}

void write_json(const std::filesystem::path& path, const json& value) { write_text(path, value.dump(2) + "\n"); }

json read_json(const std::filesystem::path& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    std::ostringstream os;
    for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return os.str();
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_text(path)); }

}  // namespace cloneaudit

// ---------------------------------------------------------------------------

namespace cloneaudit::ingest {

void to_json(json& j, const Snippet& s) {
    j = json{{"snippet_id", s.snippet_id}, {"post_id", s.post_id},     {"question_id", s.question_id},
             {"line_count", s.line_count}, {"post_date", s.post_date.to_string()}, {"text", s.text}};
}

void from_json(const json& j, Snippet& s) {
    s.snippet_id = j.at("snippet_id").get<std::string>();
    s.post_id = j.at("post_id").get<std::uint64_t>();
    s.question_id = j.at("question_id").get<std::uint64_t>();
    s.text = j.at("text").get<std::string>();
    s.line_count = j.at("line_count").get<std::size_t>();
    auto d = Date::parse(j.at("post_date").get<std::string>());
    if (!d) throw ValidationError("bad post_date for snippet " + s.snippet_id);
    s.post_date = *d;
}

void to_json(json& j, const RawPost& p) {
    j = json{{"post_id", p.post_id},
             {"post_type", p.post_type == PostType::question ? "question" : "answer"},
             {"title", p.title},
             {"creation_date", p.creation_date.to_string()},
             {"tags", p.tags},
             {"score", p.score},
             {"body", p.body}};
    put_optional(j, "parent_id", p.parent_id);
    put_optional(j, "accepted_answer_id", p.accepted_answer_id);
}

void from_json(const json& j, RawPost& p) {
    p.post_id = j.at("post_id").get<std::uint64_t>();
    p.post_type = j.at("post_type").get<std::string>() == "question" ? PostType::question : PostType::answer;
    p.title = j.value("title", "");
    if (auto d = Date::parse(j.value("creation_date", ""))) p.creation_date = *d;
    p.tags = j.value("tags", std::vector<std::string>{});
    p.score = j.value("score", 0LL);
    p.body = j.value("body", "");
    p.parent_id = get_optional<std::uint64_t>(j, "parent_id");
    p.accepted_answer_id = get_optional<std::uint64_t>(j, "accepted_answer_id");
}

}  // namespace cloneaudit::ingest

// ---------------------------------------------------------------------------

namespace cloneaudit::merge {

void to_json(json& j, const MergedClonePair& m) {
    json partners = json::array();
    for (const auto& e : m.ok_partners)
        partners.push_back(json{{"token_pair", e.token_pair}, {"line_pair", e.line_pair}, {"ok", e.ok}});
    j = json{{"representative", m.representative},
             {"contributors", detector_names(m.contributors)},
             {"ok_partners", partners},
             {"token_members", m.token_members},
             {"line_members", m.line_members}};
}

void from_json(const json& j, MergedClonePair& m) {
    m.representative = j.at("representative").get<ClonePair>();
    m.contributors = parse_detectors(j.at("contributors"));
    if (m.contributors.empty()) throw ValidationError("merged pair without contributors");
    m.ok_partners.clear();
    for (const auto& e : j.value("ok_partners", json::array()))
        m.ok_partners.push_back({e.at("token_pair").get<std::size_t>(), e.at("line_pair").get<std::size_t>(),
                                 e.at("ok").get<double>()});
    m.token_members = j.value("token_members", std::vector<std::size_t>{});
    m.line_members = j.value("line_members", std::vector<std::size_t>{});
}

void to_json(json& j, const ConsolidatedPair& c) {
    j = json{{"pair_id", c.pair_id},
             {"snippet", c.snippet_fragment},
             {"origins", c.origins},
             {"contributors", detector_names(c.contributors)}};
}

void from_json(const json& j, ConsolidatedPair& c) {
    c.pair_id = j.at("pair_id").get<std::uint64_t>();
    c.snippet_fragment = j.at("snippet").get<CodeFragment>();
    c.origins = j.at("origins").get<std::vector<CodeFragment>>();
    if (c.origins.empty()) throw ValidationError("consolidated pair " + std::to_string(c.pair_id) + " has no origins");
    c.contributors = parse_detectors(j.at("contributors"));
}

void to_json(json& j, const MergeSummary& s) {
    j = json{{"token_pairs", s.token_pairs}, {"line_pairs", s.line_pairs}, {"merged", s.merged},
             {"common", s.common},           {"token_only", s.token_only}, {"line_only", s.line_only}};
}

}  // namespace cloneaudit::merge

// ---------------------------------------------------------------------------

namespace cloneaudit::license {

void to_json(json& j, const LicenseFinding& f) {
    j = json{{"unit", f.unit_id}, {"license", f.license}, {"matched_sentence", f.matched_sentence}};
}

void from_json(const json& j, LicenseFinding& f) {
    f.unit_id = j.at("unit").get<std::string>();
    f.license = j.at("license").get<std::string>();
    f.matched_sentence = j.value("matched_sentence", "");
}

void to_json(json& j, const ConflictVerdict& v) {
    j = json{{"origin_license", v.origin_license},
             {"snippet_license", v.snippet_license},
             {"snippet_license_effective", v.snippet_license_effective},
             {"verdict", to_string(v.verdict)}};
}

void to_json(json& j, const ReportRow& r) {
    j = json{{"snippet_unit", r.snippet_unit}, {"origin_corpus", r.origin_corpus}, {"origin_unit", r.origin_unit},
             {"pair_ids", r.pair_ids},         {"pattern", r.pattern}};
    json v = r.verdict;
    for (auto& [k, val] : v.items()) j[k] = val;
}

json aggregates_json(const LicenseReport& r) {
    json out = json::array();
    for (const auto& [k, n] : r.aggregates)
        out.push_back(json{{"verdict", to_string(k.verdict)},
                           {"origin_license", k.origin_license},
                           {"snippet_license", k.snippet_license},
                           {"pattern", k.pattern},
                           {"count", n}});
    return out;
}

}  // namespace cloneaudit::license

// ---------------------------------------------------------------------------

namespace cloneaudit::outdated {

void to_json(json& j, const Hunk& h) {
    j = json{{"old_start", h.old_start}, {"old_count", h.old_count}, {"new_start", h.new_start},
             {"new_count", h.new_count}};
}

void to_json(json& j, const ChangeIntent& c) {
    j = json{{"intent", to_string(c.intent)}};
    put_optional(j, "issue_id", c.issue_id);
}

void to_json(json& j, const ReportRow& r) {
    std::vector<std::string> mods;
    for (auto m : r.verdict.modifications) mods.emplace_back(to_string(m));
    j = json{{"pair_id", r.pair_id}, {"snippet", r.snippet}, {"origin", r.origin}, {"skipped", r.skipped}};
    if (r.skipped) j["skip_reason"] = r.skip_reason;
    json loc{{"status", to_string(r.location.status)}, {"anchor", r.location.anchor}};
    put_optional(loc, "latest_path", r.location.latest_path);
    if (r.location.latest_span)
        loc["latest_span"] = json{{"start", r.location.latest_span->start}, {"end", r.location.latest_span->end}};
    else
        loc["latest_span"] = nullptr;
    j["location"] = r.skipped ? json(nullptr) : loc;
    j["outdated"] = r.verdict.outdated;
    j["modifications"] = mods;
    j["diff_hunks"] = r.verdict.diff_hunks;
    j["dead"] = r.dead;
    put_optional(j, "age_months", r.age_months);
    if (r.intent)
        j["intent"] = *r.intent;
    else
        j["intent"] = nullptr;
}

json summary_json(const OutdatedReport& r) {
    json projects = json::object();
    for (const auto& [p, c] : r.by_project)
        projects[p] = json{{"rows", c.rows}, {"outdated", c.outdated}, {"skipped", c.skipped}};
    json mods = json::object();
    for (auto m : {Modification::StatementModification, Modification::StatementAddition,
                   Modification::StatementRemoval, Modification::MethodSignatureChange,
                   Modification::MethodRewriting, Modification::FileDeletion}) {
        auto it = r.by_modification.find(m);
        mods[std::string(to_string(m))] = it == r.by_modification.end() ? 0 : it->second;
    }
    std::size_t outdated = 0, dead = 0, skipped = 0;
    for (const auto& row : r.rows) {
        outdated += row.verdict.outdated;
        dead += row.dead;
        skipped += row.skipped;
    }
    return json{{"rows", r.rows.size()}, {"outdated", outdated},   {"dead", dead},
                {"skipped", skipped},    {"by_project", projects}, {"by_modification", mods},
                {"diagnostics", r.diagnostics}};
}

}  // namespace cloneaudit::outdated

// ---------------------------------------------------------------------------

namespace cloneaudit::triage {

void to_json(json& j, const ClassificationRecord& r) {
    j = json{{"pair_id", r.pair_id}, {"reviewer_id", r.reviewer_id}, {"pattern", to_string(r.pattern)}};
    if (r.boilerplate_kind)
        j["boilerplate_kind"] = to_string(*r.boilerplate_kind);
    else
        j["boilerplate_kind"] = nullptr;
    j["evidence_note"] = r.evidence_note;
    put_optional(j, "evidence_url", r.evidence_url);
    j["timestamp"] = r.timestamp;
}

void from_json(const json& j, ClassificationRecord& r) {
    r.pair_id = j.value("pair_id", std::uint64_t{0});
    r.reviewer_id = j.value("reviewer_id", "");
    auto p = parse_pattern(j.at("pattern").get<std::string>());
    if (!p) throw ValidationError("unknown pattern " + j.at("pattern").get<std::string>());
    r.pattern = *p;
    r.boilerplate_kind.reset();
    if (auto k = get_optional<std::string>(j, "boilerplate_kind")) {
        r.boilerplate_kind = parse_boilerplate_kind(*k);
        if (!r.boilerplate_kind) throw ValidationError("unknown boilerplate_kind " + *k);
    }
    r.evidence_note = j.value("evidence_note", "");
    r.evidence_url = get_optional<std::string>(j, "evidence_url");
    r.timestamp = j.value("timestamp", "");
}

void to_json(json& j, const ConflictItem& c) {
    j = json{{"pair_id", c.pair_id}, {"kind", to_string(c.kind)}, {"records", c.records}};
    if (c.resolution)
        j["resolution"] = *c.resolution;
    else
        j["resolution"] = nullptr;
}

void to_json(json& j, const EvidenceRanking& e) {
    json cands = json::array();
    for (const auto& [id, score] : e.candidates) cands.push_back(json{{"origin", id}, {"score", score}});
    j = json{{"pair_id", e.pair_id}, {"candidates", cands}};
}

void from_json(const json& j, EvidenceRanking& e) {
    e.pair_id = j.value("pair_id", std::uint64_t{0});
    e.candidates.clear();
    for (const auto& c : j.value("candidates", json::array()))
        e.candidates.emplace_back(c.at("origin").get<std::string>(), c.at("score").get<double>());
}

void to_json(json& j, const PairContext& p) {
    j = json{{"pair_id", p.pair_id},
             {"snippet", p.snippet},
             {"origins", p.origins},
             {"contributors", p.contributors},
             {"merged_count", p.merged_count},
             {"snippet_code", p.snippet_code},
             {"origin_code", p.origin_code},
             {"question_title", p.question_title},
             {"question_text", p.question_text},
             {"answer_text", p.answer_text},
             {"post_url", p.post_url},
             {"ranking", p.ranking}};
}

void from_json(const json& j, PairContext& p) {
    p.pair_id = j.at("pair_id").get<std::uint64_t>();
    p.snippet = j.at("snippet").get<CodeFragment>();
    p.origins = j.at("origins").get<std::vector<CodeFragment>>();
    p.contributors = j.value("contributors", std::vector<std::string>{});
    p.merged_count = j.value("merged_count", std::size_t{1});
    p.snippet_code = j.value("snippet_code", "");
    p.origin_code = j.value("origin_code", std::vector<std::string>{});
    p.question_title = j.value("question_title", "");
    p.question_text = j.value("question_text", "");
    p.answer_text = j.value("answer_text", "");
    p.post_url = j.value("post_url", "");
    if (j.contains("ranking")) p.ranking = j.at("ranking").get<EvidenceRanking>();
}

void to_json(json& j, const PairBundle& b) {
    j = b.context;
    j["records"] = b.records;
    if (b.effective_pattern)
        j["effective_pattern"] = to_string(*b.effective_pattern);
    else
        j["effective_pattern"] = nullptr;
    if (b.conflict)
        j["conflict"] = *b.conflict;
    else
        j["conflict"] = nullptr;
}

void to_json(json& j, const ClassificationReport& r) {
    json before = json::object(), after = json::object();
    for (auto p : kAllPatterns) {
        before[std::string(to_string(p))] = r.before_consolidation.at(p);
        after[std::string(to_string(p))] = r.after_consolidation.at(p);
    }
    json projects = json::object();
    for (const auto& [proj, counts] : r.by_project) {
        json c = json::object();
        for (auto p : {Pattern::QS, Pattern::UD}) {
            auto it = counts.find(p);
            c[std::string(to_string(p))] = it == counts.end() ? 0 : it->second;
        }
        projects[proj] = c;
    }
    j = json{{"before_consolidation", before},
             {"after_consolidation", after},
             {"classified", r.classified},
             {"unclassified", r.unclassified},
             {"by_project", projects}};
}

}  // namespace cloneaudit::triage
