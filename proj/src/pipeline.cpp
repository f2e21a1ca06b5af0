#include "cloneaudit/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "cloneaudit/lexer.hpp"
#include "cloneaudit/license.hpp"
#include "cloneaudit/outdated.hpp"
#include "cloneaudit/parallel.hpp"
#include "cloneaudit/triage.hpp"

namespace cloneaudit::pipeline {

// ---------------------------------------------------------------------------
// configuration

CorpusSpec parse_corpus_arg(const std::string& arg) {
    auto eq = arg.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size())
        throw ValidationError("expected <id>=<dir>, got '" + arg + "'");
    return {arg.substr(0, eq), arg.substr(eq + 1), "", std::nullopt};
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> known, const std::string& where) {
    for (const auto& [k, _] : j.items())
        if (std::find(known.begin(), known.end(), k) == known.end())
            throw ValidationError("unknown config key '" + k + "' in " + where);
}

std::vector<CorpusSpec> corpus_list(const json& arr, const fs::path& base) {
    std::vector<CorpusSpec> out;
    for (const auto& c : arr) {
        reject_unknown(c, {"id", "path", "version", "release_date"}, "corpus entry");
        CorpusSpec s;
        s.id = c.at("id").get<std::string>();
        s.root = resolve(base, c.at("path").get<std::string>());
        s.version = c.value("version", "");
        if (c.contains("release_date")) {
            s.release_date = Date::parse(c.at("release_date").get<std::string>());
            if (!s.release_date) throw ValidationError("bad release_date for corpus " + s.id);
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& j, const fs::path& base) {
    PipelineConfig c;
    try {
        reject_unknown(j,
                       {"dump", "snippet_corpus_id", "corpora", "latest", "ingest", "detector", "merge",
                        "license_matrix", "license_catalog", "store", "intents", "outdated_patterns",
                        "license_patterns", "rewrite_threshold", "out", "jobs"},
                       "config");
        if (j.contains("dump")) c.dump = resolve(base, j.at("dump").get<std::string>());
        c.snippet_corpus_id = j.value("snippet_corpus_id", c.snippet_corpus_id);
        if (j.contains("corpora")) c.corpora = corpus_list(j.at("corpora"), base);
        if (j.contains("latest")) c.latest = corpus_list(j.at("latest"), base);
        if (j.contains("ingest")) {
            const auto& i = j.at("ingest");
            reject_unknown(i, {"min_snippet_lines", "tags", "extensions"}, "ingest");
            c.ingest.min_snippet_lines = i.value("min_snippet_lines", c.ingest.min_snippet_lines);
            c.ingest.tags = i.value("tags", c.ingest.tags);
            c.ingest.extensions = i.value("extensions", c.ingest.extensions);
        }
        if (j.contains("detector")) {
            const auto& d = j.at("detector");
            reject_unknown(d, {"min_clone_lines", "token_similarity", "line_norm"}, "detector");
            c.detector.min_clone_lines = d.value("min_clone_lines", c.detector.min_clone_lines);
            c.detector.token_similarity = d.value("token_similarity", c.detector.token_similarity);
            if (d.contains("line_norm")) {
                const auto& n = d.at("line_norm");
                reject_unknown(n,
                               {"ignore_string_case", "ignore_char_case", "ignore_modifiers", "ignore_identifiers",
                                "ignore_numbers"},
                               "detector.line_norm");
                auto& o = c.detector.line_norm;
                o.ignore_string_case = n.value("ignore_string_case", o.ignore_string_case);
                o.ignore_char_case = n.value("ignore_char_case", o.ignore_char_case);
                o.ignore_modifiers = n.value("ignore_modifiers", o.ignore_modifiers);
                o.ignore_identifiers = n.value("ignore_identifiers", o.ignore_identifiers);
                o.ignore_numbers = n.value("ignore_numbers", o.ignore_numbers);
            }
        }
        if (j.contains("merge")) {
            const auto& m = j.at("merge");
            reject_unknown(m, {"t", "strategy"}, "merge");
            c.merge.t = m.value("t", c.merge.t);
            if (m.contains("strategy")) {
                auto s = merge::parse_strategy(m.at("strategy").get<std::string>());
                if (!s) throw ValidationError("unknown merge strategy");
                c.merge.strategy = *s;
            }
        }
        for (auto [key, slot] : {std::pair{"license_matrix", &c.license_matrix},
                                 std::pair{"license_catalog", &c.license_catalog}, std::pair{"store", &c.store},
                                 std::pair{"intents", &c.intents}})
            if (j.contains(key)) *slot = resolve(base, j.at(key).get<std::string>());
        if (j.contains("outdated_patterns")) c.outdated_patterns = j.at("outdated_patterns").get<std::set<std::string>>();
        if (j.contains("license_patterns")) c.license_patterns = j.at("license_patterns").get<std::set<std::string>>();
        c.rewrite_threshold = j.value("rewrite_threshold", c.rewrite_threshold);
        if (j.contains("out")) c.out = resolve(base, j.at("out").get<std::string>());
        c.jobs = j.value("jobs", c.jobs);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
    auto base = path.has_parent_path() ? path.parent_path() : fs::path(".");
    return from_json(read_json(path), base);
}

void PipelineConfig::validate() const {
    detector.validate();
    merge.validate();
    if (jobs < 1) throw ValidationError("jobs must be >= 1");
    if (!(rewrite_threshold >= 0.0 && rewrite_threshold <= 1.0))
        throw ValidationError("rewrite_threshold must be in [0, 1]");
    for (const auto* set : {&outdated_patterns, &license_patterns})
        for (const auto& p : *set)
            if (!triage::parse_pattern(p)) throw ValidationError("unknown pattern " + p);
    std::set<std::string> ids;
    for (const auto& c : corpora) {
        if (c.id == snippet_corpus_id) throw ValidationError("corpus id '" + c.id + "' equals the snippet corpus id");
        if (!ids.insert(c.id).second) throw ValidationError("duplicate corpus id " + c.id);
    }
    std::set<std::string> latest_ids;
    for (const auto& l : latest) {
        if (!ids.contains(l.id)) throw ValidationError("latest corpus '" + l.id + "' has no release corpus");
        if (!latest_ids.insert(l.id).second) throw ValidationError("duplicate latest corpus " + l.id);
    }
}

// ---------------------------------------------------------------------------
// helpers

namespace {

std::string iso_now() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::vector<ingest::Snippet> read_snippets(const fs::path& file) {
    return from_records<ingest::Snippet>(read_jsonl(file));
}

std::vector<merge::ConsolidatedPair> read_consolidated(const fs::path& file) {
    return from_records<merge::ConsolidatedPair>(read_jsonl(file));
}

ingest::ScanResult scan(const CorpusSpec& c, const ingest::IngestConfig& icfg) {
    return ingest::scan_corpus(c.root, c.id, c.version, icfg.extensions, c.release_date);
}

std::string corpus_digest(const ingest::ScanResult& r) {
    std::string acc;
    for (const auto& f : r.files) acc += f.path + '\0' + sha256_hex(f.text) + '\n';
    return sha256_hex(acc);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string fixed6(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(6) << v;
    return os.str();
}

std::vector<merge::ConsolidatedPair> select(const std::vector<merge::ConsolidatedPair>& pairs,
                                            const AuditSelection& sel, std::size_t& filtered) {
    filtered = 0;
    if (!sel.patterns) return pairs;
    std::vector<merge::ConsolidatedPair> out;
    for (const auto& p : pairs) {
        auto it = sel.patterns->find(p.pair_id);
        if (it != sel.patterns->end() && sel.keep.contains(it->second))
            out.push_back(p);
        else
            ++filtered;
    }
    return out;
}

std::string strip_html(std::string_view html) {
    std::string out;
    bool in_tag = false;
    for (char c : html) {
        if (c == '<') in_tag = true;
        if (!in_tag) out += c;
        if (c == '>') in_tag = false;
    }
    return ingest::decode_entities(out, false).value_or(out);
}

std::string fragment_code(const std::string& text, std::uint32_t start, std::uint32_t end) {
    auto lines = split_lines(text);
    std::string out;
    for (auto k = start; k <= end && k <= lines.size(); ++k) {
        if (k > start) out += '\n';
        out += lines[k - 1];
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// steps

StepResult ingest_dump(const fs::path& dump, const ingest::IngestConfig& cfg, const fs::path& out) {
    if (!fs::is_regular_file(dump)) throw Error("dump file not found: " + dump.string());
    StepResult r;
    ingest::AcceptedAnswerIndex index(cfg);
    {
        std::ifstream in(dump, std::ios::binary);
        auto qcfg = cfg;
        qcfg.post_type = ingest::PostType::question;
        ingest::PostReader reader(in, qcfg);
        while (auto q = reader.next()) index.observe_question(*q);
        r.diagnostics.merge(reader.diagnostics());
        r.counts["rows"] = reader.rows_seen();
    }
    std::map<std::uint64_t, ingest::RawPost> posts;
    std::vector<ingest::Snippet> snippets;
    {
        std::ifstream in(dump, std::ios::binary);
        auto acfg = cfg;
        acfg.post_type = ingest::PostType::answer;
        ingest::PostReader reader(in, acfg);
        while (auto a = reader.next()) {
            const auto* q = index.question_for(*a);
            if (!q) continue;
            ++r.counts["accepted_answers"];
            auto found = ingest::extract_snippets(*a, *q, cfg);
            if (found.empty()) continue;
            posts[a->post_id] = *a;
            posts[q->post_id] = *q;
            for (auto& s : found) snippets.push_back(std::move(s));
        }
    }
    std::sort(snippets.begin(), snippets.end(), [](const auto& a, const auto& b) {
        return std::tuple(a.post_id, a.snippet_id.size(), a.snippet_id) <
               std::tuple(b.post_id, b.snippet_id.size(), b.snippet_id);
    });
    std::vector<json> post_records;
    for (const auto& [_, p] : posts) post_records.emplace_back(p);
    write_jsonl(out / "posts.jsonl", post_records);
    write_jsonl(out / "snippets.jsonl", to_records(snippets));
    r.counts["posts"] = posts.size();
    r.counts["snippets"] = snippets.size();
    r.counts["questions_indexed"] = index.size();
    r.outputs = {"posts.jsonl", "snippets.jsonl"};
    return r;
}

StepResult scan_corpora(const std::vector<CorpusSpec>& corpora, const ingest::IngestConfig& cfg, const fs::path& out) {
    StepResult r;
    std::vector<json> records;
    for (const auto& c : corpora) {
        auto scanned = scan(c, cfg);
        r.diagnostics.merge(scanned.diagnostics);
        r.counts["files"] += scanned.files.size();
        for (const auto& f : scanned.files) {
            json rec{{"corpus_id", f.corpus_id}, {"path", f.path}, {"version_label", f.version_label}};
            rec["release_date"] = f.release_date ? json(f.release_date->to_string()) : json(nullptr);
            rec["root"] = c.root.generic_string();
            rec["sha256"] = sha256_hex(f.text);
            records.push_back(std::move(rec));
        }
    }
    write_jsonl(out / "corpus.jsonl", records);
    r.counts["corpora"] = corpora.size();
    r.outputs = {"corpus.jsonl"};
    return r;
}

StepResult detect_clones(const fs::path& snippets_file, const std::string& snippet_corpus_id,
                         const std::vector<CorpusSpec>& corpora, const ingest::IngestConfig& icfg,
                         const detect::DetectorConfig& cfg, const fs::path& out) {
    StepResult r;
    auto snippets = read_snippets(snippets_file);
    detect::Corpus snip{snippet_corpus_id, {}};
    snip.units.resize(snippets.size());
    parallel_for(snippets.size(), cfg.jobs, [&](std::size_t i) {
        snip.units[i] = ingest::normalize(snippets[i].text, snippets[i].snippet_id, snippet_corpus_id);
    });
    std::vector<detect::Corpus> projects;
    for (const auto& c : corpora) {
        auto scanned = scan(c, icfg);
        r.diagnostics.merge(scanned.diagnostics);
        detect::Corpus p{c.id, {}};
        p.units.resize(scanned.files.size());
        parallel_for(scanned.files.size(), cfg.jobs, [&](std::size_t i) {
            const auto& f = scanned.files[i];
            p.units[i] = ingest::normalize(f.text, f.path, f.corpus_id);
        });
        r.counts["files"] += p.units.size();
        projects.push_back(std::move(p));
    }
    auto result = detect::run_detection(snip, projects, cfg);
    write_jsonl(out / "clones.token.jsonl", to_records(result.token_report));
    write_jsonl(out / "clones.line.jsonl", to_records(result.line_report));

    std::string csv =
        "detector,snippet_corpus,snippet_unit,snippet_start,snippet_end,origin_corpus,origin_unit,origin_start,"
        "origin_end,similarity\n";
    for (const auto* report : {&result.token_report, &result.line_report})
        for (const auto& p : *report)
            csv += std::string(to_string(p.detector)) + "," + csv_field(p.left.corpus_id) + "," +
                   csv_field(p.left.unit_id) + "," + std::to_string(p.left.start_line) + "," +
                   std::to_string(p.left.end_line) + "," + csv_field(p.right.corpus_id) + "," +
                   csv_field(p.right.unit_id) + "," + std::to_string(p.right.start_line) + "," +
                   std::to_string(p.right.end_line) + "," + fixed6(p.similarity) + "\n";
    write_text(out / "clones.csv", csv);

    auto stats = [](const std::vector<ClonePair>& rep) {
        auto s = detect::report_stats(rep);
        return json{{"pairs", s.pairs}, {"avg_snippet_lines", s.avg_snippet_lines},
                    {"avg_origin_lines", s.avg_origin_lines}};
    };
    write_json(out / "detect_summary.json",
               json{{"token", stats(result.token_report)},
                    {"line", stats(result.line_report)},
                    {"snippets", snippets.size()},
                    {"snippet_fragments", result.snippet_fragments},
                    {"corpus_fragments", result.corpus_fragments},
                    {"config",
                     {{"min_clone_lines", cfg.min_clone_lines}, {"token_similarity", cfg.token_similarity}}}});
    r.counts["snippets"] = snippets.size();
    r.counts["token_pairs"] = result.token_report.size();
    r.counts["line_pairs"] = result.line_report.size();
    r.counts["snippet_fragments"] = result.snippet_fragments;
    r.counts["corpus_fragments"] = result.corpus_fragments;
    r.outputs = {"clones.token.jsonl", "clones.line.jsonl", "clones.csv", "detect_summary.json"};
    return r;
}

StepResult merge_clones(const fs::path& token_file, const fs::path& line_file, const merge::MergeConfig& cfg,
                        const fs::path& out, unsigned jobs) {
    StepResult r;
    auto token = from_records<ClonePair>(read_jsonl(token_file));
    auto line = from_records<ClonePair>(read_jsonl(line_file));
    std::sort(token.begin(), token.end(), canonical_less);
    std::sort(line.begin(), line.end(), canonical_less);
    auto merged = merge::merge_reports(token, line, cfg, jobs);
    auto consolidated = merge::consolidate(merged);
    auto summary = merge::summarize(token, line, merged);
    write_jsonl(out / "merged.jsonl", to_records(merged));
    write_jsonl(out / "consolidated.jsonl", to_records(consolidated));
    json s = summary;
    s["consolidated"] = consolidated.size();
    s["t"] = cfg.t;
    s["strategy"] = merge::to_string(cfg.strategy);
    write_json(out / "merge_summary.json", s);
    r.counts["merged"] = merged.size();
    r.counts["consolidated"] = consolidated.size();
    r.counts["common"] = summary.common;
    r.outputs = {"merged.jsonl", "consolidated.jsonl", "merge_summary.json"};
    return r;
}

StepResult audit_outdated(const fs::path& consolidated_file, const std::optional<fs::path>& snippets_file,
                          const std::vector<CorpusSpec>& corpora, const std::vector<CorpusSpec>& latest,
                          const std::optional<fs::path>& intents_file, const AuditSelection& sel,
                          const ingest::IngestConfig& icfg, double rewrite_threshold, const fs::path& out,
                          unsigned jobs) {
    StepResult r;
    std::size_t filtered = 0;
    auto pairs = select(read_consolidated(consolidated_file), sel, filtered);

    std::set<std::string> used;
    for (const auto& p : pairs)
        for (const auto& o : p.origins) used.insert(o.corpus_id);

    outdated::OutdatedInputs inputs;
    for (const auto& c : corpora) {
        if (!used.contains(c.id)) continue;
        auto scanned = scan(c, icfg);
        auto& rc = inputs.release[c.id];
        rc.release_date = c.release_date;
        for (const auto& f : scanned.files) rc.units.emplace(f.path, ingest::normalize(f.text, f.path, f.corpus_id));
    }
    for (const auto& l : latest) {
        auto scanned = scan(l, icfg);
        r.diagnostics.merge(scanned.diagnostics);
        inputs.latest.emplace(l.id, outdated::LatestCorpus::build(scanned.files));
    }
    if (snippets_file)
        for (const auto& s : read_snippets(*snippets_file)) inputs.post_dates[s.snippet_id] = s.post_date;
    if (intents_file) {
        for (const auto& rec : read_jsonl(*intents_file)) {
            try {
                auto id = rec.at("pair_id").get<std::uint64_t>();
                auto intent = outdated::parse_intent(rec.at("intent").get<std::string>());
                if (!intent) throw ValidationError("unknown intent " + rec.at("intent").get<std::string>());
                outdated::ChangeIntent ci{*intent, std::nullopt};
                if (rec.contains("issue_id") && !rec.at("issue_id").is_null())
                    ci.issue_id = rec.at("issue_id").get<std::string>();
                inputs.intents[id] = ci;
            } catch (const json::exception& e) {
                throw ValidationError(std::string("intents: ") + e.what());
            }
        }
    }
    outdated::OutdatedConfig ocfg{rewrite_threshold, jobs};
    auto report = outdated::outdated_report(pairs, inputs, ocfg);
    write_jsonl(out / "outdated.jsonl", to_records(report.rows));
    auto summary = outdated::summary_json(report);
    summary["filtered_out"] = filtered;
    write_json(out / "outdated_summary.json", summary);
    r.diagnostics.merge(report.diagnostics);
    r.counts["rows"] = report.rows.size();
    r.counts["outdated"] = summary["outdated"].get<std::size_t>();
    r.counts["dead"] = summary["dead"].get<std::size_t>();
    r.counts["skipped"] = summary["skipped"].get<std::size_t>();
    r.counts["filtered_out"] = filtered;
    r.outputs = {"outdated.jsonl", "outdated_summary.json"};
    return r;
}

StepResult audit_licenses(const fs::path& consolidated_file, const fs::path& snippets_file,
                          const std::string& snippet_corpus_id, const std::vector<CorpusSpec>& corpora,
                          const std::optional<fs::path>& matrix_file, const std::optional<fs::path>& catalog_file,
                          const AuditSelection& sel, const ingest::IngestConfig& icfg, const fs::path& out) {
    StepResult r;
    std::size_t filtered = 0;
    auto pairs = select(read_consolidated(consolidated_file), sel, filtered);
    auto matrix = matrix_file ? license::ConflictMatrix::load(*matrix_file) : license::ConflictMatrix{};
    auto catalog = catalog_file ? license::Catalog::load(*catalog_file) : license::Catalog::builtin();

    std::set<std::pair<std::string, std::string>> wanted;
    for (const auto& p : pairs) {
        wanted.insert({p.snippet_fragment.corpus_id, p.snippet_fragment.unit_id});
        for (const auto& o : p.origins) wanted.insert({o.corpus_id, o.unit_id});
    }
    license::FindingMap findings;
    auto identify = [&](const std::string& corpus, const std::string& unit, const std::string& text) {
        if (!wanted.contains({corpus, unit})) return;
        auto f = license::identify_license(text, catalog);
        f.unit_id = unit;
        findings[{corpus, unit}] = std::move(f);
    };
    for (const auto& s : read_snippets(snippets_file)) identify(snippet_corpus_id, s.snippet_id, s.text);
    for (const auto& c : corpora) {
        bool needed = std::any_of(wanted.begin(), wanted.end(), [&](const auto& w) { return w.first == c.id; });
        if (!needed) continue;
        for (const auto& f : scan(c, icfg).files) identify(c.id, f.path, f.text);
    }

    std::map<std::uint64_t, std::string> patterns;
    if (sel.patterns) patterns = *sel.patterns;
    auto report = license::license_report(pairs, findings, matrix, patterns);

    std::vector<json> finding_records;
    for (const auto& [key, f] : findings) {
        json rec{{"corpus", key.first}};
        json fj = f;
        for (auto& [k, v] : fj.items()) rec[k] = v;
        finding_records.push_back(std::move(rec));
    }
    write_jsonl(out / "licenses.jsonl", finding_records);
    write_jsonl(out / "conflicts.jsonl", to_records(report.rows));

    std::map<std::string, std::size_t> verdicts{{"Compatible", 0}, {"Incompatible", 0}, {"Unknown", 0}};
    for (const auto& row : report.rows) ++verdicts[std::string(license::to_string(row.verdict.verdict))];
    json summary{{"rows", report.rows.size()},
                 {"verdicts", verdicts},
                 {"site_default_license", matrix.site_default_license},
                 {"aggregates", license::aggregates_json(report)},
                 {"filtered_out", filtered},
                 {"diagnostics", report.diagnostics}};
    write_json(out / "license_summary.json", summary);
    r.diagnostics.merge(report.diagnostics);
    r.counts["findings"] = findings.size();
    r.counts["rows"] = report.rows.size();
    r.counts["incompatible"] = verdicts["Incompatible"];
    r.counts["filtered_out"] = filtered;
    r.outputs = {"licenses.jsonl", "conflicts.jsonl", "license_summary.json"};
    return r;
}

std::vector<triage::PairContext> triage_contexts(const fs::path& out_dir, const std::vector<CorpusSpec>& corpora,
                                                 const ingest::IngestConfig& icfg) {
    auto pairs = read_consolidated(out_dir / "consolidated.jsonl");
    std::map<std::tuple<std::string, std::string, std::uint32_t, std::uint32_t>, std::size_t> merged_counts;
    if (fs::exists(out_dir / "merged.jsonl"))
        for (const auto& m : from_records<merge::MergedClonePair>(read_jsonl(out_dir / "merged.jsonl"))) {
            const auto& l = m.representative.left;
            ++merged_counts[{l.corpus_id, l.unit_id, l.start_line, l.end_line}];
        }
    std::map<std::string, ingest::Snippet> snippets;
    if (fs::exists(out_dir / "snippets.jsonl"))
        for (auto& s : read_snippets(out_dir / "snippets.jsonl")) snippets[s.snippet_id] = std::move(s);
    std::map<std::uint64_t, ingest::RawPost> posts;
    if (fs::exists(out_dir / "posts.jsonl"))
        for (auto& p : from_records<ingest::RawPost>(read_jsonl(out_dir / "posts.jsonl"))) posts[p.post_id] = p;

    std::set<std::pair<std::string, std::string>> wanted;
    for (const auto& p : pairs)
        for (const auto& o : p.origins) wanted.insert({o.corpus_id, o.unit_id});
    std::map<std::pair<std::string, std::string>, std::string> origin_text;
    for (const auto& c : corpora)
        for (auto& f : scan(c, icfg).files)
            if (wanted.contains({c.id, f.path})) origin_text[{c.id, f.path}] = std::move(f.text);

    std::vector<triage::PairContext> out;
    for (const auto& p : pairs) {
        triage::PairContext ctx;
        ctx.pair_id = p.pair_id;
        ctx.snippet = p.snippet_fragment;
        ctx.origins = p.origins;
        for (auto d : p.contributors) ctx.contributors.emplace_back(to_string(d));
        const auto& s = p.snippet_fragment;
        auto mc = merged_counts.find({s.corpus_id, s.unit_id, s.start_line, s.end_line});
        ctx.merged_count = mc == merged_counts.end() ? 1 : mc->second;

        std::string post_text;
        if (auto sn = snippets.find(s.unit_id); sn != snippets.end()) {
            ctx.snippet_code = fragment_code(sn->second.text, s.start_line, s.end_line);
            ctx.post_url = "https://stackoverflow.com/a/" + std::to_string(sn->second.post_id);
            if (auto a = posts.find(sn->second.post_id); a != posts.end()) ctx.answer_text = strip_html(a->second.body);
            if (auto q = posts.find(sn->second.question_id); q != posts.end()) {
                ctx.question_title = q->second.title;
                ctx.question_text = strip_html(q->second.body);
            }
        }
        std::vector<triage::EvidenceCandidate> cands;
        for (const auto& o : p.origins) {
            auto t = origin_text.find({o.corpus_id, o.unit_id});
            std::string code = t == origin_text.end() ? "" : fragment_code(t->second, o.start_line, o.end_line);
            triage::EvidenceCandidate c;
            c.origin_id = o.corpus_id + ":" + o.unit_id + ":" + std::to_string(o.start_line) + "-" +
                          std::to_string(o.end_line);
            c.project = o.corpus_id;
            c.path = o.unit_id;
            if (t != origin_text.end())
                for (const auto& m : lexer::method_blocks(ingest::normalize(code))) c.identifiers.push_back(m.name);
            ctx.origin_code.push_back(std::move(code));
            cands.push_back(std::move(c));
        }
        ctx.ranking = triage::rank_evidence(ctx.question_title + "\n" + ctx.question_text + "\n" + ctx.answer_text,
                                            cands);
        ctx.ranking.pair_id = p.pair_id;
        out.push_back(std::move(ctx));
    }
    return out;
}

StepResult export_classification(const triage::TriageStore& store, const fs::path& out) {
    StepResult r;
    auto report = store.export_classified();
    json patterns = json::object();
    for (const auto& [id, p] : store.effective_patterns()) patterns[std::to_string(id)] = triage::to_string(p);
    auto conflicts = store.conflicts();
    std::size_t open = std::count_if(conflicts.begin(), conflicts.end(), [](const auto& c) { return !c.resolution; });
    write_json(out / "classification.json",
               json{{"report", report}, {"patterns", patterns}, {"conflicts", conflicts.size()}, {"open_conflicts", open}});
    r.counts["classified"] = report.classified;
    r.counts["unclassified"] = report.unclassified;
    r.counts["conflicts"] = conflicts.size();
    r.outputs = {"classification.json"};
    return r;
}

std::map<std::uint64_t, std::string> read_patterns(const fs::path& file) {
    std::map<std::uint64_t, std::string> out;
    auto j = read_json(file);
    for (const auto& [k, v] : j.at("patterns").items()) out[std::stoull(k)] = v.get<std::string>();
    return out;
}

// ---------------------------------------------------------------------------
// manifest

void to_json(json& j, const PhaseEntry& p) {
    j = json{{"name", p.name},         {"status", p.status},   {"started", p.started},
             {"finished", p.finished}, {"inputs", p.inputs},   {"outputs", p.outputs},
             {"counts", p.counts},     {"diagnostics", p.diagnostics}, {"reused", p.reused}};
    if (!p.error.empty()) j["error"] = p.error;
}

void from_json(const json& j, PhaseEntry& p) {
    p.name = j.at("name").get<std::string>();
    p.status = j.at("status").get<std::string>();
    p.started = j.value("started", "");
    p.finished = j.value("finished", "");
    p.inputs = j.value("inputs", std::map<std::string, std::string>{});
    p.outputs = j.value("outputs", std::map<std::string, std::string>{});
    p.counts = j.value("counts", Counts{});
    p.diagnostics = j.value("diagnostics", std::map<std::string, std::size_t>{});
    p.error = j.value("error", "");
    p.reused = j.value("reused", false);
}

void to_json(json& j, const RunManifest& m) {
    j = json{{"tool", "cloneaudit"}, {"phases", m.phases}};
    j["failure"] = m.failure.empty() ? json(nullptr) : json(m.failure);
}

void from_json(const json& j, RunManifest& m) {
    m.phases = j.at("phases").get<std::vector<PhaseEntry>>();
    m.failure = j.at("failure").is_null() ? "" : j.at("failure").get<std::string>();
}

// ---------------------------------------------------------------------------
// run

namespace {

const char* const kPhases[] = {"ingest", "detect", "merge", "triage", "outdated", "license"};

std::string digest_of(const fs::path& p) { return fs::exists(p) ? sha256_file(p) : std::string("missing"); }

std::string config_digest(const json& j) { return sha256_hex(j.dump()); }

json ingest_config_json(const ingest::IngestConfig& c) {
    return json{{"min_snippet_lines", c.min_snippet_lines}, {"tags", c.tags}, {"extensions", c.extensions}};
}

json corpora_json(const std::vector<CorpusSpec>& cs) {
    json arr = json::array();
    for (const auto& c : cs)
        arr.push_back(json{{"id", c.id},
                           {"version", c.version},
                           {"release_date", c.release_date ? json(c.release_date->to_string()) : json(nullptr)}});
    return arr;
}

class Runner {
public:
    Runner(const PipelineConfig& cfg) : cfg_(cfg), out_(cfg.out) {
        for (const auto* name : kPhases) {
            PhaseEntry e;
            e.name = name;
            manifest_.phases.push_back(std::move(e));
        }
        auto prev_path = out_ / "manifest.json";
        if (fs::exists(prev_path)) {
            try {
                previous_ = read_json(prev_path).get<RunManifest>();
            } catch (const std::exception&) {
                previous_.reset();
            }
        }
    }

    RunManifest run() {
        fs::create_directories(out_);
        try {
            phase_ingest();
            phase_detect();
            phase_merge();
            if (!phase_triage()) return finish();
            phase_outdated();
            phase_license();
        } catch (const ValidationError& e) {
            fail("validation", e.what());
        } catch (const std::exception& e) {
            fail("phase", e.what());
        }
        return finish();
    }

private:
    PhaseEntry& entry(std::size_t k) { return manifest_.phases[k]; }

    RunManifest finish() {
        write_json(out_ / "manifest.json", manifest_);
        return manifest_;
    }

    void fail(const std::string& kind, const std::string& message) {
        manifest_.failure = kind;
        auto& e = entry(current_);
        e.status = "failed";
        e.error = message;
        e.finished = iso_now();
    }

    // Reuses the previous run's entry when inputs match and outputs are intact.
    bool try_reuse(std::size_t k) {
        if (!previous_ || previous_->phases.size() <= k) return false;
        const auto& prev = previous_->phases[k];
        auto& cur = entry(k);
        if (prev.status != "complete" || prev.inputs != cur.inputs || prev.outputs.empty()) return false;
        for (const auto& [file, digest] : prev.outputs)
            if (digest_of(out_ / file) != digest) return false;
        cur.outputs = prev.outputs;
        cur.counts = prev.counts;
        cur.diagnostics = prev.diagnostics;
        cur.status = "complete";
        cur.reused = true;
        cur.finished = iso_now();
        return true;
    }

    void begin(std::size_t k) {
        current_ = k;
        entry(k).started = iso_now();
        entry(k).status = "running";
    }

    void complete(std::size_t k, const StepResult& r) {
        auto& e = entry(k);
        for (const auto& [name, n] : r.counts) e.counts[name] += n;
        for (const auto& [name, n] : r.diagnostics.counts) e.diagnostics[name] += n;
        for (const auto& file : r.outputs) e.outputs[file] = digest_of(out_ / file);
    }

    void done(std::size_t k) {
        entry(k).status = "complete";
        entry(k).finished = iso_now();
        write_json(out_ / "manifest.json", manifest_);
    }

    void phase_ingest() {
        begin(0);
        if (!cfg_.dump) throw ValidationError("no dump configured");
        auto& e = entry(0);
        e.inputs["dump"] = sha256_file(*cfg_.dump);
        e.inputs["config"] = config_digest(ingest_config_json(cfg_.ingest));
        for (const auto& c : cfg_.corpora) e.inputs["corpus:" + c.id] = corpus_digest(scan(c, cfg_.ingest));
        e.inputs["corpora"] = config_digest(corpora_json(cfg_.corpora));
        if (try_reuse(0)) return;
        complete(0, ingest_dump(*cfg_.dump, cfg_.ingest, out_));
        complete(0, scan_corpora(cfg_.corpora, cfg_.ingest, out_));
        done(0);
    }

    void phase_detect() {
        begin(1);
        auto& e = entry(1);
        e.inputs["snippets.jsonl"] = digest_of(out_ / "snippets.jsonl");
        e.inputs["corpus.jsonl"] = digest_of(out_ / "corpus.jsonl");
        const auto& d = cfg_.detector;
        e.inputs["config"] = config_digest(
            json{{"min_clone_lines", d.min_clone_lines},
                 {"token_similarity", d.token_similarity},
                 {"snippet_corpus_id", cfg_.snippet_corpus_id},
                 {"norm",
                  {d.line_norm.ignore_string_case, d.line_norm.ignore_char_case, d.line_norm.ignore_modifiers,
                   d.line_norm.ignore_identifiers, d.line_norm.ignore_numbers}}});
        if (try_reuse(1)) return;
        auto dcfg = cfg_.detector;
        dcfg.jobs = cfg_.jobs;
        complete(1, detect_clones(out_ / "snippets.jsonl", cfg_.snippet_corpus_id, cfg_.corpora, cfg_.ingest, dcfg,
                                  out_));
        done(1);
    }

    void phase_merge() {
        begin(2);
        auto& e = entry(2);
        e.inputs["clones.token.jsonl"] = digest_of(out_ / "clones.token.jsonl");
        e.inputs["clones.line.jsonl"] = digest_of(out_ / "clones.line.jsonl");
        e.inputs["config"] = config_digest(json{{"t", cfg_.merge.t}, {"strategy", merge::to_string(cfg_.merge.strategy)}});
        if (try_reuse(2)) return;
        complete(2, merge_clones(out_ / "clones.token.jsonl", out_ / "clones.line.jsonl", cfg_.merge, out_, cfg_.jobs));
        done(2);
    }

    // False when the pipeline pauses for human classification.
    bool phase_triage() {
        begin(3);
        auto& e = entry(3);
        e.inputs["consolidated.jsonl"] = digest_of(out_ / "consolidated.jsonl");
        if (!cfg_.store) {
            e.status = "paused";
            e.error = "no classification store configured";
            return false;
        }
        if (!fs::exists(*cfg_.store)) {
            auto contexts = triage_contexts(out_, cfg_.corpora, cfg_.ingest);
            triage::TriageStore::create(*cfg_.store, contexts);
            e.counts["pairs"] = contexts.size();
            e.status = "paused";
            e.error = "classification store created; classify pairs and re-run";
            return false;
        }
        e.inputs["store"] = sha256_file(*cfg_.store);
        if (try_reuse(3)) return true;
        auto store = triage::TriageStore::open(*cfg_.store);
        std::set<std::uint64_t> known;
        for (auto id : store->pair_ids()) known.insert(id);
        StepResult r = export_classification(*store, out_);
        for (const auto& p : read_consolidated(out_ / "consolidated.jsonl"))
            if (!known.contains(p.pair_id)) r.diagnostics.count("pairs_missing_from_store");
        complete(3, r);
        done(3);
        return true;
    }

    AuditSelection selection(const std::set<std::string>& keep) {
        return AuditSelection{read_patterns(out_ / "classification.json"), keep};
    }

    void phase_outdated() {
        begin(4);
        auto& e = entry(4);
        e.inputs["consolidated.jsonl"] = digest_of(out_ / "consolidated.jsonl");
        e.inputs["classification.json"] = digest_of(out_ / "classification.json");
        e.inputs["corpus.jsonl"] = digest_of(out_ / "corpus.jsonl");
        e.inputs["snippets.jsonl"] = digest_of(out_ / "snippets.jsonl");
        for (const auto& l : cfg_.latest) e.inputs["latest:" + l.id] = corpus_digest(scan(l, cfg_.ingest));
        e.inputs["latest"] = config_digest(corpora_json(cfg_.latest));
        if (cfg_.intents) e.inputs["intents"] = sha256_file(*cfg_.intents);
        e.inputs["config"] = config_digest(json{{"patterns", cfg_.outdated_patterns},
                                                {"rewrite_threshold", cfg_.rewrite_threshold}});
        if (try_reuse(4)) return;
        complete(4, audit_outdated(out_ / "consolidated.jsonl", out_ / "snippets.jsonl", cfg_.corpora, cfg_.latest,
                                   cfg_.intents, selection(cfg_.outdated_patterns), cfg_.ingest,
                                   cfg_.rewrite_threshold, out_, cfg_.jobs));
        done(4);
    }

    void phase_license() {
        begin(5);
        auto& e = entry(5);
        e.inputs["consolidated.jsonl"] = digest_of(out_ / "consolidated.jsonl");
        e.inputs["classification.json"] = digest_of(out_ / "classification.json");
        e.inputs["corpus.jsonl"] = digest_of(out_ / "corpus.jsonl");
        e.inputs["snippets.jsonl"] = digest_of(out_ / "snippets.jsonl");
        if (cfg_.license_matrix) e.inputs["license_matrix"] = sha256_file(*cfg_.license_matrix);
        if (cfg_.license_catalog) e.inputs["license_catalog"] = sha256_file(*cfg_.license_catalog);
        e.inputs["config"] = config_digest(json{{"patterns", cfg_.license_patterns}});
        if (try_reuse(5)) return;
        complete(5, audit_licenses(out_ / "consolidated.jsonl", out_ / "snippets.jsonl", cfg_.snippet_corpus_id,
                                   cfg_.corpora, cfg_.license_matrix, cfg_.license_catalog,
                                   selection(cfg_.license_patterns), cfg_.ingest, out_));
        done(5);
    }

    const PipelineConfig& cfg_;
    fs::path out_;
    RunManifest manifest_;
    std::optional<RunManifest> previous_;
    std::size_t current_ = 0;
};

}  // namespace

RunManifest run_pipeline(const PipelineConfig& cfg) {
    cfg.validate();
    return Runner(cfg).run();
}

}  // namespace cloneaudit::pipeline
