#include <chrono>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "cloneaudit/detect.hpp"
#include "cloneaudit/license.hpp"
#include "cloneaudit/merge.hpp"
#include "cloneaudit/outdated.hpp"
#include "cloneaudit/pipeline.hpp"
#include "cloneaudit/triage.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace cloneaudit;
using namespace testsupport;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Collects the first failure of a check.
class Checker {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok && failure_.empty()) failure_ = what;
    }
    template <typename A, typename B>
    void equal(const A& got, const B& want, const std::string& what) {
        if (!(got == want) && failure_.empty()) {
            std::ostringstream os;
            os << what << ": got " << got << ", want " << want;
            failure_ = os.str();
        }
    }
    bool failed() const { return !failure_.empty(); }
    const std::string& failure() const { return failure_; }

private:
    std::string failure_;
};

// ---------------------------------------------------------------------------

void ok_match_oracle(Checker& c) {
    const std::vector<double> ts{0.1, 0.3, 0.5, 0.7, 0.9};
    Rng rng(787);
    auto t0 = Clock::now();
    for (int set = 0; set < 500 && !c.failed(); ++set) {
        int units = rng.uniform(1, 20);
        int total = rng.uniform(0, 200);
        int n_tok = rng.uniform(0, total);
        std::vector<ClonePair> tok, line;
        for (int i = 0; i < n_tok; ++i) tok.push_back(random_clone_pair(rng, DetectorKind::token, units, 60));
        for (int i = n_tok; i < total; ++i) line.push_back(random_clone_pair(rng, DetectorKind::line, units, 60));
        std::vector<std::set<std::pair<std::size_t, std::size_t>>> edges;
        for (double t : ts) {
            auto merged = merge::merge_reports(tok, line, {t, merge::MergeStrategy::components});
            c.expect(groups_of(merged) == ref_components(tok, line, t),
                     "set " + std::to_string(set) + " differs from brute force at t=" + std::to_string(t));
            edges.push_back(edges_of(merged));
        }
        for (std::size_t k = 1; k < edges.size(); ++k)
            c.expect(std::includes(edges[k - 1].begin(), edges[k - 1].end(), edges[k].begin(), edges[k].end()),
                     "matches at a higher threshold are not a subset, set " + std::to_string(set));
    }
    double secs = seconds_since(t0);
    c.expect(secs < 60.0, "took " + std::to_string(secs) + " s");
}

void contained_ok_values(Checker& c) {
    CodeFragment a{"A", "so", 10, 19}, b{"A", "so", 15, 24};
    c.expect(std::abs(merge::contained(a, b) - 0.5) <= 1e-12, "contained(10-19, 15-24) != 0.5");
    ClonePair cp1{a, {"B", "p", 100, 109}, DetectorKind::token, 1.0};
    ClonePair cp2{b, {"B", "p", 105, 114}, DetectorKind::line, 1.0};
    c.expect(std::abs(merge::ok_value(cp1, cp2) - 0.5) <= 1e-12, "ok_value of the worked example != 0.5");
    c.expect(merge::is_ok_match(cp1, cp2, 0.5), "is_ok_match at t=0.5 must include 0.5");
    c.expect(!merge::is_ok_match(cp1, cp2, 0.5 + 1e-9), "is_ok_match above 0.5 must reject 0.5");
}

void detector_losslessness(Checker& c) {
    Rng rng(789);
    auto t0 = Clock::now();
    for (int trial = 0; trial < 200 && !c.failed(); ++trial) {
        int alphabet = rng.uniform(3, 25);
        int total = rng.uniform(0, 200);
        int nq = rng.uniform(0, total);
        std::vector<lexer::BlockFragment> queries, corpus;
        for (int i = 0; i < nq; ++i) queries.push_back(random_fragment(rng, "q", i, alphabet));
        for (int i = nq; i < total; ++i) {
            if (!queries.empty() && rng.chance(0.5))
                corpus.push_back(mutate(rng, rng.pick(queries), "c", i, alphabet));
            else
                corpus.push_back(random_fragment(rng, "c", i, alphabet));
        }
        detect::DetectorConfig cfg;
        cfg.token_similarity = 0.8;
        cfg.min_clone_lines = static_cast<std::uint32_t>(rng.pick(std::vector<int>{1, 10}));
        auto want = brute_force_token_clones(queries, corpus, cfg.min_clone_lines, cfg.token_similarity);
        auto got = detect::detect_token_clones(queries, detect::CloneIndex::build(corpus), cfg);
        std::size_t missed = 0, spurious = 0;
        std::set<std::pair<CodeFragment, CodeFragment>> gs, ws;
        for (const auto& p : got) gs.insert({p.left, p.right});
        for (const auto& p : want) ws.insert({p.left, p.right});
        for (const auto& k : ws) missed += !gs.contains(k);
        for (const auto& k : gs) spurious += !ws.contains(k);
        c.expect(missed == 0 && spurious == 0 && got.size() == want.size(),
                 "corpus " + std::to_string(trial) + ": " + std::to_string(missed) + " missed, " +
                     std::to_string(spurious) + " spurious");
    }
    double secs = seconds_since(t0);
    c.expect(secs < 120.0, "took " + std::to_string(secs) + " s");
}

// Statement lines with no enclosing method.
std::string statement_run(const std::string& tag, int n) {
    std::string s;
    for (int i = 0; i < n; ++i) s += tag + ".append(items[" + std::to_string(i) + "]);\n";
    return s;
}

std::string filler_method(const std::string& name, int seed) {
    std::string s = "void " + name + "() {\n";
    for (int i = 0; i < 3; ++i) s += "    call" + std::to_string(seed * 7 + i) + "(\"" + name + "\");\n";
    return s + "}\n";
}

void planted_clone_fixture(Checker& c) {
    struct Plant {
        std::string snippet;
        std::string kind;  // type1, type2, run
        int lines;
    };
    std::vector<ingest::NormalizedSource> snippets, files;
    std::vector<Plant> plants;
    // method of n lines has n - 4 body lines
    for (int n : {9, 10, 17}) {
        auto id = "t1_" + std::to_string(n);
        auto name = "same" + std::to_string(n);
        snippets.push_back(ingest::normalize(method_text(name, n - 4), id, "so"));
        files.push_back(ingest::normalize("class T" + std::to_string(n) + " {\n" + method_text(name, n - 4) + "}\n",
                                          "T" + std::to_string(n) + ".java", "proj"));
        plants.push_back({id, "type1", n});

        id = "t2_" + std::to_string(n);
        snippets.push_back(ingest::normalize(method_text("renamed" + std::to_string(n), n - 4, "\"World\""), id, "so"));
        files.push_back(ingest::normalize(
            "class U" + std::to_string(n) + " {\n" + method_text("orig" + std::to_string(n), n - 4) + "}\n",
            "U" + std::to_string(n) + ".java", "proj"));
        plants.push_back({id, "type2", n});

        id = "run_" + std::to_string(n);
        auto tag = "buf" + std::to_string(n);
        snippets.push_back(ingest::normalize(statement_run(tag, n), id, "so"));
        files.push_back(ingest::normalize("class R" + std::to_string(n) + " {\n  void a() {\n    int k = 0;\n" +
                                              statement_run(tag, n) + "  }\n  void b() {\n    k++;\n  }\n}\n",
                                          "R" + std::to_string(n) + ".java", "proj"));
        plants.push_back({id, "run", n});
    }
    for (int k = 0; k < 2; ++k) {
        snippets.push_back(ingest::normalize(filler_method("snip" + std::to_string(k), k), "noise" + std::to_string(k), "so"));
        files.push_back(ingest::normalize("class N" + std::to_string(k) + " {\n" + filler_method("file", k + 10) + "}\n",
                                          "N" + std::to_string(k) + ".java", "proj"));
    }
    c.expect(snippets.size() >= 10 && files.size() >= 10, "fixture too small");

    auto r = detect::run_detection({"so", snippets}, {{"proj", files}}, {});
    std::map<std::string, std::size_t> token_hits, line_hits;
    for (const auto& p : r.token_report) ++token_hits[p.left.unit_id];
    for (const auto& p : r.line_report) ++line_hits[p.left.unit_id];
    for (const auto& p : plants) {
        bool tok = token_hits.count(p.snippet) > 0, line = line_hits.count(p.snippet) > 0;
        if (p.lines < 10) {
            c.expect(!tok && !line, p.snippet + " is below the minimum size but was reported");
        } else if (p.kind == "type1") {
            c.expect(tok && line, p.snippet + " not found by both detectors");
        } else if (p.kind == "type2") {
            c.expect(tok, p.snippet + " not found by the token detector");
        } else {
            c.expect(line, p.snippet + " not found by the line detector");
        }
    }
    for (int k = 0; k < 2; ++k) c.expect(!token_hits.count("noise" + std::to_string(k)), "filler snippet reported");
    c.expect(token_hits["t1_10"] >= 2, "expected nested class and method matches for t1_10");

    auto merged = merge::merge_reports(r.token_report, r.line_report, {});
    auto consolidated = merge::consolidate(merged);
    std::map<CodeFragment, std::size_t> per_span;
    std::map<std::string, std::size_t> per_snippet;
    for (const auto& cp : consolidated) {
        ++per_span[cp.snippet_fragment];
        ++per_snippet[cp.snippet_fragment.unit_id];
    }
    for (const auto& [span, n] : per_span) c.equal(n, 1u, "consolidated pairs for " + span.unit_id);
    for (const auto& p : plants)
        if (p.lines >= 10) c.equal(per_snippet[p.snippet], 1u, "consolidated pairs for plant " + p.snippet);
}

void license_matrix(Checker& c) {
    for (const auto& row : license_table()) {
        auto origin = license::identify_license(license_text_for(row.origin));
        auto snippet = license::identify_license(license_text_for(row.snippet));
        c.equal(origin.license, row.origin, "identified origin license");
        c.equal(snippet.license, row.snippet, "identified snippet license");
        auto v = license::classify_conflict(origin, snippet);
        c.expect(v.verdict == row.expected, row.origin + " / " + row.snippet + " gave " +
                                                std::string(license::to_string(v.verdict)));
        if (row.snippet == "None") c.equal(v.snippet_license_effective, std::string("CC-BY-SA-3.0"), "site default");
    }
}

void outdated_classification(Checker& c) {
    using outdated::Modification;
    auto added = outdated::diff_classify(trimmed_lines(kCompareOld), trimmed_lines(kCompareNew), {}, {});
    c.expect(added.outdated && added.modifications == std::set<Modification>{Modification::StatementAddition},
             "single added line is not StatementAddition");
    auto rewritten = outdated::diff_classify(trimmed_lines(kHumanOld), trimmed_lines(kHumanNew), {}, {});
    c.expect(rewritten.outdated && rewritten.modifications == std::set<Modification>{Modification::MethodRewriting},
             "delegating body is not MethodRewriting");
    auto same = outdated::diff_classify(trimmed_lines(kCompareOld), trimmed_lines(kCompareOld), {}, {});
    c.expect(!same.outdated && same.modifications.empty(), "identical regions reported outdated");

    // one origin whose file is gone from the latest version, one unchanged
    auto wrap = [](const std::string& cls) { return "package p;\n\npublic class " + cls + " {\n" + kCompareOld + "\n}\n"; };
    outdated::OutdatedInputs in;
    outdated::ReleaseCorpus rel;
    rel.release_date = Date(2013, 9, 1);
    rel.units["Gone.java"] = ingest::normalize(wrap("Gone"), "Gone.java", "proj");
    rel.units["Kept.java"] = ingest::normalize(wrap("Kept"), "Kept.java", "proj");
    in.release["proj"] = rel;
    in.latest["proj"] = outdated::LatestCorpus::build({{"proj", "Kept.java", wrap("Kept"), "latest", std::nullopt}});
    std::vector<merge::ConsolidatedPair> pairs(2);
    pairs[0].pair_id = 1;
    pairs[0].snippet_fragment = {"s1", "so", 1, 11};
    pairs[0].origins = {{"Gone.java", "proj", 4, 14}};
    pairs[1].pair_id = 2;
    pairs[1].snippet_fragment = {"s2", "so", 1, 11};
    pairs[1].origins = {{"Kept.java", "proj", 4, 14}};
    auto report = outdated::outdated_report(pairs, in);
    c.equal(report.rows.size(), 2u, "report rows");
    if (report.rows.size() == 2) {
        const auto& gone = report.rows[0];
        c.expect(gone.verdict.outdated && gone.dead &&
                     gone.verdict.modifications == std::set<Modification>{Modification::FileDeletion},
                 "deleted file is not a dead FileDeletion");
        c.expect(!report.rows[1].verdict.outdated && !report.rows[1].dead, "unchanged origin reported outdated");
    }

    Rng rng(792);
    for (int k = 0; k < 100 && !c.failed(); ++k) {
        int alphabet = rng.uniform(1, 8);
        auto a = random_lines(rng, alphabet, 40);
        auto b = random_lines(rng, alphabet, 40);
        auto problem = check_diff(a, b, outdated::diff_lines(a, b));
        c.expect(problem.empty(), "diff pair " + std::to_string(k) + ": " + problem);
    }
}

void evidence_ranking(Checker& c) {
    auto cands = hadoop_and_distractors();
    c.expect(cands.size() >= 6, "need at least five distractors");
    auto once = triage::rank_evidence(kHadoopPost, cands);
    c.expect(!once.candidates.empty() &&
                 once.candidates[0].first == "hadoop:src/org/apache/hadoop/io/WritableComparator.java:15-26",
             "hadoop WritableComparator is not ranked first");
    c.expect(once.candidates.size() < 2 || once.candidates[0].second > once.candidates[1].second,
             "first place is tied");
    for (int times = 2; times <= 5; ++times) {
        std::string post;
        for (int i = 0; i < times; ++i) post += std::string(kHadoopPost) + "\n";
        auto many = triage::rank_evidence(post, cands);
        std::vector<std::string> a, b;
        for (const auto& [id, s] : once.candidates) a.push_back(id);
        for (const auto& [id, s] : many.candidates) b.push_back(id);
        c.expect(a == b, "order changes when the post is repeated " + std::to_string(times) + " times");
    }
}

pipeline::RunManifest fixture_run(const fs::path& dir) {
    auto cfg = pipeline::PipelineConfig::load(fixture_dir() / "e2e" / "config.json");
    cfg.out = dir / "out";
    cfg.store = dir / "store.jsonl";
    pipeline::run_pipeline(cfg);
    {
        auto store = triage::TriageStore::open(*cfg.store);
        for (auto id : store->pair_ids()) {
            triage::ClassificationRecord r;
            r.pair_id = id;
            r.reviewer_id = "A";
            r.pattern = id % 2 ? triage::Pattern::QS : triage::Pattern::UD;
            store->record_classification(r);
        }
    }
    return pipeline::run_pipeline(cfg);
}

void pipeline_determinism(Checker& c) {
    TempDir a, b;
    auto ma = fixture_run(a.path());
    auto mb = fixture_run(b.path());
    c.expect(ma.ok() && mb.ok(), "pipeline run failed");
    for (const auto* m : {&ma, &mb})
        for (const auto& p : m->phases) c.equal(p.status, std::string("complete"), "phase " + p.name);
    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(a / "out")) {
        auto name = entry.path().filename().string();
        if (name == "manifest.json") continue;
        c.expect(fs::exists(b / "out" / name), name + " missing from the second run");
        c.expect(read_file(entry.path()) == read_file(b / "out" / name), name + " differs between runs");
        ++compared;
    }
    c.expect(compared >= 16, "only " + std::to_string(compared) + " artifacts written");
    for (std::size_t i = 0; i < ma.phases.size() && i < mb.phases.size(); ++i) {
        c.expect(ma.phases[i].outputs == mb.phases[i].outputs, "manifest outputs differ for " + ma.phases[i].name);
        c.expect(ma.phases[i].counts == mb.phases[i].counts, "manifest counts differ for " + ma.phases[i].name);
    }
}

void triage_store(Checker& c) {
    using triage::Pattern;
    TempDir dir;
    constexpr std::uint64_t kPairs = 100;
    std::vector<triage::PairContext> contexts;
    for (std::uint64_t k = 1; k <= kPairs; ++k) {
        triage::PairContext ctx;
        ctx.pair_id = k;
        ctx.snippet = {std::to_string(k) + "-0", "stackoverflow", 1, 10};
        ctx.origins = {{"F" + std::to_string(k) + ".java", k % 2 ? "hadoop" : "jfree", 1, 10}};
        ctx.merged_count = 1 + k % 3;
        contexts.push_back(ctx);
    }
    auto store = triage::TriageStore::create(dir / "store.jsonl", contexts, {std::nullopt, false});
    auto pattern_for = [](int who, std::uint64_t id) {
        return who == 0 ? triage::kAllPatterns[id % 7] : triage::kAllPatterns[(id / 2) % 7];
    };
    auto writer = [&](int who) {
        Rng rng(static_cast<std::uint64_t>(who) + 1);
        std::vector<std::uint64_t> order;
        for (std::uint64_t k = 1; k <= kPairs; ++k) order.push_back(k);
        std::shuffle(order.begin(), order.end(), rng.engine());
        for (auto id : order) {
            triage::ClassificationRecord r;
            r.pair_id = id;
            r.reviewer_id = who == 0 ? "A" : "B";
            r.pattern = pattern_for(who, id);
            if (r.pattern == Pattern::BP) r.boilerplate_kind = triage::BoilerplateKind::Templating;
            store->record_classification(r);
        }
    };
    std::thread ta(writer, 0), tb(writer, 1);
    ta.join();
    tb.join();

    c.equal(store->record_count(), 2 * kPairs, "records");
    for (std::uint64_t id = 1; id <= kPairs; ++id) {
        auto bundle = store->pair(id);
        std::set<std::string> who;
        if (bundle)
            for (const auto& r : bundle->records) who.insert(r.reviewer_id);
        c.expect(bundle && bundle->records.size() == 2 && who.size() == 2,
                 "pair " + std::to_string(id) + " lacks one record per reviewer");
    }
    std::set<std::uint64_t> truth, pat, got_truth, got_pat;
    std::map<Pattern, std::size_t> after, before;
    for (std::uint64_t id = 1; id <= kPairs; ++id) {
        auto a = pattern_for(0, id), b = pattern_for(1, id);
        if (a == b) {
            ++after[a];
            before[a] += contexts[id - 1].merged_count;
        } else if (a == Pattern::NC || b == Pattern::NC) {
            truth.insert(id);
        } else {
            pat.insert(id);
        }
    }
    for (const auto& cf : store->conflicts())
        (cf.kind == triage::ConflictKind::TruthConflict ? got_truth : got_pat).insert(cf.pair_id);
    c.expect(got_truth == truth, "TruthConflict set differs");
    c.expect(got_pat == pat, "PatternConflict set differs");

    auto report = store->export_classified();
    std::map<Pattern, std::size_t> effective;
    for (const auto& [id, p] : store->effective_patterns()) ++effective[p];
    for (auto p : triage::kAllPatterns) {
        auto count = [p](const std::map<Pattern, std::size_t>& m) { return m.count(p) ? m.at(p) : 0u; };
        c.equal(count(report.after_consolidation), count(effective), "export after " + std::string(to_string(p)));
        c.equal(count(report.after_consolidation), count(after), "oracle after " + std::string(to_string(p)));
        c.equal(count(report.before_consolidation), count(before), "oracle before " + std::string(to_string(p)));
    }
    c.equal(report.classified + report.unclassified, kPairs, "classified plus unclassified");

    auto reopened = triage::TriageStore::open(dir / "store.jsonl");
    c.equal(reopened->record_count(), 2 * kPairs, "records after reopen");
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Checker&)>>> checks{
        {"ok-match oracle equivalence", ok_match_oracle},
        {"contained/ok unit values", contained_ok_values},
        {"detector losslessness", detector_losslessness},
        {"planted-clone fixture", planted_clone_fixture},
        {"license matrix", license_matrix},
        {"outdated classification", outdated_classification},
        {"evidence ranking", evidence_ranking},
        {"pipeline determinism", pipeline_determinism},
        {"triage store", triage_store},
    };
    int failures = 0;
    for (const auto& [name, fn] : checks) {
        Checker c;
        auto t0 = Clock::now();
        try {
            fn(c);
        } catch (const std::exception& e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        char secs[32];
        std::snprintf(secs, sizeof secs, "%.2fs", seconds_since(t0));
        if (c.failed()) {
            ++failures;
            std::cout << "FAIL " << name << " (" << secs << "): " << c.failure() << std::endl;
        } else {
            std::cout << "PASS " << name << " (" << secs << ")" << std::endl;
        }
    }
    return failures == 0 ? 0 : 1;
}
