#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>

#include "cloneaudit/pipeline.hpp"
#include "cloneaudit/triage.hpp"
#include "support.hpp"

using namespace cloneaudit;
using namespace cloneaudit::pipeline;
using testsupport::TempDir;
namespace fs = std::filesystem;

namespace {

const fs::path kE2E = testsupport::fixture_dir() / "e2e";

PipelineConfig e2e_config(const fs::path& out, std::optional<fs::path> store = std::nullopt) {
    auto cfg = PipelineConfig::load(kE2E / "config.json");
    cfg.out = out;
    cfg.store = std::move(store);
    return cfg;
}

std::size_t line_count(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) ++n;
    return n;
}

const PhaseEntry& phase(const RunManifest& m, const std::string& name) {
    for (const auto& p : m.phases)
        if (p.name == name) return p;
    throw std::runtime_error("no phase " + name);
}

// Classifies every pair in the store: the first as NC, the rest QS.
void classify_all(const fs::path& store_path) {
    auto store = triage::TriageStore::open(store_path);
    bool first = true;
    for (auto id : store->pair_ids()) {
        triage::ClassificationRecord r;
        r.pair_id = id;
        r.reviewer_id = "A";
        r.pattern = first ? triage::Pattern::NC : triage::Pattern::QS;
        first = false;
        store->record_classification(r);
    }
}

RunManifest full_run(const fs::path& dir) {
    auto cfg = e2e_config(dir / "out", dir / "store.jsonl");
    run_pipeline(cfg);
    classify_all(dir / "store.jsonl");
    return run_pipeline(cfg);
}

const std::vector<std::string> kArtifacts = {
    "posts.jsonl",       "snippets.jsonl",     "corpus.jsonl",          "clones.token.jsonl",
    "clones.line.jsonl", "clones.csv",         "detect_summary.json",   "merged.jsonl",
    "consolidated.jsonl", "merge_summary.json", "classification.json",  "outdated.jsonl",
    "outdated_summary.json", "licenses.jsonl", "conflicts.jsonl",       "license_summary.json"};

int run_cli(const std::string& args) {
    int rc = std::system((std::string(CLONEAUDIT_CLI) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Config, RejectsUnknownKeysAndBadValues) {
    EXPECT_THROW(PipelineConfig::from_json(json{{"bogus", 1}}, "."), ValidationError);
    EXPECT_THROW(PipelineConfig::from_json(json{{"jobs", "many"}}, "."), ValidationError);
    auto cfg = PipelineConfig::load(kE2E / "config.json");
    ASSERT_EQ(cfg.corpora.size(), 2u);
    EXPECT_EQ(cfg.corpora[0].root, kE2E / "release/hadoop");
    EXPECT_EQ(cfg.corpora[0].release_date->to_string(), "2013-09-01");
    EXPECT_EQ(parse_corpus_arg("jfree=/x/y").id, "jfree");
}

TEST(Pipeline, PausesForClassificationThenCompletes) {
    TempDir dir;
    auto cfg = e2e_config(dir / "out");
    auto m = run_pipeline(cfg);
    EXPECT_TRUE(m.ok());
    ASSERT_EQ(m.phases.size(), 6u);
    EXPECT_EQ(phase(m, "ingest").status, "complete");
    EXPECT_EQ(phase(m, "detect").status, "complete");
    EXPECT_EQ(phase(m, "merge").status, "complete");
    EXPECT_EQ(phase(m, "triage").status, "paused");
    EXPECT_EQ(phase(m, "outdated").status, "pending");
    EXPECT_EQ(phase(m, "license").status, "pending");

    cfg.store = dir / "store.jsonl";
    m = run_pipeline(cfg);
    EXPECT_EQ(phase(m, "triage").status, "paused");
    EXPECT_TRUE(phase(m, "merge").reused);
    ASSERT_TRUE(fs::exists(dir / "store.jsonl"));
    auto consolidated = line_count(dir / "out/consolidated.jsonl");
    EXPECT_EQ(phase(m, "triage").counts.at("pairs"), consolidated);
    EXPECT_EQ(triage::TriageStore::open(dir / "store.jsonl")->pair_ids().size(), consolidated);

    classify_all(dir / "store.jsonl");
    m = run_pipeline(cfg);
    ASSERT_TRUE(m.ok()) << m.failure;
    for (const auto& p : m.phases) EXPECT_EQ(p.status, "complete") << p.name;
    EXPECT_TRUE(phase(m, "detect").reused);
    EXPECT_FALSE(phase(m, "triage").reused);
    for (const auto& a : kArtifacts) EXPECT_TRUE(fs::exists(dir / "out" / a)) << a;

    // counts agree with the artifacts on disk
    const auto out = dir / "out";
    EXPECT_EQ(phase(m, "ingest").counts.at("snippets"), line_count(out / "snippets.jsonl"));
    EXPECT_EQ(phase(m, "detect").counts.at("token_pairs"), line_count(out / "clones.token.jsonl"));
    EXPECT_EQ(phase(m, "detect").counts.at("line_pairs"), line_count(out / "clones.line.jsonl"));
    EXPECT_EQ(phase(m, "merge").counts.at("merged"), line_count(out / "merged.jsonl"));
    EXPECT_EQ(phase(m, "merge").counts.at("consolidated"), consolidated);
    EXPECT_EQ(phase(m, "triage").counts.at("classified"), consolidated);
    EXPECT_GT(phase(m, "detect").counts.at("token_pairs"), 0u);
    EXPECT_GT(phase(m, "detect").counts.at("line_pairs"), 0u);

    auto cls = read_json(out / "classification.json");
    EXPECT_EQ(cls["patterns"].size(), consolidated);
    EXPECT_EQ(read_patterns(out / "classification.json").begin()->second, "NC");

    // the manifest on disk is the returned one
    RunManifest disk = read_json(out / "manifest.json").get<RunManifest>();
    ASSERT_EQ(disk.phases.size(), 6u);
    for (std::size_t i = 0; i < 6; ++i) {
        EXPECT_EQ(disk.phases[i].name, m.phases[i].name);
        EXPECT_EQ(disk.phases[i].outputs, m.phases[i].outputs);
    }

    // a further run reuses every phase
    m = run_pipeline(cfg);
    for (const auto& p : m.phases) EXPECT_TRUE(p.reused) << p.name;
}

TEST(Pipeline, RunsAreDeterministic) {
    TempDir a, b;
    auto ma = full_run(a.path());
    auto mb = full_run(b.path());
    ASSERT_TRUE(ma.ok());
    ASSERT_TRUE(mb.ok());
    for (const auto& name : kArtifacts)
        EXPECT_EQ(testsupport::read_file(a / "out" / name), testsupport::read_file(b / "out" / name)) << name;
    for (std::size_t i = 0; i < ma.phases.size(); ++i) {
        EXPECT_EQ(ma.phases[i].outputs, mb.phases[i].outputs);
        EXPECT_EQ(ma.phases[i].counts, mb.phases[i].counts);
    }
}

TEST(Pipeline, DeletedArtifactRerunsOnlyItsPhaseOnward) {
    TempDir dir;
    full_run(dir.path());
    const auto out = dir / "out";
    auto before = testsupport::read_file(out / "outdated.jsonl");
    auto merged_before = testsupport::read_file(out / "merged.jsonl");
    fs::remove(out / "outdated.jsonl");

    auto m = run_pipeline(e2e_config(out, dir / "store.jsonl"));
    ASSERT_TRUE(m.ok());
    EXPECT_TRUE(phase(m, "ingest").reused);
    EXPECT_TRUE(phase(m, "detect").reused);
    EXPECT_TRUE(phase(m, "merge").reused);
    EXPECT_TRUE(phase(m, "triage").reused);
    EXPECT_FALSE(phase(m, "outdated").reused);
    EXPECT_TRUE(phase(m, "license").reused);
    EXPECT_EQ(testsupport::read_file(out / "outdated.jsonl"), before);

    // an upstream change forces downstream phases to run again
    fs::remove(out / "clones.line.jsonl");
    m = run_pipeline(e2e_config(out, dir / "store.jsonl"));
    ASSERT_TRUE(m.ok());
    EXPECT_TRUE(phase(m, "ingest").reused);
    EXPECT_FALSE(phase(m, "detect").reused);
    EXPECT_TRUE(phase(m, "merge").reused);  // identical inputs regenerated
    EXPECT_EQ(testsupport::read_file(out / "merged.jsonl"), merged_before);
}

TEST(Pipeline, MissingDumpFailsFirstPhase) {
    TempDir dir;
    auto cfg = e2e_config(dir / "out");
    cfg.dump = dir / "nope.xml";
    RunManifest m;
    try {
        m = run_pipeline(cfg);
    } catch (const ValidationError&) {
        FAIL() << "missing dump should fail the ingest phase";
    }
    EXPECT_EQ(m.failure, "phase");
    EXPECT_EQ(phase(m, "ingest").status, "failed");
    EXPECT_FALSE(phase(m, "ingest").error.empty());
    for (const auto& p : m.phases) EXPECT_NE(p.status, "complete") << p.name;
    EXPECT_TRUE(fs::exists(dir / "out/manifest.json"));
}

TEST(Pipeline, InvalidConfigFailsValidation) {
    TempDir dir;
    auto cfg = e2e_config(dir / "out");
    cfg.merge.t = 1.5;
    EXPECT_THROW(run_pipeline(cfg), ValidationError);
    cfg = e2e_config(dir / "out");
    cfg.corpora.clear();
    EXPECT_THROW(run_pipeline(cfg), ValidationError);
}

TEST(Summarize, ReportsWhateverExists) {
    TempDir empty;
    auto text = summarize(empty.path());
    EXPECT_NE(text.find("no clones.token.jsonl found"), std::string::npos) << text;

    TempDir partial;
    run_pipeline(e2e_config(partial / "out"));
    text = summarize(partial / "out");
    EXPECT_NE(text.find("token:"), std::string::npos) << text;
    EXPECT_NE(text.find("no classification.json found"), std::string::npos);
    EXPECT_NE(text.find("no outdated_summary.json found"), std::string::npos);

    TempDir full;
    full_run(full.path());
    text = summarize(full / "out");
    EXPECT_EQ(text.find("no "), std::string::npos) << text;
    EXPECT_NE(text.find("QS"), std::string::npos);
}

TEST(Cli, ExitCodes) {
    TempDir dir;
    const std::string cfg = "--config " + (kE2E / "config.json").string() + " --out " + (dir / "out").string();
    EXPECT_EQ(run_cli("--help"), 0);
    EXPECT_EQ(run_cli(""), 1);
    EXPECT_EQ(run_cli("frobnicate"), 1);
    EXPECT_EQ(run_cli(cfg + " run"), 0);
    EXPECT_TRUE(fs::exists(dir / "out/consolidated.jsonl"));
    EXPECT_EQ(run_cli(cfg + " run --dump " + (dir / "missing.xml").string()), 2);
    EXPECT_EQ(run_cli("--config " + (dir / "nope.json").string() + " summarize"), 3);
    testsupport::write_file(dir / "bad.json", "{\"merge_t\": 2}");
    EXPECT_EQ(run_cli("--config " + (dir / "bad.json").string() + " --out " + (dir / "o2").string() + " run"), 3);
    EXPECT_EQ(run_cli("--out " + (dir / "out").string() + " summarize"), 0);
}
