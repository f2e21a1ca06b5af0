#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cloneaudit/detect.hpp"
#include "cloneaudit/ingest.hpp"
#include "cloneaudit/json_io.hpp"
#include "cloneaudit/merge.hpp"

namespace cloneaudit::pipeline {

namespace fs = std::filesystem;

struct CorpusSpec {
    std::string id;
    fs::path root;
    std::string version;
    std::optional<Date> release_date;
};

/// Parses "id=dir" (as given on the command line).
CorpusSpec parse_corpus_arg(const std::string& arg);

struct PipelineConfig {
    std::optional<fs::path> dump;
    std::string snippet_corpus_id = "stackoverflow";
    std::vector<CorpusSpec> corpora;
    std::vector<CorpusSpec> latest;
    ingest::IngestConfig ingest;
    detect::DetectorConfig detector;
    merge::MergeConfig merge;
    std::optional<fs::path> license_matrix;
    std::optional<fs::path> license_catalog;
    std::optional<fs::path> store;
    std::optional<fs::path> intents;
    std::set<std::string> outdated_patterns{"QS"};
    std::set<std::string> license_patterns{"QS", "EX", "UD"};
    double rewrite_threshold = 0.2;
    fs::path out = "out";
    unsigned jobs = 1;

    /// Relative paths are resolved against `base_dir`. Throws ValidationError.
    static PipelineConfig from_json(const json& j, const fs::path& base_dir);
    static PipelineConfig load(const fs::path& path);
    void validate() const;
};

// ---------------------------------------------------------------------------
// phase building blocks (also used by the individual subcommands)

using Counts = std::map<std::string, std::size_t>;

struct StepResult {
    Counts counts;
    Diagnostics diagnostics;
    std::vector<std::string> outputs;  ///< artifact file names written under the out dir
};

/// posts.jsonl + snippets.jsonl from a Posts.xml dump.
StepResult ingest_dump(const fs::path& dump, const ingest::IngestConfig& cfg, const fs::path& out);
/// corpus.jsonl listing the files of each corpus.
StepResult scan_corpora(const std::vector<CorpusSpec>& corpora, const ingest::IngestConfig& cfg, const fs::path& out);
/// clones.token.jsonl, clones.line.jsonl, clones.csv, detect_summary.json.
StepResult detect_clones(const fs::path& snippets_file, const std::string& snippet_corpus_id,
                         const std::vector<CorpusSpec>& corpora, const ingest::IngestConfig& icfg,
                         const detect::DetectorConfig& cfg, const fs::path& out);
/// merged.jsonl, consolidated.jsonl, merge_summary.json.
StepResult merge_clones(const fs::path& token_file, const fs::path& line_file, const merge::MergeConfig& cfg,
                        const fs::path& out, unsigned jobs = 1);

/// Consolidated pairs to audit; nullopt patterns means no classification filter.
struct AuditSelection {
    std::optional<std::map<std::uint64_t, std::string>> patterns;
    std::set<std::string> keep;
};

StepResult audit_outdated(const fs::path& consolidated_file, const std::optional<fs::path>& snippets_file,
                          const std::vector<CorpusSpec>& corpora, const std::vector<CorpusSpec>& latest,
                          const std::optional<fs::path>& intents_file, const AuditSelection& sel,
                          const ingest::IngestConfig& icfg, double rewrite_threshold, const fs::path& out,
                          unsigned jobs = 1);

StepResult audit_licenses(const fs::path& consolidated_file, const fs::path& snippets_file,
                          const std::string& snippet_corpus_id, const std::vector<CorpusSpec>& corpora,
                          const std::optional<fs::path>& matrix_file, const std::optional<fs::path>& catalog_file,
                          const AuditSelection& sel, const ingest::IngestConfig& icfg, const fs::path& out);

/// Builds triage contexts for consolidated pairs (code, post text, evidence ranking).
std::vector<triage::PairContext> triage_contexts(const fs::path& out_dir, const std::vector<CorpusSpec>& corpora,
                                                 const ingest::IngestConfig& icfg);

/// classification.json from a store: export report plus effective pattern per pair.
StepResult export_classification(const triage::TriageStore& store, const fs::path& out);

/// Effective patterns from classification.json.
std::map<std::uint64_t, std::string> read_patterns(const fs::path& classification_file);

// ---------------------------------------------------------------------------
// full run

struct PhaseEntry {
    std::string name;
    std::string status = "pending";  ///< complete|paused|pending|failed|running
    bool reused = false;             ///< complete without re-running
    std::string started;
    std::string finished;
    std::map<std::string, std::string> inputs;   ///< name -> sha256
    std::map<std::string, std::string> outputs;  ///< artifact -> sha256
    Counts counts;
    std::map<std::string, std::size_t> diagnostics;
    std::string error;
};

struct RunManifest {
    std::vector<PhaseEntry> phases;
    std::string failure;  ///< "", "phase" or "validation"
    bool ok() const { return failure.empty(); }
};

void to_json(json& j, const PhaseEntry& p);
void from_json(const json& j, PhaseEntry& p);
void to_json(json& j, const RunManifest& m);
void from_json(const json& j, RunManifest& m);

/// Runs the six phases, reusing phases whose recorded inputs and outputs still match.
/// Writes manifest.json to cfg.out after every phase.
RunManifest run_pipeline(const PipelineConfig& cfg);

/// Human-readable report of whatever artifacts exist in `dir`.
std::string summarize(const fs::path& dir);

}  // namespace cloneaudit::pipeline
