#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "cloneaudit/pipeline.hpp"
#include "cloneaudit/server.hpp"

namespace fs = std::filesystem;
using namespace cloneaudit;
using pipeline::CorpusSpec;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kPhaseFailure = 2;
constexpr int kValidation = 3;

std::atomic<triage::TriageServer*> g_server{nullptr};

extern "C" void on_signal(int) {
    if (auto* s = g_server.load()) s->stop();
}

// "id=dir", or a bare dir whose name becomes the id.
CorpusSpec corpus_arg(const std::string& arg) {
    if (arg.find('=') != std::string::npos) return pipeline::parse_corpus_arg(arg);
    fs::path p(arg);
    auto name = p.filename().empty() ? p.parent_path().filename() : p.filename();
    return CorpusSpec{name.string(), p, "", std::nullopt};
}

std::vector<CorpusSpec> corpus_args(const std::vector<std::string>& args) {
    std::vector<CorpusSpec> out;
    for (const auto& a : args) out.push_back(corpus_arg(a));
    return out;
}

// Snippet arguments name either the snippets.jsonl file or the directory holding it.
fs::path snippets_file(const fs::path& p) { return fs::is_directory(p) ? p / "snippets.jsonl" : p; }

void print_step(const std::string& name, const pipeline::StepResult& r, const fs::path& out) {
    std::cout << name << ":";
    for (const auto& [k, n] : r.counts) std::cout << " " << k << "=" << n;
    std::cout << "\n";
    for (const auto& [k, n] : r.diagnostics.counts) std::cout << "  diagnostic " << k << "=" << n << "\n";
    for (const auto& f : r.outputs) std::cout << "  wrote " << (out / f).string() << "\n";
}

void print_manifest(const pipeline::RunManifest& m) {
    for (const auto& p : m.phases) {
        std::cout << p.name << ": " << p.status << (p.reused ? " (reused)" : "");
        for (const auto& [k, n] : p.counts) std::cout << " " << k << "=" << n;
        std::cout << "\n";
        if (!p.error.empty()) std::cout << "  " << p.error << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cloneaudit: audit code reused from Q&A posts against open-source projects"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    unsigned jobs = 0;
    app.add_option("--config", config_path, "JSON pipeline configuration")->envname("CLONEAUDIT_CONFIG");
    app.add_option("--out", out_dir, "Artifact directory");
    app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Extract accepted-answer snippets from a Posts.xml dump");
    std::string dump;
    std::vector<std::string> tags;
    std::optional<std::size_t> min_snippet_lines;
    ingest->add_option("--dump", dump, "Posts.xml file");
    ingest->add_option("--tag", tags, "Question tag allowlist (repeatable)");
    ingest->add_option("--min-lines", min_snippet_lines, "Minimum snippet lines");

    // scan
    auto* scan = app.add_subcommand("scan", "List the source files of a project corpus");
    std::string scan_root, scan_corpus, scan_version, scan_date;
    scan->add_option("--root", scan_root, "Corpus root directory")->required();
    scan->add_option("--corpus", scan_corpus, "Corpus id")->required();
    scan->add_option("--version", scan_version, "Version label");
    scan->add_option("--release-date", scan_date, "Release date YYYY-MM-DD");

    // detect
    auto* detect = app.add_subcommand("detect", "Run the token and line clone detectors");
    std::string detect_snippets;
    std::vector<std::string> detect_corpora;
    std::optional<std::uint32_t> min_clone_lines;
    std::optional<double> similarity;
    detect->add_option("--snippets", detect_snippets, "snippets.jsonl or its directory");
    detect->add_option("--corpus", detect_corpora, "Project corpus, id=dir or dir (repeatable)");
    detect->add_option("--min-lines", min_clone_lines, "Minimum clone lines");
    detect->add_option("--similarity", similarity, "Token similarity threshold");

    // merge
    auto* merge = app.add_subcommand("merge", "Merge and consolidate the two detector reports");
    std::string token_file, line_file, strategy;
    std::optional<double> merge_t;
    merge->add_option("--token", token_file, "Token detector report")->required();
    merge->add_option("--line", line_file, "Line detector report")->required();
    merge->add_option("--t", merge_t, "ok-value threshold");
    merge->add_option("--strategy", strategy, "components|greedy");

    // license
    auto* license = app.add_subcommand("license", "Identify licenses and report conflicts");
    std::string lic_consolidated, lic_snippets, lic_matrix, lic_catalog, lic_classification;
    std::vector<std::string> lic_corpora;
    license->add_option("--consolidated", lic_consolidated, "consolidated.jsonl")->required();
    license->add_option("--snippets", lic_snippets, "snippets.jsonl or its directory")->required();
    license->add_option("--corpus", lic_corpora, "Project corpus, id=dir or dir (repeatable)");
    license->add_option("--matrix", lic_matrix, "Conflict matrix overrides (TOML)");
    license->add_option("--catalog", lic_catalog, "License catalog (JSON)");
    license->add_option("--classification", lic_classification, "classification.json to filter by pattern");

    // outdated
    auto* outdated = app.add_subcommand("outdated", "Compare origins with the latest project versions");
    std::string out_consolidated, out_snippets, out_intents, out_classification;
    std::vector<std::string> out_corpora, out_latest;
    outdated->add_option("--consolidated", out_consolidated, "consolidated.jsonl")->required();
    outdated->add_option("--latest", out_latest, "Latest corpus, id=dir (repeatable)");
    outdated->add_option("--corpus", out_corpora, "Release corpus, id=dir (repeatable)");
    outdated->add_option("--snippets", out_snippets, "snippets.jsonl or its directory");
    outdated->add_option("--intents", out_intents, "Change intent labels (JSONL)");
    outdated->add_option("--classification", out_classification, "classification.json to filter by pattern");

    // serve
    auto* serve = app.add_subcommand("serve", "Serve the triage store over HTTP");
    std::string serve_store, serve_host = "127.0.0.1", serve_static;
    int serve_port = 8080;
    std::vector<std::string> designated;
    serve->add_option("--store", serve_store, "Triage store file");
    serve->add_option("--port", serve_port, "Port (0 picks a free one)");
    serve->add_option("--host", serve_host, "Bind address");
    serve->add_option("--static", serve_static, "Directory served at /");
    serve->add_option("--designated", designated, "The two reviewers compared for conflicts")->expected(2);

    // export
    auto* exporter = app.add_subcommand("export", "Write classification.json from a triage store");
    std::string export_store;
    exporter->add_option("--store", export_store, "Triage store file");

    // run, summarize
    auto* run = app.add_subcommand("run", "Run the full pipeline");
    std::string run_dump, run_store;
    run->add_option("--dump", run_dump, "Posts.xml file");
    run->add_option("--store", run_store, "Triage store file");
    auto* summarize = app.add_subcommand("summarize", "Print a report of the artifacts in --out");
    std::string summarize_dir;
    summarize->add_option("dir", summarize_dir, "Artifact directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    try {
        pipeline::PipelineConfig cfg;
        if (!config_path.empty()) {
            if (!fs::is_regular_file(config_path)) throw ValidationError("no config file " + config_path);
            cfg = pipeline::PipelineConfig::load(config_path);
        }
        if (!out_dir.empty()) cfg.out = out_dir;
        if (jobs) cfg.jobs = jobs;
        if (!tags.empty()) cfg.ingest.tags = tags;
        if (min_snippet_lines) cfg.ingest.min_snippet_lines = *min_snippet_lines;
        if (min_clone_lines) cfg.detector.min_clone_lines = *min_clone_lines;
        if (similarity) cfg.detector.token_similarity = *similarity;
        if (merge_t) cfg.merge.t = *merge_t;
        if (!strategy.empty()) {
            auto s = merge::parse_strategy(strategy);
            if (!s) throw ValidationError("unknown merge strategy " + strategy);
            cfg.merge.strategy = *s;
        }
        cfg.detector.jobs = cfg.jobs;
        cfg.validate();
        const auto& out = cfg.out;
        auto opt_path = [](const std::string& s, const std::optional<fs::path>& fallback) {
            return s.empty() ? fallback : std::optional<fs::path>(s);
        };
        auto corpora_or = [&](const std::vector<std::string>& args) {
            return args.empty() ? cfg.corpora : corpus_args(args);
        };
        auto selection = [](const std::string& classification, const std::set<std::string>& keep) {
            pipeline::AuditSelection sel;
            if (!classification.empty()) sel = {pipeline::read_patterns(classification), keep};
            return sel;
        };

        if (*ingest) {
            auto d = opt_path(dump, cfg.dump);
            if (!d) throw ValidationError("--dump is required");
            fs::create_directories(out);
            print_step("ingest", pipeline::ingest_dump(*d, cfg.ingest, out), out);
        } else if (*scan) {
            CorpusSpec c{scan_corpus, scan_root, scan_version, std::nullopt};
            if (!scan_date.empty()) {
                c.release_date = Date::parse(scan_date);
                if (!c.release_date) throw ValidationError("bad --release-date " + scan_date);
            }
            fs::create_directories(out);
            print_step("scan", pipeline::scan_corpora({c}, cfg.ingest, out), out);
        } else if (*detect) {
            auto snippets = detect_snippets.empty() ? out / "snippets.jsonl" : snippets_file(detect_snippets);
            auto corpora = corpora_or(detect_corpora);
            if (corpora.empty()) throw ValidationError("at least one --corpus is required");
            fs::create_directories(out);
            print_step("detect",
                       pipeline::detect_clones(snippets, cfg.snippet_corpus_id, corpora, cfg.ingest, cfg.detector,
                                               out),
                       out);
        } else if (*merge) {
            fs::create_directories(out);
            print_step("merge", pipeline::merge_clones(token_file, line_file, cfg.merge, out, cfg.jobs), out);
        } else if (*license) {
            fs::create_directories(out);
            print_step("license",
                       pipeline::audit_licenses(lic_consolidated, snippets_file(lic_snippets), cfg.snippet_corpus_id,
                                                corpora_or(lic_corpora), opt_path(lic_matrix, cfg.license_matrix),
                                                opt_path(lic_catalog, cfg.license_catalog),
                                                selection(lic_classification, cfg.license_patterns), cfg.ingest, out),
                       out);
        } else if (*outdated) {
            auto latest = out_latest.empty() ? cfg.latest : corpus_args(out_latest);
            std::optional<fs::path> snippets;
            if (!out_snippets.empty()) snippets = snippets_file(out_snippets);
            fs::create_directories(out);
            print_step("outdated",
                       pipeline::audit_outdated(out_consolidated, snippets, corpora_or(out_corpora), latest,
                                                opt_path(out_intents, cfg.intents),
                                                selection(out_classification, cfg.outdated_patterns), cfg.ingest,
                                                cfg.rewrite_threshold, out, cfg.jobs),
                       out);
        } else if (*serve) {
            auto store_path = opt_path(serve_store, cfg.store);
            if (!store_path) throw ValidationError("--store is required");
            triage::TriageStore::Options opts;
            if (designated.size() == 2) opts.designated = std::pair{designated[0], designated[1]};
            auto store = triage::TriageStore::open(*store_path, opts);
            triage::TriageServer::Options sopts;
            if (!serve_static.empty()) sopts.static_dir = serve_static;
            triage::TriageServer server(*store, sopts);
            int port = server.bind(serve_host, serve_port);
            if (port < 0) throw Error("cannot bind " + serve_host + ":" + std::to_string(serve_port));
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cout << "serving " << store_path->string() << " on http://" << serve_host << ":" << port << "/"
                      << std::endl;
            server.serve();
            g_server = nullptr;
        } else if (*exporter) {
            auto store_path = opt_path(export_store, cfg.store);
            if (!store_path) throw ValidationError("--store is required");
            auto store = triage::TriageStore::open(*store_path);
            fs::create_directories(out);
            print_step("export", pipeline::export_classification(*store, out), out);
        } else if (*run) {
            if (!run_dump.empty()) cfg.dump = run_dump;
            if (!run_store.empty()) cfg.store = run_store;
            auto manifest = pipeline::run_pipeline(cfg);
            print_manifest(manifest);
            if (manifest.failure == "validation") return kValidation;
            if (!manifest.ok()) return kPhaseFailure;
        } else if (*summarize) {
            std::cout << pipeline::summarize(summarize_dir.empty() ? out : fs::path(summarize_dir));
        }
        return kOk;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kPhaseFailure;
    }
}
