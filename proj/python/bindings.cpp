#include <memory>
#include <thread>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cloneaudit/detect.hpp"
#include "cloneaudit/license.hpp"
#include "cloneaudit/merge.hpp"
#include "cloneaudit/outdated.hpp"
#include "cloneaudit/pipeline.hpp"
#include "cloneaudit/server.hpp"
#include "cloneaudit/triage.hpp"

namespace py = pybind11;
using namespace cloneaudit;

namespace {

py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

json from_py(const py::handle& obj) {
    return json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

template <typename T>
T parse_as(const py::handle& obj) {
    try {
        return from_py(obj).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(e.what());
    }
}

Date parse_date(const std::string& s) {
    auto d = Date::parse(s);
    if (!d) throw ValidationError("bad date " + s);
    return *d;
}

detect::Corpus corpus_of(const std::string& id, const std::map<std::string, std::string>& units) {
    detect::Corpus c{id, {}};
    for (const auto& [unit, text] : units) c.units.push_back(ingest::normalize(text, unit, id));
    return c;
}

class Server {
public:
    Server(triage::TriageStore& store) : server_(store) {}
    ~Server() { stop(); }

    int start(const std::string& host, int port) {
        int bound = server_.bind(host, port);
        if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
        thread_ = std::thread([this] { server_.serve(); });
        server_.wait_until_ready();
        return bound;
    }

    void stop() {
        server_.stop();
        if (thread_.joinable()) thread_.join();
    }

private:
    triage::TriageServer server_;
    std::thread thread_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Clone detection and audit operations for Q&A snippets and project corpora";

    // Later registrations are tried first, so the base class goes first.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<triage::UnknownPair>(m, "UnknownPair", PyExc_KeyError);
    py::register_exception<triage::NoConflict>(m, "NoConflict", PyExc_RuntimeError);

    m.def("normalize", [](const std::string& text) {
        auto n = ingest::normalize(text);
        return py::dict(py::arg("lines") = n.lines, py::arg("line_map") = n.line_map);
    });

    m.def("tokenize", [](const std::string& text) {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& t : lexer::tokenize_lenient(text)) out.emplace_back(lexer::to_string(t.kind), t.lexeme);
        return out;
    });

    m.def("overlap_similarity", [](const std::string& a, const std::string& b) {
        return detect::overlap_similarity(lexer::make_bag(lexer::tokenize_lenient(a)),
                                          lexer::make_bag(lexer::tokenize_lenient(b)));
    });

    m.def(
        "detect",
        [](const std::map<std::string, std::string>& snippets,
           const std::map<std::string, std::map<std::string, std::string>>& corpora, std::uint32_t min_lines,
           double similarity, unsigned jobs) {
            detect::DetectorConfig cfg;
            cfg.min_clone_lines = min_lines;
            cfg.token_similarity = similarity;
            cfg.jobs = jobs;
            std::vector<detect::Corpus> projects;
            for (const auto& [id, units] : corpora) projects.push_back(corpus_of(id, units));
            auto r = detect::run_detection(corpus_of("stackoverflow", snippets), projects, cfg);
            return to_py(json{{"token", to_records(r.token_report)}, {"line", to_records(r.line_report)}});
        },
        py::arg("snippets"), py::arg("corpora"), py::arg("min_lines") = 10, py::arg("similarity") = 0.8,
        py::arg("jobs") = 1);

    m.def("ok_value", [](const py::dict& a, const py::dict& b) {
        return merge::ok_value(parse_as<ClonePair>(a), parse_as<ClonePair>(b));
    });

    m.def(
        "merge",
        [](const py::list& token, const py::list& line, double t, const std::string& strategy) {
            merge::MergeConfig cfg;
            cfg.t = t;
            auto s = merge::parse_strategy(strategy);
            if (!s) throw ValidationError("unknown strategy " + strategy);
            cfg.strategy = *s;
            auto tr = parse_as<std::vector<ClonePair>>(token);
            auto lr = parse_as<std::vector<ClonePair>>(line);
            auto merged = merge::merge_reports(tr, lr, cfg);
            auto consolidated = merge::consolidate(merged);
            return to_py(json{{"merged", to_records(merged)},
                              {"consolidated", to_records(consolidated)},
                              {"summary", merge::summarize(tr, lr, merged)}});
        },
        py::arg("token"), py::arg("line"), py::arg("t") = 0.5, py::arg("strategy") = "components");

    m.def(
        "identify_license",
        [](const std::string& text, std::optional<std::filesystem::path> catalog) {
            auto f = catalog ? license::identify_license(text, license::Catalog::load(*catalog))
                             : license::identify_license(text);
            return to_py(f);
        },
        py::arg("text"), py::arg("catalog") = std::nullopt);

    m.def(
        "classify_conflict",
        [](const std::string& origin, const std::string& snippet, const std::string& matrix) {
            license::LicenseFinding o, s;
            o.license = origin;
            s.license = snippet;
            return to_py(license::classify_conflict(o, s, license::ConflictMatrix::parse(matrix)));
        },
        py::arg("origin_license"), py::arg("snippet_license"), py::arg("matrix") = "");

    m.def(
        "diff_classify",
        [](const std::vector<std::string>& old_region, const std::vector<std::string>& new_region,
           const std::vector<std::string>& old_sig, const std::vector<std::string>& new_sig, double threshold) {
            auto v = outdated::diff_classify(old_region, new_region, old_sig, new_sig, threshold);
            std::vector<std::string> mods;
            for (auto mod : v.modifications) mods.emplace_back(outdated::to_string(mod));
            return to_py(json{{"outdated", v.outdated}, {"modifications", mods}, {"hunks", v.diff_hunks}});
        },
        py::arg("old_region"), py::arg("new_region"), py::arg("old_signature") = std::vector<std::string>{},
        py::arg("new_signature") = std::vector<std::string>{}, py::arg("rewrite_threshold") = 0.2);

    m.def("clone_age_months", [](const std::string& release, const std::string& post) {
        return outdated::clone_age_months(parse_date(release), parse_date(post));
    });

    m.def("evidence_terms", [](const std::string& text) { return triage::evidence_terms(text); });

    m.def(
        "run_pipeline",
        [](const py::dict& config, const std::filesystem::path& base_dir) {
            auto cfg = pipeline::PipelineConfig::from_json(from_py(config), base_dir);
            pipeline::RunManifest manifest;
            {
                py::gil_scoped_release release;
                manifest = pipeline::run_pipeline(cfg);
            }
            return to_py(manifest);
        },
        py::arg("config"), py::arg("base_dir") = std::filesystem::path("."));

    m.def("summarize", [](const std::filesystem::path& dir) { return pipeline::summarize(dir); });

    py::class_<triage::TriageStore>(m, "TriageStore")
        .def_static(
            "create",
            [](const std::filesystem::path& path, const py::list& pairs) {
                return triage::TriageStore::create(path, parse_as<std::vector<triage::PairContext>>(pairs));
            })
        .def_static("open", [](const std::filesystem::path& path) { return triage::TriageStore::open(path); })
        .def("pair_ids", &triage::TriageStore::pair_ids)
        .def("pair",
             [](const triage::TriageStore& s, std::uint64_t id) {
                 auto b = s.pair(id);
                 return b ? to_py(*b) : py::object(py::none());
             })
        .def("next_unclassified",
             [](const triage::TriageStore& s, const std::string& reviewer) {
                 auto b = s.next_unclassified(reviewer);
                 return b ? to_py(*b) : py::object(py::none());
             })
        .def("classify",
             [](triage::TriageStore& s, const py::dict& record) {
                 return to_py(s.record_classification(parse_as<triage::ClassificationRecord>(record)));
             })
        .def("resolve",
             [](triage::TriageStore& s, std::uint64_t id, const py::dict& record) {
                 return to_py(s.resolve_conflict(id, parse_as<triage::ClassificationRecord>(record)));
             })
        .def("conflicts", [](const triage::TriageStore& s) { return to_py(s.conflicts()); })
        .def("export", [](const triage::TriageStore& s) { return to_py(s.export_classified()); });

    py::class_<Server>(m, "TriageServer")
        .def(py::init<triage::TriageStore&>(), py::keep_alive<1, 2>())
        .def("start", &Server::start, py::arg("host") = "127.0.0.1", py::arg("port") = 0,
             py::call_guard<py::gil_scoped_release>())
        .def("stop", &Server::stop, py::call_guard<py::gil_scoped_release>());
}
