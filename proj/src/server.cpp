#include "cloneaudit/server.hpp"

#include <httplib.h>

#include "cloneaudit/json_io.hpp"

namespace cloneaudit::triage {

struct TriageServer::Impl {
    TriageStore& store;
    httplib::Server http;
    explicit Impl(TriageStore& s) : store(s) {}
};

namespace {

void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& message) {
    reply(res, status, json{{"error", message}});
}

std::uint64_t path_id(const httplib::Request& req) { return std::stoull(req.matches[1].str()); }

std::string reviewer_of(const httplib::Request& req) {
    if (req.has_param("reviewer")) return req.get_param_value("reviewer");
    return req.get_header_value("X-Reviewer-Id");
}

ClassificationRecord parse_record(const httplib::Request& req) {
    json body;
    try {
        body = json::parse(req.body);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("invalid JSON body: ") + e.what());
    }
    if (!body.is_object()) throw ValidationError("body must be a JSON object");
    ClassificationRecord rec;
    try {
        rec = body.get<ClassificationRecord>();
    } catch (const json::exception& e) {
        throw ValidationError(e.what());
    }
    if (rec.reviewer_id.empty()) rec.reviewer_id = req.get_header_value("X-Reviewer-Id");
    return rec;
}

// Runs a handler, mapping store errors onto HTTP statuses.
template <typename Fn>
auto guarded(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
        try {
            fn(req, res);
        } catch (const UnknownPair& e) {
            reply_error(res, 404, e.what());
        } catch (const NoConflict& e) {
            reply_error(res, 409, e.what());
        } catch (const ValidationError& e) {
            reply_error(res, 400, e.what());
        } catch (const std::exception& e) {
            reply_error(res, 500, e.what());
        }
    };
}

}  // namespace

TriageServer::TriageServer(TriageStore& store, Options opts) : impl_(std::make_unique<Impl>(store)) {
    auto& http = impl_->http;
    auto& st = impl_->store;

    http.Get("/api/pairs", guarded([&st](const httplib::Request& req, httplib::Response& res) {
        if (req.get_param_value("status") == "unclassified") {
            auto reviewer = reviewer_of(req);
            if (reviewer.empty()) throw ValidationError("reviewer is required");
            auto next = st.next_unclassified(reviewer);
            if (!next) {
                reply(res, 200, json{{"queue_empty", true}});
                return;
            }
            json body = *next;
            body["queue_empty"] = false;
            reply(res, 200, body);
            return;
        }
        json list = json::array();
        for (auto id : st.pair_ids()) {
            auto p = st.effective_pattern(id);
            list.push_back(json{{"pair_id", id}, {"effective_pattern", p ? json(to_string(*p)) : json(nullptr)}});
        }
        reply(res, 200, list);
    }));

    http.Get(R"(/api/pairs/(\d+))", guarded([&st](const httplib::Request& req, httplib::Response& res) {
        auto id = path_id(req);
        auto b = st.pair(id);
        if (!b) throw UnknownPair(id);
        reply(res, 200, *b);
    }));

    http.Post(R"(/api/pairs/(\d+)/classification)",
              guarded([&st](const httplib::Request& req, httplib::Response& res) {
                  auto rec = parse_record(req);
                  auto id = path_id(req);
                  if (rec.pair_id != 0 && rec.pair_id != id)
                      throw ValidationError("record pair_id does not match the URL");
                  rec.pair_id = id;
                  reply(res, 200, st.record_classification(std::move(rec)));
              }));

    http.Get("/api/conflicts", guarded([&st](const httplib::Request&, httplib::Response& res) {
        reply(res, 200, st.conflicts());
    }));

    http.Post(R"(/api/conflicts/(\d+)/resolution)",
              guarded([&st](const httplib::Request& req, httplib::Response& res) {
                  auto rec = parse_record(req);
                  reply(res, 200, st.resolve_conflict(path_id(req), std::move(rec)));
              }));

    http.Get("/api/export", guarded([&st](const httplib::Request&, httplib::Response& res) {
        reply(res, 200, st.export_classified());
    }));

    if (opts.static_dir) http.set_mount_point("/", opts.static_dir->string());
}

TriageServer::~TriageServer() { stop(); }

int TriageServer::bind(const std::string& host, int port) {
    if (port == 0) return impl_->http.bind_to_any_port(host);
    return impl_->http.bind_to_port(host, port) ? port : -1;
}

bool TriageServer::serve() { return impl_->http.listen_after_bind(); }

void TriageServer::stop() {
    if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

void TriageServer::wait_until_ready() const { impl_->http.wait_until_ready(); }

}  // namespace cloneaudit::triage
