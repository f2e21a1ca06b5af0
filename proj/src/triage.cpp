#include "cloneaudit/triage.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "cloneaudit/json_io.hpp"
#include "cloneaudit/lexer.hpp"

namespace cloneaudit::triage {

std::string_view to_string(Pattern p) {
    switch (p) {
        case Pattern::QS: return "QS";
        case Pattern::SQ: return "SQ";
        case Pattern::EX: return "EX";
        case Pattern::UD: return "UD";
        case Pattern::BP: return "BP";
        case Pattern::IN: return "IN";
        case Pattern::NC: return "NC";
    }
    return "";
}

std::optional<Pattern> parse_pattern(std::string_view s) {
    for (auto p : kAllPatterns)
        if (to_string(p) == s) return p;
    return std::nullopt;
}

std::string_view to_string(BoilerplateKind k) {
    switch (k) {
        case BoilerplateKind::APIConstraints: return "APIConstraints";
        case BoilerplateKind::Templating: return "Templating";
        case BoilerplateKind::DesignPatterns: return "DesignPatterns";
    }
    return "";
}

std::optional<BoilerplateKind> parse_boilerplate_kind(std::string_view s) {
    for (auto k : {BoilerplateKind::APIConstraints, BoilerplateKind::Templating, BoilerplateKind::DesignPatterns})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

std::string_view to_string(ConflictKind k) {
    return k == ConflictKind::TruthConflict ? "TruthConflict" : "PatternConflict";
}

void ClassificationRecord::validate() const {
    if (reviewer_id.empty()) throw ValidationError("reviewer_id is required");
    if (pattern == Pattern::BP && !boilerplate_kind)
        throw ValidationError("pattern BP requires boilerplate_kind");
    if (pattern != Pattern::BP && boilerplate_kind)
        throw ValidationError("boilerplate_kind is only allowed with pattern BP");
}

// ---------------------------------------------------------------------------
// evidence ranking

namespace {

void split_camel(std::string_view word, std::vector<std::string>& out) {
    auto emit = [&](std::size_t b, std::size_t e) {
        if (e <= b) return;
        auto term = to_lower(word.substr(b, e - b));
        if (term.size() < 2) return;
        if (std::all_of(term.begin(), term.end(), [](unsigned char c) { return std::isdigit(c); })) return;
        if (lexer::is_keyword(term) || lexer::is_modifier(term)) return;
        out.push_back(std::move(term));
    };
    std::size_t start = 0;
    for (std::size_t i = 1; i < word.size(); ++i) {
        unsigned char prev = word[i - 1], cur = word[i];
        bool next_lower = i + 1 < word.size() && std::islower(static_cast<unsigned char>(word[i + 1]));
        bool cut = (std::islower(prev) && std::isupper(cur)) ||
                   (std::isupper(prev) && std::isupper(cur) && next_lower) ||
                   (std::isalpha(prev) && std::isdigit(cur)) || (std::isdigit(prev) && std::isalpha(cur));
        if (cut) {
            emit(start, i);
            start = i;
        }
    }
    emit(start, word.size());
}

std::string strip_extension(const std::string& path) {
    auto slash = path.find_last_of("/\\");
    auto dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path;
    return path.substr(0, dot);
}

using TermCounts = std::unordered_map<std::string, double>;

TermCounts count_terms(const std::vector<std::string>& terms) {
    TermCounts tc;
    for (const auto& t : terms) tc[t] += 1.0;
    return tc;
}

}  // namespace

std::vector<std::string> evidence_terms(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!std::isalnum(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && std::isalnum(static_cast<unsigned char>(text[j]))) ++j;
        split_camel(text.substr(i, j - i), out);
        i = j;
    }
    return out;
}

EvidenceRanking rank_evidence(std::string_view post_text, const std::vector<EvidenceCandidate>& candidates) {
    EvidenceRanking r;
    std::vector<TermCounts> docs;
    std::unordered_map<std::string, std::size_t> df;
    for (const auto& c : candidates) {
        std::string descriptor = c.project + " " + strip_extension(c.path);
        for (const auto& id : c.identifiers) descriptor += " " + id;
        docs.push_back(count_terms(evidence_terms(descriptor)));
        for (const auto& [t, _] : docs.back()) ++df[t];
    }
    const double n = static_cast<double>(candidates.size());
    auto idf = [&](const std::string& t) { return std::log((1.0 + n) / (1.0 + df[t])) + 1.0; };

    TermCounts post;
    for (const auto& t : evidence_terms(post_text))
        if (df.contains(t)) post[t] += 1.0;
    double post_norm = 0;
    for (auto& [t, w] : post) {
        w *= idf(t);
        post_norm += w * w;
    }
    post_norm = std::sqrt(post_norm);

    for (std::size_t k = 0; k < candidates.size(); ++k) {
        double dot = 0, norm = 0;
        for (const auto& [t, tf] : docs[k]) {
            double w = tf * idf(t);
            norm += w * w;
            auto it = post.find(t);
            if (it != post.end()) dot += w * it->second;
        }
        norm = std::sqrt(norm);
        double score = (norm > 0 && post_norm > 0) ? dot / (norm * post_norm) : 0.0;
        r.candidates.emplace_back(candidates[k].origin_id, std::clamp(score, 0.0, 1.0));
    }
    std::sort(r.candidates.begin(), r.candidates.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return r;
}

// ---------------------------------------------------------------------------
// store

struct TriageStore::State {
    std::map<std::uint64_t, std::map<std::string, ClassificationRecord>> records;
    std::map<std::uint64_t, ClassificationRecord> resolutions;
};

namespace {

std::string now_iso8601() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_all(int fd, std::string_view data) {
    while (!data.empty()) {
        auto n = ::write(fd, data.data(), data.size());
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error(std::string("store write failed: ") + std::strerror(errno));
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
}

// Records that take part in conflict and consensus decisions for one pair.
std::vector<const ClassificationRecord*> relevant(const std::map<std::string, ClassificationRecord>& recs,
                                                  const TriageStore::Options& opts) {
    std::vector<const ClassificationRecord*> out;
    if (opts.designated) {
        for (const auto* who : {&opts.designated->first, &opts.designated->second}) {
            auto it = recs.find(*who);
            if (it != recs.end()) out.push_back(&it->second);
        }
        if (!out.empty()) return out;
    }
    for (const auto& [_, r] : recs) out.push_back(&r);
    return out;
}

std::optional<ConflictItem> conflict_of(std::uint64_t id, const std::map<std::string, ClassificationRecord>& recs,
                                        const std::optional<ClassificationRecord>& resolution,
                                        const TriageStore::Options& opts) {
    auto rs = relevant(recs, opts);
    if (rs.size() < 2) return std::nullopt;
    bool any_nc = false, any_true = false, differ = false;
    for (const auto* r : rs) {
        (r->pattern == Pattern::NC ? any_nc : any_true) = true;
        if (r->pattern != rs.front()->pattern) differ = true;
    }
    if (!differ) return std::nullopt;
    ConflictItem c;
    c.pair_id = id;
    c.kind = (any_nc && any_true) ? ConflictKind::TruthConflict : ConflictKind::PatternConflict;
    for (const auto* r : rs) c.records.push_back(*r);
    std::sort(c.records.begin(), c.records.end(),
              [](const auto& a, const auto& b) { return a.reviewer_id < b.reviewer_id; });
    c.resolution = resolution;
    return c;
}

const std::map<std::string, ClassificationRecord>& records_of(
    const std::map<std::uint64_t, std::map<std::string, ClassificationRecord>>& all, std::uint64_t id) {
    static const std::map<std::string, ClassificationRecord> empty;
    auto it = all.find(id);
    return it == all.end() ? empty : it->second;
}

}  // namespace

std::unique_ptr<TriageStore> TriageStore::create(const std::filesystem::path& path, std::vector<PairContext> pairs,
                                                 Options opts) {
    if (std::filesystem::exists(path)) throw Error("store already exists: " + path.string());
    std::string body = json{{"op", "store"}, {"format", "cloneaudit-triage"}, {"version", 1}}.dump() + "\n";
    std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.pair_id < b.pair_id; });
    for (const auto& p : pairs) body += json{{"op", "pair"}, {"pair", p}}.dump() + "\n";
    auto tmp = path;
    tmp += ".tmp";
    {
        int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
        if (fd < 0) throw Error("cannot create store " + path.string() + ": " + std::strerror(errno));
        try {
            write_all(fd, body);
            if (opts.sync) ::fsync(fd);
        } catch (...) {
            ::close(fd);
            throw;
        }
        ::close(fd);
    }
    std::filesystem::rename(tmp, path);
    return open(path, opts);
}

std::unique_ptr<TriageStore> TriageStore::open(const std::filesystem::path& path, Options opts) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open store " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    std::string data = ss.str();
    in.close();

    std::unique_ptr<TriageStore> store(new TriageStore());
    store->path_ = path;
    store->opts_ = opts;
    auto pairs = std::make_shared<std::map<std::uint64_t, PairContext>>();
    auto state = std::make_shared<State>();

    std::size_t pos = 0, line_no = 0, good_end = 0;
    bool header = false;
    while (pos < data.size()) {
        auto nl = data.find('\n', pos);
        bool last = nl == std::string::npos;
        std::string_view line(data.data() + pos, (last ? data.size() : nl) - pos);
        ++line_no;
        json entry;
        try {
            entry = json::parse(line);
        } catch (const json::exception&) {
            if (last) break;  // torn final write
            throw Error("corrupt store " + path.string() + " at line " + std::to_string(line_no));
        }
        try {
            auto op = entry.at("op").get<std::string>();
            if (op == "store") {
                header = true;
            } else if (op == "pair") {
                auto p = entry.at("pair").get<PairContext>();
                (*pairs)[p.pair_id] = std::move(p);
            } else if (op == "classify") {
                auto r = entry.at("record").get<ClassificationRecord>();
                state->records[r.pair_id][r.reviewer_id] = r;
            } else if (op == "resolve") {
                auto r = entry.at("record").get<ClassificationRecord>();
                state->resolutions[r.pair_id] = r;
            } else {
                throw Error("unknown op " + op);
            }
        } catch (const std::exception& e) {
            throw Error("corrupt store " + path.string() + " at line " + std::to_string(line_no) + ": " + e.what());
        }
        good_end = last ? data.size() : nl + 1;
        pos = good_end;
    }
    if (!header) throw Error("not a triage store: " + path.string());

    store->fd_ = ::open(path.c_str(), O_WRONLY | O_CLOEXEC);
    if (store->fd_ < 0) throw Error("cannot open store for writing: " + path.string());
    if (good_end < data.size() || (good_end > 0 && data[good_end - 1] != '\n')) {
        if (::ftruncate(store->fd_, static_cast<off_t>(good_end)) != 0) throw Error("cannot repair store");
        if (good_end > 0 && data[good_end - 1] != '\n') {
            ::lseek(store->fd_, 0, SEEK_END);
            write_all(store->fd_, "\n");
        }
    }
    ::lseek(store->fd_, 0, SEEK_END);
    store->pairs_ = std::move(pairs);
    store->state_ = std::move(state);
    return store;
}

TriageStore::~TriageStore() {
    if (fd_ >= 0) ::close(fd_);
}

std::shared_ptr<const TriageStore::State> TriageStore::snapshot() const {
    std::lock_guard lock(snapshot_mu_);
    return state_;
}

void TriageStore::publish(std::shared_ptr<const State> s) {
    std::lock_guard lock(snapshot_mu_);
    state_ = std::move(s);
}

void TriageStore::append(const std::string& line) {
    write_all(fd_, line + "\n");
    if (opts_.sync && ::fsync(fd_) != 0) throw Error(std::string("fsync failed: ") + std::strerror(errno));
}

std::vector<std::uint64_t> TriageStore::pair_ids() const {
    std::vector<std::uint64_t> ids;
    for (const auto& [id, _] : *pairs_) ids.push_back(id);
    return ids;
}

std::optional<PairBundle> TriageStore::pair(std::uint64_t id) const {
    auto it = pairs_->find(id);
    if (it == pairs_->end()) return std::nullopt;
    auto s = snapshot();
    PairBundle b;
    b.context = it->second;
    const auto& recs = records_of(s->records, id);
    for (const auto& [_, r] : recs) b.records.push_back(r);
    std::optional<ClassificationRecord> res;
    if (auto r = s->resolutions.find(id); r != s->resolutions.end()) res = r->second;
    b.conflict = conflict_of(id, recs, res, opts_);
    b.effective_pattern = effective_pattern(id);
    return b;
}

std::optional<PairBundle> TriageStore::next_unclassified(const std::string& reviewer) const {
    auto s = snapshot();
    for (const auto& [id, _] : *pairs_) {
        const auto& recs = records_of(s->records, id);
        if (!recs.contains(reviewer)) return pair(id);
    }
    return std::nullopt;
}

ClassificationRecord TriageStore::record_classification(ClassificationRecord rec) {
    rec.validate();
    if (!pairs_->contains(rec.pair_id)) throw UnknownPair(rec.pair_id);
    std::lock_guard lock(write_mu_);
    if (rec.timestamp.empty()) rec.timestamp = now_iso8601();
    auto next = std::make_shared<State>(*snapshot());
    next->records[rec.pair_id][rec.reviewer_id] = rec;
    append(json{{"op", "classify"}, {"record", rec}}.dump());
    publish(std::move(next));
    return rec;
}

std::vector<ConflictItem> TriageStore::conflicts() const {
    auto s = snapshot();
    std::vector<ConflictItem> out;
    for (const auto& [id, recs] : s->records) {
        std::optional<ClassificationRecord> res;
        if (auto r = s->resolutions.find(id); r != s->resolutions.end()) res = r->second;
        if (auto c = conflict_of(id, recs, res, opts_)) out.push_back(std::move(*c));
    }
    return out;
}

ConflictItem TriageStore::resolve_conflict(std::uint64_t pair_id, ClassificationRecord final_record) {
    if (!pairs_->contains(pair_id)) throw UnknownPair(pair_id);
    if (final_record.pair_id != 0 && final_record.pair_id != pair_id)
        throw ValidationError("resolution record names a different pair");
    final_record.pair_id = pair_id;
    if (final_record.reviewer_id.empty()) final_record.reviewer_id = "consensus";
    final_record.validate();
    std::lock_guard lock(write_mu_);
    auto current = snapshot();
    auto c = conflict_of(pair_id, records_of(current->records, pair_id), std::nullopt, opts_);
    if (!c) throw NoConflict(pair_id);
    if (final_record.timestamp.empty()) final_record.timestamp = now_iso8601();
    auto next = std::make_shared<State>(*current);
    next->resolutions[pair_id] = final_record;
    append(json{{"op", "resolve"}, {"record", final_record}}.dump());
    publish(std::move(next));
    c->resolution = final_record;
    return *c;
}

std::optional<Pattern> TriageStore::effective_pattern(std::uint64_t id) const {
    auto s = snapshot();
    if (auto r = s->resolutions.find(id); r != s->resolutions.end()) return r->second.pattern;
    auto rs = relevant(records_of(s->records, id), opts_);
    if (rs.empty()) return std::nullopt;
    for (const auto* r : rs)
        if (r->pattern != rs.front()->pattern) return std::nullopt;
    return rs.front()->pattern;
}

std::map<std::uint64_t, Pattern> TriageStore::effective_patterns() const {
    std::map<std::uint64_t, Pattern> out;
    for (const auto& [id, _] : *pairs_)
        if (auto p = effective_pattern(id)) out[id] = *p;
    return out;
}

ClassificationReport TriageStore::export_classified() const {
    ClassificationReport rep;
    for (auto p : kAllPatterns) rep.before_consolidation[p] = rep.after_consolidation[p] = 0;
    for (const auto& [id, ctx] : *pairs_) {
        auto p = effective_pattern(id);
        if (!p) {
            ++rep.unclassified;
            continue;
        }
        ++rep.classified;
        ++rep.after_consolidation[*p];
        rep.before_consolidation[*p] += ctx.merged_count;
        if (*p == Pattern::QS || *p == Pattern::UD) {
            std::set<std::string> projects;
            for (const auto& o : ctx.origins) projects.insert(o.corpus_id);
            for (const auto& proj : projects) ++rep.by_project[proj][*p];
        }
    }
    return rep;
}

std::vector<std::string> TriageStore::audit_trail() const {
    std::lock_guard lock(write_mu_);
    std::ifstream in(path_);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(line);
    return out;
}

std::size_t TriageStore::record_count() const {
    auto s = snapshot();
    std::size_t n = 0;
    for (const auto& [_, recs] : s->records) n += recs.size();
    return n;
}

}  // namespace cloneaudit::triage
