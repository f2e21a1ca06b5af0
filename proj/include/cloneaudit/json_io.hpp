#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cloneaudit/common.hpp"
#include "cloneaudit/ingest.hpp"
#include "cloneaudit/license.hpp"
#include "cloneaudit/merge.hpp"
#include "cloneaudit/outdated.hpp"
#include "cloneaudit/triage.hpp"

namespace cloneaudit {

using json = nlohmann::ordered_json;

void to_json(json& j, const CodeFragment& f);
void from_json(const json& j, CodeFragment& f);
void to_json(json& j, const ClonePair& p);
void from_json(const json& j, ClonePair& p);
void to_json(json& j, const Diagnostics& d);

/// Reads one JSON value per non-empty line. Throws ValidationError naming the line.
std::vector<json> read_jsonl(const std::filesystem::path& path);
/// Writes records one per line through a temporary file renamed into place.
void write_jsonl(const std::filesystem::path& path, const std::vector<json>& records);
void write_json(const std::filesystem::path& path, const json& value);
json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

template <typename T>
std::vector<json> to_records(const std::vector<T>& items) {
    std::vector<json> out;
    out.reserve(items.size());
    for (const auto& x : items) out.emplace_back(x);
    return out;
}

template <typename T>
std::vector<T> from_records(const std::vector<json>& records) {
    std::vector<T> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.get<T>());
    return out;
}

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace cloneaudit

namespace cloneaudit::ingest {
void to_json(json& j, const Snippet& s);
void from_json(const json& j, Snippet& s);
void to_json(json& j, const RawPost& p);
void from_json(const json& j, RawPost& p);
}  // namespace cloneaudit::ingest

namespace cloneaudit::merge {
void to_json(json& j, const MergedClonePair& m);
void from_json(const json& j, MergedClonePair& m);
void to_json(json& j, const ConsolidatedPair& c);
void from_json(const json& j, ConsolidatedPair& c);
void to_json(json& j, const MergeSummary& s);
}  // namespace cloneaudit::merge

namespace cloneaudit::license {
void to_json(json& j, const LicenseFinding& f);
void from_json(const json& j, LicenseFinding& f);
void to_json(json& j, const ConflictVerdict& v);
void to_json(json& j, const ReportRow& r);
/// Aggregates as a list of {verdict, origin_license, snippet_license, pattern, count}.
json aggregates_json(const LicenseReport& r);
}  // namespace cloneaudit::license

namespace cloneaudit::outdated {
void to_json(json& j, const Hunk& h);
void to_json(json& j, const ReportRow& r);
void to_json(json& j, const ChangeIntent& c);
json summary_json(const OutdatedReport& r);
}  // namespace cloneaudit::outdated

namespace cloneaudit::triage {
void to_json(json& j, const ClassificationRecord& r);
void from_json(const json& j, ClassificationRecord& r);
void to_json(json& j, const ConflictItem& c);
void to_json(json& j, const EvidenceRanking& e);
void from_json(const json& j, EvidenceRanking& e);
void to_json(json& j, const PairContext& p);
void from_json(const json& j, PairContext& p);
void to_json(json& j, const PairBundle& b);
void to_json(json& j, const ClassificationReport& r);
}  // namespace cloneaudit::triage
