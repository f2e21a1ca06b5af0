#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cloneaudit/common.hpp"

namespace cloneaudit::ingest {

enum class PostType { question, answer };

struct IngestConfig {
    std::size_t min_snippet_lines = 10;
    /// Tag allowlist applied to questions. Empty means no tag filter.
    std::vector<std::string> tags{"java"};
    /// Restrict the stream to one post type; nullopt keeps both.
    std::optional<PostType> post_type;
    /// File extensions picked up by scan_corpus.
    std::vector<std::string> extensions{".java"};
};

struct RawPost {
    std::uint64_t post_id = 0;
    PostType post_type = PostType::question;
    std::optional<std::uint64_t> parent_id;
    std::optional<std::uint64_t> accepted_answer_id;
    std::string body;
    std::string title;
    Date creation_date;
    std::vector<std::string> tags;
    long long score = 0;
};

struct Snippet {
    std::string snippet_id;
    std::uint64_t post_id = 0;
    std::uint64_t question_id = 0;
    std::string text;
    std::size_t line_count = 0;
    Date post_date;
};

struct SourceFile {
    std::string corpus_id;
    std::string path;
    std::string text;
    std::string version_label;
    std::optional<Date> release_date;
};

struct NormalizedSource {
    std::string unit_id;
    std::string corpus_id;
    std::vector<std::string> lines;
    /// 1-based original line number of each normalized line.
    std::vector<std::uint32_t> line_map;
};

class DumpTruncated : public Error {
public:
    using Error::Error;
};

/// Pull parser over a Posts.xml stream. Memory is bounded by the largest row
/// (capped at `max_row_bytes`), not by the dump size.
class PostReader {
public:
    explicit PostReader(std::istream& in, IngestConfig filters = {});

    /// Next post passing the filters, or nullopt at a clean end of document.
    /// Throws DumpTruncated once the parsed prefix has been consumed if the stream
    /// ends inside a row or before the root element closes.
    std::optional<RawPost> next();

    const Diagnostics& diagnostics() const { return diag_; }
    std::size_t rows_seen() const { return rows_seen_; }

    static constexpr std::size_t max_row_bytes = 32u << 20;

private:
    bool fill();
    std::optional<std::string> next_tag();
    bool passes(const RawPost& p) const;

    std::istream& in_;
    IngestConfig filters_;
    std::string buf_;
    std::size_t pos_ = 0;
    bool eof_ = false;
    bool root_open_ = false;
    bool root_closed_ = false;
    std::string root_name_;
    std::size_t rows_seen_ = 0;
    Diagnostics diag_;
};

/// Parses one `<row .../>` element; nullopt when malformed (the reason goes to diag).
std::optional<RawPost> parse_row(std::string_view tag, Diagnostics& diag);

/// Decodes XML/HTML character references. Returns nullopt on an unknown or
/// malformed reference when `strict` is set; otherwise leaves it verbatim.
std::optional<std::string> decode_entities(std::string_view text, bool strict);

/// Tracks accepted answers of allowlisted questions while a dump streams by.
class AcceptedAnswerIndex {
public:
    explicit AcceptedAnswerIndex(const IngestConfig& cfg) : cfg_(cfg) {}
    void observe_question(const RawPost& q);
    /// The question whose accepted answer `answer` is, if any was observed.
    const RawPost* question_for(const RawPost& answer) const;
    std::size_t size() const { return by_answer_.size(); }

private:
    const IngestConfig& cfg_;
    std::unordered_map<std::uint64_t, RawPost> by_answer_;
};

bool is_probably_java(std::string_view text);

std::vector<Snippet> extract_snippets(const RawPost& answer, const RawPost& question,
                                      const IngestConfig& cfg);

/// Code text of every `<code>` element of an HTML body, entity-decoded, in order.
std::vector<std::string> code_blocks(std::string_view html_body);

struct ScanResult {
    std::vector<SourceFile> files;
    Diagnostics diagnostics;
};

/// Walks `root` (following symlinks, each real file once) and loads every file with a
/// configured extension. Throws Error if root does not exist.
ScanResult scan_corpus(const std::filesystem::path& root, const std::string& corpus_id,
                       const std::string& version_label,
                       const std::vector<std::string>& extensions = {".java"},
                       std::optional<Date> release_date = std::nullopt);

NormalizedSource normalize(std::string_view text);
NormalizedSource normalize(std::string_view text, std::string unit_id, std::string corpus_id);

struct Comment {
    std::uint32_t start_line = 0;  ///< 1-based
    std::uint32_t end_line = 0;
    bool block = false;
    std::string text;  ///< raw text including markers
};

/// Comments of a source text, located with the same lenient scanner as normalize.
std::vector<Comment> extract_comments(std::string_view text);

}  // namespace cloneaudit::ingest
