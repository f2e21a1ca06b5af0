#include "cloneaudit/ingest.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

namespace cloneaudit::ingest {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// character references

namespace {

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool valid_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        auto c = static_cast<unsigned char>(s[i]);
        std::size_t len = 0;
        std::uint32_t cp = 0;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + len > s.size()) return false;
        for (std::size_t k = 1; k < len; ++k) {
            auto cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        static constexpr std::array<std::uint32_t, 5> min_cp{0, 0, 0x80, 0x800, 0x10000};
        if (cp < min_cp[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
        i += len;
    }
    return true;
}

struct NamedEntity {
    std::string_view name;
    std::string_view text;
    bool xml;
};

constexpr std::array<NamedEntity, 9> named_entities{{
    {"lt", "<", true},
    {"gt", ">", true},
    {"amp", "&", true},
    {"quot", "\"", true},
    {"apos", "'", true},
    {"nbsp", " ", false},
    {"ndash", "\xE2\x80\x93", false},
    {"mdash", "\xE2\x80\x94", false},
    {"hellip", "\xE2\x80\xA6", false},
}};

}  // namespace

std::optional<std::string> decode_entities(std::string_view text, bool strict) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c != '&') {
            out.push_back(c);
            ++i;
            continue;
        }
        auto semi = text.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 12) {
            if (strict) return std::nullopt;
            out.push_back(c);
            ++i;
            continue;
        }
        auto name = text.substr(i + 1, semi - i - 1);
        bool done = false;
        if (!name.empty() && name[0] == '#') {
            std::uint32_t cp = 0;
            std::from_chars_result r{};
            if (name.size() > 1 && (name[1] == 'x' || name[1] == 'X'))
                r = std::from_chars(name.data() + 2, name.data() + name.size(), cp, 16);
            else
                r = std::from_chars(name.data() + 1, name.data() + name.size(), cp, 10);
            bool well_formed = r.ec == std::errc{} && r.ptr == name.data() + name.size() &&
                               name.size() > (name.size() > 1 && (name[1] == 'x' || name[1] == 'X') ? 2u : 1u);
            if (well_formed && cp != 0 && cp <= 0x10FFFF && !(cp >= 0xD800 && cp <= 0xDFFF)) {
                append_utf8(out, cp);
                done = true;
            }
        } else {
            for (const auto& e : named_entities) {
                if (e.name == name && (e.xml || !strict)) {
                    out.append(e.text);
                    done = true;
                    break;
                }
            }
        }
        if (done) {
            i = semi + 1;
        } else {
            if (strict) return std::nullopt;
            out.push_back(c);
            ++i;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// row parsing

namespace {

bool is_name_char(char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '_' || c == '-' || c == ':' || c == '.' || u >= 0x80;
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

std::vector<std::string> parse_tags(std::string_view s) {
    std::vector<std::string> tags;
    std::string cur;
    for (char c : s) {
        if (c == '<' || c == '>' || c == '|') {
            if (!cur.empty()) tags.push_back(to_lower(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) tags.push_back(to_lower(cur));
    return tags;
}

}  // namespace

std::optional<RawPost> parse_row(std::string_view tag, Diagnostics& diag) {
    // tag is the text between '<' and '>', e.g. `row Id="1" ... /`
    if (tag.substr(0, 3) != "row") {
        diag.note("malformed_row", "not a row element");
        return std::nullopt;
    }
    std::map<std::string, std::string, std::less<>> attrs;
    std::size_t i = 3;
    auto skip_ws = [&] {
        while (i < tag.size() && std::isspace(static_cast<unsigned char>(tag[i]))) ++i;
    };
    while (true) {
        skip_ws();
        if (i >= tag.size()) break;
        if (tag[i] == '/') {
            ++i;
            skip_ws();
            if (i != tag.size()) {
                diag.note("malformed_row", "content after '/'");
                return std::nullopt;
            }
            break;
        }
        std::size_t name_start = i;
        while (i < tag.size() && is_name_char(tag[i])) ++i;
        if (i == name_start) {
            diag.note("malformed_row", "bad attribute name");
            return std::nullopt;
        }
        std::string name(tag.substr(name_start, i - name_start));
        skip_ws();
        if (i >= tag.size() || tag[i] != '=') {
            diag.note("malformed_row", "attribute without value: " + name);
            return std::nullopt;
        }
        ++i;
        skip_ws();
        if (i >= tag.size() || (tag[i] != '"' && tag[i] != '\'')) {
            diag.note("malformed_row", "unquoted attribute: " + name);
            return std::nullopt;
        }
        char q = tag[i++];
        auto close = tag.find(q, i);
        if (close == std::string_view::npos) {
            diag.note("malformed_row", "unterminated attribute: " + name);
            return std::nullopt;
        }
        auto raw = tag.substr(i, close - i);
        i = close + 1;
        if (raw.find('<') != std::string_view::npos) {
            diag.note("malformed_row", "'<' in attribute: " + name);
            return std::nullopt;
        }
        auto value = decode_entities(raw, true);
        if (!value || !valid_utf8(*value)) {
            diag.note("malformed_row", "invalid attribute encoding: " + name);
            return std::nullopt;
        }
        if (!attrs.emplace(std::move(name), std::move(*value)).second) {
            diag.note("malformed_row", "duplicate attribute");
            return std::nullopt;
        }
    }

    RawPost post;
    auto get = [&](std::string_view k) -> const std::string* {
        auto it = attrs.find(k);
        return it == attrs.end() ? nullptr : &it->second;
    };
    const std::string* id = get("Id");
    if (!id || !parse_int(*id, post.post_id) || post.post_id == 0) {
        diag.note("malformed_row", "missing or invalid Id");
        return std::nullopt;
    }
    int type = 0;
    const std::string* type_attr = get("PostTypeId");
    if (!type_attr || !parse_int(*type_attr, type)) {
        diag.note("malformed_row", "missing PostTypeId on post " + *id);
        return std::nullopt;
    }
    if (type != 1 && type != 2) {
        diag.count("other_post_type");
        return std::nullopt;
    }
    post.post_type = type == 1 ? PostType::question : PostType::answer;
    if (const auto* v = get("ParentId")) {
        std::uint64_t p = 0;
        if (!parse_int(*v, p)) {
            diag.note("malformed_row", "invalid ParentId on post " + *id);
            return std::nullopt;
        }
        post.parent_id = p;
    }
    if (const auto* v = get("AcceptedAnswerId")) {
        std::uint64_t a = 0;
        if (!parse_int(*v, a)) {
            diag.note("malformed_row", "invalid AcceptedAnswerId on post " + *id);
            return std::nullopt;
        }
        post.accepted_answer_id = a;
    }
    if (const auto* v = get("CreationDate")) {
        auto d = Date::parse(*v);
        if (!d) {
            diag.note("malformed_row", "invalid CreationDate on post " + *id);
            return std::nullopt;
        }
        post.creation_date = *d;
    }
    if (const auto* v = get("Score")) {
        if (!parse_int(*v, post.score)) {
            diag.note("malformed_row", "invalid Score on post " + *id);
            return std::nullopt;
        }
    }
    if (const auto* v = get("Body")) post.body = *v;
    if (const auto* v = get("Title")) post.title = *v;
    if (const auto* v = get("Tags")) post.tags = parse_tags(*v);

    if (post.post_type == PostType::answer && !post.parent_id) {
        diag.note("malformed_row", "answer without ParentId: " + *id);
        return std::nullopt;
    }
    if (post.post_type == PostType::question && !get("Tags")) {
        diag.note("malformed_row", "question without Tags: " + *id);
        return std::nullopt;
    }
    return post;
}

// ---------------------------------------------------------------------------
// PostReader

PostReader::PostReader(std::istream& in, IngestConfig filters)
    : in_(in), filters_(std::move(filters)) {}

bool PostReader::fill() {
    if (eof_) return false;
    if (pos_ > 0 && pos_ * 2 >= buf_.size()) {
        buf_.erase(0, pos_);
        pos_ = 0;
    }
    constexpr std::size_t chunk = 1u << 20;
    std::size_t old = buf_.size();
    buf_.resize(old + chunk);
    in_.read(buf_.data() + old, static_cast<std::streamsize>(chunk));
    auto got = static_cast<std::size_t>(in_.gcount());
    buf_.resize(old + got);
    if (got == 0) eof_ = true;
    return got > 0;
}

// Returns the next tag's inner text (without '<' '>'), or nullopt at end of input.
// Throws DumpTruncated if input ends inside a tag. A row whose quoted value runs
// into a raw newline followed by `<row` is cut there and returned as-is so that
// parse_row rejects it.
std::optional<std::string> PostReader::next_tag() {
    while (true) {
        auto lt = buf_.find('<', pos_);
        if (lt == std::string::npos) {
            pos_ = buf_.size();
            if (!fill()) return std::nullopt;
            continue;
        }
        pos_ = lt;
        // comments and processing instructions / doctype
        std::size_t i = lt + 1;
        char quote = 0;
        bool cut = false;
        std::size_t end = std::string::npos;
        while (true) {
            if (i >= buf_.size()) {
                if (i - pos_ > max_row_bytes) {
                    // attribute values never hold a raw '<', so the next '<' starts a new tag
                    diag_.note("malformed_row", "row exceeds size limit");
                    pos_ = i;
                    break;
                }
                std::size_t rel = i - pos_;
                if (!fill()) throw DumpTruncated("dump ends inside a tag");
                i = pos_ + rel;  // fill() may have compacted the buffer
                continue;
            }
            char c = buf_[i];
            if (quote) {
                if (c == quote) {
                    quote = 0;
                } else if (c == '\n') {
                    // lookahead for a following row start: unbalanced quote recovery
                    std::size_t j = i + 1;
                    while (true) {
                        if (j >= buf_.size()) {
                            std::size_t rel_i = i - pos_, rel_j = j - pos_;
                            if (!fill()) break;
                            i = pos_ + rel_i;
                            j = pos_ + rel_j;
                            continue;
                        }
                        if (buf_[j] == ' ' || buf_[j] == '\t' || buf_[j] == '\r') {
                            ++j;
                            continue;
                        }
                        break;
                    }
                    if (j + 4 <= buf_.size() && buf_.compare(j, 4, "<row") == 0) {
                        end = i;
                        cut = true;
                        break;
                    }
                }
                ++i;
                continue;
            }
            if (c == '"' || c == '\'') {
                quote = c;
            } else if (c == '>') {
                end = i;
                break;
            }
            ++i;
        }
        if (end == std::string::npos) continue;  // oversized row dropped
        std::string inner = buf_.substr(pos_ + 1, end - pos_ - 1);
        pos_ = cut ? end : end + 1;
        if (cut) inner.append(" \x01");  // guarantees parse_row rejects it
        return inner;
    }
}

bool PostReader::passes(const RawPost& p) const {
    if (filters_.post_type && p.post_type != *filters_.post_type) return false;
    if (p.post_type == PostType::question && !filters_.tags.empty()) {
        bool hit = std::any_of(p.tags.begin(), p.tags.end(), [&](const std::string& t) {
            return std::find(filters_.tags.begin(), filters_.tags.end(), t) != filters_.tags.end();
        });
        if (!hit) return false;
    }
    return true;
}

std::optional<RawPost> PostReader::next() {
    while (true) {
        auto tag = next_tag();
        if (!tag) {
            if (!root_open_) throw DumpTruncated("no root element in dump");
            if (!root_closed_) throw DumpTruncated("dump ends before the root element closes");
            return std::nullopt;
        }
        std::string_view t = *tag;
        if (t.empty()) {
            diag_.note("malformed_row", "empty tag");
            continue;
        }
        if (t[0] == '?' || t[0] == '!') continue;
        if (t.substr(0, 3) == "row" && (t.size() == 3 || !is_name_char(t[3]))) {
            ++rows_seen_;
            if (!root_open_ || root_closed_) diag_.count("row_outside_root");
            auto post = parse_row(t, diag_);
            if (!post) continue;
            if (!passes(*post)) {
                diag_.count("filtered");
                continue;
            }
            return post;
        }
        auto name_end = std::find_if(t.begin() + 1, t.end(), [](char c) { return !is_name_char(c); });
        std::string name(t.begin() + (t[0] == '/' ? 1 : 0), name_end);
        if (t[0] == '/') {
            if (root_open_ && name == root_name_) root_closed_ = true;
            continue;
        }
        if (!root_open_) {
            root_open_ = true;
            root_name_ = name;
            if (t.back() == '/') root_closed_ = true;
            continue;
        }
        diag_.count("unexpected_element");
    }
}

// ---------------------------------------------------------------------------
// accepted answers

void AcceptedAnswerIndex::observe_question(const RawPost& q) {
    if (q.post_type != PostType::question || !q.accepted_answer_id) return;
    if (!cfg_.tags.empty()) {
        bool hit = std::any_of(q.tags.begin(), q.tags.end(), [&](const std::string& t) {
            return std::find(cfg_.tags.begin(), cfg_.tags.end(), t) != cfg_.tags.end();
        });
        if (!hit) return;
    }
    by_answer_[*q.accepted_answer_id] = q;
}

const RawPost* AcceptedAnswerIndex::question_for(const RawPost& answer) const {
    if (answer.post_type != PostType::answer) return nullptr;
    auto it = by_answer_.find(answer.post_id);
    if (it == by_answer_.end()) return nullptr;
    if (answer.parent_id != it->second.post_id) return nullptr;
    return &it->second;
}

// ---------------------------------------------------------------------------
// snippets

namespace {

bool ieq_prefix(std::string_view s, std::size_t at, std::string_view prefix) {
    if (at + prefix.size() > s.size()) return false;
    for (std::size_t k = 0; k < prefix.size(); ++k)
        if (std::tolower(static_cast<unsigned char>(s[at + k])) != prefix[k]) return false;
    return true;
}

std::size_t ifind(std::string_view s, std::string_view needle, std::size_t from) {
    for (std::size_t i = from; i + needle.size() <= s.size(); ++i)
        if (ieq_prefix(s, i, needle)) return i;
    return std::string_view::npos;
}

bool blank(std::string_view line) {
    return std::all_of(line.begin(), line.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

std::vector<std::string> trimmed_lines(std::string_view text) {
    auto lines = split_lines(text);
    while (!lines.empty() && blank(lines.back())) lines.pop_back();
    return lines;
}

std::string join(const std::vector<std::string>& lines) {
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out.push_back('\n');
        out += lines[i];
    }
    return out;
}

}  // namespace

std::vector<std::string> code_blocks(std::string_view html) {
    std::vector<std::string> blocks;
    std::size_t pos = 0;
    while (true) {
        auto open = ifind(html, "<code", pos);
        if (open == std::string_view::npos) break;
        std::size_t after = open + 5;
        if (after < html.size() && html[after] != '>' &&
            !std::isspace(static_cast<unsigned char>(html[after]))) {
            pos = after;
            continue;
        }
        auto gt = html.find('>', after);
        if (gt == std::string_view::npos) break;
        auto close = ifind(html, "</code>", gt + 1);
        auto content = html.substr(gt + 1, (close == std::string_view::npos ? html.size() : close) - gt - 1);
        blocks.push_back(*decode_entities(content, false));
        if (close == std::string_view::npos) break;
        pos = close + 7;
    }
    return blocks;
}

bool is_probably_java(std::string_view text) {
    auto lines = trimmed_lines(text);
    if (lines.empty()) return false;
    static constexpr std::array<std::string_view, 6> stems{
        "class ", "interface ", "void ", "public ", "private ", "import java"};
    bool keyword = false;
    for (auto stem : stems) {
        for (auto at = text.find(stem); at != std::string_view::npos; at = text.find(stem, at + 1)) {
            if (at == 0) {
                keyword = true;
                break;
            }
            auto prev = static_cast<unsigned char>(text[at - 1]);
            if (!std::isalnum(prev) && prev != '_' && prev != '$') {
                keyword = true;
                break;
            }
        }
        if (keyword) break;
    }
    if (!keyword) return false;
    std::size_t marks = std::count_if(text.begin(), text.end(),
                                      [](char c) { return c == ';' || c == '{' || c == '}'; });
    return marks * 3 >= lines.size();
}

std::vector<Snippet> extract_snippets(const RawPost& answer, const RawPost& question,
                                      const IngestConfig& cfg) {
    std::vector<Snippet> out;
    if (!question.accepted_answer_id || *question.accepted_answer_id != answer.post_id) return out;
    auto blocks = code_blocks(answer.body);
    for (std::size_t ordinal = 0; ordinal < blocks.size(); ++ordinal) {
        auto lines = trimmed_lines(blocks[ordinal]);
        if (lines.empty() || lines.size() < cfg.min_snippet_lines) continue;
        std::string text = join(lines);
        if (!is_probably_java(text)) continue;
        Snippet s;
        s.snippet_id = std::to_string(answer.post_id) + "-" + std::to_string(ordinal);
        s.post_id = answer.post_id;
        s.question_id = question.post_id;
        s.text = std::move(text);
        s.line_count = lines.size();
        s.post_date = answer.creation_date;
        out.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// corpus scan

namespace {

bool has_extension(const fs::path& p, const std::vector<std::string>& exts) {
    auto ext = to_lower(p.extension().string());
    return std::any_of(exts.begin(), exts.end(), [&](const std::string& e) { return to_lower(e) == ext; });
}

void walk(const fs::path& dir, const fs::path& rel, const std::vector<std::string>& exts,
          std::set<fs::path>& seen_dirs, std::set<fs::path>& seen_files,
          std::vector<std::pair<std::string, fs::path>>& found, Diagnostics& diag) {
    std::error_code ec;
    auto canon = fs::canonical(dir, ec);
    if (ec) {
        diag.note("unreadable", dir.string() + ": " + ec.message());
        return;
    }
    if (!seen_dirs.insert(canon).second) {
        diag.count("symlink_cycle_or_alias");
        return;
    }
    std::vector<fs::directory_entry> entries;
    fs::directory_iterator it(dir, ec), end;
    if (ec) {
        diag.note("unreadable", dir.string() + ": " + ec.message());
        return;
    }
    for (; it != end; it.increment(ec)) {
        if (ec) {
            diag.note("unreadable", dir.string() + ": " + ec.message());
            break;
        }
        entries.push_back(*it);
    }
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.path().filename() < b.path().filename(); });
    for (const auto& e : entries) {
        auto name = e.path().filename();
        std::error_code sec;
        auto st = fs::status(e.path(), sec);  // follows symlinks
        if (sec) {
            diag.note("unreadable", e.path().string() + ": " + sec.message());
            continue;
        }
        if (fs::is_directory(st)) {
            walk(e.path(), rel / name, exts, seen_dirs, seen_files, found, diag);
        } else if (fs::is_regular_file(st) && has_extension(e.path(), exts)) {
            auto fc = fs::canonical(e.path(), sec);
            if (sec) {
                diag.note("unreadable", e.path().string() + ": " + sec.message());
                continue;
            }
            if (!seen_files.insert(fc).second) {
                diag.count("duplicate_file_alias");
                continue;
            }
            found.emplace_back((rel / name).generic_string(), e.path());
        }
    }
}

}  // namespace

ScanResult scan_corpus(const fs::path& root, const std::string& corpus_id,
                       const std::string& version_label, const std::vector<std::string>& extensions,
                       std::optional<Date> release_date) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) throw Error("corpus root does not exist: " + root.string());
    ScanResult result;
    std::set<fs::path> seen_dirs, seen_files;
    std::vector<std::pair<std::string, fs::path>> found;
    walk(root, fs::path{}, extensions, seen_dirs, seen_files, found, result.diagnostics);
    std::sort(found.begin(), found.end());
    for (auto& [rel, full] : found) {
        std::ifstream in(full, std::ios::binary);
        if (!in) {
            result.diagnostics.note("unreadable", full.string());
            continue;
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        if (in.bad()) {
            result.diagnostics.note("unreadable", full.string());
            continue;
        }
        SourceFile f;
        f.corpus_id = corpus_id;
        f.path = rel;
        f.text = ss.str();
        f.version_label = version_label;
        f.release_date = release_date;
        result.files.push_back(std::move(f));
    }
    return result;
}

// ---------------------------------------------------------------------------
// normalization

namespace {

struct ScannedLine {
    std::string code;
    std::vector<bool> literal;  // parallel to code
};

// Splits text into per-line code (comments removed, block comments replaced by a
// space) and collects comments. Unterminated literals end at end of line;
// unterminated block comments run to end of input.
void scan_source(std::string_view text, std::vector<ScannedLine>* lines, std::vector<Comment>* comments) {
    std::uint32_t line_no = 1;
    if (lines) lines->emplace_back();
    auto push = [&](char c, bool lit) {
        if (!lines) return;
        lines->back().code.push_back(c);
        lines->back().literal.push_back(lit);
    };
    auto newline = [&] {
        ++line_no;
        if (lines) lines->emplace_back();
    };
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        char c = text[i];
        if (c == '\n') {
            newline();
            ++i;
        } else if (c == '/' && i + 1 < n && text[i + 1] == '/') {
            std::size_t end = text.find('\n', i);
            if (end == std::string_view::npos) end = n;
            if (comments) comments->push_back({line_no, line_no, false, std::string(text.substr(i, end - i))});
            i = end;
        } else if (c == '/' && i + 1 < n && text[i + 1] == '*') {
            std::uint32_t start_line = line_no;
            std::size_t end = text.find("*/", i + 2);
            std::size_t stop = end == std::string_view::npos ? n : end + 2;
            for (std::size_t k = i; k < stop; ++k)
                if (text[k] == '\n') newline();
            if (comments) comments->push_back({start_line, line_no, true, std::string(text.substr(i, stop - i))});
            push(' ', false);
            i = stop;
        } else if (c == '"' || c == '\'') {
            push(c, true);
            ++i;
            while (i < n && text[i] != '\n') {
                char d = text[i];
                if (d == '\\' && i + 1 < n && text[i + 1] != '\n') {
                    push(d, true);
                    push(text[i + 1], true);
                    i += 2;
                    continue;
                }
                push(d, true);
                ++i;
                if (d == c) break;
            }
        } else {
            push(c, false);
            ++i;
        }
    }
}

bool ws(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

std::string canonical_line(const ScannedLine& l) {
    std::string out;
    out.reserve(l.code.size());
    bool pending_space = false;
    for (std::size_t k = 0; k < l.code.size(); ++k) {
        char c = l.code[k];
        if (!l.literal[k] && ws(c)) {
            pending_space = true;
            continue;
        }
        if (pending_space && !out.empty()) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    while (!out.empty() && ws(out.back())) out.pop_back();
    std::size_t lead = 0;
    while (lead < out.size() && ws(out[lead])) ++lead;
    return out.substr(lead);
}

}  // namespace

NormalizedSource normalize(std::string_view text) { return normalize(text, {}, {}); }

NormalizedSource normalize(std::string_view text, std::string unit_id, std::string corpus_id) {
    NormalizedSource ns;
    ns.unit_id = std::move(unit_id);
    ns.corpus_id = std::move(corpus_id);
    if (text.empty()) return ns;
    std::vector<ScannedLine> lines;
    scan_source(text, &lines, nullptr);
    for (std::size_t k = 0; k < lines.size(); ++k) {
        auto canon = canonical_line(lines[k]);
        if (canon.empty()) continue;
        ns.lines.push_back(std::move(canon));
        ns.line_map.push_back(static_cast<std::uint32_t>(k + 1));
    }
    return ns;
}

std::vector<Comment> extract_comments(std::string_view text) {
    std::vector<Comment> out;
    scan_source(text, nullptr, &out);
    return out;
}

}  // namespace cloneaudit::ingest
