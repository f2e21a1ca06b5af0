#include "cloneaudit/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstring>
#include <set>
#include <tuple>

namespace cloneaudit::lexer {

namespace {

constexpr std::array<std::string_view, 11> modifiers{
    "public",   "private",      "protected", "static", "final",    "abstract",
    "synchronized", "volatile", "transient", "native", "strictfp",
};

constexpr std::array<std::string_view, 42> keywords{
    "assert",  "boolean",   "break",   "byte",       "case",    "catch",     "char",
    "class",   "const",     "continue", "default",   "do",      "double",    "else",
    "enum",    "extends",   "finally", "float",      "for",     "goto",      "if",
    "implements", "import", "instanceof", "int",     "interface", "long",    "new",
    "package", "return",    "short",   "super",      "switch",  "this",      "throw",
    "throws",  "try",       "void",    "while",      "true",    "false",     "null",
};

// longest first within each length class
constexpr std::array<std::string_view, 37> operators{
    ">>>=", "<<=", ">>=", ">>>", "->", "++", "--", "&&", "||", "==", "!=", "<=", ">=",
    "+=",   "-=",  "*=",  "/=",  "&=", "|=", "^=", "%=", "<<", ">>", "=",  ">",  "<",
    "!",    "~",   "?",   ":",   "+",  "-",  "*",  "/",  "&",  "|",  "^",
};

constexpr std::array<std::string_view, 12> separators{
    "...", "::", "(", ")", "{", "}", "[", "]", ";", ",", ".", "@",
};

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80; }
bool ident_part(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80; }

bool starts_with(std::string_view s, std::size_t at, std::string_view p) {
    return s.size() - at >= p.size() && s.compare(at, p.size(), p) == 0;
}

std::size_t scan_number(std::string_view s, std::size_t i) {
    auto is = [&](std::size_t k, auto pred) { return k < s.size() && pred(static_cast<unsigned char>(s[k])); };
    auto digit = [](unsigned char c) { return std::isdigit(c) || c == '_'; };
    auto hex = [](unsigned char c) { return std::isxdigit(c) || c == '_'; };
    if (s[i] == '0' && i + 1 < s.size() && (s[i + 1] == 'x' || s[i + 1] == 'X' || s[i + 1] == 'b' || s[i + 1] == 'B')) {
        i += 2;
        while (is(i, hex)) ++i;
    } else {
        while (is(i, digit)) ++i;
        if (i < s.size() && s[i] == '.' && !starts_with(s, i, "...")) {
            ++i;
            while (is(i, digit)) ++i;
        }
        if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
            std::size_t k = i + 1;
            if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
            if (is(k, [](unsigned char c) { return std::isdigit(c) != 0; })) {
                i = k;
                while (is(i, digit)) ++i;
            }
        }
    }
    if (i < s.size() && std::strchr("lLfFdD", s[i]) && s[i] != '\0') ++i;
    return i;
}

}  // namespace

std::string_view to_string(TokenKind k) {
    switch (k) {
        case TokenKind::identifier: return "identifier";
        case TokenKind::keyword: return "keyword";
        case TokenKind::literal_string: return "literal-string";
        case TokenKind::literal_char: return "literal-char";
        case TokenKind::literal_number: return "literal-number";
        case TokenKind::op: return "operator";
        case TokenKind::separator: return "separator";
        case TokenKind::modifier: return "modifier";
    }
    return "?";
}

bool is_modifier(std::string_view w) {
    return std::find(modifiers.begin(), modifiers.end(), w) != modifiers.end();
}

bool is_keyword(std::string_view w) {
    return std::find(keywords.begin(), keywords.end(), w) != keywords.end();
}

std::vector<SpannedToken> scan_tokens(std::string_view s, LexStats* stats) {
    std::vector<SpannedToken> out;
    std::size_t i = 0;
    const std::size_t n = s.size();
    while (i < n) {
        auto c = static_cast<unsigned char>(s[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        if (starts_with(s, i, "//")) {
            auto nl = s.find('\n', i);
            i = nl == std::string_view::npos ? n : nl;
            continue;
        }
        if (starts_with(s, i, "/*")) {
            auto close = s.find("*/", i + 2);
            i = close == std::string_view::npos ? n : close + 2;
            continue;
        }
        std::size_t b = i;
        if (ident_start(c)) {
            while (i < n && ident_part(static_cast<unsigned char>(s[i]))) ++i;
            auto w = s.substr(b, i - b);
            auto kind = is_modifier(w) ? TokenKind::modifier
                        : is_keyword(w) ? TokenKind::keyword
                                        : TokenKind::identifier;
            out.push_back({kind, b, i});
            continue;
        }
        if (std::isdigit(c) || (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
            i = scan_number(s, i);
            out.push_back({TokenKind::literal_number, b, i});
            continue;
        }
        if (c == '"' || c == '\'') {
            ++i;
            while (i < n && s[i] != '\n') {
                if (s[i] == '\\' && i + 1 < n && s[i + 1] != '\n') {
                    i += 2;
                    continue;
                }
                if (s[i++] == static_cast<char>(c)) break;
            }
            out.push_back({c == '"' ? TokenKind::literal_string : TokenKind::literal_char, b, i});
            continue;
        }
        bool matched = false;
        for (auto sep : separators) {
            if (starts_with(s, i, sep)) {
                i += sep.size();
                out.push_back({TokenKind::separator, b, i});
                matched = true;
                break;
            }
        }
        if (matched) continue;
        for (auto op : operators) {
            if (starts_with(s, i, op)) {
                i += op.size();
                out.push_back({TokenKind::op, b, i});
                matched = true;
                break;
            }
        }
        if (matched) continue;
        if (stats) ++stats->skipped_chars;
        ++i;
    }
    return out;
}

std::vector<Token> tokenize_lenient(std::string_view text, LexStats* stats) {
    auto spans = scan_tokens(text, stats);
    std::vector<Token> out;
    out.reserve(spans.size());
    for (const auto& t : spans) out.push_back({t.kind, std::string(text.substr(t.begin, t.end - t.begin))});
    return out;
}

TokenBag make_bag(const std::vector<Token>& tokens) {
    TokenBag bag;
    for (const auto& t : tokens) ++bag[t.lexeme];
    return bag;
}

std::string span_text(const ingest::NormalizedSource& unit, std::uint32_t start, std::uint32_t end) {
    std::string out;
    for (std::uint32_t k = start; k <= end && k <= unit.lines.size(); ++k) {
        if (k > start) out.push_back('\n');
        out += unit.lines[k - 1];
    }
    return out;
}

// ---------------------------------------------------------------------------
// block segmentation

namespace {

struct LineToken {
    TokenKind kind;
    std::string_view lexeme;
    std::uint32_t line;  // 1-based normalized line
};

bool is_sep(const LineToken& t, std::string_view s) {
    return t.kind == TokenKind::separator && t.lexeme == s;
}

bool is_boundary(const LineToken& t) { return is_sep(t, ";") || is_sep(t, "{") || is_sep(t, "}"); }

struct Header {
    std::uint32_t line = 0;  // 0: the brace has no signature-like header
    std::size_t first = 0;   // index of the header's first token
    std::string_view name;
    bool type = false;
};

// Declaration that the '{' at index `brace` opens, if it has a signature-like header.
Header header_of(const std::vector<LineToken>& toks, std::size_t brace) {
    constexpr std::size_t max_lookback = 256;
    std::size_t s = brace;
    while (s > 0 && brace - s < max_lookback && !is_boundary(toks[s - 1])) --s;
    if (s == brace) return {};

    // type declaration: class/interface/enum followed by a name
    for (std::size_t k = s; k + 1 < brace; ++k) {
        if (toks[k].kind == TokenKind::keyword &&
            (toks[k].lexeme == "class" || toks[k].lexeme == "interface" || toks[k].lexeme == "enum") &&
            toks[k + 1].kind == TokenKind::identifier)
            return {toks[s].line, s, toks[k + 1].lexeme, true};
    }

    // method-like: name ( ... ) [throws A, B.C] {
    std::size_t close = brace;
    for (std::size_t k = brace; k > s; --k) {
        if (is_sep(toks[k - 1], ")")) {
            close = k - 1;
            break;
        }
    }
    if (close == brace) return {};
    if (close + 1 < brace) {
        if (!(toks[close + 1].kind == TokenKind::keyword && toks[close + 1].lexeme == "throws")) return {};
        for (std::size_t k = close + 2; k < brace; ++k) {
            const auto& t = toks[k];
            bool ok = t.kind == TokenKind::identifier || is_sep(t, ".") || is_sep(t, ",") ||
                      (t.kind == TokenKind::op && (t.lexeme == "<" || t.lexeme == ">" || t.lexeme == ">>"));
            if (!ok) return {};
        }
    }
    int depth = 0;
    std::size_t open = close + 1;
    for (std::size_t k = close + 1; k > s; --k) {
        const auto& t = toks[k - 1];
        if (is_sep(t, ")")) ++depth;
        if (is_sep(t, "(")) {
            if (--depth == 0) {
                open = k - 1;
                break;
            }
        }
    }
    if (open > close || open == s) return {};
    if (toks[open - 1].kind != TokenKind::identifier) return {};
    return {toks[s].line, s, toks[open - 1].lexeme, false};
}

std::vector<LineToken> line_tokens(const ingest::NormalizedSource& unit) {
    std::vector<LineToken> toks;
    for (std::uint32_t k = 0; k < unit.lines.size(); ++k) {
        const std::string& line = unit.lines[k];
        for (const auto& t : scan_tokens(line))
            toks.push_back({t.kind, std::string_view(line).substr(t.begin, t.end - t.begin), k + 1});
    }
    return toks;
}

}  // namespace

std::vector<BlockFragment> split_blocks(const ingest::NormalizedSource& unit, std::uint32_t min_lines) {
    auto toks = line_tokens(unit);

    std::set<std::pair<std::uint32_t, std::uint32_t>> regions;
    std::vector<std::uint32_t> stack;  // header line per open brace (0: none)
    for (std::size_t k = 0; k < toks.size(); ++k) {
        if (is_sep(toks[k], "{")) {
            stack.push_back(header_of(toks, k).line);
        } else if (is_sep(toks[k], "}")) {
            if (stack.empty()) continue;
            std::uint32_t start = stack.back();
            stack.pop_back();
            if (start == 0) continue;
            std::uint32_t end = toks[k].line;
            if (end - start + 1 >= min_lines) regions.emplace(start, end);
        }
    }

    bool fallback = false;
    if (regions.empty()) {
        if (unit.lines.empty()) return {};
        regions.emplace(1u, static_cast<std::uint32_t>(unit.lines.size()));
        fallback = true;
    }

    std::vector<BlockFragment> out;
    out.reserve(regions.size());
    for (auto [start, end] : regions) {
        BlockFragment f;
        f.unit_id = unit.unit_id;
        f.corpus_id = unit.corpus_id;
        f.start_line = start;
        f.end_line = end;
        f.orig_start_line = unit.line_map[start - 1];
        f.orig_end_line = unit.line_map[end - 1];
        f.fallback = fallback;
        f.tokens = tokenize_lenient(span_text(unit, start, end));
        f.token_bag = make_bag(f.tokens);
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<MethodBlock> method_blocks(const ingest::NormalizedSource& unit) {
    auto toks = line_tokens(unit);
    std::vector<MethodBlock> out;
    std::vector<std::pair<Header, std::size_t>> stack;  // header and index of its '{'
    for (std::size_t k = 0; k < toks.size(); ++k) {
        if (is_sep(toks[k], "{")) {
            stack.emplace_back(header_of(toks, k), k);
        } else if (is_sep(toks[k], "}")) {
            if (stack.empty()) continue;
            auto [h, brace] = stack.back();
            stack.pop_back();
            if (h.line == 0 || h.type) continue;
            MethodBlock m;
            m.name = std::string(h.name);
            for (std::size_t i = h.first; i < brace; ++i)
                if (toks[i].kind != TokenKind::modifier) m.signature.emplace_back(toks[i].lexeme);
            m.start_line = h.line;
            m.end_line = toks[k].line;
            out.push_back(std::move(m));
        }
    }
    std::sort(out.begin(), out.end(), [](const MethodBlock& a, const MethodBlock& b) {
        return std::tie(a.start_line, b.end_line) < std::tie(b.start_line, a.end_line);
    });
    return out;
}

// ---------------------------------------------------------------------------
// line canonicalization

std::string normalize_line(std::string_view line, const LineNormOptions& opts) {
    auto toks = scan_tokens(line);
    std::string out;
    std::size_t cursor = 0;
    bool drop_space = false;
    auto word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$'; };
    // keep adjacent word-like tokens apart so the output re-lexes the same way
    auto emit = [&](std::string_view piece) {
        if (!out.empty() && !piece.empty() && word(out.back()) && word(piece.front())) out += ' ';
        out.append(piece);
    };
    for (const auto& t : toks) {
        auto gap = line.substr(cursor, t.begin - cursor);
        if (drop_space) {
            while (!gap.empty() && std::isspace(static_cast<unsigned char>(gap.front()))) gap.remove_prefix(1);
            drop_space = false;
        }
        out.append(gap);
        cursor = t.end;
        auto lex = line.substr(t.begin, t.end - t.begin);
        switch (t.kind) {
            case TokenKind::modifier:
                if (opts.ignore_modifiers) {
                    drop_space = true;
                    continue;
                }
                break;
            case TokenKind::literal_string:
                if (opts.ignore_string_case) {
                    emit(to_lower(lex));
                    continue;
                }
                break;
            case TokenKind::literal_char:
                if (opts.ignore_char_case) {
                    emit(to_lower(lex));
                    continue;
                }
                break;
            case TokenKind::identifier:
                if (opts.ignore_identifiers) {
                    emit("id");
                    continue;
                }
                break;
            case TokenKind::literal_number:
                if (opts.ignore_numbers) {
                    emit("0");
                    continue;
                }
                break;
            default: break;
        }
        emit(lex);
    }
    auto tail = line.substr(cursor);
    if (drop_space) {
        while (!tail.empty() && std::isspace(static_cast<unsigned char>(tail.front()))) tail.remove_prefix(1);
    }
    out.append(tail);
    // collapse whitespace runs outside literals left behind by removals
    std::string collapsed;
    collapsed.reserve(out.size());
    char quote = 0;
    for (std::size_t k = 0; k < out.size(); ++k) {
        char c = out[k];
        if (quote) {
            collapsed.push_back(c);
            if (c == '\\' && k + 1 < out.size()) {
                collapsed.push_back(out[++k]);
            } else if (c == quote) {
                quote = 0;
            }
            continue;
        }
        if (c == '"' || c == '\'') quote = c;
        if (c == ' ' && (collapsed.empty() || collapsed.back() == ' ')) continue;
        collapsed.push_back(c);
    }
    while (!collapsed.empty() && collapsed.back() == ' ' && !quote) collapsed.pop_back();
    return collapsed;
}

std::string token_key(std::string_view line) {
    std::string out;
    for (const auto& t : scan_tokens(line)) {
        if (!out.empty()) out.push_back(' ');
        out.append(line.substr(t.begin, t.end - t.begin));
    }
    return out;
}

}  // namespace cloneaudit::lexer
