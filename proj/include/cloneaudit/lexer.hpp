#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cloneaudit/ingest.hpp"

namespace cloneaudit::lexer {

enum class TokenKind {
    identifier,
    keyword,
    literal_string,
    literal_char,
    literal_number,
    op,
    separator,
    modifier,
};

std::string_view to_string(TokenKind k);

struct Token {
    TokenKind kind;
    std::string lexeme;

    friend bool operator==(const Token&, const Token&) = default;
};

/// Token with its byte range in the scanned text.
struct SpannedToken {
    TokenKind kind;
    std::size_t begin;
    std::size_t end;
};

using TokenBag = std::map<std::string, std::uint32_t, std::less<>>;

struct LexStats {
    std::size_t skipped_chars = 0;
};

/// Total over arbitrary bytes: unknown characters are skipped and counted,
/// literals missing their closing quote end at end of line, comments are dropped.
std::vector<Token> tokenize_lenient(std::string_view text, LexStats* stats = nullptr);
std::vector<SpannedToken> scan_tokens(std::string_view text, LexStats* stats = nullptr);

bool is_modifier(std::string_view word);
bool is_keyword(std::string_view word);

TokenBag make_bag(const std::vector<Token>& tokens);

struct BlockFragment {
    std::string unit_id;
    std::string corpus_id;
    std::uint32_t start_line = 0;  ///< normalized line, 1-based inclusive
    std::uint32_t end_line = 0;
    std::uint32_t orig_start_line = 0;  ///< via line_map
    std::uint32_t orig_end_line = 0;
    bool fallback = false;
    std::vector<Token> tokens;
    TokenBag token_bag;

    std::uint32_t line_count() const { return end_line - start_line + 1; }
};

/// Brace-balanced regions headed by a method-like or type-declaration header,
/// nested regions included, each of at least `min_lines` normalized lines.
/// With no such region, one whole-unit fragment (which may be shorter than min_lines).
std::vector<BlockFragment> split_blocks(const ingest::NormalizedSource& unit, std::uint32_t min_lines);

/// A method-like block: header through closing brace, in normalized lines (1-based).
struct MethodBlock {
    std::string name;
    std::vector<std::string> signature;  ///< header lexemes up to '{', modifiers dropped
    std::uint32_t start_line = 0;
    std::uint32_t end_line = 0;
};

/// Method-like blocks of a unit ordered by start line, outer before inner.
std::vector<MethodBlock> method_blocks(const ingest::NormalizedSource& unit);

/// Text of normalized lines [start, end] (1-based) joined with '\n'.
std::string span_text(const ingest::NormalizedSource& unit, std::uint32_t start, std::uint32_t end);

struct LineNormOptions {
    bool ignore_string_case = true;
    bool ignore_char_case = true;
    bool ignore_modifiers = true;
    bool ignore_identifiers = false;
    bool ignore_numbers = false;
};

std::string normalize_line(std::string_view line, const LineNormOptions& opts);

/// Whitespace-insensitive form: lexemes joined by single spaces.
std::string token_key(std::string_view line);

}  // namespace cloneaudit::lexer
