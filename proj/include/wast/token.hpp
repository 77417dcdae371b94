#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace wast {

enum class TokenKind {
    Keyword,
    Identifier,
    FunctionName,
    Literal,
    Operator,
    Punctuation,
    Whitespace,  // also covers SQL comments
};

const char* token_kind_name(TokenKind kind);

// One lexical token. `text` is the verbatim source slice, so concatenating
// the texts of all tokens in order reproduces the input exactly.
struct SqlToken {
    TokenKind kind;
    std::string text;
    std::size_t position;  // 0-based character offset into the input

    bool is_whitespace() const { return kind == TokenKind::Whitespace; }

    // Canonical form used for feature values: keywords are uppercased with
    // internal whitespace collapsed ("group   by" -> "GROUP BY"); all other
    // kinds return the text unchanged.
    std::string normalized() const;
};

// Splits SQL into tokens. Multi-word keywords (GROUP BY, ORDER BY, LEFT JOIN,
// IS NOT NULL, ...) are merged into single keyword tokens; a word immediately
// followed by "(" is classified as a function name.
// Throws EmptyInput for blank input and ParseError for unterminated quotes.
std::vector<SqlToken> tokenize(std::string_view sql);

// True for the aggregate functions that are tagged FUNCTION regardless of
// whether a call parenthesis follows (AVG, COUNT, SUM, MIN, MAX).
bool is_aggregate_name(std::string_view word);

std::string to_upper(std::string_view text);

// Collapses whitespace runs to single spaces and trims the ends. Used for
// duplicate detection between SQL texts.
std::string normalize_whitespace(std::string_view sql);

}  // namespace wast
