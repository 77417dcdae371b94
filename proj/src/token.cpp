#include "wast/token.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_set>

#include "wast/errors.hpp"

namespace wast {

namespace {

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

const std::unordered_set<std::string>& keyword_set() {
    // SQLite-flavored subset that covers Spider/SParC/CoSQL-style queries.
    // Aggregate names (AVG, COUNT, ...) are deliberately absent: they stay
    // identifiers unless a call parenthesis promotes them to function names.
    static const std::unordered_set<std::string> kws = {
        "SELECT", "FROM",   "WHERE",  "GROUP",     "BY",        "ORDER",
        "HAVING", "LIMIT",  "OFFSET", "JOIN",      "LEFT",      "RIGHT",
        "INNER",  "OUTER",  "FULL",   "CROSS",     "NATURAL",   "ON",
        "AS",     "AND",    "OR",     "NOT",       "IN",        "EXISTS",
        "BETWEEN", "LIKE",  "GLOB",   "IS",        "NULL",      "DISTINCT",
        "UNION",  "INTERSECT", "EXCEPT", "ALL",    "ANY",       "SOME",
        "CASE",   "WHEN",   "THEN",   "ELSE",      "END",       "ASC",
        "DESC",   "INSERT", "INTO",   "VALUES",    "UPDATE",    "SET",
        "DELETE", "CREATE", "TABLE",  "PRIMARY",   "KEY",       "FOREIGN",
        "REFERENCES", "USING", "CAST", "COLLATE",  "ESCAPE",    "WITH",
        "RECURSIVE",
    };
    return kws;
}

// Multi-word keyword sequences, longest first so three-word forms win.
const std::vector<std::vector<std::string>>& multiword_keywords() {
    static const std::vector<std::vector<std::string>> seqs = {
        {"IS", "NOT", "NULL"},
        {"LEFT", "OUTER", "JOIN"},
        {"RIGHT", "OUTER", "JOIN"},
        {"FULL", "OUTER", "JOIN"},
        {"GROUP", "BY"},
        {"ORDER", "BY"},
        {"LEFT", "JOIN"},
        {"RIGHT", "JOIN"},
        {"INNER", "JOIN"},
        {"OUTER", "JOIN"},
        {"FULL", "JOIN"},
        {"CROSS", "JOIN"},
        {"UNION", "ALL"},
        {"NOT", "IN"},
        {"NOT", "LIKE"},
        {"NOT", "EXISTS"},
        {"IS", "NULL"},
        {"DISTINCT", "FROM"},
    };
    return seqs;
}

bool is_word_token(const SqlToken& t) {
    return t.kind == TokenKind::Keyword || t.kind == TokenKind::Identifier;
}

// First pass: raw scan into single tokens, whitespace and comments preserved.
std::vector<SqlToken> scan(std::string_view sql) {
    std::vector<SqlToken> out;
    std::size_t i = 0;
    const std::size_t n = sql.size();

    auto push = [&](TokenKind kind, std::size_t start, std::size_t end) {
        out.push_back({kind, std::string(sql.substr(start, end - start)), start});
    };

    while (i < n) {
        const char c = sql[i];
        const std::size_t start = i;

        if (is_space(c)) {
            while (i < n && is_space(sql[i])) ++i;
            push(TokenKind::Whitespace, start, i);
            continue;
        }
        if (c == '-' && i + 1 < n && sql[i + 1] == '-') {
            while (i < n && sql[i] != '\n') ++i;
            push(TokenKind::Whitespace, start, i);
            continue;
        }
        if (c == '/' && i + 1 < n && sql[i + 1] == '*') {
            i += 2;
            while (i + 1 < n && !(sql[i] == '*' && sql[i + 1] == '/')) ++i;
            if (i + 1 >= n) throw ParseError("unterminated block comment", start);
            i += 2;
            push(TokenKind::Whitespace, start, i);
            continue;
        }
        if (c == '\'' || c == '"' || c == '`') {
            const char quote = c;
            ++i;
            bool closed = false;
            while (i < n) {
                if (sql[i] == quote) {
                    if (quote == '\'' && i + 1 < n && sql[i + 1] == '\'') {
                        i += 2;  // escaped quote inside a string literal
                        continue;
                    }
                    ++i;
                    closed = true;
                    break;
                }
                ++i;
            }
            if (!closed) throw ParseError("unterminated quote", start);
            // Single quotes are string literals; double quotes and backticks
            // delimit quoted identifiers in the SQLite dialect.
            push(quote == '\'' ? TokenKind::Literal : TokenKind::Identifier, start, i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(sql[i + 1])))) {
            while (i < n && (std::isdigit(static_cast<unsigned char>(sql[i])) || sql[i] == '.')) ++i;
            if (i < n && (sql[i] == 'e' || sql[i] == 'E')) {
                std::size_t j = i + 1;
                if (j < n && (sql[j] == '+' || sql[j] == '-')) ++j;
                if (j < n && std::isdigit(static_cast<unsigned char>(sql[j]))) {
                    i = j;
                    while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
                }
            }
            push(TokenKind::Literal, start, i);
            continue;
        }
        if (is_ident_start(c)) {
            while (i < n && is_ident_char(sql[i])) ++i;
            const std::string word = to_upper(sql.substr(start, i - start));
            push(keyword_set().count(word) ? TokenKind::Keyword : TokenKind::Identifier, start, i);
            continue;
        }

        // Multi-char operators before single-char ones.
        static const std::array<std::string_view, 7> two_char = {"<=", ">=", "<>", "!=", "||", "==", ">>"};
        if (i + 1 < n) {
            const std::string_view pair = sql.substr(i, 2);
            if (std::find(two_char.begin(), two_char.end(), pair) != two_char.end()) {
                i += 2;
                push(TokenKind::Operator, start, i);
                continue;
            }
        }
        if (std::string_view("=<>+-*/%|&~!").find(c) != std::string_view::npos) {
            ++i;
            push(TokenKind::Operator, start, i);
            continue;
        }
        // Everything else, including ( ) , ; . and unexpected bytes.
        ++i;
        push(TokenKind::Punctuation, start, i);
    }
    return out;
}

// Merges multi-word keyword sequences. Matching is case-insensitive over
// word tokens separated by whitespace only; the merged token keeps the
// verbatim slice so round-trip fidelity is preserved.
std::vector<SqlToken> merge_multiword(std::vector<SqlToken> tokens, std::string_view sql) {
    std::vector<SqlToken> out;
    out.reserve(tokens.size());
    std::size_t i = 0;
    while (i < tokens.size()) {
        bool merged = false;
        if (is_word_token(tokens[i])) {
            for (const auto& seq : multiword_keywords()) {
                std::size_t ti = i;
                std::size_t matched = 0;
                std::size_t last = i;
                while (ti < tokens.size() && matched < seq.size()) {
                    if (tokens[ti].is_whitespace()) {
                        if (matched == 0) break;
                        ++ti;
                        continue;
                    }
                    if (!is_word_token(tokens[ti]) || to_upper(tokens[ti].text) != seq[matched]) break;
                    last = ti;
                    ++matched;
                    ++ti;
                }
                if (matched == seq.size()) {
                    const std::size_t begin = tokens[i].position;
                    const std::size_t end = tokens[last].position + tokens[last].text.size();
                    out.push_back({TokenKind::Keyword, std::string(sql.substr(begin, end - begin)), begin});
                    i = last + 1;
                    merged = true;
                    break;
                }
            }
        }
        if (!merged) {
            out.push_back(std::move(tokens[i]));
            ++i;
        }
    }
    return out;
}

// Promotes identifiers (and only identifiers) to function names when the
// next significant token is an opening parenthesis.
void classify_functions(std::vector<SqlToken>& tokens) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i].kind != TokenKind::Identifier) continue;
        std::size_t j = i + 1;
        while (j < tokens.size() && tokens[j].is_whitespace()) ++j;
        if (j < tokens.size() && tokens[j].kind == TokenKind::Punctuation && tokens[j].text == "(") {
            tokens[i].kind = TokenKind::FunctionName;
        }
    }
}

}  // namespace

const char* token_kind_name(TokenKind kind) {
    switch (kind) {
        case TokenKind::Keyword: return "keyword";
        case TokenKind::Identifier: return "identifier";
        case TokenKind::FunctionName: return "function-name";
        case TokenKind::Literal: return "literal";
        case TokenKind::Operator: return "operator";
        case TokenKind::Punctuation: return "punctuation";
        case TokenKind::Whitespace: return "whitespace";
    }
    return "unknown";
}

std::string to_upper(std::string_view text) {
    std::string up(text);
    std::transform(up.begin(), up.end(), up.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return up;
}

std::string SqlToken::normalized() const {
    if (kind != TokenKind::Keyword) return text;
    std::string norm;
    norm.reserve(text.size());
    bool in_space = false;
    for (char c : text) {
        if (is_space(c)) {
            in_space = true;
            continue;
        }
        if (in_space && !norm.empty()) norm.push_back(' ');
        in_space = false;
        norm.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    return norm;
}

bool is_aggregate_name(std::string_view word) {
    const std::string up = to_upper(word);
    return up == "AVG" || up == "COUNT" || up == "SUM" || up == "MIN" || up == "MAX";
}

std::string normalize_whitespace(std::string_view sql) {
    std::string out;
    out.reserve(sql.size());
    bool in_space = false;
    for (char c : sql) {
        if (is_space(c)) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) out.push_back(' ');
        in_space = false;
        out.push_back(c);
    }
    return out;
}

std::vector<SqlToken> tokenize(std::string_view sql) {
    bool blank = true;
    for (char c : sql) {
        if (!is_space(c)) {
            blank = false;
            break;
        }
    }
    if (blank) throw EmptyInput();

    auto tokens = merge_multiword(scan(sql), sql);
    classify_functions(tokens);
    return tokens;
}

}  // namespace wast
