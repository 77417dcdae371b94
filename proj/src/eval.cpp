#include "wast/eval.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include <sqlite3.h>

#include "wast/ast.hpp"
#include "wast/errors.hpp"
#include "wast/serialize.hpp"
#include "wast/token.hpp"

namespace wast {

namespace {

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool is_quoted_identifier(const SqlToken& tok) {
    return tok.kind == TokenKind::Identifier && !tok.text.empty() &&
           (tok.text.front() == '"' || tok.text.front() == '`');
}

bool is_join_keyword(const std::string& normalized_kw) {
    return normalized_kw == "JOIN" || normalized_kw == "LEFT JOIN" ||
           normalized_kw == "RIGHT JOIN" || normalized_kw == "INNER JOIN" ||
           normalized_kw == "OUTER JOIN" || normalized_kw == "FULL JOIN" ||
           normalized_kw == "CROSS JOIN" || normalized_kw == "LEFT OUTER JOIN" ||
           normalized_kw == "RIGHT OUTER JOIN" || normalized_kw == "FULL OUTER JOIN";
}

bool ends_from_scope(const std::string& normalized_kw) {
    return normalized_kw == "WHERE" || normalized_kw == "GROUP BY" ||
           normalized_kw == "ORDER BY" || normalized_kw == "HAVING" ||
           normalized_kw == "LIMIT" || normalized_kw == "UNION" ||
           normalized_kw == "UNION ALL" || normalized_kw == "INTERSECT" ||
           normalized_kw == "EXCEPT" || normalized_kw == "SELECT";
}

struct AliasScan {
    std::set<std::string> aliases;        // lowercased alias names
    std::set<std::size_t> as_definitions; // indices of AS keywords at table-alias sites
    std::set<std::size_t> alias_definitions;
};

// Finds FROM/JOIN table aliases in the T1/T2 style: a bare identifier (with
// optional AS) right after a table name or a parenthesized subquery.
AliasScan scan_table_aliases(const std::vector<SqlToken>& tokens) {
    enum class Mode { None, ExpectTable, ExpectAlias, ExpectAliasName };
    AliasScan scan;
    Mode mode = Mode::None;
    int paren_depth = 0;

    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const SqlToken& tok = tokens[i];
        if (tok.kind == TokenKind::Punctuation && tok.text == "(") {
            // A subquery in table position can still take an alias.
            int inner = 1;
            std::size_t j = i + 1;
            for (; j < tokens.size() && inner > 0; ++j) {
                if (tokens[j].kind != TokenKind::Punctuation) continue;
                if (tokens[j].text == "(") ++inner;
                if (tokens[j].text == ")") --inner;
            }
            if (mode == Mode::ExpectTable) {
                mode = Mode::ExpectAlias;
                i = j - 1;
                continue;
            }
            ++paren_depth;
            continue;
        }
        if (tok.kind == TokenKind::Punctuation && tok.text == ")") {
            if (paren_depth > 0) --paren_depth;
            mode = Mode::None;
            continue;
        }
        if (tok.kind == TokenKind::Keyword) {
            const std::string kw = tok.normalized();
            if (kw == "FROM" || is_join_keyword(kw)) {
                mode = Mode::ExpectTable;
                continue;
            }
            if (mode == Mode::ExpectAlias && kw == "AS") {
                scan.as_definitions.insert(i);
                mode = Mode::ExpectAliasName;
                continue;
            }
            if (ends_from_scope(kw) || kw == "ON" || kw == "USING") {
                mode = Mode::None;
            }
            continue;
        }
        if (tok.kind == TokenKind::Punctuation && tok.text == ",") {
            if (mode == Mode::ExpectAlias || mode == Mode::ExpectAliasName) mode = Mode::ExpectTable;
            continue;
        }
        if (tok.kind == TokenKind::Identifier && !is_quoted_identifier(tok)) {
            if (mode == Mode::ExpectTable) {
                mode = Mode::ExpectAlias;
            } else if (mode == Mode::ExpectAlias || mode == Mode::ExpectAliasName) {
                scan.aliases.insert(to_lower(tok.text));
                scan.alias_definitions.insert(i);
                mode = Mode::None;
            }
            continue;
        }
        if (!tok.is_whitespace()) mode = Mode::None;
    }
    return scan;
}

}  // namespace

std::string normalize_for_em(std::string_view sql) {
    parse_ast(sql);  // enforces balanced structure; throws ParseError/EmptyInput

    std::vector<SqlToken> tokens;
    for (auto& tok : tokenize(sql)) {
        if (!tok.is_whitespace()) tokens.push_back(std::move(tok));
    }
    while (!tokens.empty() && tokens.back().kind == TokenKind::Punctuation &&
           tokens.back().text == ";") {
        tokens.pop_back();
    }
    if (tokens.empty()) throw ParseError("nothing left to normalize", 0);

    const AliasScan scan = scan_table_aliases(tokens);

    // Placeholders numbered by first appearance anywhere in the query.
    std::map<std::string, std::string> placeholder;
    int next_alias = 1;
    for (const auto& tok : tokens) {
        if (tok.kind != TokenKind::Identifier || is_quoted_identifier(tok)) continue;
        const std::string lowered = to_lower(tok.text);
        if (scan.aliases.count(lowered) && !placeholder.count(lowered)) {
            placeholder[lowered] = "alias" + std::to_string(next_alias++);
        }
    }

    struct OutToken {
        std::string text;
        TokenKind kind;
    };
    std::vector<OutToken> out;
    out.reserve(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const SqlToken& tok = tokens[i];
        if (scan.as_definitions.count(i)) continue;  // re-emitted uniformly below
        if (scan.alias_definitions.count(i)) {
            out.push_back({"as", TokenKind::Keyword});
            out.push_back({placeholder.at(to_lower(tok.text)), TokenKind::Identifier});
            continue;
        }
        switch (tok.kind) {
            case TokenKind::Keyword:
                out.push_back({to_lower(tok.normalized()), TokenKind::Keyword});
                break;
            case TokenKind::Identifier: {
                if (is_quoted_identifier(tok)) {
                    out.push_back({tok.text, TokenKind::Identifier});
                    break;
                }
                const std::string lowered = to_lower(tok.text);
                auto it = placeholder.find(lowered);
                out.push_back({it == placeholder.end() ? lowered : it->second,
                               TokenKind::Identifier});
                break;
            }
            case TokenKind::FunctionName:
                out.push_back({to_lower(tok.text), TokenKind::FunctionName});
                break;
            case TokenKind::Operator:
                out.push_back({tok.text == "<>" ? "!=" : tok.text, TokenKind::Operator});
                break;
            default:
                out.push_back({tok.text, tok.kind});
                break;
        }
    }

    std::string result;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (i > 0) {
            const OutToken& prev = out[i - 1];
            const OutToken& cur = out[i];
            const bool no_space =
                prev.text == "(" || prev.text == "." || cur.text == ")" || cur.text == "," ||
                cur.text == "." || (cur.text == "(" && prev.kind == TokenKind::FunctionName);
            if (!no_space) result.push_back(' ');
        }
        result += out[i].text;
    }
    return result;
}

bool exact_match(std::string_view gen_sql, std::string_view gold_sql) {
    return exact_match_checked(gen_sql, gold_sql).em;
}

EmOutcome exact_match_checked(std::string_view gen_sql, std::string_view gold_sql) {
    std::string gen_norm, gold_norm;
    try {
        gen_norm = normalize_for_em(gen_sql);
    } catch (const Error& e) {
        return {false, std::string("generated SQL does not normalize: ") + e.what()};
    }
    try {
        gold_norm = normalize_for_em(gold_sql);
    } catch (const Error& e) {
        return {false, std::string("gold SQL does not normalize: ") + e.what()};
    }
    return {gen_norm == gold_norm, ""};
}

// ---------------------------------------------------------------------------
// Execution accuracy
// ---------------------------------------------------------------------------

namespace {

struct Cell {
    enum class Type { Null, Int, Real, Text, Blob } type = Type::Null;
    std::int64_t i = 0;
    double d = 0.0;
    std::string s;
};

using Row = std::vector<Cell>;

bool numbers_equivalent(double x, double y) {
    const double diff = std::abs(x - y);
    return diff <= std::max(1e-9, 1e-6 * std::max(std::abs(x), std::abs(y)));
}

bool cell_equivalent(const Cell& a, const Cell& b) {
    using T = Cell::Type;
    if (a.type == T::Null || b.type == T::Null) return a.type == b.type;
    const bool a_num = a.type == T::Int || a.type == T::Real;
    const bool b_num = b.type == T::Int || b.type == T::Real;
    if (a_num && b_num) {
        if (a.type == T::Int && b.type == T::Int) return a.i == b.i;
        const double x = a.type == T::Int ? static_cast<double>(a.i) : a.d;
        const double y = b.type == T::Int ? static_cast<double>(b.i) : b.d;
        return numbers_equivalent(x, y);
    }
    if (a.type != b.type) return false;
    return a.s == b.s;  // Text and Blob compare byte-exact
}

bool rows_equivalent(const Row& a, const Row& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!cell_equivalent(a[i], b[i])) return false;
    }
    return true;
}

std::string encode_row(const Row& row) {
    ByteWriter w;
    for (const Cell& cell : row) {
        w.put_u8(static_cast<std::uint8_t>(cell.type));
        switch (cell.type) {
            case Cell::Type::Int: w.put_i64(cell.i); break;
            case Cell::Type::Real: w.put_f64(cell.d); break;
            case Cell::Type::Text:
            case Cell::Type::Blob: w.put_str(cell.s); break;
            case Cell::Type::Null: break;
        }
    }
    return w.buffer();
}

struct TimeoutState {
    std::chrono::steady_clock::time_point deadline;
};

int progress_callback(void* raw) {
    auto* state = static_cast<TimeoutState*>(raw);
    return std::chrono::steady_clock::now() > state->deadline ? 1 : 0;
}

class ReadOnlyDatabase {
public:
    explicit ReadOnlyDatabase(const std::string& path) {
        if (sqlite3_open_v2(path.c_str(), &db_, SQLITE_OPEN_READONLY, nullptr) != SQLITE_OK) {
            const std::string message = db_ ? sqlite3_errmsg(db_) : "out of memory";
            if (db_) sqlite3_close(db_);
            db_ = nullptr;
            throw IoError("cannot open database " + path + ": " + message);
        }
    }

    ~ReadOnlyDatabase() {
        if (db_) sqlite3_close(db_);
    }

    ReadOnlyDatabase(const ReadOnlyDatabase&) = delete;
    ReadOnlyDatabase& operator=(const ReadOnlyDatabase&) = delete;

    std::vector<Row> execute(std::string_view sql, int timeout_seconds) {
        TimeoutState state{std::chrono::steady_clock::now() +
                           std::chrono::seconds(timeout_seconds)};
        sqlite3_progress_handler(db_, 1000, progress_callback, &state);

        sqlite3_stmt* stmt = nullptr;
        const std::string text(sql);
        if (sqlite3_prepare_v2(db_, text.c_str(), -1, &stmt, nullptr) != SQLITE_OK) {
            const std::string message = sqlite3_errmsg(db_);
            sqlite3_progress_handler(db_, 0, nullptr, nullptr);
            throw Error("prepare failed: " + message);
        }

        std::vector<Row> rows;
        int rc;
        while ((rc = sqlite3_step(stmt)) == SQLITE_ROW) {
            Row row;
            const int n = sqlite3_column_count(stmt);
            for (int c = 0; c < n; ++c) {
                Cell cell;
                switch (sqlite3_column_type(stmt, c)) {
                    case SQLITE_NULL:
                        cell.type = Cell::Type::Null;
                        break;
                    case SQLITE_INTEGER:
                        cell.type = Cell::Type::Int;
                        cell.i = sqlite3_column_int64(stmt, c);
                        break;
                    case SQLITE_FLOAT:
                        cell.type = Cell::Type::Real;
                        cell.d = sqlite3_column_double(stmt, c);
                        break;
                    case SQLITE_TEXT: {
                        cell.type = Cell::Type::Text;
                        const unsigned char* text_ptr = sqlite3_column_text(stmt, c);
                        cell.s.assign(reinterpret_cast<const char*>(text_ptr),
                                      sqlite3_column_bytes(stmt, c));
                        break;
                    }
                    default: {
                        cell.type = Cell::Type::Blob;
                        const void* blob = sqlite3_column_blob(stmt, c);
                        cell.s.assign(static_cast<const char*>(blob),
                                      sqlite3_column_bytes(stmt, c));
                        break;
                    }
                }
                row.push_back(std::move(cell));
            }
            rows.push_back(std::move(row));
        }
        const std::string message = rc == SQLITE_DONE ? "" : sqlite3_errmsg(db_);
        sqlite3_finalize(stmt);
        sqlite3_progress_handler(db_, 0, nullptr, nullptr);
        if (rc != SQLITE_DONE) {
            if (rc == SQLITE_INTERRUPT) throw Error("query timed out");
            throw Error("execution failed: " + message);
        }
        return rows;
    }

private:
    sqlite3* db_ = nullptr;
};

bool is_select_only(std::string_view sql) {
    try {
        for (const auto& tok : tokenize(sql)) {
            if (tok.is_whitespace()) continue;
            if (tok.kind == TokenKind::Punctuation && tok.text == "(") continue;
            return tok.kind == TokenKind::Keyword && tok.normalized() == "SELECT";
        }
    } catch (const Error&) {
        return false;
    }
    return false;
}

bool has_top_level_order_by(std::string_view sql) {
    int depth = 0;
    for (const auto& tok : tokenize(sql)) {
        if (tok.kind == TokenKind::Punctuation) {
            if (tok.text == "(") ++depth;
            if (tok.text == ")" && depth > 0) --depth;
            continue;
        }
        if (depth == 0 && tok.kind == TokenKind::Keyword && tok.normalized() == "ORDER BY") {
            return true;
        }
    }
    return false;
}

// Multiset comparison: exact encoding first, then a tolerance-aware greedy
// matching for numeric wiggle. The greedy pass is quadratic and capped.
bool result_sets_equivalent(const std::vector<Row>& a, const std::vector<Row>& b, bool ordered) {
    if (a.size() != b.size()) return false;
    if (!a.empty() && a[0].size() != b[0].size()) return false;

    if (ordered) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (!rows_equivalent(a[i], b[i])) return false;
        }
        return true;
    }

    std::map<std::string, int> counts;
    for (const Row& row : a) counts[encode_row(row)] += 1;
    bool exact = true;
    for (const Row& row : b) {
        auto it = counts.find(encode_row(row));
        if (it == counts.end() || it->second == 0) {
            exact = false;
            break;
        }
        it->second -= 1;
    }
    if (exact) return true;

    constexpr std::size_t kGreedyCap = 2000;
    if (a.size() > kGreedyCap) return false;

    std::vector<bool> used(b.size(), false);
    for (const Row& row : a) {
        bool matched = false;
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (used[j] || !rows_equivalent(row, b[j])) continue;
            used[j] = true;
            matched = true;
            break;
        }
        if (!matched) return false;
    }
    return true;
}

}  // namespace

const char* ex_status_name(ExStatus status) {
    switch (status) {
        case ExStatus::True: return "true";
        case ExStatus::False: return "false";
        case ExStatus::Skipped: return "skipped";
    }
    return "skipped";
}

ExOutcome execution_accuracy(std::string_view gen_sql, std::string_view gold_sql,
                             const std::string& db_path, int timeout_seconds) {
    if (!is_select_only(gold_sql)) {
        return {ExStatus::Skipped, "gold query is not SELECT-only"};
    }
    if (!is_select_only(gen_sql)) {
        return {ExStatus::False, "generated query is not SELECT-only"};
    }

    std::vector<Row> gold_rows;
    bool gold_ordered = false;
    try {
        ReadOnlyDatabase db(db_path);
        gold_rows = db.execute(gold_sql, timeout_seconds);
        gold_ordered = has_top_level_order_by(gold_sql);
    } catch (const std::exception& e) {
        return {ExStatus::Skipped, std::string("gold execution failed: ") + e.what()};
    }

    std::vector<Row> gen_rows;
    try {
        ReadOnlyDatabase db(db_path);
        gen_rows = db.execute(gen_sql, timeout_seconds);
    } catch (const std::exception& e) {
        return {ExStatus::False, std::string("generated execution failed: ") + e.what()};
    }

    if (result_sets_equivalent(gen_rows, gold_rows, gold_ordered)) {
        return {ExStatus::True, ""};
    }
    return {ExStatus::False, "result sets differ"};
}

std::string schema_text_from_db(const std::string& db_path) {
    ReadOnlyDatabase db(db_path);
    const auto rows = db.execute(
        "SELECT sql FROM sqlite_master WHERE type='table' "
        "AND name NOT LIKE 'sqlite_%' ORDER BY name",
        10);
    std::string schema;
    for (const auto& row : rows) {
        if (row.empty() || row[0].type != Cell::Type::Text) continue;
        if (!schema.empty()) schema += ";\n";
        schema += row[0].s;
    }
    return schema;
}

std::uint64_t file_content_hash(const std::string& path) {
    return fnv1a64(read_file(path));
}

// ---------------------------------------------------------------------------
// Round trip
// ---------------------------------------------------------------------------

std::string render_parser_prompt(std::string_view schema_text, std::string_view question) {
    std::string prompt = "Given the schema: ";
    prompt += schema_text;
    prompt += "\nTranslate the question to SQL: ";
    prompt += question;
    prompt += "\nSQL:";
    return prompt;
}

std::string strip_sql_response(std::string_view raw) {
    std::string cleaned;
    std::istringstream stream{std::string(raw)};
    std::string line;
    while (std::getline(stream, line)) {
        std::string trimmed = line;
        const auto first = trimmed.find_first_not_of(" \t\r");
        if (first == std::string::npos) {
            continue;
        }
        trimmed = trimmed.substr(first);
        if (trimmed.rfind("```", 0) == 0) continue;
        if (!cleaned.empty()) cleaned += "\n";
        cleaned += line;
    }
    // Leading "SQL:" label.
    auto pos = cleaned.find_first_not_of(" \t\r\n");
    if (pos != std::string::npos) cleaned.erase(0, pos);
    if (cleaned.rfind("SQL:", 0) == 0 || cleaned.rfind("sql:", 0) == 0) {
        cleaned.erase(0, 4);
    }
    pos = cleaned.find_first_not_of(" \t\r\n");
    if (pos != std::string::npos) cleaned.erase(0, pos);
    while (!cleaned.empty() && std::isspace(static_cast<unsigned char>(cleaned.back()))) {
        cleaned.pop_back();
    }
    return cleaned;
}

std::vector<EvalCase> roundtrip(const std::vector<RoundtripInput>& inputs,
                                CompletionClient& parser, int max_in_flight) {
    std::vector<CompletionRequest> requests;
    requests.reserve(inputs.size());
    for (const auto& input : inputs) {
        CompletionRequest request;
        request.prompt = render_parser_prompt(input.schema_text, input.generated_nl);
        request.params = default_decoding_params();
        requests.push_back(std::move(request));
    }
    const auto responses = complete_batch(parser, requests, max_in_flight);

    std::vector<EvalCase> cases;
    cases.reserve(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        EvalCase c;
        c.query_id = inputs[i].query_id;
        c.gold_sql = inputs[i].gold_sql;
        c.generated_nl = inputs[i].generated_nl;
        if (responses[i].ok) {
            c.reconstructed_sql = strip_sql_response(responses[i].response.text);
        } else {
            c.roundtrip_error = responses[i].error;
        }
        cases.push_back(std::move(c));
    }
    return cases;
}

CaseResult evaluate_case(const EvalCase& eval_case, bool run_ex, int timeout_seconds) {
    CaseResult result;
    result.query_id = eval_case.query_id;

    if (!eval_case.roundtrip_error.empty()) {
        result.em = false;
        result.ex = ExStatus::False;
        result.failure_reason = "round-trip parser failed: " + eval_case.roundtrip_error;
        return result;
    }

    const EmOutcome em = exact_match_checked(eval_case.reconstructed_sql, eval_case.gold_sql);
    result.em = em.em;
    if (!em.reason.empty()) result.failure_reason = em.reason;

    if (!run_ex) {
        result.ex = ExStatus::Skipped;
        return result;
    }
    if (eval_case.db_path.empty()) {
        result.ex = ExStatus::Skipped;
        if (result.failure_reason.empty()) result.failure_reason = "no database for db_id";
        return result;
    }
    const ExOutcome ex =
        execution_accuracy(eval_case.reconstructed_sql, eval_case.gold_sql,
                           eval_case.db_path, timeout_seconds);
    result.ex = ex.status;
    if (!ex.reason.empty() && result.failure_reason.empty()) result.failure_reason = ex.reason;
    return result;
}

// ---------------------------------------------------------------------------
// Aggregation and reports
// ---------------------------------------------------------------------------

double EvalReport::em_pct() const {
    return n_queries == 0 ? 0.0 : 100.0 * em_count / n_queries;
}

double EvalReport::ex_pct() const {
    return n_queries == 0 ? 0.0 : 100.0 * ex_count / n_queries;
}

EvalReport aggregate(const std::string& dataset_name, const std::vector<CaseResult>& cases,
                     bool ex_enabled) {
    if (cases.empty()) throw EmptyCorpus();
    EvalReport report;
    report.dataset_name = dataset_name;
    report.n_queries = static_cast<int>(cases.size());
    report.per_case = cases;
    report.ex_enabled = ex_enabled;
    for (const auto& c : cases) {
        if (c.em) report.em_count += 1;
        if (c.ex == ExStatus::True) report.ex_count += 1;
    }
    return report;
}

std::string format_pct(int count, int total) {
    const double pct = total == 0 ? 0.0 : 100.0 * count / total;
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.2f", pct);
    return buffer;
}

std::string render_report_text(const EvalReport& report) {
    std::ostringstream out;
    const std::string em_pct = format_pct(report.em_count, report.n_queries);
    const std::string ex_count = report.ex_enabled ? std::to_string(report.ex_count) : "—";
    const std::string ex_pct =
        report.ex_enabled ? format_pct(report.ex_count, report.n_queries) : "—";

    char line[256];
    std::snprintf(line, sizeof(line), "%-20s %6s %6s %8s %6s %8s\n", "Dataset", "#Q", "EM",
                  "EM%", "EX", "EX%");
    out << line;
    std::snprintf(line, sizeof(line), "%-20s %6d %6d %8s %6s %8s\n", report.dataset_name.c_str(),
                  report.n_queries, report.em_count, em_pct.c_str(), ex_count.c_str(),
                  ex_pct.c_str());
    out << line;
    return out.str();
}

nlohmann::json report_to_json(const EvalReport& report) {
    auto two_decimals = [](double v) { return std::round(v * 100.0) / 100.0; };
    nlohmann::json doc = {
        {"dataset", report.dataset_name},
        {"n_queries", report.n_queries},
        {"em_count", report.em_count},
        {"em_pct", two_decimals(report.em_pct())},
    };
    if (report.ex_enabled) {
        doc["ex_count"] = report.ex_count;
        doc["ex_pct"] = two_decimals(report.ex_pct());
    } else {
        doc["ex_count"] = nullptr;
        doc["ex_pct"] = nullptr;
    }
    return doc;
}

}  // namespace wast
