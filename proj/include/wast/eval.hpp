#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "wast/llm_client.hpp"

namespace wast {

// Canonical form for exact-match comparison: lowercased keywords and
// identifiers (quoted identifiers kept verbatim), canonical spacing, trailing
// semicolons stripped, and table aliases rewritten to positional
// placeholders (alias1, alias2, ... in first-appearance order) with every
// reference substituted and a uniform "as" at the definition site.
std::string normalize_for_em(std::string_view sql);

// normalize_for_em equality. The checked variant reports why a side failed
// to normalize; unparsable input scores false rather than aborting.
bool exact_match(std::string_view gen_sql, std::string_view gold_sql);

struct EmOutcome {
    bool em = false;
    std::string reason;
};
EmOutcome exact_match_checked(std::string_view gen_sql, std::string_view gold_sql);

enum class ExStatus { True, False, Skipped };

const char* ex_status_name(ExStatus status);

struct ExOutcome {
    ExStatus status = ExStatus::Skipped;
    std::string reason;
};

// Executes both SELECT queries read-only against the SQLite database and
// compares result multisets (row order matters only when the gold query has
// a top-level ORDER BY). NULL equals only NULL, numbers compare with
// relative tolerance 1e-6 (absolute 1e-9 near zero), text is byte-exact and
// columns are positional. A failing gold query skips the case; a failing or
// timed-out generated query scores false.
ExOutcome execution_accuracy(std::string_view gen_sql, std::string_view gold_sql,
                             const std::string& db_path, int timeout_seconds = 10);

// CREATE TABLE statements from the database's own metadata.
std::string schema_text_from_db(const std::string& db_path);

std::uint64_t file_content_hash(const std::string& path);

struct RoundtripInput {
    std::string query_id;
    std::string gold_sql;
    std::string generated_nl;
    std::string db_id;
    std::string schema_text;
};

struct EvalCase {
    std::string query_id;
    std::string gold_sql;
    std::string generated_nl;
    std::string reconstructed_sql;
    std::string db_path;
    std::string roundtrip_error;  // empty when the parser call succeeded
};

// The fixed text-to-SQL prompt sent to the round-trip parser.
std::string render_parser_prompt(std::string_view schema_text, std::string_view question);

// Removes fences and a leading "SQL:" label from a parser response.
std::string strip_sql_response(std::string_view raw);

// Reconstructs SQL for every input through the parser endpoint; per-case
// failures are recorded, the batch never aborts.
std::vector<EvalCase> roundtrip(const std::vector<RoundtripInput>& inputs,
                                CompletionClient& parser, int max_in_flight = 4);

struct CaseResult {
    std::string query_id;
    bool em = false;
    ExStatus ex = ExStatus::Skipped;
    std::string failure_reason;
};

// EM and (optionally) EX verdicts for one reconstructed case.
CaseResult evaluate_case(const EvalCase& eval_case, bool run_ex, int timeout_seconds = 10);

struct EvalReport {
    std::string dataset_name;
    int n_queries = 0;
    std::vector<CaseResult> per_case;
    int em_count = 0;
    int ex_count = 0;
    bool ex_enabled = true;

    double em_pct() const;
    double ex_pct() const;
};

EvalReport aggregate(const std::string& dataset_name, const std::vector<CaseResult>& cases,
                     bool ex_enabled = true);

// Percentage with exactly two decimals, e.g. 91/290 -> "31.38".
std::string format_pct(int count, int total);

std::string render_report_text(const EvalReport& report);
nlohmann::json report_to_json(const EvalReport& report);

}  // namespace wast
