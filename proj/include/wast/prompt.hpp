#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace wast {

struct DecodingParams {
    double temperature = 0.4;
    double top_p = 0.9;
    int top_k = 50;
    int max_new_tokens = 250;

    bool operator==(const DecodingParams&) const = default;
};

DecodingParams default_decoding_params();

struct Shot {
    std::string sql;
    std::string nl;
};

struct PromptBundle {
    std::string system_instructions;
    std::vector<Shot> shots;  // retrieval rank order, best first
    std::string target_sql;
    std::string rendered;
    int token_estimate = 0;
    int dropped_shots = 0;
};

// Model-agnostic over-estimate: whitespace-delimited words times 1.3,
// rounded up.
int estimate_tokens(std::string_view text);

using TokenEstimator = std::function<int(std::string_view)>;

// The committed instruction block every prompt starts with.
const std::string& default_instruction_template();

// Renders instructions, demonstrations in rank order and the target block.
// Byte-identical output for identical inputs; ends with
// "SQL: <target><newline>Natural Language:". Throws EmptyTarget.
PromptBundle assemble_prompt(const std::vector<Shot>& shots, std::string_view target_sql,
                             const std::string& instructions = default_instruction_template());

// Drops whole shots from the tail until estimate + reserve fits the budget.
// Instructions and the target block are never truncated; BudgetTooSmall if
// the zero-shot prompt still exceeds the budget.
PromptBundle fit_to_budget(PromptBundle bundle, int budget_tokens, int reserve_tokens = 250,
                           const TokenEstimator& estimator = estimate_tokens);

}  // namespace wast
