#include "wast/prompt.hpp"

#include <cctype>
#include <cmath>

#include "wast/errors.hpp"

namespace wast {

namespace {

const char kInstructions[] =
    "You are an expert SQL analyst who translates SQL queries into natural language questions.\n"
    "Follow this detailed Chain of Thought process:\n"
    "\n"
    "Step 1: Analyze SQL Structure\n"
    "- Identify SELECT columns and their aliases\n"
    "- Identify FROM/JOIN tables and relationships\n"
    "- Identify WHERE conditions and filters\n"
    "- Identify GROUP BY, ORDER BY, LIMIT clauses\n"
    "- Understand the query's logical flow\n"
    "\n"
    "Step 2: Understand Business Intent\n"
    "- What business question does this query answer?\n"
    "- What entities are being queried?\n"
    "- What specific information is being requested?\n"
    "- What relationships are being explored?\n"
    "\n"
    "Step 3: Generate Natural Language Question\n"
    "- Use conversational, human-like language\n"
    "- Include ALL important details from the SQL\n"
    "- Mention specific columns being selected\n"
    "- Include table/entity names when relevant\n"
    "- Use appropriate verbs (show, list, find, count, etc.)\n"
    "- Make it specific and detailed, not generic\n"
    "\n"
    "Step 4: Quality Check\n"
    "- Does the question capture ALL the SQL logic?\n"
    "- Is it natural and conversational?\n"
    "- Does it include the right level of detail?\n"
    "- Would a human ask this question this way?\n"
    "\n"
    "Guidelines for High-Quality Translation:\n"
    "- Be SPECIFIC: Include column names, table names, conditions\n"
    "- Be NATURAL: Use conversational language\n"
    "- Be COMPLETE: Don't omit important details\n"
    "- Be PRECISE: Match the exact intent of the SQL\n"
    "\n"
    "CRITICAL: Output ONLY the natural language question.\n"
    "Do NOT generate explanations or examples. Stop after the first translation.\n";

std::string render(const std::string& instructions, const std::vector<Shot>& shots,
                   std::string_view target_sql) {
    std::string out = instructions;
    if (!shots.empty()) {
        out += "\n# Few-shot demonstrations (k=" + std::to_string(shots.size()) + ")\n";
        for (const auto& shot : shots) {
            out += "SQL: " + shot.sql + "\n";
            out += "Natural Language: " + shot.nl + "\n";
            out += "\n";
        }
    } else {
        out += "\n";
    }
    out += "# Target\n";
    out += "SQL: ";
    out += target_sql;
    out += "\nNatural Language:";
    return out;
}

}  // namespace

DecodingParams default_decoding_params() { return DecodingParams{}; }

int estimate_tokens(std::string_view text) {
    int words = 0;
    bool in_word = false;
    for (char c : text) {
        const bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
        if (!space && !in_word) ++words;
        in_word = !space;
    }
    return static_cast<int>(std::ceil(words * 1.3));
}

const std::string& default_instruction_template() {
    static const std::string tmpl = kInstructions;
    return tmpl;
}

PromptBundle assemble_prompt(const std::vector<Shot>& shots, std::string_view target_sql,
                             const std::string& instructions) {
    bool blank = true;
    for (char c : target_sql) {
        if (!std::isspace(static_cast<unsigned char>(c))) {
            blank = false;
            break;
        }
    }
    if (blank) throw EmptyTarget();

    PromptBundle bundle;
    bundle.system_instructions = instructions;
    bundle.shots = shots;
    bundle.target_sql = std::string(target_sql);
    bundle.rendered = render(instructions, shots, target_sql);
    bundle.token_estimate = estimate_tokens(bundle.rendered);
    return bundle;
}

PromptBundle fit_to_budget(PromptBundle bundle, int budget_tokens, int reserve_tokens,
                           const TokenEstimator& estimator) {
    bundle.rendered = render(bundle.system_instructions, bundle.shots, bundle.target_sql);
    bundle.token_estimate = estimator(bundle.rendered);
    while (bundle.token_estimate + reserve_tokens > budget_tokens && !bundle.shots.empty()) {
        bundle.shots.pop_back();
        bundle.dropped_shots += 1;
        bundle.rendered = render(bundle.system_instructions, bundle.shots, bundle.target_sql);
        bundle.token_estimate = estimator(bundle.rendered);
    }
    if (bundle.token_estimate + reserve_tokens > budget_tokens) {
        throw BudgetTooSmall("zero-shot prompt needs " +
                             std::to_string(bundle.token_estimate + reserve_tokens) +
                             " tokens but the budget is " + std::to_string(budget_tokens));
    }
    return bundle;
}

}  // namespace wast
