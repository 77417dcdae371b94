#include "wast/ast.hpp"

#include <algorithm>
#include <optional>
#include <utility>

#include "wast/errors.hpp"

namespace wast {

namespace {

std::optional<NodeType> clause_head(const SqlToken& tok) {
    if (tok.kind != TokenKind::Keyword) return std::nullopt;
    const std::string kw = tok.normalized();
    if (kw == "SELECT") return NodeType::SelectClause;
    if (kw == "FROM") return NodeType::FromClause;
    if (kw == "WHERE") return NodeType::WhereClause;
    if (kw == "GROUP BY") return NodeType::GroupByClause;
    if (kw == "HAVING") return NodeType::HavingClause;
    if (kw == "ORDER BY") return NodeType::OrderByClause;
    if (kw == "LIMIT") return NodeType::LimitClause;
    if (kw == "UNION" || kw == "UNION ALL" || kw == "INTERSECT" || kw == "EXCEPT")
        return NodeType::SetOpClause;
    if (kw == "WITH" || kw == "VALUES" || kw == "INSERT" || kw == "UPDATE" || kw == "DELETE")
        return NodeType::OtherClause;
    return std::nullopt;
}

bool is_comparison_op(const AstNode& node) {
    if (node.type != NodeType::Operator) return false;
    return node.value == "=" || node.value == "<" || node.value == ">" ||
           node.value == "<=" || node.value == ">=" || node.value == "!=" ||
           node.value == "<>" || node.value == "==";
}

bool is_operand(const AstNode& node) {
    switch (node.type) {
        case NodeType::Identifier:
        case NodeType::Literal:
        case NodeType::Function:
        case NodeType::Parenthesis:
            return true;
        default:
            return false;
    }
}

AstNode make_leaf(const SqlToken& tok) {
    AstNode node;
    switch (tok.kind) {
        case TokenKind::Keyword: node.type = NodeType::Keyword; break;
        case TokenKind::Identifier: node.type = NodeType::Identifier; break;
        case TokenKind::FunctionName: node.type = NodeType::FunctionName; break;
        case TokenKind::Literal: node.type = NodeType::Literal; break;
        case TokenKind::Operator: node.type = NodeType::Operator; break;
        case TokenKind::Punctuation: node.type = NodeType::Punctuation; break;
        case TokenKind::Whitespace: node.type = NodeType::TokenLeaf; break;
    }
    node.value = tok.normalized();
    return node;
}

class TreeBuilder {
public:
    explicit TreeBuilder(std::vector<SqlToken> tokens) : tokens_(std::move(tokens)) {}

    AstNode build() {
        std::size_t pos = 0;
        auto elements = build_sequence(pos, /*stop_at_close=*/false);
        group_dotted_identifiers(elements);
        group_comparisons(elements);
        AstNode root;
        root.type = NodeType::Statement;
        root.children = partition_clauses(std::move(elements));
        assign_depths(root, 0);
        return root;
    }

private:
    std::vector<SqlToken> tokens_;

    // Consumes tokens until the end or an unmatched ")"; parentheses recurse
    // and function names absorb the parenthesis that follows them.
    std::vector<AstNode> build_sequence(std::size_t& pos, bool stop_at_close) {
        std::vector<AstNode> out;
        while (pos < tokens_.size()) {
            const SqlToken& tok = tokens_[pos];
            if (tok.kind == TokenKind::Punctuation && tok.text == ")") {
                if (!stop_at_close) throw ParseError("unmatched closing parenthesis", tok.position);
                return out;
            }
            if (tok.kind == TokenKind::Punctuation && tok.text == "(") {
                const std::size_t open_pos = tok.position;
                ++pos;
                auto inner = build_sequence(pos, /*stop_at_close=*/true);
                if (pos >= tokens_.size()) throw ParseError("unmatched opening parenthesis", open_pos);
                const SqlToken& close = tokens_[pos];
                ++pos;

                group_dotted_identifiers(inner);
                group_comparisons(inner);
                AstNode paren;
                paren.type = NodeType::Parenthesis;
                AstNode open_leaf;
                open_leaf.type = NodeType::Punctuation;
                open_leaf.value = "(";
                paren.children.push_back(std::move(open_leaf));
                auto partitioned = partition_clauses(std::move(inner));
                for (auto& child : partitioned) paren.children.push_back(std::move(child));
                paren.children.push_back(make_leaf(close));

                if (!out.empty() && out.back().type == NodeType::FunctionName && out.back().is_leaf()) {
                    AstNode fn;
                    fn.type = NodeType::Function;
                    fn.children.push_back(std::move(out.back()));
                    out.pop_back();
                    fn.children.push_back(std::move(paren));
                    out.push_back(std::move(fn));
                } else {
                    out.push_back(std::move(paren));
                }
                continue;
            }
            out.push_back(make_leaf(tok));
            ++pos;
        }
        return out;
    }

    // "t1 . name" and "t . *" runs become one Identifier group.
    static void group_dotted_identifiers(std::vector<AstNode>& elements) {
        std::vector<AstNode> out;
        out.reserve(elements.size());
        std::size_t i = 0;
        auto is_dot = [](const AstNode& n) {
            return n.type == NodeType::Punctuation && n.value == ".";
        };
        auto is_member = [](const AstNode& n) {
            return (n.type == NodeType::Identifier && n.is_leaf()) ||
                   (n.type == NodeType::Operator && n.value == "*");
        };
        while (i < elements.size()) {
            if (i + 2 < elements.size() && elements[i].type == NodeType::Identifier &&
                elements[i].is_leaf() && is_dot(elements[i + 1]) && is_member(elements[i + 2])) {
                AstNode group;
                group.type = NodeType::Identifier;
                group.children.push_back(std::move(elements[i]));
                group.children.push_back(std::move(elements[i + 1]));
                group.children.push_back(std::move(elements[i + 2]));
                i += 3;
                while (i + 1 < elements.size() && is_dot(elements[i]) && is_member(elements[i + 1])) {
                    group.children.push_back(std::move(elements[i]));
                    group.children.push_back(std::move(elements[i + 1]));
                    i += 2;
                }
                out.push_back(std::move(group));
            } else {
                out.push_back(std::move(elements[i]));
                ++i;
            }
        }
        elements = std::move(out);
    }

    // operand <op> operand triples become Comparison groups, left to right.
    static void group_comparisons(std::vector<AstNode>& elements) {
        std::vector<AstNode> out;
        out.reserve(elements.size());
        std::size_t i = 0;
        while (i < elements.size()) {
            if (i + 2 < elements.size() && is_operand(elements[i]) &&
                is_comparison_op(elements[i + 1]) && is_operand(elements[i + 2])) {
                AstNode cmp;
                cmp.type = NodeType::Comparison;
                cmp.children.push_back(std::move(elements[i]));
                cmp.children.push_back(std::move(elements[i + 1]));
                cmp.children.push_back(std::move(elements[i + 2]));
                out.push_back(std::move(cmp));
                i += 3;
            } else {
                out.push_back(std::move(elements[i]));
                ++i;
            }
        }
        elements = std::move(out);
    }

    // Splits a run into clause groups headed by SELECT/FROM/WHERE/... leaves.
    // Runs without any clause head are returned untouched, which keeps
    // function arguments and IN-lists flat.
    static std::vector<AstNode> partition_clauses(std::vector<AstNode> elements) {
        const bool any_head = std::any_of(elements.begin(), elements.end(), [](const AstNode& n) {
            return n.is_leaf() && n.type == NodeType::Keyword &&
                   clause_head_type(n.value).has_value();
        });
        if (!any_head) return elements;

        std::vector<AstNode> out;
        AstNode current;
        bool in_clause = false;
        for (auto& el : elements) {
            std::optional<NodeType> head;
            if (el.is_leaf() && el.type == NodeType::Keyword) head = clause_head_type(el.value);
            if (head) {
                if (in_clause) out.push_back(std::move(current));
                current = AstNode{};
                current.type = *head;
                current.children.push_back(std::move(el));
                in_clause = true;
            } else if (in_clause) {
                current.children.push_back(std::move(el));
            } else {
                out.push_back(std::move(el));  // tolerant: tokens before any clause
            }
        }
        if (in_clause) out.push_back(std::move(current));
        return out;
    }

    static std::optional<NodeType> clause_head_type(const std::string& normalized_kw) {
        SqlToken probe{TokenKind::Keyword, normalized_kw, 0};
        return clause_head(probe);
    }

    static void assign_depths(AstNode& node, int depth) {
        node.depth = depth;
        for (auto& child : node.children) assign_depths(child, depth + 1);
    }
};

}  // namespace

const char* node_type_name(NodeType type) {
    switch (type) {
        case NodeType::Statement: return "Statement";
        case NodeType::SelectClause: return "SelectClause";
        case NodeType::FromClause: return "FromClause";
        case NodeType::WhereClause: return "WhereClause";
        case NodeType::GroupByClause: return "GroupByClause";
        case NodeType::HavingClause: return "HavingClause";
        case NodeType::OrderByClause: return "OrderByClause";
        case NodeType::LimitClause: return "LimitClause";
        case NodeType::SetOpClause: return "SetOpClause";
        case NodeType::OtherClause: return "OtherClause";
        case NodeType::Parenthesis: return "Parenthesis";
        case NodeType::Function: return "Function";
        case NodeType::Comparison: return "Comparison";
        case NodeType::Identifier: return "Identifier";
        case NodeType::FunctionName: return "FunctionName";
        case NodeType::Keyword: return "Keyword";
        case NodeType::Operator: return "Operator";
        case NodeType::Literal: return "Literal";
        case NodeType::Punctuation: return "Punctuation";
        case NodeType::TokenLeaf: return "TokenLeaf";
    }
    return "Unknown";
}

AstNode parse_ast(std::string_view sql) {
    auto tokens = tokenize(sql);
    std::vector<SqlToken> significant;
    significant.reserve(tokens.size());
    for (auto& tok : tokens) {
        if (!tok.is_whitespace()) significant.push_back(std::move(tok));
    }
    if (significant.empty()) throw EmptyInput();
    return TreeBuilder(std::move(significant)).build();
}

int max_depth(const AstNode& root) {
    int deepest = root.depth;
    for (const auto& child : root.children) deepest = std::max(deepest, max_depth(child));
    return deepest;
}

std::size_t node_count(const AstNode& root) {
    std::size_t count = 1;
    for (const auto& child : root.children) count += node_count(child);
    return count;
}

std::vector<std::string> leaf_values(const AstNode& root) {
    std::vector<std::string> values;
    auto walk = [&](const AstNode& node, auto&& self) -> void {
        if (node.is_leaf()) {
            values.push_back(node.value);
            return;
        }
        for (const auto& child : node.children) self(child, self);
    };
    walk(root, walk);
    return values;
}

}  // namespace wast
