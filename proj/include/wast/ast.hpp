#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "wast/token.hpp"

namespace wast {

enum class NodeType {
    Statement,
    SelectClause,
    FromClause,
    WhereClause,
    GroupByClause,
    HavingClause,
    OrderByClause,
    LimitClause,
    SetOpClause,
    OtherClause,
    Parenthesis,
    Function,
    Comparison,
    Identifier,
    FunctionName,
    Keyword,
    Operator,
    Literal,
    Punctuation,
    TokenLeaf,
};

const char* node_type_name(NodeType type);

// One node of the token-level syntax tree. Interior nodes have an empty
// value; leaf values are the normalized token texts, and walking the leaves
// left to right reproduces the significant (non-whitespace) tokens.
struct AstNode {
    NodeType type = NodeType::TokenLeaf;
    std::string value;
    std::vector<AstNode> children;
    int depth = 0;

    bool is_leaf() const { return children.empty(); }
};

// Builds the tree for one statement. The parser is tolerant: token runs it
// cannot shape become flat leaves under the nearest parent. ParseError is
// reserved for unbalanced parentheses (unbalanced quotes already fail in
// tokenize), EmptyInput propagates from tokenize.
AstNode parse_ast(std::string_view sql);

// Tree metrics used by feature extraction and tests.
int max_depth(const AstNode& root);
std::size_t node_count(const AstNode& root);

// Leaf values in left-to-right order.
std::vector<std::string> leaf_values(const AstNode& root);

}  // namespace wast
