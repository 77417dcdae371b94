#include "wast/feature.hpp"

#include <map>

namespace wast {

namespace {

void append_surface(const std::vector<SqlToken>& tokens, std::vector<Feature>& out) {
    for (const auto& tok : tokens) {
        switch (tok.kind) {
            case TokenKind::Keyword:
                out.push_back({FeatureCategory::Keyword, tok.normalized()});
                break;
            case TokenKind::FunctionName:
                out.push_back({FeatureCategory::Function, to_upper(tok.text)});
                break;
            case TokenKind::Identifier:
                if (is_aggregate_name(tok.text)) {
                    out.push_back({FeatureCategory::Function, to_upper(tok.text)});
                } else {
                    out.push_back({FeatureCategory::Identifier, tok.text});
                }
                break;
            default:
                break;
        }
    }
}

void walk_ast(const AstNode& node, const AstNode* parent, std::vector<Feature>& out,
              std::map<int, int>& depth_histogram, int& deepest) {
    const std::string type_name = node_type_name(node.type);
    if (parent != nullptr) {
        out.push_back({FeatureCategory::ParentChild,
                       std::string(node_type_name(parent->type)) + ">" + type_name});
    }
    out.push_back({FeatureCategory::Type, type_name});
    if (node.is_leaf() && parent != nullptr) {
        if (node.type == NodeType::Keyword) {
            out.push_back({FeatureCategory::Keyword,
                           node.value + "@" + node_type_name(parent->type)});
        } else if (node.type == NodeType::FunctionName) {
            out.push_back({FeatureCategory::Function, to_upper(node.value)});
        } else if (node.type == NodeType::Identifier) {
            out.push_back({FeatureCategory::Identifier, node.value});
        }
    }
    if (node.depth >= 1) {
        out.push_back({FeatureCategory::Depth,
                       type_name + ":" + std::to_string(node.depth)});
        depth_histogram[node.depth] += 1;
    }
    if (node.depth > deepest) deepest = node.depth;
    for (const auto& child : node.children) {
        walk_ast(child, &node, out, depth_histogram, deepest);
    }
}

void append_ast(const AstNode& root, std::vector<Feature>& out) {
    std::map<int, int> depth_histogram;
    int deepest = root.depth;
    walk_ast(root, nullptr, out, depth_histogram, deepest);
    out.push_back({FeatureCategory::Depth, "MAX:" + std::to_string(deepest)});
    // The depth distribution is carried by the occurrence counts: the bag
    // count of DEPTH:HIST:<d> is the number of nodes at depth d.
    for (const auto& [depth, n] : depth_histogram) {
        for (int i = 0; i < n; ++i) {
            out.push_back({FeatureCategory::Depth, "HIST:" + std::to_string(depth)});
        }
    }
}

FeatureBag histogram(const std::vector<Feature>& ordered) {
    FeatureBag bag;
    for (const auto& f : ordered) bag.add(f);
    return bag;
}

}  // namespace

const char* feature_category_name(FeatureCategory category) {
    switch (category) {
        case FeatureCategory::Keyword: return "KEYWORD";
        case FeatureCategory::Function: return "FUNCTION";
        case FeatureCategory::Identifier: return "IDENTIFIER";
        case FeatureCategory::Type: return "TYPE";
        case FeatureCategory::Depth: return "DEPTH";
        case FeatureCategory::ParentChild: return "PARENT_CHILD";
    }
    return "UNKNOWN";
}

FeatureBag extract_surface_features(const std::vector<SqlToken>& tokens) {
    std::vector<Feature> ordered;
    append_surface(tokens, ordered);
    return histogram(ordered);
}

FeatureBag extract_ast_features(const AstNode& root) {
    std::vector<Feature> ordered;
    append_ast(root, ordered);
    return histogram(ordered);
}

std::vector<Feature> extract_ordered(std::string_view sql) {
    std::vector<Feature> ordered;
    append_surface(tokenize(sql), ordered);
    append_ast(parse_ast(sql), ordered);
    return ordered;
}

FeatureBag extract_all(std::string_view sql) {
    return histogram(extract_ordered(sql));
}

}  // namespace wast
