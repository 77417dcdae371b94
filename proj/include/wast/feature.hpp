#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "wast/ast.hpp"
#include "wast/token.hpp"

namespace wast {

enum class FeatureCategory : std::uint8_t {
    Keyword = 0,
    Function = 1,
    Identifier = 2,
    Type = 3,
    Depth = 4,
    ParentChild = 5,
};

const char* feature_category_name(FeatureCategory category);

// A categorized structural token; (category, value) is the feature identity.
struct Feature {
    FeatureCategory category;
    std::string value;

    auto operator<=>(const Feature&) const = default;

    std::string str() const {
        return std::string(feature_category_name(category)) + ":" + value;
    }
};

// Multiset of features for one query. std::map keeps iteration order
// deterministic across runs and platforms.
struct FeatureBag {
    std::map<Feature, int> entries;
    std::string source_query_id;

    void add(Feature f, int count = 1) { entries[std::move(f)] += count; }
    int count(const Feature& f) const {
        auto it = entries.find(f);
        return it == entries.end() ? 0 : it->second;
    }
    int total_count() const {
        int total = 0;
        for (const auto& [f, c] : entries) total += c;
        return total;
    }
    bool empty() const { return entries.empty(); }

    bool operator==(const FeatureBag& other) const { return entries == other.entries; }
};

// Surface features: KEYWORD:* for keyword tokens, FUNCTION:* for function
// names (aggregate names count as functions even without a call parenthesis),
// IDENTIFIER:* for the rest of the identifiers. Literals are skipped.
FeatureBag extract_surface_features(const std::vector<SqlToken>& tokens);

// Structural features from the tree: TYPE:* per node, contextual
// KEYWORD:<kw>@<parent>, FUNCTION:*, IDENTIFIER:*, the DEPTH:* family and
// PARENT_CHILD:* per edge.
FeatureBag extract_ast_features(const AstNode& root);

// Count-wise union of the surface and structural bags.
FeatureBag extract_all(std::string_view sql);

// The same features as extract_all, one entry per occurrence, in extraction
// order (surface features in token order, then structural features in
// traversal order). extract_all is exactly the histogram of this list.
std::vector<Feature> extract_ordered(std::string_view sql);

}  // namespace wast
