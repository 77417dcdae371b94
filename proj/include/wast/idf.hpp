#pragma once

#include <map>
#include <vector>

#include "wast/feature.hpp"

namespace wast {

// Corpus-level inverse document frequency. Stored values are clamped at 0 so
// features present in every query contribute nothing rather than a negative
// weight; an unseen feature scores log(N).
struct IdfTable {
    int n_queries = 0;
    std::map<Feature, int> doc_freq;
    std::map<Feature, double> idf;

    double lookup(const Feature& f) const;

    bool operator==(const IdfTable&) const = default;
};

// df(f) = number of distinct bags containing f; idf(f) = max(0, ln(N/(1+df))).
// Throws EmptyCorpus for an empty input.
IdfTable compute_idf(const std::vector<FeatureBag>& corpus);

}  // namespace wast
