#include "wast/idf.hpp"

#include <algorithm>
#include <cmath>

#include "wast/errors.hpp"

namespace wast {

double IdfTable::lookup(const Feature& f) const {
    auto it = idf.find(f);
    if (it != idf.end()) return it->second;
    return std::log(static_cast<double>(n_queries));
}

IdfTable compute_idf(const std::vector<FeatureBag>& corpus) {
    if (corpus.empty()) throw EmptyCorpus();

    IdfTable table;
    table.n_queries = static_cast<int>(corpus.size());
    for (const auto& bag : corpus) {
        for (const auto& [feature, count] : bag.entries) {
            table.doc_freq[feature] += 1;
        }
    }
    const double n = static_cast<double>(table.n_queries);
    for (const auto& [feature, df] : table.doc_freq) {
        table.idf[feature] = std::max(0.0, std::log(n / (1.0 + df)));
    }
    return table;
}

}  // namespace wast
