#pragma once

#include <map>
#include <string>
#include <vector>

#include "wast/attention.hpp"
#include "wast/feature.hpp"
#include "wast/idf.hpp"

namespace wast {

// Combined weighting: w(f|Q) = alpha * idf_norm(f) + (1 - alpha) * attn_norm(f|Q),
// with IDF and attention each min-max normalized over the query's feature set
// before mixing so the two signals live on a shared [0,1] scale.
struct WeightModel {
    IdfTable idf_table;
    AttentionModel attention;
    double alpha = 0.5;
};

// Per-feature weights in [0,1] for the features of one query. When every
// feature has the same raw IDF (or attention) value, that component
// degenerates to 0.5 for all of them.
std::map<Feature, double> feature_weights(const WeightModel& model, const FeatureBag& query_bag,
                                          const std::vector<Feature>& sequence);

// Single-file persistence for the IDF table + attention model + alpha.
// Loading restores tensors bit for bit, so attention scores after a
// save/load round trip match the pre-save scores exactly.
void save_weight_model(const WeightModel& model, const std::string& path);
WeightModel load_weight_model(const std::string& path);

std::uint64_t weight_model_fingerprint(const WeightModel& model);

}  // namespace wast
