#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wast/feature.hpp"
#include "wast/matrix.hpp"

namespace wast {

struct AttentionHyperparams {
    int embedding_dim = 64;
    int n_heads = 2;
    int n_layers = 1;
    int max_seq_len = 128;
    double learning_rate = 1e-3;
    int epochs = 30;
    int batch_size = 32;
    double threshold = 0.5;
    std::uint64_t rng_seed = 42;

    bool operator==(const AttentionHyperparams&) const = default;
};

struct EncoderLayer {
    Matrix wq, wk, wv, wo;  // each embedding_dim x embedding_dim

    bool operator==(const EncoderLayer&) const = default;
};

// Self-supervised encoder trained to reconstruct the feature set it reads.
// Vocabulary index 0 is PAD, index 1 is UNK; corpus features start at 2.
struct AttentionModel {
    static constexpr int kPadIndex = 0;
    static constexpr int kUnkIndex = 1;

    AttentionHyperparams hp;
    std::map<Feature, int> vocab;  // feature -> index, all >= 2
    Matrix embedding;              // vocab_size x embedding_dim
    std::vector<EncoderLayer> layers;
    Matrix head_w;                 // embedding_dim x vocab_size
    std::vector<double> head_b;    // vocab_size

    int vocab_size() const { return static_cast<int>(vocab.size()) + 2; }
    int feature_index(const Feature& f) const {
        auto it = vocab.find(f);
        return it == vocab.end() ? kUnkIndex : it->second;
    }

    bool operator==(const AttentionModel&) const = default;
};

// One self-supervision example: the query's feature multiset and the same
// features as an ordered occurrence list.
struct TrainExample {
    FeatureBag bag;
    std::vector<Feature> sequence;
};

struct TrainResult {
    AttentionModel model;
    std::vector<double> epoch_losses;  // mean per-example loss per epoch
};

// Trains with multi-label binary cross-entropy against each query's binary
// feature-presence vector. Deterministic for a fixed seed and thread count
// independent. Throws EmptyCorpus, EmptySequence, DivergedTraining.
TrainResult train_attention(const std::vector<TrainExample>& corpus,
                            const AttentionHyperparams& hp);

struct ForwardTrace {
    std::vector<Matrix> per_head_attention;  // n_layers * n_heads row-stochastic L x L
    Matrix averaged_attention;               // mean over heads and layers
    std::vector<double> logits;              // vocab_size
};

// Maps a feature sequence onto vocabulary ids, truncating to max_seq_len.
std::vector<int> map_to_ids(const AttentionModel& model, const std::vector<Feature>& sequence);

ForwardTrace attention_forward(const AttentionModel& model, const std::vector<int>& ids);

// Received-attention salience per feature: attention matrices averaged over
// heads and layers, column means taken per position, positions averaged per
// feature occurrence. Throws EmptySequence.
std::map<Feature, double> attention_scores(const AttentionModel& model,
                                           const std::vector<Feature>& sequence);

// Feature set predicted by the multi-label head at the model threshold.
std::vector<Feature> predict_features(const AttentionModel& model,
                                      const std::vector<Feature>& sequence);

// Micro-averaged reconstruction F1 of the model's own predictions.
double reconstruction_micro_f1(const AttentionModel& model,
                               const std::vector<TrainExample>& corpus);

}  // namespace wast
