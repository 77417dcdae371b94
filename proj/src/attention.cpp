#include "wast/attention.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "wast/errors.hpp"

namespace wast {

namespace {

// Fully specified RNG: mt19937_64 plus hand-rolled transforms, so streams do
// not depend on the standard library's distribution implementations.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

    double uniform01() {  // (0, 1]
        return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.14159265358979323846 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    std::uint64_t below(std::uint64_t n) { return engine_() % n; }

    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::swap(values[i - 1], values[below(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

void fill_normal(Matrix& m, SeededRng& rng, double stddev) {
    for (double& v : m.data) v = rng.normal() * stddev;
}

Matrix sinusoidal_encoding(int length, int dim) {
    Matrix pe(length, dim);
    for (int pos = 0; pos < length; ++pos) {
        for (int i = 0; i < dim; i += 2) {
            const double rate = std::pow(10000.0, static_cast<double>(i) / dim);
            pe.at(pos, i) = std::sin(pos / rate);
            if (i + 1 < dim) pe.at(pos, i + 1) = std::cos(pos / rate);
        }
    }
    return pe;
}

Matrix slice_cols(const Matrix& m, int first_col, int n_cols) {
    Matrix out(m.rows, n_cols);
    for (int i = 0; i < m.rows; ++i) {
        const double* src = m.row(i) + first_col;
        std::copy(src, src + n_cols, out.row(i));
    }
    return out;
}

void place_cols(Matrix& dst, const Matrix& src, int first_col) {
    for (int i = 0; i < src.rows; ++i) {
        std::copy(src.row(i), src.row(i) + src.cols, dst.row(i) + first_col);
    }
}

void add_cols(Matrix& dst, const Matrix& src, int first_col) {
    for (int i = 0; i < src.rows; ++i) {
        double* out = dst.row(i) + first_col;
        const double* in = src.row(i);
        for (int j = 0; j < src.cols; ++j) out[j] += in[j];
    }
}

struct LayerTrace {
    Matrix input;                 // L x d, layer input
    Matrix q, k, v;               // L x d
    std::vector<Matrix> attn;     // per head, L x L
    Matrix concat;                // L x d, concatenated head outputs
};

struct FullTrace {
    std::vector<LayerTrace> layers;
    Matrix final_x;               // L x d
    std::vector<double> pooled;   // d
    std::vector<double> logits;   // vocab_size
};

FullTrace forward_full(const AttentionModel& model, const std::vector<int>& ids) {
    const int len = static_cast<int>(ids.size());
    const int dim = model.hp.embedding_dim;
    const int heads = model.hp.n_heads;
    const int head_dim = dim / heads;
    const Matrix pe = sinusoidal_encoding(len, dim);

    FullTrace trace;
    Matrix x(len, dim);
    for (int i = 0; i < len; ++i) {
        const double* emb = model.embedding.row(ids[i]);
        double* out = x.row(i);
        for (int j = 0; j < dim; ++j) out[j] = emb[j] + pe.at(i, j);
    }

    for (const auto& layer : model.layers) {
        LayerTrace lt;
        lt.input = x;
        matmul(x, layer.wq, lt.q);
        matmul(x, layer.wk, lt.k);
        matmul(x, layer.wv, lt.v);
        lt.concat = Matrix(len, dim);
        const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
        for (int h = 0; h < heads; ++h) {
            const Matrix qh = slice_cols(lt.q, h * head_dim, head_dim);
            const Matrix kh = slice_cols(lt.k, h * head_dim, head_dim);
            const Matrix vh = slice_cols(lt.v, h * head_dim, head_dim);
            Matrix scores;
            matmul_transb(qh, kh, scores);
            for (double& s : scores.data) s *= scale;
            softmax_rows(scores, len);
            Matrix attended;
            matmul(scores, vh, attended);
            place_cols(lt.concat, attended, h * head_dim);
            lt.attn.push_back(std::move(scores));
        }
        Matrix projected;
        matmul(lt.concat, layer.wo, projected);
        Matrix next(len, dim);
        for (std::size_t i = 0; i < next.data.size(); ++i) {
            next.data[i] = x.data[i] + projected.data[i];
        }
        trace.layers.push_back(std::move(lt));
        x = std::move(next);
    }

    trace.final_x = x;
    trace.pooled.assign(dim, 0.0);
    for (int i = 0; i < len; ++i) {
        const double* row = x.row(i);
        for (int j = 0; j < dim; ++j) trace.pooled[j] += row[j];
    }
    for (double& v : trace.pooled) v /= len;

    const int vocab = model.vocab_size();
    trace.logits.assign(vocab, 0.0);
    for (int v = 0; v < vocab; ++v) {
        double sum = model.head_b[v];
        for (int j = 0; j < dim; ++j) sum += trace.pooled[j] * model.head_w.at(j, v);
        trace.logits[v] = sum;
    }
    return trace;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Numerically stable binary cross-entropy with logits.
double bce_with_logits(double z, double y) {
    return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

struct Gradients {
    Matrix embedding;
    std::vector<EncoderLayer> layers;
    Matrix head_w;
    std::vector<double> head_b;

    static Gradients zeros_like(const AttentionModel& model) {
        Gradients g;
        g.embedding = Matrix(model.embedding.rows, model.embedding.cols);
        for (const auto& layer : model.layers) {
            EncoderLayer gl;
            const int d = layer.wq.rows;
            gl.wq = Matrix(d, d);
            gl.wk = Matrix(d, d);
            gl.wv = Matrix(d, d);
            gl.wo = Matrix(d, d);
            g.layers.push_back(std::move(gl));
        }
        g.head_w = Matrix(model.head_w.rows, model.head_w.cols);
        g.head_b.assign(model.head_b.size(), 0.0);
        return g;
    }
};

// Accumulates one example's gradient into `grads`; returns the example loss.
double backward_example(const AttentionModel& model, const std::vector<int>& ids,
                        const std::vector<double>& targets, Gradients& grads) {
    const int len = static_cast<int>(ids.size());
    const int dim = model.hp.embedding_dim;
    const int heads = model.hp.n_heads;
    const int head_dim = dim / heads;
    const int vocab = model.vocab_size();

    const FullTrace trace = forward_full(model, ids);

    double loss = 0.0;
    std::vector<double> dlogits(vocab);
    for (int v = 0; v < vocab; ++v) {
        loss += bce_with_logits(trace.logits[v], targets[v]);
        dlogits[v] = (sigmoid(trace.logits[v]) - targets[v]) / vocab;
    }
    loss /= vocab;

    // Multi-label head.
    std::vector<double> dpooled(dim, 0.0);
    for (int j = 0; j < dim; ++j) {
        double* wrow = grads.head_w.row(j);
        const double pj = trace.pooled[j];
        double acc = 0.0;
        for (int v = 0; v < vocab; ++v) {
            wrow[v] += pj * dlogits[v];
            acc += model.head_w.at(j, v) * dlogits[v];
        }
        dpooled[j] = acc;
    }
    for (int v = 0; v < vocab; ++v) grads.head_b[v] += dlogits[v];

    // Mean pooling spreads the gradient evenly over positions.
    Matrix dx(len, dim);
    for (int i = 0; i < len; ++i) {
        double* row = dx.row(i);
        for (int j = 0; j < dim; ++j) row[j] = dpooled[j] / len;
    }

    const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
    for (int li = static_cast<int>(model.layers.size()) - 1; li >= 0; --li) {
        const auto& layer = model.layers[li];
        const auto& lt = trace.layers[li];
        auto& gl = grads.layers[li];

        // x_next = x + concat * wo
        Matrix dconcat;
        matmul_transb(dx, layer.wo, dconcat);  // dZ * Wo^T
        Matrix dwo;
        matmul_transa(lt.concat, dx, dwo);
        for (std::size_t i = 0; i < dwo.data.size(); ++i) gl.wo.data[i] += dwo.data[i];

        Matrix dq(len, dim), dk(len, dim), dv(len, dim);
        for (int h = 0; h < heads; ++h) {
            const Matrix qh = slice_cols(lt.q, h * head_dim, head_dim);
            const Matrix kh = slice_cols(lt.k, h * head_dim, head_dim);
            const Matrix vh = slice_cols(lt.v, h * head_dim, head_dim);
            const Matrix& attn = lt.attn[h];
            const Matrix dattended = slice_cols(dconcat, h * head_dim, head_dim);

            Matrix dattn;
            matmul_transb(dattended, vh, dattn);  // dA = dO * V^T
            Matrix dvh;
            matmul_transa(attn, dattended, dvh);  // dV = A^T * dO

            // Softmax backward, row by row.
            Matrix dscores(len, len);
            for (int i = 0; i < len; ++i) {
                const double* arow = attn.row(i);
                const double* darow = dattn.row(i);
                double dot = 0.0;
                for (int j = 0; j < len; ++j) dot += arow[j] * darow[j];
                double* out = dscores.row(i);
                for (int j = 0; j < len; ++j) out[j] = arow[j] * (darow[j] - dot) * scale;
            }

            Matrix dqh;
            matmul(dscores, kh, dqh);
            Matrix dkh;
            matmul_transa(dscores, qh, dkh);

            add_cols(dq, dqh, h * head_dim);
            add_cols(dk, dkh, h * head_dim);
            add_cols(dv, dvh, h * head_dim);
        }

        Matrix dwq, dwk, dwv;
        matmul_transa(lt.input, dq, dwq);
        matmul_transa(lt.input, dk, dwk);
        matmul_transa(lt.input, dv, dwv);
        for (std::size_t i = 0; i < dwq.data.size(); ++i) {
            gl.wq.data[i] += dwq.data[i];
            gl.wk.data[i] += dwk.data[i];
            gl.wv.data[i] += dwv.data[i];
        }

        Matrix dx_in;
        matmul_transb(dq, layer.wq, dx_in);
        Matrix tmp;
        matmul_transb(dk, layer.wk, tmp);
        for (std::size_t i = 0; i < dx_in.data.size(); ++i) dx_in.data[i] += tmp.data[i];
        matmul_transb(dv, layer.wv, tmp);
        for (std::size_t i = 0; i < dx_in.data.size(); ++i) dx_in.data[i] += tmp.data[i];
        // Residual path.
        for (std::size_t i = 0; i < dx.data.size(); ++i) dx.data[i] += dx_in.data[i];
    }

    for (int i = 0; i < len; ++i) {
        double* erow = grads.embedding.row(ids[i]);
        const double* drow = dx.row(i);
        for (int j = 0; j < dim; ++j) erow[j] += drow[j];
    }
    return loss;
}

class AdamState {
public:
    explicit AdamState(std::size_t n) : m_(n, 0.0), v_(n, 0.0) {}

    void step(std::vector<double>& params, const std::vector<double>& grads, double lr, int t) {
        const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        const double c1 = 1.0 - std::pow(b1, t);
        const double c2 = 1.0 - std::pow(b2, t);
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i] = b1 * m_[i] + (1.0 - b1) * grads[i];
            v_[i] = b2 * v_[i] + (1.0 - b2) * grads[i] * grads[i];
            params[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
        }
    }

private:
    std::vector<double> m_, v_;
};

}  // namespace

std::vector<int> map_to_ids(const AttentionModel& model, const std::vector<Feature>& sequence) {
    std::vector<int> ids;
    const std::size_t limit = std::min<std::size_t>(sequence.size(),
                                                    static_cast<std::size_t>(model.hp.max_seq_len));
    ids.reserve(limit);
    for (std::size_t i = 0; i < limit; ++i) ids.push_back(model.feature_index(sequence[i]));
    return ids;
}

ForwardTrace attention_forward(const AttentionModel& model, const std::vector<int>& ids) {
    if (ids.empty()) throw EmptySequence();
    const FullTrace full = forward_full(model, ids);
    ForwardTrace out;
    const int len = static_cast<int>(ids.size());
    out.averaged_attention = Matrix(len, len);
    int n_matrices = 0;
    for (const auto& lt : full.layers) {
        for (const auto& attn : lt.attn) {
            for (std::size_t i = 0; i < attn.data.size(); ++i) {
                out.averaged_attention.data[i] += attn.data[i];
            }
            out.per_head_attention.push_back(attn);
            ++n_matrices;
        }
    }
    for (double& v : out.averaged_attention.data) v /= n_matrices;
    out.logits = full.logits;
    return out;
}

std::map<Feature, double> attention_scores(const AttentionModel& model,
                                           const std::vector<Feature>& sequence) {
    if (sequence.empty()) throw EmptySequence();
    const std::vector<int> ids = map_to_ids(model, sequence);
    const ForwardTrace trace = attention_forward(model, ids);
    const int len = static_cast<int>(ids.size());

    // Received attention: mean over attending rows of each column.
    std::vector<double> salience(len, 0.0);
    for (int j = 0; j < len; ++j) {
        double sum = 0.0;
        for (int i = 0; i < len; ++i) sum += trace.averaged_attention.at(i, j);
        salience[j] = sum / len;
    }

    std::map<Feature, double> sums;
    std::map<Feature, int> occurrences;
    for (int pos = 0; pos < len; ++pos) {
        sums[sequence[pos]] += salience[pos];
        occurrences[sequence[pos]] += 1;
    }
    // Occurrences truncated away still get an entry, scored with the
    // feature's surviving positions; fully truncated features get 0.
    std::map<Feature, double> scores;
    for (const auto& [feature, total] : sums) {
        scores[feature] = total / occurrences[feature];
    }
    for (std::size_t i = len; i < sequence.size(); ++i) {
        scores.try_emplace(sequence[i], 0.0);
    }
    return scores;
}

std::vector<Feature> predict_features(const AttentionModel& model,
                                      const std::vector<Feature>& sequence) {
    const std::vector<int> ids = map_to_ids(model, sequence);
    if (ids.empty()) throw EmptySequence();
    const ForwardTrace trace = attention_forward(model, ids);
    std::vector<Feature> predicted;
    for (const auto& [feature, index] : model.vocab) {
        if (sigmoid(trace.logits[index]) > model.hp.threshold) predicted.push_back(feature);
    }
    return predicted;
}

double reconstruction_micro_f1(const AttentionModel& model,
                               const std::vector<TrainExample>& corpus) {
    long tp = 0, fp = 0, fn = 0;
    for (const auto& example : corpus) {
        std::set<Feature> truth;
        for (const auto& [feature, count] : example.bag.entries) truth.insert(feature);
        const auto predicted = predict_features(model, example.sequence);
        std::set<Feature> pred(predicted.begin(), predicted.end());
        for (const auto& f : pred) {
            if (truth.count(f)) ++tp;
            else ++fp;
        }
        for (const auto& f : truth) {
            if (!pred.count(f)) ++fn;
        }
    }
    const double denom = 2.0 * tp + fp + fn;
    return denom == 0.0 ? 1.0 : 2.0 * tp / denom;
}

TrainResult train_attention(const std::vector<TrainExample>& corpus,
                            const AttentionHyperparams& hp) {
    if (corpus.empty()) throw EmptyCorpus();
    for (const auto& example : corpus) {
        if (example.sequence.empty()) throw EmptySequence();
    }

    AttentionModel model;
    model.hp = hp;

    std::set<Feature> distinct;
    for (const auto& example : corpus) {
        for (const auto& [feature, count] : example.bag.entries) distinct.insert(feature);
        for (const auto& feature : example.sequence) distinct.insert(feature);
    }
    int next_index = 2;
    for (const auto& feature : distinct) model.vocab[feature] = next_index++;

    const int dim = hp.embedding_dim;
    const int vocab = model.vocab_size();
    SeededRng rng(hp.rng_seed);

    model.embedding = Matrix(vocab, dim);
    fill_normal(model.embedding, rng, 1.0 / std::sqrt(static_cast<double>(dim)));
    for (int l = 0; l < hp.n_layers; ++l) {
        EncoderLayer layer;
        const double proj_std = std::sqrt(2.0 / (dim + dim));
        layer.wq = Matrix(dim, dim);
        layer.wk = Matrix(dim, dim);
        layer.wv = Matrix(dim, dim);
        layer.wo = Matrix(dim, dim);
        fill_normal(layer.wq, rng, proj_std);
        fill_normal(layer.wk, rng, proj_std);
        fill_normal(layer.wv, rng, proj_std);
        fill_normal(layer.wo, rng, proj_std);
        model.layers.push_back(std::move(layer));
    }
    model.head_w = Matrix(dim, vocab);
    fill_normal(model.head_w, rng, std::sqrt(2.0 / (dim + vocab)));
    // Start the head biased toward "absent": most vocabulary entries are
    // missing from any given query.
    model.head_b.assign(vocab, -2.0);

    // Precompute id sequences and presence targets.
    std::vector<std::vector<int>> id_seqs;
    std::vector<std::vector<double>> targets;
    id_seqs.reserve(corpus.size());
    targets.reserve(corpus.size());
    for (const auto& example : corpus) {
        id_seqs.push_back(map_to_ids(model, example.sequence));
        std::vector<double> y(vocab, 0.0);
        for (const auto& [feature, count] : example.bag.entries) {
            y[model.feature_index(feature)] = 1.0;
        }
        targets.push_back(std::move(y));
    }

    const std::size_t n_embed = model.embedding.data.size();
    const std::size_t n_proj = static_cast<std::size_t>(dim) * dim;
    const std::size_t n_head = model.head_w.data.size();
    AdamState adam_embed(n_embed);
    std::vector<AdamState> adam_layers;
    for (int l = 0; l < hp.n_layers; ++l) adam_layers.emplace_back(n_proj * 4);
    AdamState adam_head_w(n_head);
    AdamState adam_head_b(model.head_b.size());

    TrainResult result;
    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), 0);

    int adam_t = 0;
    for (int epoch = 0; epoch < hp.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t batch_start = 0; batch_start < order.size();
             batch_start += hp.batch_size) {
            const std::size_t batch_end =
                std::min(order.size(), batch_start + static_cast<std::size_t>(hp.batch_size));
            const double batch_n = static_cast<double>(batch_end - batch_start);

            Gradients grads = Gradients::zeros_like(model);
            double batch_loss = 0.0;
            for (std::size_t bi = batch_start; bi < batch_end; ++bi) {
                const std::size_t idx = order[bi];
                batch_loss += backward_example(model, id_seqs[idx], targets[idx], grads);
            }
            if (!std::isfinite(batch_loss)) {
                throw DivergedTraining("training loss became non-finite at epoch " +
                                       std::to_string(epoch));
            }
            epoch_loss += batch_loss;

            const double inv = 1.0 / batch_n;
            for (double& g : grads.embedding.data) g *= inv;
            for (auto& gl : grads.layers) {
                for (double& g : gl.wq.data) g *= inv;
                for (double& g : gl.wk.data) g *= inv;
                for (double& g : gl.wv.data) g *= inv;
                for (double& g : gl.wo.data) g *= inv;
            }
            for (double& g : grads.head_w.data) g *= inv;
            for (double& g : grads.head_b) g *= inv;

            ++adam_t;
            adam_embed.step(model.embedding.data, grads.embedding.data, hp.learning_rate, adam_t);
            for (std::size_t l = 0; l < model.layers.size(); ++l) {
                // One optimizer state per layer over the four stacked projections.
                std::vector<double> params;
                params.reserve(n_proj * 4);
                std::vector<double> layer_grads;
                layer_grads.reserve(n_proj * 4);
                auto append = [](std::vector<double>& dst, const std::vector<double>& src) {
                    dst.insert(dst.end(), src.begin(), src.end());
                };
                append(params, model.layers[l].wq.data);
                append(params, model.layers[l].wk.data);
                append(params, model.layers[l].wv.data);
                append(params, model.layers[l].wo.data);
                append(layer_grads, grads.layers[l].wq.data);
                append(layer_grads, grads.layers[l].wk.data);
                append(layer_grads, grads.layers[l].wv.data);
                append(layer_grads, grads.layers[l].wo.data);
                adam_layers[l].step(params, layer_grads, hp.learning_rate, adam_t);
                std::copy(params.begin(), params.begin() + n_proj, model.layers[l].wq.data.begin());
                std::copy(params.begin() + n_proj, params.begin() + 2 * n_proj,
                          model.layers[l].wk.data.begin());
                std::copy(params.begin() + 2 * n_proj, params.begin() + 3 * n_proj,
                          model.layers[l].wv.data.begin());
                std::copy(params.begin() + 3 * n_proj, params.end(),
                          model.layers[l].wo.data.begin());
            }
            adam_head_w.step(model.head_w.data, grads.head_w.data, hp.learning_rate, adam_t);
            adam_head_b.step(model.head_b, grads.head_b, hp.learning_rate, adam_t);
        }
        result.epoch_losses.push_back(epoch_loss / corpus.size());
    }

    result.model = std::move(model);
    return result;
}

}  // namespace wast
