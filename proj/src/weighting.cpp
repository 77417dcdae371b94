#include "wast/weighting.hpp"

#include <algorithm>
#include <limits>

#include "wast/serialize.hpp"

namespace wast {

namespace {

constexpr char kMagic[] = "WASTMDL1";

// Min-max over the query's own feature set; a flat range maps to 0.5.
std::map<Feature, double> minmax_normalize(const std::map<Feature, double>& raw) {
    std::map<Feature, double> out;
    if (raw.empty()) return out;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& [f, v] : raw) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi - lo <= 0.0) {
        for (const auto& [f, v] : raw) out[f] = 0.5;
        return out;
    }
    for (const auto& [f, v] : raw) out[f] = (v - lo) / (hi - lo);
    return out;
}

void put_feature(ByteWriter& w, const Feature& f) {
    w.put_u8(static_cast<std::uint8_t>(f.category));
    w.put_str(f.value);
}

Feature get_feature(ByteReader& r) {
    Feature f;
    f.category = static_cast<FeatureCategory>(r.get_u8());
    f.value = r.get_str();
    return f;
}

void put_matrix(ByteWriter& w, const Matrix& m) {
    w.put_u32(static_cast<std::uint32_t>(m.rows));
    w.put_u32(static_cast<std::uint32_t>(m.cols));
    for (double v : m.data) w.put_f64(v);
}

Matrix get_matrix(ByteReader& r) {
    const int rows = static_cast<int>(r.get_u32());
    const int cols = static_cast<int>(r.get_u32());
    Matrix m(rows, cols);
    for (double& v : m.data) v = r.get_f64();
    return m;
}

void put_idf_table(ByteWriter& w, const IdfTable& table) {
    w.put_u32(static_cast<std::uint32_t>(table.n_queries));
    w.put_u64(table.doc_freq.size());
    for (const auto& [f, df] : table.doc_freq) {
        put_feature(w, f);
        w.put_u32(static_cast<std::uint32_t>(df));
        w.put_f64(table.idf.at(f));
    }
}

IdfTable get_idf_table(ByteReader& r) {
    IdfTable table;
    table.n_queries = static_cast<int>(r.get_u32());
    const std::uint64_t n = r.get_u64();
    for (std::uint64_t i = 0; i < n; ++i) {
        Feature f = get_feature(r);
        const int df = static_cast<int>(r.get_u32());
        const double idf = r.get_f64();
        table.doc_freq[f] = df;
        table.idf[std::move(f)] = idf;
    }
    return table;
}

std::string encode_payload(const WeightModel& model) {
    ByteWriter w;
    const auto& hp = model.attention.hp;
    w.put_u32(static_cast<std::uint32_t>(hp.embedding_dim));
    w.put_u32(static_cast<std::uint32_t>(hp.n_heads));
    w.put_u32(static_cast<std::uint32_t>(hp.n_layers));
    w.put_u32(static_cast<std::uint32_t>(hp.max_seq_len));
    w.put_f64(hp.learning_rate);
    w.put_u32(static_cast<std::uint32_t>(hp.epochs));
    w.put_u32(static_cast<std::uint32_t>(hp.batch_size));
    w.put_f64(hp.threshold);
    w.put_u64(hp.rng_seed);

    w.put_u64(model.attention.vocab.size());
    for (const auto& [f, index] : model.attention.vocab) {
        put_feature(w, f);
        w.put_u32(static_cast<std::uint32_t>(index));
    }
    put_matrix(w, model.attention.embedding);
    w.put_u32(static_cast<std::uint32_t>(model.attention.layers.size()));
    for (const auto& layer : model.attention.layers) {
        put_matrix(w, layer.wq);
        put_matrix(w, layer.wk);
        put_matrix(w, layer.wv);
        put_matrix(w, layer.wo);
    }
    put_matrix(w, model.attention.head_w);
    w.put_u64(model.attention.head_b.size());
    for (double v : model.attention.head_b) w.put_f64(v);

    put_idf_table(w, model.idf_table);
    w.put_f64(model.alpha);
    return w.buffer();
}

}  // namespace

std::map<Feature, double> feature_weights(const WeightModel& model, const FeatureBag& query_bag,
                                          const std::vector<Feature>& sequence) {
    std::map<Feature, double> weights;
    if (query_bag.empty()) return weights;

    std::map<Feature, double> idf_raw;
    for (const auto& [feature, count] : query_bag.entries) {
        idf_raw[feature] = model.idf_table.lookup(feature);
    }
    std::map<Feature, double> attn_raw = attention_scores(model.attention, sequence);
    // Keep the two maps over the same key set.
    for (const auto& [feature, count] : query_bag.entries) {
        attn_raw.try_emplace(feature, 0.0);
    }
    for (auto it = attn_raw.begin(); it != attn_raw.end();) {
        it = query_bag.entries.count(it->first) ? std::next(it) : attn_raw.erase(it);
    }

    const auto idf_norm = minmax_normalize(idf_raw);
    const auto attn_norm = minmax_normalize(attn_raw);
    for (const auto& [feature, count] : query_bag.entries) {
        weights[feature] =
            model.alpha * idf_norm.at(feature) + (1.0 - model.alpha) * attn_norm.at(feature);
    }
    return weights;
}

void save_weight_model(const WeightModel& model, const std::string& path) {
    const std::string payload = encode_payload(model);
    ByteWriter header;
    header.put_str(kMagic);
    header.put_u32(1);  // format version
    header.put_u64(fnv1a64(payload));
    write_file(path, header.buffer() + payload);
}

WeightModel load_weight_model(const std::string& path) {
    const std::string blob = read_file(path);
    ByteReader r(blob);
    if (r.get_str() != kMagic) throw CorruptIndex("not a weight model file: " + path);
    const std::uint32_t version = r.get_u32();
    if (version != 1) throw CorruptIndex("unsupported model format version");
    const std::uint64_t stored_hash = r.get_u64();

    // Everything after the header is the payload the hash covers.
    const std::size_t header_size = 8 + 8 + 4 + 8;  // str len + magic + version + hash
    const std::string_view payload(blob.data() + header_size, blob.size() - header_size);
    if (fnv1a64(payload) != stored_hash) throw CorruptIndex("model fingerprint mismatch: " + path);

    WeightModel model;
    auto& hp = model.attention.hp;
    hp.embedding_dim = static_cast<int>(r.get_u32());
    hp.n_heads = static_cast<int>(r.get_u32());
    hp.n_layers = static_cast<int>(r.get_u32());
    hp.max_seq_len = static_cast<int>(r.get_u32());
    hp.learning_rate = r.get_f64();
    hp.epochs = static_cast<int>(r.get_u32());
    hp.batch_size = static_cast<int>(r.get_u32());
    hp.threshold = r.get_f64();
    hp.rng_seed = r.get_u64();

    const std::uint64_t vocab_size = r.get_u64();
    for (std::uint64_t i = 0; i < vocab_size; ++i) {
        Feature f = get_feature(r);
        model.attention.vocab[std::move(f)] = static_cast<int>(r.get_u32());
    }
    model.attention.embedding = get_matrix(r);
    const std::uint32_t n_layers = r.get_u32();
    for (std::uint32_t i = 0; i < n_layers; ++i) {
        EncoderLayer layer;
        layer.wq = get_matrix(r);
        layer.wk = get_matrix(r);
        layer.wv = get_matrix(r);
        layer.wo = get_matrix(r);
        model.attention.layers.push_back(std::move(layer));
    }
    model.attention.head_w = get_matrix(r);
    const std::uint64_t n_bias = r.get_u64();
    model.attention.head_b.resize(n_bias);
    for (double& v : model.attention.head_b) v = r.get_f64();

    model.idf_table = get_idf_table(r);
    model.alpha = r.get_f64();
    return model;
}

std::uint64_t weight_model_fingerprint(const WeightModel& model) {
    return fnv1a64(encode_payload(model));
}

}  // namespace wast
