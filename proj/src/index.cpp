#include "wast/index.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include <nlohmann/json.hpp>

#include "wast/errors.hpp"
#include "wast/serialize.hpp"

namespace wast {

namespace {

constexpr char kMagic[] = "WASTIDX1";

std::uint64_t corpus_fingerprint(const std::vector<QueryRecord>& records) {
    ByteWriter w;
    for (const auto& record : records) {
        w.put_str(record.query_id);
        w.put_str(record.sql);
    }
    return fnv1a64(w.buffer());
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

}  // namespace

std::vector<QueryRecord> load_corpus_json(const std::string& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw IoError("invalid corpus JSON in " + path + ": " + e.what());
    }
    if (!doc.is_array()) throw IoError("corpus file must hold a JSON array: " + path);

    const std::string dataset = std::filesystem::path(path).stem().string();
    std::vector<QueryRecord> records;
    records.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& entry = doc[i];
        if (!entry.is_object()) throw IoError("corpus entry " + std::to_string(i) + " is not an object");
        QueryRecord record;
        if (entry.contains("query_id")) {
            record.query_id = entry["query_id"].get<std::string>();
        } else {
            record.query_id = dataset + ":" + std::to_string(i);
        }
        if (entry.contains("sql")) {
            record.sql = entry["sql"].get<std::string>();
        } else if (entry.contains("query")) {
            record.sql = entry["query"].get<std::string>();
        } else {
            throw IoError("corpus entry " + record.query_id + " has no sql/query field");
        }
        if (!entry.contains("db_id")) {
            throw IoError("corpus entry " + record.query_id + " has no db_id field");
        }
        record.db_id = entry["db_id"].get<std::string>();
        for (const char* key : {"references", "question"}) {
            if (!entry.contains(key)) continue;
            const auto& refs = entry[key];
            if (refs.is_string()) {
                record.references.push_back(refs.get<std::string>());
            } else if (refs.is_array()) {
                for (const auto& ref : refs) record.references.push_back(ref.get<std::string>());
            }
        }
        records.push_back(std::move(record));
    }
    return records;
}

const QueryRecord* CorpusIndex::find(const std::string& query_id) const {
    for (const auto& record : records_) {
        if (record.query_id == query_id) return &record;
    }
    return nullptr;
}

CorpusIndex build_index(const std::vector<QueryRecord>& records,
                        std::vector<SkippedRecord>* skipped) {
    if (records.empty()) throw EmptyCorpus();

    CorpusIndex index;
    std::set<std::string> seen_ids;
    for (const auto& record : records) {
        if (!seen_ids.insert(record.query_id).second) {
            if (skipped) skipped->push_back({record.query_id, "duplicate query_id"});
            continue;
        }
        try {
            FeatureBag bag = extract_all(record.sql);
            bag.source_query_id = record.query_id;
            index.records_.push_back(record);
            index.bags_.push_back(std::move(bag));
        } catch (const Error& e) {
            if (skipped) skipped->push_back({record.query_id, e.what()});
        }
    }
    if (index.records_.empty()) throw AllRecordsUnparsable();

    index.idf_ = compute_idf(index.bags_);
    index.fingerprint_ = corpus_fingerprint(index.records_);
    return index;
}

double similarity(const std::map<Feature, double>& weights, const FeatureBag& target_bag,
                  const FeatureBag& candidate_bag) {
    double numerator = 0.0;
    double denominator = 0.0;
    for (const auto& [feature, target_count] : target_bag.entries) {
        const double w = weights.at(feature);
        denominator += w;
        const int candidate_count = candidate_bag.count(feature);
        numerator += w * std::min(target_count, candidate_count);
    }
    if (denominator == 0.0) return 0.0;
    return numerator / denominator;
}

SimilarityBreakdown similarity_breakdown(const std::map<Feature, double>& weights,
                                         const FeatureBag& target_bag,
                                         const FeatureBag& candidate_bag) {
    SimilarityBreakdown breakdown;
    breakdown.denominator = 0.0;
    for (const auto& [feature, target_count] : target_bag.entries) {
        breakdown.denominator += weights.at(feature);
    }
    double score = 0.0;
    for (const auto& [feature, target_count] : target_bag.entries) {
        SimilarityTerm term;
        term.feature = feature;
        term.weight = weights.at(feature);
        term.target_count = target_count;
        term.candidate_count = candidate_bag.count(feature);
        term.contribution =
            breakdown.denominator == 0.0
                ? 0.0
                : term.weight * std::min(term.target_count, term.candidate_count) /
                      breakdown.denominator;
        score += term.contribution;
        breakdown.terms.push_back(std::move(term));
    }
    breakdown.score = breakdown.denominator == 0.0 ? 0.0 : score;
    return breakdown;
}

std::vector<double> score_all_serial(const CorpusIndex& index,
                                     const std::map<Feature, double>& weights,
                                     const FeatureBag& target_bag) {
    std::vector<double> scores(index.size(), 0.0);
    for (std::size_t i = 0; i < index.size(); ++i) {
        scores[i] = similarity(weights, target_bag, index.bags()[i]);
    }
    return scores;
}

std::vector<double> score_all(const CorpusIndex& index,
                              const std::map<Feature, double>& weights,
                              const FeatureBag& target_bag) {
    std::vector<double> scores(index.size(), 0.0);
    const std::int64_t n = static_cast<std::int64_t>(index.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (n > 64)
#endif
    for (std::int64_t i = 0; i < n; ++i) {
        scores[i] = similarity(weights, target_bag, index.bags()[i]);
    }
    return scores;
}

RetrievalResult top_k(const CorpusIndex& index, const WeightModel& model,
                      std::string_view target_sql, int k, bool exclude_self) {
    if (index.size() == 0) throw EmptyIndex();

    const FeatureBag target_bag = extract_all(target_sql);
    const std::vector<Feature> sequence = extract_ordered(target_sql);
    const auto weights = feature_weights(model, target_bag, sequence);
    const std::vector<double> scores = score_all(index, weights, target_bag);

    const std::string normalized_target = normalize_whitespace(target_sql);
    std::vector<std::size_t> order;
    order.reserve(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) {
        if (exclude_self && normalize_whitespace(index.records()[i].sql) == normalized_target) {
            continue;
        }
        order.push_back(i);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return index.records()[a].query_id < index.records()[b].query_id;
    });

    RetrievalResult result;
    result.k = k;
    const std::size_t keep = std::min<std::size_t>(order.size(), static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < keep; ++i) {
        result.ranked.push_back({index.records()[order[i]].query_id, scores[order[i]]});
    }
    return result;
}

void save_index(const CorpusIndex& index, const std::string& path) {
    ByteWriter w;
    w.put_u64(index.fingerprint());
    w.put_u64(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) {
        const auto& record = index.records()[i];
        w.put_str(record.query_id);
        w.put_str(record.sql);
        w.put_str(record.db_id);
        w.put_u64(record.references.size());
        for (const auto& ref : record.references) w.put_str(ref);

        const auto& bag = index.bags()[i];
        w.put_u64(bag.entries.size());
        for (const auto& [feature, count] : bag.entries) {
            put_feature(w, feature);
            w.put_u32(static_cast<std::uint32_t>(count));
        }
    }
    const auto& idf = index.idf_table();
    w.put_u32(static_cast<std::uint32_t>(idf.n_queries));
    w.put_u64(idf.doc_freq.size());
    for (const auto& [feature, df] : idf.doc_freq) {
        put_feature(w, feature);
        w.put_u32(static_cast<std::uint32_t>(df));
        w.put_f64(idf.idf.at(feature));
    }

    ByteWriter header;
    header.put_str(kMagic);
    header.put_u32(1);  // format version
    header.put_u64(fnv1a64(w.buffer()));
    write_file(path, header.buffer() + w.buffer());
}

CorpusIndex load_index(const std::string& path) {
    const std::string blob = read_file(path);
    ByteReader r(blob);
    if (r.get_str() != kMagic) throw CorruptIndex("not an index file: " + path);
    if (r.get_u32() != 1) throw CorruptIndex("unsupported index format version");
    const std::uint64_t stored_hash = r.get_u64();
    const std::size_t header_size = 8 + 8 + 4 + 8;
    const std::string_view payload(blob.data() + header_size, blob.size() - header_size);
    if (fnv1a64(payload) != stored_hash) throw CorruptIndex("index fingerprint mismatch: " + path);

    CorpusIndex index;
    index.fingerprint_ = r.get_u64();
    const std::uint64_t n = r.get_u64();
    for (std::uint64_t i = 0; i < n; ++i) {
        QueryRecord record;
        record.query_id = r.get_str();
        record.sql = r.get_str();
        record.db_id = r.get_str();
        const std::uint64_t n_refs = r.get_u64();
        for (std::uint64_t j = 0; j < n_refs; ++j) record.references.push_back(r.get_str());

        FeatureBag bag;
        bag.source_query_id = record.query_id;
        const std::uint64_t n_features = r.get_u64();
        for (std::uint64_t j = 0; j < n_features; ++j) {
            Feature f = get_feature(r);
            bag.entries[std::move(f)] = static_cast<int>(r.get_u32());
        }
        index.records_.push_back(std::move(record));
        index.bags_.push_back(std::move(bag));
    }
    index.idf_.n_queries = static_cast<int>(r.get_u32());
    const std::uint64_t n_idf = r.get_u64();
    for (std::uint64_t i = 0; i < n_idf; ++i) {
        Feature f = get_feature(r);
        const int df = static_cast<int>(r.get_u32());
        const double idf_value = r.get_f64();
        index.idf_.doc_freq[f] = df;
        index.idf_.idf[std::move(f)] = idf_value;
    }
    if (index.fingerprint_ != corpus_fingerprint(index.records_)) {
        throw CorruptIndex("index content does not match its fingerprint: " + path);
    }
    return index;
}

}  // namespace wast
