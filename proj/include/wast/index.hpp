#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wast/feature.hpp"
#include "wast/idf.hpp"
#include "wast/weighting.hpp"

namespace wast {

// One corpus entry. References are optional: training-only records carry
// none, evaluation corpora carry one or more gold descriptions.
struct QueryRecord {
    std::string query_id;
    std::string sql;
    std::string db_id;
    std::vector<std::string> references;
};

// Reads a Spider/SParC/CoSQL-style JSON array. Accepts `sql` or `query` for
// the SQL text and `references` or `question` (string or list) for the
// descriptions; missing query_id becomes "<dataset>:<position>".
std::vector<QueryRecord> load_corpus_json(const std::string& path);

struct SkippedRecord {
    std::string query_id;
    std::string reason;
};

class CorpusIndex {
public:
    CorpusIndex() = default;

    const std::vector<QueryRecord>& records() const { return records_; }
    const std::vector<FeatureBag>& bags() const { return bags_; }
    const IdfTable& idf_table() const { return idf_; }
    std::uint64_t fingerprint() const { return fingerprint_; }
    std::size_t size() const { return records_.size(); }

    const QueryRecord* find(const std::string& query_id) const;

private:
    friend CorpusIndex build_index(const std::vector<QueryRecord>&, std::vector<SkippedRecord>*);
    friend CorpusIndex load_index(const std::string&);

    std::vector<QueryRecord> records_;
    std::vector<FeatureBag> bags_;  // parallel to records_
    IdfTable idf_;
    std::uint64_t fingerprint_ = 0;
};

// Extracts features for every parsable record and computes the IDF table
// over the retained bags. Unparsable records and duplicate ids are skipped
// (reported through `skipped` when given). Throws EmptyCorpus and
// AllRecordsUnparsable.
CorpusIndex build_index(const std::vector<QueryRecord>& records,
                        std::vector<SkippedRecord>* skipped = nullptr);

// Weighted feature overlap of Eq-style form: sum over the target's features
// of w(f) * min(c_target, c_candidate), normalized by the total target
// weight. All-zero weights score 0.
double similarity(const std::map<Feature, double>& weights, const FeatureBag& target_bag,
                  const FeatureBag& candidate_bag);

// Per-feature contribution breakdown backing the CLI --explain output.
struct SimilarityTerm {
    Feature feature;
    double weight;
    int target_count;
    int candidate_count;
    double contribution;  // weight * min(counts) / denominator
};
struct SimilarityBreakdown {
    std::vector<SimilarityTerm> terms;
    double denominator;
    double score;
};
SimilarityBreakdown similarity_breakdown(const std::map<Feature, double>& weights,
                                         const FeatureBag& target_bag,
                                         const FeatureBag& candidate_bag);

// Candidate scores in record order. The parallel version splits candidates
// across threads; each score is computed independently, so results are
// bitwise identical to the serial reference.
std::vector<double> score_all_serial(const CorpusIndex& index,
                                     const std::map<Feature, double>& weights,
                                     const FeatureBag& target_bag);
std::vector<double> score_all(const CorpusIndex& index,
                              const std::map<Feature, double>& weights,
                              const FeatureBag& target_bag);

struct ScoredHit {
    std::string query_id;
    double score;

    bool operator==(const ScoredHit&) const = default;
};

struct RetrievalResult {
    std::string target_query_id;
    std::vector<ScoredHit> ranked;
    int k = 0;
};

// Scores every record, orders by (score desc, query_id asc) and returns the
// best k. Records whose whitespace-normalized SQL equals the target are
// excluded unless exclude_self is false. Throws ParseError / EmptyIndex.
RetrievalResult top_k(const CorpusIndex& index, const WeightModel& model,
                      std::string_view target_sql, int k, bool exclude_self = true);

void save_index(const CorpusIndex& index, const std::string& path);
CorpusIndex load_index(const std::string& path);

}  // namespace wast
