// Command-line front end: index building, attention training, retrieval
// inspection, generation and round-trip evaluation.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <unordered_map>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "wast/attention.hpp"
#include "wast/errors.hpp"
#include "wast/eval.hpp"
#include "wast/index.hpp"
#include "wast/llm_client.hpp"
#include "wast/prompt.hpp"
#include "wast/serialize.hpp"
#include "wast/weighting.hpp"

namespace {

using nlohmann::json;

struct RunConfig {
    std::uint64_t seed = 42;
    double alpha = 0.5;
    int k = 5;
    std::string mock_mode;  // "" or "echo-gold"
    bool json_output = false;
    bool strict = false;
    bool no_ex = false;
    std::string dump_prompts_dir;
    std::string template_path;
    std::string db_root;
    int concurrency = 4;
    bool use_cache = false;
    std::string cache_dir = ".wast-cache";
    int budget_tokens = 2048;

    wast::EndpointConfig endpoint;         // generation
    wast::EndpointConfig parser_endpoint;  // round-trip text-to-SQL
};

std::string iso_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buffer[32];
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buffer;
}

std::string hex64(std::uint64_t value) {
    char buffer[24];
    std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(value));
    return buffer;
}

// Config snapshot embedded in output artifacts; secrets redacted.
json config_snapshot(const RunConfig& cfg) {
    return json{
        {"seed", cfg.seed},
        {"alpha", cfg.alpha},
        {"k", cfg.k},
        {"mock", cfg.mock_mode},
        {"no_ex", cfg.no_ex},
        {"concurrency", cfg.concurrency},
        {"budget_tokens", cfg.budget_tokens},
        {"model_name", cfg.endpoint.model_name},
        {"base_url", cfg.endpoint.base_url},
        {"api_key", cfg.endpoint.api_key.empty() ? "" : "<redacted>"},
    };
}

std::string sanitize_filename(std::string_view name) {
    std::string out;
    for (char c : name) {
        out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    }
    return out;
}

std::string instructions_for(const RunConfig& cfg) {
    if (cfg.template_path.empty()) return wast::default_instruction_template();
    return wast::read_file(cfg.template_path);
}

std::string db_path_for(const RunConfig& cfg, const std::string& db_id) {
    if (cfg.db_root.empty() || db_id.empty()) return "";
    const std::string path = cfg.db_root + "/" + db_id + "/" + db_id + ".sqlite";
    return std::filesystem::exists(path) ? path : "";
}

// Feature bags plus ordered sequences for every parsable record.
std::vector<wast::TrainExample> training_examples(const std::vector<wast::QueryRecord>& records,
                                                  std::vector<wast::SkippedRecord>* skipped) {
    std::vector<wast::TrainExample> examples;
    for (const auto& record : records) {
        try {
            wast::TrainExample example;
            example.sequence = wast::extract_ordered(record.sql);
            example.bag = wast::extract_all(record.sql);
            example.bag.source_query_id = record.query_id;
            examples.push_back(std::move(example));
        } catch (const wast::Error& e) {
            if (skipped) skipped->push_back({record.query_id, e.what()});
        }
    }
    return examples;
}

int cmd_build_index(const RunConfig&, const std::string& corpus_path,
                    const std::string& index_path) {
    const auto records = wast::load_corpus_json(corpus_path);
    std::vector<wast::SkippedRecord> skipped;
    const wast::CorpusIndex index = wast::build_index(records, &skipped);
    wast::save_index(index, index_path);

    std::size_t distinct_features = index.idf_table().doc_freq.size();
    std::cout << index.size() << " records, " << skipped.size() << " skipped, "
              << distinct_features << " distinct features\n";
    for (const auto& skip : skipped) {
        std::cerr << "skipped " << skip.query_id << ": " << skip.reason << "\n";
    }
    std::cout << "index fingerprint " << hex64(index.fingerprint()) << " -> " << index_path
              << "\n";
    return 0;
}

int cmd_train_attention(const RunConfig& cfg, const std::string& corpus_path,
                        const std::string& model_path,
                        const wast::AttentionHyperparams& hp) {
    const auto records = wast::load_corpus_json(corpus_path);
    std::vector<wast::SkippedRecord> skipped;
    const auto examples = training_examples(records, &skipped);
    if (examples.empty()) throw wast::AllRecordsUnparsable();

    std::vector<wast::FeatureBag> bags;
    bags.reserve(examples.size());
    for (const auto& example : examples) bags.push_back(example.bag);

    wast::TrainResult trained = wast::train_attention(examples, hp);

    wast::WeightModel model;
    model.idf_table = wast::compute_idf(bags);
    model.attention = std::move(trained.model);
    model.alpha = cfg.alpha;
    wast::save_weight_model(model, model_path);

    const double f1 = wast::reconstruction_micro_f1(model.attention, examples);
    std::cout << examples.size() << " training queries, " << skipped.size() << " skipped\n";
    std::cout << "first-epoch loss " << trained.epoch_losses.front() << ", last-epoch loss "
              << trained.epoch_losses.back() << "\n";
    std::cout << "reconstruction micro-F1 " << f1 << "\n";
    std::cout << "model fingerprint " << hex64(wast::weight_model_fingerprint(model)) << " -> "
              << model_path << "\n";
    return 0;
}

int cmd_retrieve(const RunConfig& cfg, const std::string& index_path,
                 const std::string& model_path, const std::string& sql, bool explain,
                 bool include_self) {
    const wast::CorpusIndex index = wast::load_index(index_path);
    wast::WeightModel model = wast::load_weight_model(model_path);
    model.alpha = cfg.alpha;

    const wast::RetrievalResult result =
        wast::top_k(index, model, sql, cfg.k, /*exclude_self=*/!include_self);

    json breakdown_json;
    if (explain && !result.ranked.empty()) {
        const wast::FeatureBag target_bag = wast::extract_all(sql);
        const auto sequence = wast::extract_ordered(sql);
        const auto weights = wast::feature_weights(model, target_bag, sequence);
        const wast::QueryRecord* hit = index.find(result.ranked.front().query_id);
        const wast::FeatureBag hit_bag = wast::extract_all(hit->sql);
        const auto breakdown = wast::similarity_breakdown(weights, target_bag, hit_bag);
        breakdown_json = json::array();
        for (const auto& term : breakdown.terms) {
            breakdown_json.push_back(json{{"feature", term.feature.str()},
                                          {"weight", term.weight},
                                          {"target_count", term.target_count},
                                          {"candidate_count", term.candidate_count},
                                          {"contribution", term.contribution}});
        }
    }

    if (cfg.json_output) {
        json out = json::array();
        for (const auto& hit : result.ranked) {
            const wast::QueryRecord* record = index.find(hit.query_id);
            out.push_back(json{{"query_id", hit.query_id},
                               {"score", hit.score},
                               {"sql", record ? record->sql : ""}});
        }
        json doc = {{"ranked", out}};
        if (explain) doc["explain_top_hit"] = breakdown_json;
        std::cout << doc.dump(2) << "\n";
    } else {
        for (const auto& hit : result.ranked) {
            const wast::QueryRecord* record = index.find(hit.query_id);
            char line[64];
            std::snprintf(line, sizeof(line), "%.6f", hit.score);
            std::cout << hit.query_id << "\t" << line << "\t" << (record ? record->sql : "")
                      << "\n";
        }
        if (explain && !breakdown_json.is_null()) {
            std::cout << "# per-feature contributions of the top hit\n"
                      << breakdown_json.dump(2) << "\n";
        }
    }
    return 0;
}

int cmd_generate(const RunConfig& cfg, const std::string& input_path,
                 const std::string& output_path, const std::string& index_path,
                 const std::string& model_path) {
    const wast::CorpusIndex index = wast::load_index(index_path);
    wast::WeightModel model = wast::load_weight_model(model_path);
    model.alpha = cfg.alpha;
    const auto inputs = wast::load_corpus_json(input_path);
    const std::string instructions = instructions_for(cfg);

    struct Prepared {
        const wast::QueryRecord* record;
        std::vector<std::string> shot_ids;
        std::string prompt;
        std::string error;
    };
    std::vector<Prepared> prepared;
    prepared.reserve(inputs.size());

    for (const auto& record : inputs) {
        Prepared p;
        p.record = &record;
        try {
            const auto result = wast::top_k(index, model, record.sql, cfg.k);
            std::vector<wast::Shot> shots;
            for (const auto& hit : result.ranked) {
                const wast::QueryRecord* demo = index.find(hit.query_id);
                if (demo == nullptr || demo->references.empty()) continue;
                shots.push_back({demo->sql, demo->references.front()});
                p.shot_ids.push_back(hit.query_id);
            }
            wast::PromptBundle bundle = wast::assemble_prompt(shots, record.sql, instructions);
            bundle = wast::fit_to_budget(bundle, cfg.budget_tokens,
                                         wast::default_decoding_params().max_new_tokens);
            if (bundle.dropped_shots > 0) {
                p.shot_ids.resize(p.shot_ids.size() - bundle.dropped_shots);
            }
            p.prompt = bundle.rendered;
        } catch (const wast::Error& e) {
            p.error = e.what();
        }
        prepared.push_back(std::move(p));
    }

    // Dump prompts before calling anything, one byte-stable file per query.
    if (!cfg.dump_prompts_dir.empty()) {
        std::filesystem::create_directories(cfg.dump_prompts_dir);
        for (const auto& p : prepared) {
            if (!p.error.empty()) continue;
            wast::write_file(cfg.dump_prompts_dir + "/" +
                                 sanitize_filename(p.record->query_id) + ".prompt.txt",
                             p.prompt);
        }
    }

    std::unique_ptr<wast::CompletionClient> client;
    if (cfg.mock_mode == "echo-gold") {
        auto canned = std::make_shared<std::unordered_map<std::string, std::string>>();
        for (const auto& p : prepared) {
            if (p.error.empty() && !p.record->references.empty()) {
                (*canned)[p.prompt] = p.record->references.front();
            }
        }
        client = std::make_unique<wast::MockCompletionClient>([canned](const std::string& prompt) {
            auto it = canned->find(prompt);
            if (it == canned->end()) throw wast::Error("mock has no canned response");
            return it->second;
        });
    } else if (!cfg.mock_mode.empty()) {
        throw wast::Error("unknown mock mode: " + cfg.mock_mode);
    } else {
        client = std::make_unique<wast::HttpCompletionClient>(cfg.endpoint);
    }

    std::optional<wast::ResponseCache> cache;
    if (cfg.use_cache) cache.emplace(cfg.cache_dir);

    std::vector<wast::CompletionRequest> requests;
    std::vector<std::size_t> request_owner;
    const wast::DecodingParams params = wast::default_decoding_params();
    std::vector<std::optional<std::string>> raw_texts(prepared.size());
    for (std::size_t i = 0; i < prepared.size(); ++i) {
        if (!prepared[i].error.empty()) continue;
        if (cache) {
            const std::string key =
                wast::ResponseCache::make_key(cfg.endpoint.model_name, prepared[i].prompt, params);
            if (auto hit = cache->get(key)) {
                raw_texts[i] = *hit;
                continue;
            }
        }
        requests.push_back({prepared[i].prompt, params});
        request_owner.push_back(i);
    }
    const auto batch = wast::complete_batch(*client, requests, cfg.concurrency);
    for (std::size_t r = 0; r < batch.size(); ++r) {
        const std::size_t i = request_owner[r];
        if (batch[r].ok) {
            raw_texts[i] = batch[r].response.text;
            if (cache) {
                cache->put(wast::ResponseCache::make_key(cfg.endpoint.model_name,
                                                         prepared[i].prompt, params),
                           batch[r].response.text);
            }
        } else {
            prepared[i].error = batch[r].error;
        }
    }

    std::ofstream out(output_path, std::ios::trunc);
    if (!out) throw wast::IoError("cannot open for writing: " + output_path);
    json meta = {{"_meta",
                  {{"created_at", iso_timestamp()},
                   {"config", config_snapshot(cfg)},
                   {"index_fingerprint", hex64(index.fingerprint())},
                   {"model_fingerprint", hex64(wast::weight_model_fingerprint(model))}}}};
    out << meta.dump() << "\n";

    int failures = 0;
    for (std::size_t i = 0; i < prepared.size(); ++i) {
        const auto& p = prepared[i];
        json line = {{"query_id", p.record->query_id}, {"sql", p.record->sql}};
        std::string generated;
        std::string error = p.error;
        if (error.empty() && raw_texts[i].has_value()) {
            try {
                generated = wast::postprocess_generation(*raw_texts[i]);
            } catch (const wast::Error& e) {
                error = e.what();
            }
        } else if (error.empty()) {
            error = "no completion produced";
        }
        if (error.empty()) {
            line["generated_nl"] = generated;
            line["shot_ids"] = p.shot_ids;
            line["prompt_hash"] = hex64(wast::fnv1a64(p.prompt));
        } else {
            line["generated_nl"] = nullptr;
            line["error"] = error;
            ++failures;
        }
        out << line.dump() << "\n";
    }
    out.close();

    std::cout << prepared.size() - failures << " generated, " << failures << " failed -> "
              << output_path << "\n";
    if (cfg.strict && failures > 0) return 1;
    return 0;
}

int cmd_evaluate(const RunConfig& cfg, const std::string& generations_path,
                 const std::string& gold_path, const std::string& out_dir,
                 std::string dataset_name) {
    const auto gold_records = wast::load_corpus_json(gold_path);
    std::map<std::string, const wast::QueryRecord*> gold_by_id;
    for (const auto& record : gold_records) gold_by_id[record.query_id] = &record;
    if (dataset_name.empty()) {
        dataset_name = std::filesystem::path(gold_path).stem().string();
    }

    struct GenLine {
        std::string query_id;
        std::string generated_nl;
        std::string error;
    };
    std::vector<GenLine> generations;
    {
        std::ifstream in(generations_path);
        if (!in) throw wast::IoError("cannot open generations: " + generations_path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const json doc = json::parse(line);
            if (doc.contains("_meta")) continue;
            GenLine gen;
            gen.query_id = doc.at("query_id").get<std::string>();
            if (doc.contains("generated_nl") && doc["generated_nl"].is_string()) {
                gen.generated_nl = doc["generated_nl"].get<std::string>();
            } else {
                gen.error = doc.value("error", "generation missing");
            }
            generations.push_back(std::move(gen));
        }
    }
    if (generations.empty()) throw wast::EmptyCorpus();

    // Round-trip inputs; schema text comes from the database when available.
    std::map<std::string, std::string> schema_cache;
    std::vector<wast::RoundtripInput> inputs;
    std::vector<std::string> pre_failures(generations.size());
    for (std::size_t i = 0; i < generations.size(); ++i) {
        const auto& gen = generations[i];
        const auto it = gold_by_id.find(gen.query_id);
        if (it == gold_by_id.end()) {
            pre_failures[i] = "query_id not in gold corpus";
            continue;
        }
        if (!gen.error.empty()) {
            pre_failures[i] = "generation failed: " + gen.error;
            continue;
        }
        wast::RoundtripInput input;
        input.query_id = gen.query_id;
        input.gold_sql = it->second->sql;
        input.generated_nl = gen.generated_nl;
        input.db_id = it->second->db_id;
        const std::string db_path = db_path_for(cfg, input.db_id);
        if (!db_path.empty()) {
            auto cached = schema_cache.find(input.db_id);
            if (cached == schema_cache.end()) {
                cached = schema_cache.emplace(input.db_id,
                                              wast::schema_text_from_db(db_path)).first;
            }
            input.schema_text = cached->second;
        }
        inputs.push_back(std::move(input));
    }

    std::unique_ptr<wast::CompletionClient> parser;
    if (cfg.mock_mode == "echo-gold") {
        auto canned = std::make_shared<std::unordered_map<std::string, std::string>>();
        for (const auto& input : inputs) {
            (*canned)[wast::render_parser_prompt(input.schema_text, input.generated_nl)] =
                input.gold_sql;
        }
        parser = std::make_unique<wast::MockCompletionClient>([canned](const std::string& prompt) {
            auto it = canned->find(prompt);
            if (it == canned->end()) throw wast::Error("mock has no canned response");
            return it->second;
        });
    } else if (!cfg.mock_mode.empty()) {
        throw wast::Error("unknown mock mode: " + cfg.mock_mode);
    } else {
        parser = std::make_unique<wast::HttpCompletionClient>(cfg.parser_endpoint);
    }

    auto cases = wast::roundtrip(inputs, *parser, cfg.concurrency);
    for (auto& eval_case : cases) {
        const auto it = gold_by_id.find(eval_case.query_id);
        eval_case.db_path = it == gold_by_id.end() ? "" : db_path_for(cfg, it->second->db_id);
    }

    // Merge pre-flight failures back in input order.
    std::vector<wast::CaseResult> results;
    results.reserve(generations.size());
    std::size_t case_cursor = 0;
    for (std::size_t i = 0; i < generations.size(); ++i) {
        if (!pre_failures[i].empty()) {
            wast::CaseResult result;
            result.query_id = generations[i].query_id;
            result.em = false;
            result.ex = cfg.no_ex ? wast::ExStatus::Skipped : wast::ExStatus::False;
            result.failure_reason = pre_failures[i];
            results.push_back(std::move(result));
            continue;
        }
        results.push_back(wast::evaluate_case(cases[case_cursor], !cfg.no_ex));
        ++case_cursor;
    }

    const wast::EvalReport report = wast::aggregate(dataset_name, results, !cfg.no_ex);

    std::filesystem::create_directories(out_dir);
    const json meta = {{"created_at", iso_timestamp()},
                       {"config", config_snapshot(cfg)},
                       {"generations", generations_path},
                       {"gold_corpus", gold_path}};

    std::string text_report = render_report_text(report);
    wast::write_file(out_dir + "/report.txt",
                     "# generated " + meta["created_at"].get<std::string>() + "\n" + text_report);

    json report_doc = wast::report_to_json(report);
    report_doc["_meta"] = meta;
    wast::write_file(out_dir + "/report.json", report_doc.dump(2) + "\n");

    std::ostringstream cases_out;
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < generations.size(); ++i) {
        const auto& result = results[i];
        json line = {{"query_id", result.query_id},
                     {"em", result.em},
                     {"ex", wast::ex_status_name(result.ex)},
                     {"failure_reason", result.failure_reason}};
        if (pre_failures[i].empty()) {
            line["reconstructed_sql"] = cases[cursor].reconstructed_sql;
            line["generated_nl"] = cases[cursor].generated_nl;
            ++cursor;
        }
        cases_out << line.dump() << "\n";
    }
    wast::write_file(out_dir + "/cases.jsonl", cases_out.str());

    std::cout << text_report;
    std::cout << "reports -> " << out_dir << "\n";

    int hard_failures = 0;
    for (const auto& result : results) {
        if (!result.failure_reason.empty()) ++hard_failures;
    }
    if (cfg.strict && hard_failures > 0) return 1;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weighted structural retrieval and round-trip evaluation for SQL-to-Text"};
    app.set_config("--config", "", "Config file (INI-style key=value)");

    RunConfig cfg;
    app.add_option("--seed", cfg.seed, "Seed for every random choice")->envname("WAST_SEED");
    app.add_option("--alpha", cfg.alpha, "IDF/attention balance in [0,1]")
        ->check(CLI::Range(0.0, 1.0));
    app.add_option("--k", cfg.k, "Number of few-shot demonstrations")->check(CLI::Range(1, 1000));
    app.add_option("--mock", cfg.mock_mode, "Mock endpoint mode (echo-gold)");
    app.add_flag("--json", cfg.json_output, "Machine-readable output");
    app.add_flag("--strict", cfg.strict, "Exit 1 on partial failures");
    app.add_flag("--no-ex", cfg.no_ex, "Skip execution accuracy");
    app.add_option("--dump-prompts", cfg.dump_prompts_dir, "Write each rendered prompt here");
    app.add_option("--template", cfg.template_path, "Instruction template override file");
    app.add_option("--db-root", cfg.db_root, "Directory holding <db_id>/<db_id>.sqlite");
    app.add_option("--concurrency", cfg.concurrency, "In-flight request cap")
        ->check(CLI::Range(1, 64));
    app.add_flag("--cache", cfg.use_cache, "Cache completions on disk");
    app.add_option("--cache-dir", cfg.cache_dir, "Completion cache directory");
    app.add_option("--budget", cfg.budget_tokens, "Prompt token budget");
    app.add_option("--base-url", cfg.endpoint.base_url, "Generation endpoint base URL")
        ->envname("WAST_BASE_URL");
    app.add_option("--api-key", cfg.endpoint.api_key, "API key")->envname("WAST_API_KEY");
    app.add_option("--model", cfg.endpoint.model_name, "Generation model name")
        ->envname("WAST_MODEL");
    app.add_option("--timeout", cfg.endpoint.timeout_seconds, "Request timeout seconds");
    app.add_option("--max-retries", cfg.endpoint.max_retries, "Retries per request");
    app.add_option("--parser-base-url", cfg.parser_endpoint.base_url,
                   "Round-trip parser endpoint base URL");
    app.add_option("--parser-model", cfg.parser_endpoint.model_name, "Round-trip parser model");

    std::string corpus_path, index_path, model_path, sql_text, input_path, output_path;
    std::string generations_path, gold_path, out_dir = "eval-out", dataset_name;
    bool explain = false, include_self = false;
    wast::AttentionHyperparams hp;

    auto* build = app.add_subcommand("build-index", "Ingest a corpus and write the index");
    build->add_option("corpus", corpus_path, "Corpus JSON file")->required();
    build->add_option("index", index_path, "Output index file")->required();

    auto* train = app.add_subcommand("train-attention", "Train the salience model + IDF table");
    train->add_option("corpus", corpus_path, "Corpus JSON file")->required();
    train->add_option("model", model_path, "Output model file")->required();
    train->add_option("--epochs", hp.epochs)->check(CLI::Range(1, 100000));
    train->add_option("--dim", hp.embedding_dim)->check(CLI::Range(2, 4096));
    train->add_option("--heads", hp.n_heads)->check(CLI::Range(1, 64));
    train->add_option("--layers", hp.n_layers)->check(CLI::Range(1, 16));
    train->add_option("--lr", hp.learning_rate);
    train->add_option("--batch", hp.batch_size)->check(CLI::Range(1, 8192));
    train->add_option("--max-seq-len", hp.max_seq_len)->check(CLI::Range(4, 8192));

    auto* retrieve = app.add_subcommand("retrieve", "Rank the corpus against a target query");
    retrieve->add_option("index", index_path, "Index file")->required();
    retrieve->add_option("model", model_path, "Model file")->required();
    retrieve->add_option("sql", sql_text, "Target SQL")->required();
    retrieve->add_flag("--explain", explain, "Per-feature breakdown of the top hit");
    retrieve->add_flag("--include-self", include_self, "Keep records equal to the target");

    auto* generate = app.add_subcommand("generate", "Retrieve, prompt and generate descriptions");
    generate->add_option("input", input_path, "Input corpus JSON")->required();
    generate->add_option("output", output_path, "Output JSONL")->required();
    generate->add_option("--index", index_path, "Index file")->required();
    generate->add_option("--model-file", model_path, "Model file")->required();

    auto* evaluate = app.add_subcommand("evaluate", "Round-trip EM/EX evaluation");
    evaluate->add_option("generations", generations_path, "Generations JSONL")->required();
    evaluate->add_option("gold", gold_path, "Gold corpus JSON")->required();
    evaluate->add_option("--out", out_dir, "Report output directory");
    evaluate->add_option("--dataset-name", dataset_name, "Name in the report header");

    app.require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        hp.rng_seed = cfg.seed;
        if (build->parsed()) return cmd_build_index(cfg, corpus_path, index_path);
        if (train->parsed()) return cmd_train_attention(cfg, corpus_path, model_path, hp);
        if (retrieve->parsed()) {
            return cmd_retrieve(cfg, index_path, model_path, sql_text, explain, include_self);
        }
        if (generate->parsed()) {
            return cmd_generate(cfg, input_path, output_path, index_path, model_path);
        }
        if (evaluate->parsed()) {
            return cmd_evaluate(cfg, generations_path, gold_path, out_dir, dataset_name);
        }
    } catch (const wast::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const wast::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
