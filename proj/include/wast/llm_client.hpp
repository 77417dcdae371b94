#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wast/prompt.hpp"

namespace wast {

// Connection settings for a chat/completions-style endpoint. The api_key is
// sent as a bearer header and must never reach logs or output artifacts.
struct EndpointConfig {
    std::string base_url;
    std::string api_key;
    std::string model_name;
    int timeout_seconds = 120;
    int max_retries = 3;
    double retry_backoff_seconds = 2.0;
    std::string api_path = "/v1/chat/completions";
};

enum class FinishReason { Stop, Length, Error };

const char* finish_reason_name(FinishReason reason);

struct CompletionRequest {
    std::string prompt;
    DecodingParams params;
};

struct CompletionResponse {
    std::string text;  // completion only, prompt echo stripped
    FinishReason finish_reason = FinishReason::Stop;
    long latency_ms = 0;
    std::optional<long> prompt_tokens;
    std::optional<long> completion_tokens;
};

class CompletionClient {
public:
    virtual ~CompletionClient() = default;
    virtual CompletionResponse complete(const CompletionRequest& request) = 0;
};

// Talks JSON-over-HTTP in the common open inference-server shape. Transient
// failures (HTTP 429/5xx, transport errors) are retried with exponential
// backoff up to max_retries; other HTTP errors raise EndpointError and a
// 2xx body that cannot be interpreted raises MalformedResponse without
// retrying.
class HttpCompletionClient : public CompletionClient {
public:
    explicit HttpCompletionClient(EndpointConfig config);
    CompletionResponse complete(const CompletionRequest& request) override;

private:
    EndpointConfig config_;
};

// Deterministic stand-in for hermetic tests and --mock runs.
class MockCompletionClient : public CompletionClient {
public:
    using Responder = std::function<std::string(const std::string& prompt)>;
    explicit MockCompletionClient(Responder responder) : responder_(std::move(responder)) {}

    CompletionResponse complete(const CompletionRequest& request) override {
        return {responder_(request.prompt), FinishReason::Stop, 0, std::nullopt, std::nullopt};
    }

private:
    Responder responder_;
};

struct BatchItem {
    bool ok = false;
    CompletionResponse response;
    std::string error;
};

// Runs requests through at most max_in_flight worker threads; results come
// back in input order regardless of completion order.
std::vector<BatchItem> complete_batch(CompletionClient& client,
                                      const std::vector<CompletionRequest>& requests,
                                      int max_in_flight = 4);

// Reduces a raw generation to its first sentence block: markdown fences and
// a leading "Natural Language:" label are stripped, and anything from a
// leaked "SQL:" onward is cut. Throws EmptyGeneration when nothing survives.
std::string postprocess_generation(std::string_view raw);

// Optional on-disk replay cache keyed by (model, prompt, decoding params).
class ResponseCache {
public:
    explicit ResponseCache(std::string dir);

    static std::string make_key(const std::string& model_name, const std::string& prompt,
                                const DecodingParams& params);

    std::optional<std::string> get(const std::string& key) const;
    void put(const std::string& key, const std::string& text) const;

private:
    std::string dir_;
};

}  // namespace wast
