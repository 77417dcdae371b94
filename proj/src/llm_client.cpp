#include "wast/llm_client.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "wast/errors.hpp"
#include "wast/serialize.hpp"

namespace wast {

namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return std::string(s.substr(begin, end - begin));
}

// Splits "http://host:port/prefix" into the client origin and a path prefix.
std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
    const std::size_t scheme = base_url.find("://");
    const std::size_t path_start =
        base_url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (path_start == std::string::npos) return {base_url, ""};
    std::string prefix = base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base_url.substr(0, path_start), prefix};
}

bool transient_status(int status) {
    return status == 429 || (status >= 500 && status <= 599);
}

CompletionResponse parse_response_body(const std::string& body, const std::string& prompt) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::exception&) {
        throw MalformedResponse("endpoint returned a non-JSON body");
    }
    if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
        throw MalformedResponse("endpoint response has no choices");
    }
    const auto& choice = doc["choices"][0];
    std::string text;
    if (choice.contains("message") && choice["message"].contains("content")) {
        text = choice["message"]["content"].get<std::string>();
    } else if (choice.contains("text")) {
        text = choice["text"].get<std::string>();
    } else {
        throw MalformedResponse("endpoint choice carries neither message.content nor text");
    }
    if (text.rfind(prompt, 0) == 0) text.erase(0, prompt.size());  // prompt echo

    CompletionResponse response;
    response.text = trim(text);
    response.finish_reason = FinishReason::Stop;
    if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
        const std::string reason = choice["finish_reason"].get<std::string>();
        if (reason == "length") response.finish_reason = FinishReason::Length;
        else if (reason == "error") response.finish_reason = FinishReason::Error;
    }
    if (doc.contains("usage") && doc["usage"].is_object()) {
        const auto& usage = doc["usage"];
        if (usage.contains("prompt_tokens")) response.prompt_tokens = usage["prompt_tokens"].get<long>();
        if (usage.contains("completion_tokens")) {
            response.completion_tokens = usage["completion_tokens"].get<long>();
        }
    }
    return response;
}

}  // namespace

const char* finish_reason_name(FinishReason reason) {
    switch (reason) {
        case FinishReason::Stop: return "stop";
        case FinishReason::Length: return "length";
        case FinishReason::Error: return "error";
    }
    return "stop";
}

HttpCompletionClient::HttpCompletionClient(EndpointConfig config) : config_(std::move(config)) {}

CompletionResponse HttpCompletionClient::complete(const CompletionRequest& request) {
    const auto [origin, prefix] = split_base_url(config_.base_url);
    const std::string path = prefix + config_.api_path;

    json body = {
        {"model", config_.model_name},
        {"messages", json::array({json{{"role", "user"}, {"content", request.prompt}}})},
        {"temperature", request.params.temperature},
        {"top_p", request.params.top_p},
        {"top_k", request.params.top_k},
        {"max_tokens", request.params.max_new_tokens},
    };
    const std::string payload = body.dump();

    httplib::Headers headers;
    if (!config_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config_.api_key);
    }

    const auto started = std::chrono::steady_clock::now();
    std::string last_failure = "no attempt made";
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            const double seconds =
                config_.retry_backoff_seconds * std::pow(2.0, attempt - 1);
            std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
        }
        httplib::Client client(origin);
        client.set_connection_timeout(config_.timeout_seconds, 0);
        client.set_read_timeout(config_.timeout_seconds, 0);
        client.set_write_timeout(config_.timeout_seconds, 0);

        httplib::Result result = client.Post(path, headers, payload, "application/json");
        if (!result) {
            last_failure = "transport error: " + httplib::to_string(result.error());
            continue;
        }
        if (transient_status(result->status)) {
            last_failure = "transient HTTP " + std::to_string(result->status);
            continue;
        }
        if (result->status < 200 || result->status >= 300) {
            throw EndpointError("endpoint returned HTTP " + std::to_string(result->status),
                                result->status);
        }
        CompletionResponse response = parse_response_body(result->body, request.prompt);
        response.latency_ms = static_cast<long>(
            std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - started)
                .count());
        return response;
    }
    throw RetriesExhausted("gave up after " + std::to_string(config_.max_retries + 1) +
                           " attempts; last failure: " + last_failure);
}

std::vector<BatchItem> complete_batch(CompletionClient& client,
                                      const std::vector<CompletionRequest>& requests,
                                      int max_in_flight) {
    std::vector<BatchItem> results(requests.size());
    if (requests.empty()) return results;

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= requests.size()) return;
            try {
                results[i].response = client.complete(requests[i]);
                results[i].ok = true;
            } catch (const std::exception& e) {
                results[i].ok = false;
                results[i].error = e.what();
            }
        }
    };

    const int n_workers =
        std::max(1, std::min<int>(max_in_flight, static_cast<int>(requests.size())));
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return results;
}

std::string postprocess_generation(std::string_view raw) {
    // Drop markdown fence lines, keep everything else line by line.
    std::vector<std::string> lines;
    {
        std::string current;
        std::istringstream stream{std::string(raw)};
        while (std::getline(stream, current)) {
            if (trim(current).rfind("```", 0) == 0) continue;
            lines.push_back(current);
        }
    }

    std::string block;
    for (const auto& line : lines) {
        std::string candidate = trim(line);
        if (candidate.empty()) continue;
        // Leading label, e.g. "Natural Language: ..." or "natural language:".
        static const std::string label = "natural language:";
        std::string lowered = candidate;
        for (char& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (lowered.rfind(label, 0) == 0) {
            candidate = trim(candidate.substr(label.size()));
            if (candidate.empty()) continue;
        }
        block = candidate;
        break;
    }

    // Cut any leaked SQL continuation on the same line.
    const std::size_t leak = block.find("SQL:");
    if (leak != std::string::npos) block = trim(block.substr(0, leak));

    if (block.empty()) throw EmptyGeneration();
    return block;
}

ResponseCache::ResponseCache(std::string dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::string ResponseCache::make_key(const std::string& model_name, const std::string& prompt,
                                    const DecodingParams& params) {
    ByteWriter w;
    w.put_str(model_name);
    w.put_str(prompt);
    w.put_f64(params.temperature);
    w.put_f64(params.top_p);
    w.put_u32(static_cast<std::uint32_t>(params.top_k));
    w.put_u32(static_cast<std::uint32_t>(params.max_new_tokens));
    std::ostringstream key;
    key << std::hex << fnv1a64(w.buffer());
    return key.str();
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
    const std::string path = dir_ + "/" + key + ".txt";
    if (!std::filesystem::exists(path)) return std::nullopt;
    return read_file(path);
}

void ResponseCache::put(const std::string& key, const std::string& text) const {
    write_file(dir_ + "/" + key + ".txt", text);
}

}  // namespace wast
