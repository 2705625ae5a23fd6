#pragma once

#include <chrono>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "casbench/llm/types.hpp"

namespace casbench::llm {

struct HttpRequest {
    std::string path;
    std::vector<std::pair<std::string, std::string>> headers;
    std::string body;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

class HttpTransport {
public:
    virtual ~HttpTransport() = default;

    /// Throws TransportError when no HTTP response was obtained at all.
    virtual HttpResponse post(const HttpRequest& request) = 0;
};

/// cpp-httplib client; `endpoint` is a base URL such as https://api.anthropic.com.
class HttplibTransport final : public HttpTransport {
public:
    explicit HttplibTransport(std::string endpoint, std::chrono::seconds timeout = std::chrono::seconds(600));

    HttpResponse post(const HttpRequest& request) override;

private:
    std::string endpoint_;
    std::chrono::seconds timeout_;
};

/// Logs every request body as one JSONL line, then answers via `responder`.
class RecordingTransport final : public HttpTransport {
public:
    using Responder = std::function<HttpResponse(const HttpRequest&)>;

    explicit RecordingTransport(Responder responder, std::ostream* log = nullptr)
        : responder_(std::move(responder)), log_(log) {}

    HttpResponse post(const HttpRequest& request) override;

    std::vector<HttpRequest> requests() const;

private:
    Responder responder_;
    std::ostream* log_;
    mutable std::mutex mutex_;
    std::vector<HttpRequest> requests_;
};

/// Maps (history, params) to one vendor's wire format and back.
class ProviderAdapter {
public:
    virtual ~ProviderAdapter() = default;
    virtual std::string name() const = 0;
    virtual HttpRequest build_request(const std::vector<ChatMessage>& history, const GenerationParams& params) const = 0;
    /// Called for 2xx responses only. Throws ProviderRefusal on malformed bodies.
    virtual Completion parse_response(const HttpResponse& response, const GenerationParams& params) const = 0;
};

/// Anthropic Messages API. When thinking is on, the request's max_tokens is
/// max_tokens + thinking_budget since the API counts thinking inside max_tokens.
class AnthropicAdapter final : public ProviderAdapter {
public:
    explicit AnthropicAdapter(std::string api_key, std::string api_version = "2023-06-01")
        : api_key_(std::move(api_key)), api_version_(std::move(api_version)) {}

    std::string name() const override { return "anthropic"; }
    HttpRequest build_request(const std::vector<ChatMessage>& history, const GenerationParams& params) const override;
    Completion parse_response(const HttpResponse& response, const GenerationParams& params) const override;

private:
    std::string api_key_;
    std::string api_version_;
};

/// OpenAI-compatible chat completions.
class OpenAiAdapter final : public ProviderAdapter {
public:
    explicit OpenAiAdapter(std::string api_key) : api_key_(std::move(api_key)) {}

    std::string name() const override { return "openai"; }
    HttpRequest build_request(const std::vector<ChatMessage>& history, const GenerationParams& params) const override;
    Completion parse_response(const HttpResponse& response, const GenerationParams& params) const override;

private:
    std::string api_key_;
};

std::unique_ptr<ProviderAdapter> make_adapter(const std::string& name, const std::string& api_key);

struct RetryPolicy {
    std::vector<std::chrono::milliseconds> backoff{std::chrono::seconds(1), std::chrono::seconds(4),
                                                   std::chrono::seconds(16)};
    std::function<void(std::chrono::milliseconds)> sleep;  // defaults to a real sleep
};

/// Retryable: transport failures, 429, 5xx (including 529 overloaded).
bool is_retryable_status(int status);

class ProviderClient final : public ChatClient {
public:
    ProviderClient(std::unique_ptr<ProviderAdapter> adapter, std::shared_ptr<HttpTransport> transport,
                   RetryPolicy retry = {});

    Completion complete(const std::vector<ChatMessage>& history, const GenerationParams& params) override;

private:
    std::unique_ptr<ProviderAdapter> adapter_;
    std::shared_ptr<HttpTransport> transport_;
    RetryPolicy retry_;
};

}  // namespace casbench::llm
