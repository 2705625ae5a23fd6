#include "casbench/llm/provider.hpp"

#include <ostream>
#include <thread>

#include <json.hpp>

namespace casbench::llm {

using nlohmann::json;

namespace {

json parse_body(const HttpResponse& response) {
    try {
        return json::parse(response.body);
    } catch (const json::parse_error& e) {
        throw ProviderRefusal(std::string("unparseable provider response: ") + e.what(), response.body,
                              response.status);
    }
}

long long estimate_tokens(const std::string& text) {
    return static_cast<long long>((text.size() + 3) / 4);
}

}  // namespace

HttpResponse RecordingTransport::post(const HttpRequest& request) {
    {
        std::lock_guard lock(mutex_);
        requests_.push_back(request);
        if (log_ != nullptr) {
            json line{{"path", request.path}};
            try {
                line["body"] = json::parse(request.body);
            } catch (const json::parse_error&) {
                line["body"] = request.body;
            }
            *log_ << line.dump() << '\n' << std::flush;
        }
    }
    return responder_(request);
}

std::vector<HttpRequest> RecordingTransport::requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
}

HttpRequest AnthropicAdapter::build_request(const std::vector<ChatMessage>& history,
                                            const GenerationParams& params) const {
    json body{{"model", params.model_id}, {"max_tokens", params.max_tokens}};
    json messages = json::array();
    for (const auto& message : history) {
        if (message.role == Role::system) {
            body["system"] = message.content;
        } else {
            messages.push_back({{"role", to_string(message.role)}, {"content", message.content}});
        }
    }
    body["messages"] = std::move(messages);
    if (params.temperature) body["temperature"] = *params.temperature;
    if (params.thinking_budget) {
        body["max_tokens"] = params.max_tokens + *params.thinking_budget;
        body["thinking"] = {{"type", "enabled"}, {"budget_tokens", *params.thinking_budget}};
    }
    return {"/v1/messages",
            {{"x-api-key", api_key_}, {"anthropic-version", api_version_}, {"content-type", "application/json"}},
            body.dump()};
}

Completion AnthropicAdapter::parse_response(const HttpResponse& response, const GenerationParams& params) const {
    const json body = parse_body(response);
    if (!body.contains("content") || !body["content"].is_array()) {
        throw ProviderRefusal("provider response has no content array", response.body, response.status);
    }
    std::string text;
    std::string thinking;
    for (const auto& block : body["content"]) {
        const auto type = block.value("type", "");
        if (type == "text") text += block.value("text", "");
        if (type == "thinking") thinking += block.value("thinking", "");
    }
    if (text.empty()) throw ProviderRefusal("provider returned no text", response.body, response.status);

    Usage usage;
    if (body.contains("usage")) {
        usage.input_tokens = body["usage"].value("input_tokens", 0LL);
        usage.output_tokens = body["usage"].value("output_tokens", 0LL);
    }
    if (params.thinking_budget && !thinking.empty()) {
        // The API folds thinking into output_tokens; split off an estimate.
        usage.thinking_tokens = std::min<long long>(estimate_tokens(thinking), *params.thinking_budget);
        usage.output_tokens = std::max<long long>(0, usage.output_tokens - usage.thinking_tokens);
    }
    return {{Role::assistant, std::move(text)}, usage};
}

HttpRequest OpenAiAdapter::build_request(const std::vector<ChatMessage>& history,
                                         const GenerationParams& params) const {
    json body{{"model", params.model_id}};
    json messages = json::array();
    for (const auto& message : history) {
        messages.push_back({{"role", to_string(message.role)}, {"content", message.content}});
    }
    body["messages"] = std::move(messages);
    if (params.temperature) body["temperature"] = *params.temperature;
    if (params.thinking_budget) {
        body["max_completion_tokens"] = params.max_tokens + *params.thinking_budget;
        body["reasoning_effort"] = "low";
    } else {
        body["max_tokens"] = params.max_tokens;
    }
    return {"/v1/chat/completions",
            {{"Authorization", "Bearer " + api_key_}, {"content-type", "application/json"}},
            body.dump()};
}

Completion OpenAiAdapter::parse_response(const HttpResponse& response, const GenerationParams& params) const {
    const json body = parse_body(response);
    if (!body.contains("choices") || !body["choices"].is_array() || body["choices"].empty()) {
        throw ProviderRefusal("provider response has no choices", response.body, response.status);
    }
    const auto& message = body["choices"][0]["message"];
    std::string text = message.contains("content") && message["content"].is_string()
                           ? message["content"].get<std::string>()
                           : std::string{};
    if (text.empty()) throw ProviderRefusal("provider returned no text", response.body, response.status);

    Usage usage;
    if (body.contains("usage")) {
        const auto& u = body["usage"];
        usage.input_tokens = u.value("prompt_tokens", 0LL);
        usage.output_tokens = u.value("completion_tokens", 0LL);
        if (params.thinking_budget && u.contains("completion_tokens_details")) {
            usage.thinking_tokens = u["completion_tokens_details"].value("reasoning_tokens", 0LL);
            usage.output_tokens = std::max<long long>(0, usage.output_tokens - usage.thinking_tokens);
        }
    }
    return {{Role::assistant, std::move(text)}, usage};
}

std::unique_ptr<ProviderAdapter> make_adapter(const std::string& name, const std::string& api_key) {
    if (name == "anthropic") return std::make_unique<AnthropicAdapter>(api_key);
    if (name == "openai") return std::make_unique<OpenAiAdapter>(api_key);
    throw std::invalid_argument("unknown provider adapter '" + name + "' (expected anthropic or openai)");
}

bool is_retryable_status(int status) {
    return status == 429 || (status >= 500 && status <= 599);
}

ProviderClient::ProviderClient(std::unique_ptr<ProviderAdapter> adapter, std::shared_ptr<HttpTransport> transport,
                               RetryPolicy retry)
    : adapter_(std::move(adapter)), transport_(std::move(transport)), retry_(std::move(retry)) {
    if (!retry_.sleep) retry_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

Completion ProviderClient::complete(const std::vector<ChatMessage>& history, const GenerationParams& params) {
    validate_history(history);
    params.validate();
    const HttpRequest request = adapter_->build_request(history, params);

    std::string last_failure;
    for (std::size_t attempt = 0;; ++attempt) {
        try {
            const HttpResponse response = transport_->post(request);
            if (response.status >= 200 && response.status < 300) return adapter_->parse_response(response, params);
            if (!is_retryable_status(response.status)) {
                throw ProviderRefusal(adapter_->name() + " refused the request (HTTP " +
                                          std::to_string(response.status) + ")",
                                      response.body, response.status);
            }
            last_failure = "HTTP " + std::to_string(response.status) + ": " + response.body.substr(0, 200);
        } catch (const TransportError& e) {
            last_failure = e.what();
        }
        if (attempt >= retry_.backoff.size()) break;
        retry_.sleep(retry_.backoff[attempt]);
    }
    throw TransportError(adapter_->name() + " request failed after " + std::to_string(retry_.backoff.size()) +
                         " retries: " + last_failure);
}

}  // namespace casbench::llm
