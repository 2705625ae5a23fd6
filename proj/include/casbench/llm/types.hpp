#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace casbench::llm {

enum class Role { system, user, assistant };

std::string_view to_string(Role role);
std::optional<Role> role_from_string(std::string_view name);

struct ChatMessage {
    Role role = Role::user;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

inline constexpr int default_max_tokens = 1024;
inline constexpr int default_thinking_budget = 1024;

struct GenerationParams {
    std::string model_id;
    int max_tokens = default_max_tokens;
    std::optional<int> thinking_budget;  // absent: thinking off
    std::optional<double> temperature;   // absent: provider default

    bool operator==(const GenerationParams&) const = default;

    /// Throws std::invalid_argument.
    void validate() const;
};

struct Usage {
    long long input_tokens = 0;
    long long output_tokens = 0;
    long long thinking_tokens = 0;

    long long total() const { return input_tokens + output_tokens + thinking_tokens; }

    Usage& operator+=(const Usage& other);
    bool operator==(const Usage&) const = default;
};

struct Completion {
    ChatMessage message;
    Usage usage;
};

class LlmError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Network or server-side failure that survived every retry.
class TransportError : public LlmError {
public:
    using LlmError::LlmError;
};

/// The provider rejected the request; `payload` is its response body.
class ProviderRefusal : public LlmError {
public:
    ProviderRefusal(const std::string& what, std::string payload, int http_status = 0)
        : LlmError(what), payload_(std::move(payload)), http_status_(http_status) {}

    const std::string& payload() const { return payload_; }
    int http_status() const { return http_status_; }

private:
    std::string payload_;
    int http_status_;
};

class BudgetExceeded : public LlmError {
public:
    using LlmError::LlmError;
};

/// Checks the shape `complete` expects: exactly one leading system message and
/// non-empty user/assistant contents. Throws std::invalid_argument.
void validate_history(const std::vector<ChatMessage>& history);

class ChatClient {
public:
    virtual ~ChatClient() = default;

    /// Returns the assistant reply verbatim. Never modifies `history`.
    virtual Completion complete(const std::vector<ChatMessage>& history, const GenerationParams& params) = 0;
};

}  // namespace casbench::llm
