#include "casbench/llm/types.hpp"

namespace casbench::llm {

std::string_view to_string(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

std::optional<Role> role_from_string(std::string_view name) {
    for (auto role : {Role::system, Role::user, Role::assistant}) {
        if (to_string(role) == name) return role;
    }
    return std::nullopt;
}

void GenerationParams::validate() const {
    if (max_tokens < 1) throw std::invalid_argument("max_tokens must be at least 1");
    if (thinking_budget && *thinking_budget < 1) throw std::invalid_argument("thinking_budget must be at least 1");
}

Usage& Usage::operator+=(const Usage& other) {
    input_tokens += other.input_tokens;
    output_tokens += other.output_tokens;
    thinking_tokens += other.thinking_tokens;
    return *this;
}

void validate_history(const std::vector<ChatMessage>& history) {
    if (history.empty() || history.front().role != Role::system) {
        throw std::invalid_argument("history must begin with a system message");
    }
    for (std::size_t i = 1; i < history.size(); ++i) {
        if (history[i].role == Role::system) throw std::invalid_argument("history has more than one system message");
        if (history[i].content.empty()) {
            throw std::invalid_argument("empty " + std::string(to_string(history[i].role)) + " message at position " +
                                        std::to_string(i));
        }
    }
}

}  // namespace casbench::llm
