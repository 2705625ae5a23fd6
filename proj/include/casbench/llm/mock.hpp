#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <mutex>

#include "casbench/llm/types.hpp"

namespace casbench::llm {

struct ScriptedResponse {
    std::string text;
    Usage usage;

    bool operator==(const ScriptedResponse&) const = default;
};

/// Pops one scripted response per call, in order. Safe to share between threads.
class ScriptedMockClient final : public ChatClient {
public:
    explicit ScriptedMockClient(std::vector<ScriptedResponse> script);

    Completion complete(const std::vector<ChatMessage>& history, const GenerationParams& params) override;

    std::size_t remaining() const;
    std::size_t calls() const;

private:
    mutable std::mutex mutex_;
    std::deque<ScriptedResponse> queue_;
    std::size_t calls_ = 0;
};

std::shared_ptr<ScriptedMockClient> script_mock(std::vector<ScriptedResponse> responses);

/// Delegates to a callable; handy for adversarial mocks in tests.
class FunctionMockClient final : public ChatClient {
public:
    using Fn = std::function<Completion(const std::vector<ChatMessage>&, const GenerationParams&)>;

    explicit FunctionMockClient(Fn fn) : fn_(std::move(fn)) {}

    Completion complete(const std::vector<ChatMessage>& history, const GenerationParams& params) override {
        return fn_(history, params);
    }

private:
    Fn fn_;
};

/// Decorator enforcing a cumulative token ceiling. A call is refused with
/// BudgetExceeded once the tokens already spent reach the ceiling.
class BudgetGuard final : public ChatClient {
public:
    BudgetGuard(std::shared_ptr<ChatClient> inner, long long token_ceiling)
        : inner_(std::move(inner)), ceiling_(token_ceiling) {}

    Completion complete(const std::vector<ChatMessage>& history, const GenerationParams& params) override;

    long long spent() const;

private:
    std::shared_ptr<ChatClient> inner_;
    long long ceiling_;
    mutable std::mutex mutex_;
    long long spent_ = 0;
};

}  // namespace casbench::llm
