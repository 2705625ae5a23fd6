#include "casbench/llm/mock.hpp"

namespace casbench::llm {

ScriptedMockClient::ScriptedMockClient(std::vector<ScriptedResponse> script)
    : queue_(std::make_move_iterator(script.begin()), std::make_move_iterator(script.end())) {}

Completion ScriptedMockClient::complete(const std::vector<ChatMessage>& history, const GenerationParams& params) {
    validate_history(history);
    params.validate();
    std::lock_guard lock(mutex_);
    if (queue_.empty()) throw TransportError("scripted mock exhausted after " + std::to_string(calls_) + " calls");
    ScriptedResponse next = std::move(queue_.front());
    queue_.pop_front();
    ++calls_;
    return {{Role::assistant, std::move(next.text)}, next.usage};
}

std::size_t ScriptedMockClient::remaining() const {
    std::lock_guard lock(mutex_);
    return queue_.size();
}

std::size_t ScriptedMockClient::calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

std::shared_ptr<ScriptedMockClient> script_mock(std::vector<ScriptedResponse> responses) {
    return std::make_shared<ScriptedMockClient>(std::move(responses));
}

Completion BudgetGuard::complete(const std::vector<ChatMessage>& history, const GenerationParams& params) {
    {
        std::lock_guard lock(mutex_);
        if (spent_ >= ceiling_) {
            throw BudgetExceeded("token budget of " + std::to_string(ceiling_) + " exhausted (" +
                                 std::to_string(spent_) + " spent)");
        }
    }
    auto completion = inner_->complete(history, params);
    std::lock_guard lock(mutex_);
    spent_ += completion.usage.total();
    return completion;
}

long long BudgetGuard::spent() const {
    std::lock_guard lock(mutex_);
    return spent_;
}

}  // namespace casbench::llm
