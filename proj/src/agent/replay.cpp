#include "casbench/agent/replay.hpp"

#include "casbench/cas/replay_session.hpp"

namespace casbench::agent {

SessionFactory replay_sessions(const RenderedTranscript& rendered) {
    std::vector<std::vector<std::vector<std::string>>> per_attempt;
    for (const auto& attempt : rendered.attempts) per_attempt.push_back(output_lines_of(attempt));
    return [per_attempt = std::move(per_attempt)](int attempt) -> std::unique_ptr<cas::CasSession> {
        const auto index = static_cast<std::size_t>(attempt - 1);
        auto turns = index < per_attempt.size() ? per_attempt[index] : std::vector<std::vector<std::string>>{};
        return std::make_unique<cas::ReplaySession>(cas::ReplaySession::from_output_lines(std::move(turns)));
    };
}

SessionFactory replay_sessions(const Transcript& transcript) {
    std::vector<std::vector<std::vector<cas::StatementResult>>> per_attempt;
    for (const auto& turn : transcript.turns) {
        if (per_attempt.size() < static_cast<std::size_t>(turn.attempt_index)) {
            per_attempt.resize(static_cast<std::size_t>(turn.attempt_index));
        }
        // Terminal turns never reached the CAS, so only executed chunks are recorded.
        bool executed = false;
        for (const auto& r : turn.statement_results) executed = executed || cas::needs_execution(r.statement);
        if (executed) per_attempt[static_cast<std::size_t>(turn.attempt_index - 1)].push_back(turn.statement_results);
    }
    return [per_attempt = std::move(per_attempt)](int attempt) -> std::unique_ptr<cas::CasSession> {
        const auto index = static_cast<std::size_t>(attempt - 1);
        auto turns = index < per_attempt.size() ? per_attempt[index] : std::vector<std::vector<cas::StatementResult>>{};
        return std::make_unique<cas::ReplaySession>(cas::ReplaySession::from_results(std::move(turns)));
    };
}

std::vector<llm::ScriptedResponse> assistant_script(const Transcript& transcript) {
    std::vector<llm::ScriptedResponse> script;
    for (const auto& turn : transcript.turns) script.push_back({turn.assistant_text, turn.usage});
    return script;
}

}  // namespace casbench::agent
