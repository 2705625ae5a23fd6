#include "casbench/cas/replay_session.hpp"

#include "casbench/util/text.hpp"

namespace casbench::cas {

ReplaySession ReplaySession::from_results(std::vector<std::vector<StatementResult>> turns) {
    std::deque<Turn> queue;
    for (auto& results : turns) queue.push_back({std::move(results), {}, false});
    return ReplaySession(std::move(queue));
}

ReplaySession ReplaySession::from_output_lines(std::vector<std::vector<std::string>> turns) {
    std::deque<Turn> queue;
    for (auto& lines : turns) queue.push_back({{}, std::move(lines), true});
    return ReplaySession(std::move(queue));
}

std::vector<StatementResult> ReplaySession::execute_chunk(std::string_view chunk) {
    if (turns_.empty()) {
        dead_ = true;
        throw SessionDead("replay exhausted: no recorded turn left", {});
    }
    Turn turn = std::move(turns_.front());
    turns_.pop_front();

    auto statements = split_statements(chunk);
    if (!turn.line_based) {
        if (turn.results.size() != statements.size()) {
            throw CasError("replay mismatch: chunk has " + std::to_string(statements.size()) +
                           " statements, recording has " + std::to_string(turn.results.size()));
        }
        for (std::size_t i = 0; i < statements.size(); ++i) {
            if (turn.results[i].statement != statements[i]) {
                throw CasError("replay mismatch at statement " + std::to_string(i + 1));
            }
        }
        return std::move(turn.results);
    }

    std::vector<StatementResult> results;
    results.reserve(statements.size());
    for (auto& statement : statements) results.push_back({std::move(statement), {}, std::chrono::milliseconds(0), false});

    if (!turn.lines.empty()) {
        StatementResult* target = nullptr;
        for (auto& result : results) {
            if (needs_execution(result.statement)) target = &result;
        }
        if (target == nullptr) {
            throw CasError("replay mismatch: recorded output but chunk has no executable statement");
        }
        target->outputs = segment_output(util::join(turn.lines, "\n") + "\n");
    }
    return results;
}

std::vector<StatementResult> EchoSession::execute_chunk(std::string_view chunk) {
    std::vector<StatementResult> results;
    for (auto& statement : split_statements(chunk)) {
        StatementResult result{statement, {}, std::chrono::milliseconds(0), false};
        if (needs_execution(statement)) result.outputs.push_back({OutputKind::result, statement.text});
        results.push_back(std::move(result));
    }
    return results;
}

}  // namespace casbench::cas
