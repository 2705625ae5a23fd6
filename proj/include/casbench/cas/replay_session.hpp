#pragma once

#include <deque>
#include <string>
#include <vector>

#include "casbench/cas/session.hpp"

namespace casbench::cas {

/// In-process session that answers each chunk from a recorded turn.
///
/// Recorded statement results replay exactly (statement texts must match the new
/// chunk). Output-line recordings carry no per-statement attribution, so all lines
/// of a turn go to the chunk's last statement that needs execution.
class ReplaySession final : public CasSession {
public:
    struct Turn {
        std::vector<StatementResult> results;
        std::vector<std::string> lines;
        bool line_based = false;
    };

    static ReplaySession from_results(std::vector<std::vector<StatementResult>> turns);
    static ReplaySession from_output_lines(std::vector<std::vector<std::string>> turns);

    std::vector<StatementResult> execute_chunk(std::string_view chunk) override;
    bool alive() const override { return !dead_; }

    std::size_t remaining() const { return turns_.size(); }

private:
    explicit ReplaySession(std::deque<Turn> turns) : turns_(std::move(turns)) {}

    std::deque<Turn> turns_;
    bool dead_ = false;
};

/// Returns every executable statement's text verbatim as its result.
class EchoSession final : public CasSession {
public:
    std::vector<StatementResult> execute_chunk(std::string_view chunk) override;
    bool alive() const override { return true; }
};

}  // namespace casbench::cas
