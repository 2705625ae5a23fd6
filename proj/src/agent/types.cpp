#include "casbench/agent/types.hpp"

#include <stdexcept>

namespace casbench::agent {

std::string_view to_string(ExtractionMode mode) {
    return mode == ExtractionMode::fenced ? "fenced" : "verbatim";
}

std::string_view to_string(RunStatus status) {
    switch (status) {
        case RunStatus::solved_claimed: return "solved_claimed";
        case RunStatus::gave_up: return "gave_up";
        case RunStatus::turn_limit: return "turn_limit";
        case RunStatus::session_error: return "session_error";
        case RunStatus::transport_error: return "transport_error";
    }
    return "session_error";
}

std::string_view to_string(Termination decision) {
    switch (decision) {
        case Termination::continue_run: return "continue";
        case Termination::solved_claimed: return "solved_claimed";
        case Termination::gave_up: return "gave_up";
    }
    return "continue";
}

std::optional<ExtractionMode> extraction_mode_from_string(std::string_view name) {
    if (name == "verbatim") return ExtractionMode::verbatim;
    if (name == "fenced") return ExtractionMode::fenced;
    return std::nullopt;
}

std::optional<RunStatus> run_status_from_string(std::string_view name) {
    for (auto s : {RunStatus::solved_claimed, RunStatus::gave_up, RunStatus::turn_limit, RunStatus::session_error,
                   RunStatus::transport_error}) {
        if (to_string(s) == name) return s;
    }
    return std::nullopt;
}

const std::vector<std::string>& default_give_up_phrases() {
    static const std::vector<std::string> phrases{"give up", "cannot proceed", "unable to solve"};
    return phrases;
}

void RunConfig::validate() const {
    if (max_turns < 1) throw std::invalid_argument("max_turns must be at least 1");
    if (attempt_limit < 1) throw std::invalid_argument("attempt_limit must be at least 1");
    params.validate();
}

}  // namespace casbench::agent
