#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "casbench/cas/session.hpp"
#include "casbench/llm/types.hpp"

namespace casbench::agent {

enum class ExtractionMode { verbatim, fenced };
enum class RunStatus { solved_claimed, gave_up, turn_limit, session_error, transport_error };
enum class Termination { continue_run, solved_claimed, gave_up };

std::string_view to_string(ExtractionMode mode);
std::string_view to_string(RunStatus status);
std::string_view to_string(Termination decision);
std::optional<ExtractionMode> extraction_mode_from_string(std::string_view name);
std::optional<RunStatus> run_status_from_string(std::string_view name);

const std::vector<std::string>& default_give_up_phrases();

struct RunConfig {
    int max_turns = 100;
    ExtractionMode extraction_mode = ExtractionMode::verbatim;
    llm::GenerationParams params;
    int attempt_limit = 1;
    std::vector<std::string> give_up_phrases = default_give_up_phrases();

    /// Throws std::invalid_argument.
    void validate() const;
};

struct TurnRecord {
    int attempt_index = 1;
    int turn_index = 1;
    std::string assistant_text;
    std::vector<cas::StatementResult> statement_results;
    llm::Usage usage;
    std::chrono::milliseconds wall_time{0};

    bool operator==(const TurnRecord&) const = default;
};

struct RunResult {
    RunStatus status = RunStatus::solved_claimed;
    int turns = 0;
    int restarts = 0;
    int attempts = 1;
    std::string transcript_ref;
    std::string error;  // harness-side detail for session/transport errors

    bool operator==(const RunResult&) const = default;
};

struct TranscriptMeta {
    std::string run_id;
    std::string problem_id;
    std::string pack_id;
    llm::GenerationParams params;
    int max_turns = 100;
    ExtractionMode extraction_mode = ExtractionMode::verbatim;
    int attempt_limit = 1;
    std::string started_at;

    bool operator==(const TranscriptMeta&) const = default;
};

struct TranscriptFinal {
    RunResult result;
    std::string ended_at;

    bool operator==(const TranscriptFinal&) const = default;
};

struct Transcript {
    TranscriptMeta meta;
    std::vector<TurnRecord> turns;
    std::optional<TranscriptFinal> final;

    bool operator==(const Transcript&) const = default;
};

}  // namespace casbench::agent
