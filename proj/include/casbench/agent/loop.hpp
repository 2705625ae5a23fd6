#pragma once

#include <functional>
#include <memory>

#include "casbench/agent/types.hpp"
#include "casbench/cas/session.hpp"
#include "casbench/context/pack.hpp"
#include "casbench/context/problem.hpp"
#include "casbench/llm/types.hpp"

namespace casbench::agent {

/// Verbatim: the whole message. Fenced: the bodies of ``` blocks, concatenated.
std::string extract_statements(std::string_view assistant_text, ExtractionMode mode);

Termination detect_termination(std::string_view assistant_text, const std::vector<cas::Statement>& statements,
                               const std::vector<std::string>& give_up_phrases = default_give_up_phrases());

int count_restarts(const Transcript& transcript);

/// Text of the user message that feeds CAS results back to the model.
std::string feedback_message(const std::vector<cas::StatementResult>& results);

inline constexpr const char* no_output_feedback = "[no output]";

class TranscriptSink {
public:
    virtual ~TranscriptSink() = default;
    virtual void on_meta(const TranscriptMeta& meta) = 0;
    virtual void on_turn(const TurnRecord& turn) = 0;
    virtual void on_final(const TranscriptFinal& final) = 0;
};

struct ProgressEvent {
    std::string run_id;
    int attempt_index = 1;
    int turn_index = 0;
    int turns = 0;
    int restarts = 0;
    std::string state;  // "running" or a RunStatus name
};

struct EpisodeEnvironment {
    /// Called once per attempt; may throw cas::LaunchFailed or cas::InitFailed.
    std::function<std::unique_ptr<cas::CasSession>(int attempt_index)> open_session;
    std::shared_ptr<llm::ChatClient> client;
    TranscriptSink* sink = nullptr;
    std::function<void(const ProgressEvent&)> progress;
    std::function<std::string()> timestamp;                          // defaults to UTC ISO-8601
    std::function<std::chrono::steady_clock::time_point()> now;      // defaults to steady_clock
};

struct Episode {
    RunResult result;
    Transcript transcript;
};

/// One run: [system: rendered pack] + [user: problem statement], then alternate
/// completion and CAS execution until termination, an error or max_turns.
/// The turn budget is shared by every attempt of the run.
Episode run_episode(const context::Problem& problem, const context::ContextPack& pack, const RunConfig& config,
                    EpisodeEnvironment& env, const std::string& run_id);

std::string utc_timestamp();

}  // namespace casbench::agent
