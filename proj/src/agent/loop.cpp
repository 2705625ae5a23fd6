#include "casbench/agent/loop.hpp"

#include <ctime>
#include <iomanip>
#include <sstream>

#include "casbench/util/text.hpp"

namespace casbench::agent {

namespace {

using SteadyClock = std::chrono::steady_clock;

bool is_fence(std::string_view line) {
    return util::starts_with(util::trim(line), "```");
}

}  // namespace

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

std::string extract_statements(std::string_view assistant_text, ExtractionMode mode) {
    if (mode == ExtractionMode::verbatim) return std::string(assistant_text);
    std::string chunk;
    bool inside = false;
    for (const auto& line : util::split_lines(assistant_text)) {
        if (is_fence(line)) {
            inside = !inside;
            continue;
        }
        if (inside) {
            chunk += line;
            chunk += '\n';
        }
    }
    return chunk;
}

Termination detect_termination(std::string_view assistant_text, const std::vector<cas::Statement>& statements,
                               const std::vector<std::string>& give_up_phrases) {
    const auto lowered = util::to_lower(assistant_text);
    for (const auto& phrase : give_up_phrases) {
        if (!phrase.empty() && lowered.find(util::to_lower(phrase)) != std::string::npos) return Termination::gave_up;
    }
    for (const auto& statement : statements) {
        if (cas::needs_execution(statement)) return Termination::continue_run;
    }
    return Termination::solved_claimed;
}

int count_restarts(const Transcript& transcript) {
    int restarts = 0;
    for (const auto& turn : transcript.turns) {
        for (const auto& result : turn.statement_results) {
            if (cas::is_restart(result.statement)) ++restarts;
        }
    }
    return restarts;
}

std::string feedback_message(const std::vector<cas::StatementResult>& results) {
    std::vector<std::string> sections;
    for (const auto& result : results) {
        if (result.outputs.empty()) continue;
        std::vector<std::string> blocks;
        for (const auto& block : result.outputs) blocks.push_back(block.text);
        sections.push_back(util::join(blocks, "\n"));
    }
    if (sections.empty()) return no_output_feedback;
    auto text = util::join(sections, "\n\n");
    return text.empty() ? no_output_feedback : text;
}

Episode run_episode(const context::Problem& problem, const context::ContextPack& pack, const RunConfig& config,
                    EpisodeEnvironment& env, const std::string& run_id) {
    config.validate();
    if (!env.open_session || !env.client) throw std::invalid_argument("episode needs a session factory and a client");
    const auto timestamp = env.timestamp ? env.timestamp : utc_timestamp;
    const auto now = env.now ? env.now : [] { return SteadyClock::now(); };

    Episode episode;
    auto& transcript = episode.transcript;
    auto& result = episode.result;
    result.transcript_ref = run_id;
    transcript.meta = {run_id,           problem.id,           pack.id,   config.params, config.max_turns,
                       config.extraction_mode, config.attempt_limit, timestamp()};
    if (env.sink) env.sink->on_meta(transcript.meta);

    const std::string system_prompt = context::render_system_prompt(pack);
    const auto emit_progress = [&](int attempt, int turn, std::string state) {
        if (env.progress) env.progress({run_id, attempt, turn, result.turns, result.restarts, std::move(state)});
    };

    bool finished = false;
    for (int attempt = 1; attempt <= config.attempt_limit && !finished; ++attempt) {
        result.attempts = attempt;
        result.error.clear();

        std::unique_ptr<cas::CasSession> session;
        try {
            session = env.open_session(attempt);
        } catch (const cas::CasError& e) {
            result.status = RunStatus::session_error;
            result.error = e.what();
            continue;
        }

        std::vector<llm::ChatMessage> history{{llm::Role::system, system_prompt},
                                              {llm::Role::user, problem.statement}};
        for (int turn_index = 1;; ++turn_index) {
            const auto started = now();
            llm::Completion completion;
            try {
                completion = env.client->complete(history, config.params);
            } catch (const llm::LlmError& e) {
                result.status = RunStatus::transport_error;
                result.error = e.what();
                break;
            }
            ++result.turns;

            TurnRecord turn;
            turn.attempt_index = attempt;
            turn.turn_index = turn_index;
            turn.assistant_text = completion.message.content;
            turn.usage = completion.usage;

            const auto chunk = extract_statements(turn.assistant_text, config.extraction_mode);
            const auto statements = cas::split_statements(chunk);
            const auto decision = detect_termination(turn.assistant_text, statements, config.give_up_phrases);

            bool session_failed = false;
            if (decision == Termination::solved_claimed) {
                for (const auto& statement : statements) turn.statement_results.push_back({statement, {}, {}, false});
            } else if (decision == Termination::continue_run) {
                try {
                    turn.statement_results = session->execute_chunk(chunk);
                } catch (const cas::ChunkAborted& e) {
                    turn.statement_results = e.partial();
                    result.error = e.what();
                    session_failed = true;
                } catch (const cas::CasError& e) {
                    result.error = e.what();
                    session_failed = true;
                }
            }
            for (const auto& r : turn.statement_results) {
                if (cas::is_restart(r.statement)) ++result.restarts;
            }
            turn.wall_time = std::chrono::duration_cast<std::chrono::milliseconds>(now() - started);
            if (env.sink) env.sink->on_turn(turn);
            transcript.turns.push_back(turn);

            if (session_failed) {
                result.status = RunStatus::session_error;
                emit_progress(attempt, turn_index, "session_error");
                break;
            }
            if (decision == Termination::solved_claimed || decision == Termination::gave_up) {
                result.status = decision == Termination::gave_up ? RunStatus::gave_up : RunStatus::solved_claimed;
                finished = true;
                emit_progress(attempt, turn_index, std::string(to_string(result.status)));
                break;
            }
            if (result.turns >= config.max_turns) {
                result.status = RunStatus::turn_limit;
                finished = true;
                emit_progress(attempt, turn_index, "turn_limit");
                break;
            }
            emit_progress(attempt, turn_index, "running");

            history.push_back(completion.message);
            history.push_back({llm::Role::user, feedback_message(turn.statement_results)});
        }
        // the shared budget may be spent by a failed attempt
        if (!finished && result.turns >= config.max_turns) break;
    }

    transcript.final = TranscriptFinal{result, timestamp()};
    if (env.sink) env.sink->on_final(*transcript.final);
    return episode;
}

}  // namespace casbench::agent
