#pragma once

#include <memory>
#include <string>

#include <sys/types.h>

#include "casbench/cas/session.hpp"

namespace casbench::cas {

/// Drives an interactive CAS over pipes (stdout and stderr merged).
///
/// The session is ready when `prompt_marker` is the whole last line of output and
/// nothing else arrives for the quiescence window. Input lines echoed back behind
/// the prompt are removed from statement output.
class ProcessSession final : public CasSession {
public:
    ~ProcessSession() override;
    ProcessSession(const ProcessSession&) = delete;
    ProcessSession& operator=(const ProcessSession&) = delete;

    std::vector<StatementResult> execute_chunk(std::string_view chunk) override;
    bool alive() const override { return pid_ > 0; }

    const BackendDescriptor& descriptor() const { return descriptor_; }

    /// Text printed before the first prompt; never part of statement output.
    const std::string& banner() const { return banner_; }

    /// Number of times init statements have been applied (start plus restarts).
    int init_runs() const { return init_runs_; }

    friend std::unique_ptr<ProcessSession> start_session(const BackendDescriptor& descriptor);

private:
    explicit ProcessSession(BackendDescriptor descriptor);

    struct Capture;

    void launch();
    void run_init_statements();
    StatementResult run_statement(const Statement& statement);
    Capture exchange(const std::string& input, std::chrono::milliseconds timeout);
    std::string clean_output(const std::string& raw, const std::string& sent) const;
    void kill_process();

    BackendDescriptor descriptor_;
    pid_t pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string banner_;
    int init_runs_ = 0;
};

/// Launches the backend, waits for its first prompt and applies the init statements.
/// Throws LaunchFailed or InitFailed.
std::unique_ptr<ProcessSession> start_session(const BackendDescriptor& descriptor);

}  // namespace casbench::cas
