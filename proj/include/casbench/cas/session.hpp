#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "casbench/cas/statement.hpp"

namespace casbench::cas {

enum class OutputKind { result, warning, error, banner };

std::string_view to_string(OutputKind kind);
std::optional<OutputKind> output_kind_from_string(std::string_view name);

struct OutputBlock {
    OutputKind kind = OutputKind::result;
    std::string text;

    bool operator==(const OutputBlock&) const = default;
};

struct StatementResult {
    Statement statement;
    std::vector<OutputBlock> outputs;
    std::chrono::milliseconds duration{0};
    bool truncated = false;

    bool operator==(const StatementResult&) const = default;
};

struct BackendDescriptor {
    std::string name = "maple";
    std::vector<std::string> launch_command;
    std::string prompt_marker = "> ";
    std::vector<std::string> init_statements{"interface(prettyprint = 0):"};
    std::chrono::milliseconds statement_timeout = std::chrono::seconds(300);
    std::optional<std::size_t> output_byte_limit;
    std::string warning_prefix = "Warning,";
    std::string error_prefix = "Error,";
    std::chrono::milliseconds quiescence{50};
    std::chrono::milliseconds startup_timeout = std::chrono::seconds(60);

    /// Throws std::invalid_argument when an invariant does not hold.
    void validate() const;
};

class CasError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class LaunchFailed : public CasError {
public:
    using CasError::CasError;
};

class InitFailed : public CasError {
public:
    using CasError::CasError;
};

/// Raised mid-chunk; carries the results of the statements that completed before it.
class ChunkAborted : public CasError {
public:
    ChunkAborted(const std::string& what, std::vector<StatementResult> partial)
        : CasError(what), partial_(std::move(partial)) {}

    const std::vector<StatementResult>& partial() const { return partial_; }

private:
    std::vector<StatementResult> partial_;
};

/// A statement ran past its timeout; the session has been killed.
class StatementTimeout : public ChunkAborted {
public:
    using ChunkAborted::ChunkAborted;
};

/// The CAS process exited (or a replay ran out of recorded turns).
class SessionDead : public ChunkAborted {
public:
    using ChunkAborted::ChunkAborted;
};

/// A live CAS workspace. Not thread-safe: callers serialize access.
class CasSession {
public:
    virtual ~CasSession() = default;

    /// Executes every statement of `chunk` in order. Comment-only and blank
    /// statements yield empty output lists without reaching the CAS.
    virtual std::vector<StatementResult> execute_chunk(std::string_view chunk) = 0;

    virtual bool alive() const = 0;
};

/// Groups raw CAS output into blocks: each line starting with the warning or error
/// prefix is a block of its own, consecutive other lines form result blocks.
std::vector<OutputBlock> segment_output(std::string_view raw, std::string_view warning_prefix = "Warning,",
                                        std::string_view error_prefix = "Error,");

/// Output lines of a result, in order, as they would be shown to a reader.
std::vector<std::string> output_lines(const StatementResult& result);

bool has_error(const std::vector<StatementResult>& results);

}  // namespace casbench::cas
