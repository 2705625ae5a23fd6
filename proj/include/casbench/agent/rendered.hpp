#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "casbench/agent/types.hpp"
#include "casbench/llm/mock.hpp"

namespace casbench::agent {

/// The human-readable transcript layout: one header per attempt, one per turn,
/// the assistant text verbatim, then every CAS output line behind "~ ".
struct RenderedTurn {
    int index = 1;
    std::string text;
    std::vector<std::string> output_lines;

    bool operator==(const RenderedTurn&) const = default;
};

struct RenderedAttempt {
    int index = 1;
    std::vector<RenderedTurn> turns;

    bool operator==(const RenderedAttempt&) const = default;
};

struct RenderedTranscript {
    std::vector<RenderedAttempt> attempts;
    bool incomplete = false;

    bool operator==(const RenderedTranscript&) const = default;
};

inline constexpr std::string_view output_prefix = "~ ";
inline constexpr std::string_view incomplete_trailer = "[run incomplete]";

std::string attempt_header(int attempt);
std::string turn_header(int turn);

RenderedTranscript to_rendered(const Transcript& transcript);
std::string render(const RenderedTranscript& rendered);
std::string render_transcript(const Transcript& transcript);

/// Inverse of render. Throws SchemaViolation (from transcript_io.hpp).
RenderedTranscript parse_rendered(std::string_view text);

/// Why `rendered` would not survive render then parse, if it would not: a text
/// line that looks like a header, a last text line that looks like output, or
/// an output line holding a newline.
std::optional<std::string> round_trip_hazard(const RenderedTranscript& rendered);

/// Assistant messages in order, as a script for the scripted mock client.
std::vector<llm::ScriptedResponse> assistant_script(const RenderedTranscript& rendered);

/// Output lines per turn of one attempt, for ReplaySession::from_output_lines.
std::vector<std::vector<std::string>> output_lines_of(const RenderedAttempt& attempt);

}  // namespace casbench::agent
