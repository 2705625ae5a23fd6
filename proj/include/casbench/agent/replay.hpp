#pragma once

#include <functional>
#include <memory>

#include "casbench/agent/rendered.hpp"
#include "casbench/agent/types.hpp"
#include "casbench/cas/session.hpp"
#include "casbench/llm/mock.hpp"

namespace casbench::agent {

using SessionFactory = std::function<std::unique_ptr<cas::CasSession>(int attempt_index)>;

/// Per-attempt replay sessions answering from the rendered output lines.
SessionFactory replay_sessions(const RenderedTranscript& rendered);

/// Per-attempt replay sessions answering with the exact recorded results.
SessionFactory replay_sessions(const Transcript& transcript);

/// Assistant messages with their recorded usage.
std::vector<llm::ScriptedResponse> assistant_script(const Transcript& transcript);

}  // namespace casbench::agent
