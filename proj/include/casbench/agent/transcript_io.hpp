#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <mutex>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "casbench/agent/loop.hpp"
#include "casbench/agent/types.hpp"

namespace casbench::agent {

class SchemaViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

nlohmann::json to_json(const cas::StatementResult& result);
nlohmann::json to_json(const llm::GenerationParams& params);
nlohmann::json to_json(const llm::Usage& usage);
nlohmann::json to_json(const TranscriptMeta& meta);
nlohmann::json to_json(const TurnRecord& turn);
nlohmann::json to_json(const TranscriptFinal& final);
nlohmann::json to_json(const RunResult& result);

cas::StatementResult statement_result_from_json(const nlohmann::json& j);
llm::GenerationParams params_from_json(const nlohmann::json& j);
llm::Usage usage_from_json(const nlohmann::json& j);
TranscriptMeta meta_from_json(const nlohmann::json& j);
TurnRecord turn_from_json(const nlohmann::json& j);
TranscriptFinal final_from_json(const nlohmann::json& j);
RunResult run_result_from_json(const nlohmann::json& j);

/// One record per line, flushed as soon as it is written, so a crash leaves a
/// readable prefix.
class JsonlTranscriptWriter final : public TranscriptSink {
public:
    explicit JsonlTranscriptWriter(std::ostream& out) : out_(&out) {}
    explicit JsonlTranscriptWriter(const std::filesystem::path& path);

    void on_meta(const TranscriptMeta& meta) override;
    void on_turn(const TurnRecord& turn) override;
    void on_final(const TranscriptFinal& final) override;

private:
    void write(const nlohmann::json& record);

    std::ofstream file_;
    std::ostream* out_;
    std::mutex mutex_;
};

std::string to_jsonl(const Transcript& transcript);

/// Parses a transcript file. A missing final record is allowed (the run is
/// incomplete), as is an unterminated, unparseable last line left by a crash.
/// Everything else that breaks the schema raises SchemaViolation.
Transcript read_transcript(std::istream& in);
Transcript read_transcript(const std::filesystem::path& path);
Transcript parse_transcript(const std::string& jsonl);

}  // namespace casbench::agent
