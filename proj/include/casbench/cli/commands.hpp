#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "casbench/agent/rendered.hpp"
#include "casbench/agent/types.hpp"
#include "casbench/cli/config.hpp"
#include "casbench/llm/mock.hpp"

namespace casbench::cli {

struct CliIo {
    std::istream& in;
    std::ostream& out;
    std::ostream& err;
    EnvLookup env;
};

class UnknownRun : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// results_dir/transcripts/<pack>__<problem>__attempt1.jsonl for run id pack/problem/attempt1.
std::filesystem::path transcript_path(const std::filesystem::path& results_dir, const std::string& run_id);
std::filesystem::path grades_path(const std::filesystem::path& results_dir);

/// A scripted model, optionally with the recording it came from (needed for CAS replay).
struct MockSource {
    std::vector<llm::ScriptedResponse> script;
    std::optional<agent::RenderedTranscript> rendered;
    std::optional<agent::Transcript> transcript;
};

/// Accepts a rendered transcript, a JSONL transcript, or a JSON array of replies
/// (strings or {"text": ...} objects).
MockSource load_mock_source(const std::filesystem::path& path);

struct RunOptions {
    std::vector<std::string> packs;
    std::vector<std::string> problems;
    std::optional<std::filesystem::path> mock_llm;
    std::string mock_cas = "process";  // process, echo or replay
    bool progress = false;
};

struct ReportOptions {
    std::string format = "all";  // csv, markdown or all
    std::optional<std::filesystem::path> input_csv;
    std::optional<std::filesystem::path> out_dir;
};

int cmd_run(const HarnessConfig& config, const RunOptions& options, CliIo& io);
int cmd_render(const HarnessConfig& config, const std::string& transcript, CliIo& io);
int cmd_grade(const HarnessConfig& config, const std::string& run_id, const std::string& grader, CliIo& io);
int cmd_report(const HarnessConfig& config, const ReportOptions& options, CliIo& io);
int cmd_packs_validate(const HarnessConfig& config, const std::vector<std::string>& ids, CliIo& io);
int cmd_problems_list(CliIo& io);
int cmd_problems_show(const std::string& id, CliIo& io);
int cmd_config_show(const std::map<std::string, ResolvedValue>& values, CliIo& io);

}  // namespace casbench::cli
