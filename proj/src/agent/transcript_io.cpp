#include "casbench/agent/transcript_io.hpp"

#include <sstream>

#include "casbench/util/text.hpp"

namespace casbench::agent {

using nlohmann::json;

namespace {

template <typename T>
T field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw SchemaViolation(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw SchemaViolation(std::string("field '") + key + "': " + e.what());
    }
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return field<T>(j, key);
}

const json& array_field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key) || !j.at(key).is_array()) {
        throw SchemaViolation(std::string("missing array '") + key + "'");
    }
    return j.at(key);
}

template <typename E, typename Parse>
E enum_field(const json& j, const char* key, Parse parse) {
    const auto name = field<std::string>(j, key);
    const auto value = parse(name);
    if (!value) throw SchemaViolation(std::string("bad value '") + name + "' for '" + key + "'");
    return *value;
}

}  // namespace

json to_json(const cas::StatementResult& result) {
    json outputs = json::array();
    for (const auto& block : result.outputs) outputs.push_back({{"kind", cas::to_string(block.kind)}, {"text", block.text}});
    return {{"statement", {{"text", result.statement.text}, {"kind", cas::to_string(result.statement.kind)}}},
            {"outputs", std::move(outputs)},
            {"duration_ms", result.duration.count()},
            {"truncated", result.truncated}};
}

json to_json(const llm::GenerationParams& params) {
    return {{"model_id", params.model_id},
            {"max_tokens", params.max_tokens},
            {"thinking_budget", params.thinking_budget ? json(*params.thinking_budget) : json(nullptr)},
            {"temperature", params.temperature ? json(*params.temperature) : json(nullptr)}};
}

json to_json(const llm::Usage& usage) {
    return {{"input_tokens", usage.input_tokens},
            {"output_tokens", usage.output_tokens},
            {"thinking_tokens", usage.thinking_tokens}};
}

json to_json(const TranscriptMeta& meta) {
    return {{"type", "meta"},
            {"run_id", meta.run_id},
            {"problem_id", meta.problem_id},
            {"pack_id", meta.pack_id},
            {"params", to_json(meta.params)},
            {"max_turns", meta.max_turns},
            {"extraction_mode", to_string(meta.extraction_mode)},
            {"attempt_limit", meta.attempt_limit},
            {"started_at", meta.started_at}};
}

json to_json(const TurnRecord& turn) {
    json results = json::array();
    for (const auto& r : turn.statement_results) results.push_back(to_json(r));
    return {{"type", "turn"},
            {"attempt_index", turn.attempt_index},
            {"turn_index", turn.turn_index},
            {"assistant_text", turn.assistant_text},
            {"statement_results", std::move(results)},
            {"usage", to_json(turn.usage)},
            {"wall_time_ms", turn.wall_time.count()}};
}

json to_json(const RunResult& result) {
    return {{"status", to_string(result.status)}, {"turns", result.turns},
            {"restarts", result.restarts},        {"attempts", result.attempts},
            {"transcript_ref", result.transcript_ref}, {"error", result.error}};
}

json to_json(const TranscriptFinal& final) {
    json j = to_json(final.result);
    j["type"] = "final";
    j["ended_at"] = final.ended_at;
    return j;
}

cas::StatementResult statement_result_from_json(const json& j) {
    cas::StatementResult r;
    if (!j.contains("statement")) throw SchemaViolation("missing field 'statement'");
    const auto& s = j.at("statement");
    r.statement.text = field<std::string>(s, "text");
    r.statement.kind = enum_field<cas::StatementKind>(s, "kind", cas::statement_kind_from_string);
    for (const auto& block : array_field(j, "outputs")) {
        r.outputs.push_back({enum_field<cas::OutputKind>(block, "kind", cas::output_kind_from_string),
                             field<std::string>(block, "text")});
    }
    r.duration = std::chrono::milliseconds(field<long long>(j, "duration_ms"));
    r.truncated = field<bool>(j, "truncated");
    return r;
}

llm::GenerationParams params_from_json(const json& j) {
    llm::GenerationParams p;
    p.model_id = field<std::string>(j, "model_id");
    p.max_tokens = field<int>(j, "max_tokens");
    p.thinking_budget = optional_field<int>(j, "thinking_budget");
    p.temperature = optional_field<double>(j, "temperature");
    return p;
}

llm::Usage usage_from_json(const json& j) {
    return {field<long long>(j, "input_tokens"), field<long long>(j, "output_tokens"),
            field<long long>(j, "thinking_tokens")};
}

TranscriptMeta meta_from_json(const json& j) {
    TranscriptMeta m;
    m.run_id = field<std::string>(j, "run_id");
    m.problem_id = field<std::string>(j, "problem_id");
    m.pack_id = field<std::string>(j, "pack_id");
    if (!j.contains("params")) throw SchemaViolation("missing field 'params'");
    m.params = params_from_json(j.at("params"));
    m.max_turns = field<int>(j, "max_turns");
    m.extraction_mode = enum_field<ExtractionMode>(j, "extraction_mode", extraction_mode_from_string);
    m.attempt_limit = field<int>(j, "attempt_limit");
    m.started_at = field<std::string>(j, "started_at");
    return m;
}

TurnRecord turn_from_json(const json& j) {
    TurnRecord t;
    t.attempt_index = field<int>(j, "attempt_index");
    t.turn_index = field<int>(j, "turn_index");
    t.assistant_text = field<std::string>(j, "assistant_text");
    for (const auto& r : array_field(j, "statement_results")) t.statement_results.push_back(statement_result_from_json(r));
    if (!j.contains("usage")) throw SchemaViolation("missing field 'usage'");
    t.usage = usage_from_json(j.at("usage"));
    t.wall_time = std::chrono::milliseconds(field<long long>(j, "wall_time_ms"));
    return t;
}

RunResult run_result_from_json(const json& j) {
    RunResult r;
    r.status = enum_field<RunStatus>(j, "status", run_status_from_string);
    r.turns = field<int>(j, "turns");
    r.restarts = field<int>(j, "restarts");
    r.attempts = field<int>(j, "attempts");
    r.transcript_ref = field<std::string>(j, "transcript_ref");
    r.error = field<std::string>(j, "error");
    return r;
}

TranscriptFinal final_from_json(const json& j) {
    return {run_result_from_json(j), field<std::string>(j, "ended_at")};
}

JsonlTranscriptWriter::JsonlTranscriptWriter(const std::filesystem::path& path)
    : file_(path, std::ios::binary | std::ios::trunc), out_(&file_) {
    if (!file_) throw std::runtime_error("cannot open transcript file " + path.string());
}

void JsonlTranscriptWriter::write(const json& record) {
    std::lock_guard lock(mutex_);
    *out_ << record.dump() << '\n';
    out_->flush();
    if (!*out_) throw std::runtime_error("failed to write transcript record");
}

void JsonlTranscriptWriter::on_meta(const TranscriptMeta& meta) { write(to_json(meta)); }
void JsonlTranscriptWriter::on_turn(const TurnRecord& turn) { write(to_json(turn)); }
void JsonlTranscriptWriter::on_final(const TranscriptFinal& final) { write(to_json(final)); }

std::string to_jsonl(const Transcript& transcript) {
    std::ostringstream out;
    out << to_json(transcript.meta).dump() << '\n';
    for (const auto& turn : transcript.turns) out << to_json(turn).dump() << '\n';
    if (transcript.final) out << to_json(*transcript.final).dump() << '\n';
    return out.str();
}

Transcript parse_transcript(const std::string& jsonl) {
    auto lines = util::split_lines(jsonl);
    const bool terminated = !jsonl.empty() && jsonl.back() == '\n';
    if (terminated) lines.pop_back();

    Transcript transcript;
    bool have_meta = false;
    int expected_attempt = 1;
    int expected_turn = 1;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto where = "line " + std::to_string(i + 1) + ": ";
        if (lines[i].empty()) throw SchemaViolation(where + "empty line");
        json record;
        try {
            record = json::parse(lines[i]);
        } catch (const json::parse_error& e) {
            if (!terminated && i + 1 == lines.size() && have_meta) break;  // torn final write
            throw SchemaViolation(where + e.what());
        }
        if (transcript.final) throw SchemaViolation(where + "record after the final record");
        try {
            const auto type = field<std::string>(record, "type");
            if (type == "meta") {
                if (have_meta) throw SchemaViolation("second meta record");
                if (i != 0) throw SchemaViolation("meta record is not first");
                transcript.meta = meta_from_json(record);
                have_meta = true;
            } else if (!have_meta) {
                throw SchemaViolation("first record is not meta");
            } else if (type == "turn") {
                auto turn = turn_from_json(record);
                if (turn.attempt_index > expected_attempt && turn.turn_index == 1) {
                    expected_attempt = turn.attempt_index;
                    expected_turn = 1;
                }
                if (turn.attempt_index != expected_attempt || turn.turn_index != expected_turn) {
                    throw SchemaViolation("expected attempt " + std::to_string(expected_attempt) + " turn " +
                                          std::to_string(expected_turn) + ", found attempt " +
                                          std::to_string(turn.attempt_index) + " turn " +
                                          std::to_string(turn.turn_index));
                }
                ++expected_turn;
                transcript.turns.push_back(std::move(turn));
            } else if (type == "final") {
                transcript.final = final_from_json(record);
            } else {
                throw SchemaViolation("unknown record type '" + type + "'");
            }
        } catch (const SchemaViolation& e) {
            throw SchemaViolation(where + e.what());
        }
    }
    if (!have_meta) throw SchemaViolation("transcript has no meta record");
    return transcript;
}

Transcript read_transcript(std::istream& in) {
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_transcript(ss.str());
}

Transcript read_transcript(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open transcript " + path.string());
    return read_transcript(in);
}

}  // namespace casbench::agent
