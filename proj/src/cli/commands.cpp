#include "casbench/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "casbench/agent/loop.hpp"
#include "casbench/agent/replay.hpp"
#include "casbench/agent/transcript_io.hpp"
#include "casbench/cas/process_session.hpp"
#include "casbench/cas/replay_session.hpp"
#include "casbench/context/pack.hpp"
#include "casbench/context/problem.hpp"
#include "casbench/eval/matrix.hpp"
#include "casbench/eval/metrics.hpp"
#include "casbench/eval/report.hpp"
#include "casbench/eval/rubric.hpp"
#include "casbench/llm/provider.hpp"
#include "casbench/util/text.hpp"

namespace casbench::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::vector<std::string> expand(const std::vector<std::string>& ids, const std::vector<std::string>& all) {
    if (ids.size() == 1 && ids[0] == "all") return all;
    return ids;
}

using ClientFactory = std::function<std::shared_ptr<llm::ChatClient>()>;

ClientFactory live_client_factory(const HarnessConfig& config, CliIo& io) {
    if (config.provider.model.empty()) throw UsageError("provider.model is not configured");
    if (config.provider.key_env.empty()) throw UsageError("provider.key_env is not configured");
    const auto key = io.env(config.provider.key_env);
    if (!key || key->empty()) throw UsageError("environment variable " + config.provider.key_env + " is not set");
    // fail on a bad adapter name before any run starts
    llm::make_adapter(config.provider.adapter, *key);
    return [provider = config.provider, api_key = *key]() -> std::shared_ptr<llm::ChatClient> {
        return std::make_shared<llm::ProviderClient>(llm::make_adapter(provider.adapter, api_key),
                                                     std::make_shared<llm::HttplibTransport>(provider.endpoint));
    };
}

agent::SessionFactory session_factory(const HarnessConfig& config, const RunOptions& options,
                                      const std::optional<MockSource>& mock) {
    if (options.mock_cas == "echo") {
        return [](int) { return std::make_unique<cas::EchoSession>(); };
    }
    if (options.mock_cas == "replay") {
        if (!mock || (!mock->rendered && !mock->transcript)) {
            throw UsageError("--mock-cas replay needs --mock-llm pointing at a recorded transcript");
        }
        return mock->transcript ? agent::replay_sessions(*mock->transcript) : agent::replay_sessions(*mock->rendered);
    }
    if (options.mock_cas != "process") throw UsageError("unknown --mock-cas mode '" + options.mock_cas + "'");
    if (config.backend.launch_command.empty()) throw UsageError("backend.command is not configured");
    return [backend = config.backend](int) -> std::unique_ptr<cas::CasSession> { return cas::start_session(backend); };
}

int pack_rank(const std::string& pack) {
    const auto& order = eval::default_pack_order();
    const auto it = std::find(order.begin(), order.end(), pack);
    return static_cast<int>(it - order.begin());
}

void sort_cells(std::vector<eval::CellResult>& cells) {
    const auto key = [](const eval::CellResult& c) {
        return std::make_tuple(pack_rank(c.pack_id), c.pack_id,
                               context::problem_index(c.problem_id).value_or(context::problem_registry().size()),
                               c.problem_id);
    };
    std::stable_sort(cells.begin(), cells.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
}

std::optional<eval::Finding> parse_finding(std::string_view answer) {
    const auto a = util::to_lower(util::trim(answer));
    if (a == "ok" || a == "o") return eval::Finding::ok;
    if (a == "violated" || a == "v") return eval::Finding::violated;
    if (a == "violated_but_harmless" || a == "harmless" || a == "h") return eval::Finding::violated_but_harmless;
    if (a == "not_applicable" || a == "n/a" || a == "na" || a == "n") return eval::Finding::not_applicable;
    return std::nullopt;
}

}  // namespace

fs::path transcript_path(const fs::path& results_dir, const std::string& run_id) {
    std::string name;
    for (std::size_t i = 0; i < run_id.size(); ++i) {
        if (run_id[i] == '/') {
            name += "__";
        } else {
            name += run_id[i];
        }
    }
    return results_dir / "transcripts" / (name + ".jsonl");
}

fs::path grades_path(const fs::path& results_dir) { return results_dir / "grades.jsonl"; }

MockSource load_mock_source(const fs::path& path) {
    const auto text = read_file(path);
    MockSource source;
    if (util::starts_with(text, "# +")) {
        source.rendered = agent::parse_rendered(text);
        source.script = agent::assistant_script(*source.rendered);
        return source;
    }
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '[') {
        json replies;
        try {
            replies = json::parse(text);
        } catch (const json::exception& e) {
            throw UsageError(path.string() + ": " + e.what());
        }
        for (const auto& r : replies) {
            if (r.is_string()) {
                source.script.push_back({r.get<std::string>(), {}});
            } else if (r.is_object() && r.contains("text")) {
                source.script.push_back({r.at("text").get<std::string>(), {}});
            } else {
                throw UsageError(path.string() + ": script entries must be strings or {\"text\": ...}");
            }
        }
        return source;
    }
    source.transcript = agent::parse_transcript(text);
    source.script = agent::assistant_script(*source.transcript);
    return source;
}

int cmd_run(const HarnessConfig& config, const RunOptions& options, CliIo& io) {
    if (options.packs.empty() || options.problems.empty()) throw UsageError("run needs --pack and --problem");
    const auto known_packs = context::list_packs(config.packs_dir);
    const auto specs = eval::plan_matrix(expand(options.packs, known_packs),
                                         expand(options.problems, context::problem_ids()), config.defaults, known_packs);

    std::map<std::string, context::ContextPack> packs;
    for (const auto& spec : specs) {
        if (packs.count(spec.pack_id) != 0) continue;
        auto pack = context::load_pack(context::find_pack(config.packs_dir, spec.pack_id));
        for (const auto& w : pack.warnings) io.err << "warning: " << w << '\n';
        packs.emplace(spec.pack_id, std::move(pack));
    }

    std::optional<MockSource> mock;
    if (options.mock_llm) mock = load_mock_source(*options.mock_llm);
    ClientFactory make_client;
    if (mock) {
        make_client = [script = mock->script]() -> std::shared_ptr<llm::ChatClient> { return llm::script_mock(script); };
    } else {
        make_client = live_client_factory(config, io);
    }
    // validated once; each run builds its own sessions from it
    const auto open_session = session_factory(config, options, mock);

    fs::create_directories(config.results_dir / "transcripts");

    std::vector<std::optional<agent::RunResult>> results(specs.size());
    std::vector<std::string> failures(specs.size());
    std::mutex io_mutex;
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < specs.size(); i = next++) {
            const auto& spec = specs[i];
            try {
                agent::JsonlTranscriptWriter writer(transcript_path(config.results_dir, spec.run_id));
                agent::EpisodeEnvironment env;
                env.open_session = open_session;
                env.client = make_client();
                env.sink = &writer;
                if (options.progress) {
                    env.progress = [&](const agent::ProgressEvent& e) {
                        std::lock_guard lock(io_mutex);
                        io.err << e.run_id << " attempt " << e.attempt_index << " turn " << e.turn_index << ": "
                               << e.state << '\n';
                    };
                }
                results[i] = agent::run_episode(context::get_problem(spec.problem_id), packs.at(spec.pack_id),
                                                spec.config, env, spec.run_id)
                                 .result;
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        }
    };
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(config.jobs, 1)), specs.size());
    std::vector<std::thread> threads;
    for (std::size_t t = 1; t < workers; ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();

    int exit_code = 0;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto path = transcript_path(config.results_dir, specs[i].run_id);
        if (!results[i]) {
            io.err << specs[i].run_id << ": harness error: " << failures[i] << '\n';
            exit_code = 1;
            continue;
        }
        const auto& r = *results[i];
        io.out << specs[i].run_id << "  " << agent::to_string(r.status) << "  turns=" << r.turns
               << "  restarts=" << r.restarts << "  " << path.string() << '\n';
        if (!r.error.empty()) io.err << specs[i].run_id << ": " << r.error << '\n';
    }
    return exit_code;
}

int cmd_render(const HarnessConfig& config, const std::string& transcript, CliIo& io) {
    fs::path path = transcript;
    if (!fs::exists(path)) {
        path = transcript_path(config.results_dir, transcript);
        if (!fs::exists(path)) throw UnknownRun("no transcript at '" + transcript + "'");
    }
    io.out << agent::render_transcript(agent::read_transcript(path));
    return 0;
}

int cmd_grade(const HarnessConfig& config, const std::string& run_id, const std::string& grader, CliIo& io) {
    const auto path = transcript_path(config.results_dir, run_id);
    if (!fs::exists(path)) throw UnknownRun("unknown run '" + run_id + "' (no " + path.string() + ")");
    const auto transcript = agent::read_transcript(path);
    io.out << "run " << run_id << ": ";
    if (transcript.final) {
        const auto& r = transcript.final->result;
        io.out << agent::to_string(r.status) << ", " << r.turns << " turns, " << r.restarts << " restarts\n";
    } else {
        io.out << "incomplete, " << transcript.turns.size() << " turns recorded\n";
    }
    io.out << "read it with: casbench render " << run_id << "\n\n";

    const auto abort = [&] {
        io.err << "grading aborted; no record written\n";
        return 1;
    };

    std::vector<eval::RuleAssessment> assessments;
    for (auto rule : eval::all_rules) {
        io.out << eval::to_string(rule) << ": " << eval::rule_question(rule) << '\n';
        std::optional<eval::Finding> finding;
        while (!finding) {
            io.out << "  finding [ok / violated / harmless / n/a]: " << std::flush;
            std::string answer;
            if (!std::getline(io.in, answer)) return abort();
            finding = parse_finding(answer);
            if (!finding) {
                io.out << "  unrecognised answer '" << answer << "'\n";
            } else if (!eval::admissible(rule, *finding)) {
                io.out << "  " << eval::to_string(rule) << " can only forgive; use harmless, ok or n/a\n";
                finding.reset();
            }
        }
        io.out << "  note: " << std::flush;
        std::string note;
        if (!std::getline(io.in, note)) return abort();
        assessments.push_back({rule, *finding, std::string(util::trim(note))});
    }

    const auto grade = eval::make_grade(run_id, std::move(assessments), grader, agent::utc_timestamp());
    eval::append_grade(grades_path(config.results_dir), grade);
    io.out << "verdict: " << eval::to_string(grade.verdict) << '\n';
    return 0;
}

int cmd_report(const HarnessConfig& config, const ReportOptions& options, CliIo& io) {
    if (options.format != "csv" && options.format != "markdown" && options.format != "all") {
        throw UsageError("unknown report format '" + options.format + "'");
    }
    std::vector<eval::CellResult> cells;
    std::map<eval::CellKey, eval::Verdict> verdicts;
    std::string origin;
    if (options.input_csv) {
        auto file = eval::parse_results_csv(read_file(*options.input_csv));
        cells = std::move(file.results);
        verdicts = std::move(file.verdicts);
        origin = options.input_csv->string();
    } else {
        const auto dir = config.results_dir / "transcripts";
        origin = dir.string();
        std::vector<fs::path> files;
        if (fs::is_directory(dir)) {
            for (const auto& entry : fs::directory_iterator(dir)) {
                if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            const auto transcript = agent::read_transcript(file);
            if (!transcript.final) {
                io.err << "skipping incomplete run " << transcript.meta.run_id << '\n';
                continue;
            }
            cells.push_back({transcript.meta.pack_id, transcript.meta.problem_id, transcript.final->result});
        }
        verdicts = eval::verdicts_of(eval::latest_grades(eval::read_grades(grades_path(config.results_dir))));
    }
    if (cells.empty()) {
        io.err << "no results found in " << origin << '\n';
        return 1;
    }
    sort_cells(cells);
    const auto table = eval::aggregate_metrics(cells, verdicts);
    for (const auto& [pack, problem] : eval::turn_limit_inconsistencies(table, config.defaults.max_turns)) {
        io.err << "note: " << pack << "/" << problem << " status and turn count disagree about the turn limit\n";
    }

    const auto out_dir = options.out_dir.value_or(config.results_dir / "report");
    fs::create_directories(out_dir);
    const auto grid = eval::render_grid(table);
    const auto summary = eval::export_summary(table);
    std::vector<fs::path> written{out_dir / "grid.txt", out_dir / "summary.csv"};
    write_file(written[0], grid);
    write_file(written[1], summary);
    if (options.format != "markdown") {
        written.push_back(out_dir / "metrics.csv");
        write_file(written.back(), eval::export_results(table, eval::ExportFormat::csv));
    }
    if (options.format != "csv") {
        written.push_back(out_dir / "metrics.md");
        write_file(written.back(), eval::export_results(table, eval::ExportFormat::markdown));
    }
    io.out << grid << '\n' << summary << '\n';
    for (const auto& p : written) io.out << "wrote " << p.string() << '\n';
    return 0;
}

int cmd_packs_validate(const HarnessConfig& config, const std::vector<std::string>& ids, CliIo& io) {
    const auto packs = ids.empty() ? context::list_packs(config.packs_dir) : ids;
    if (packs.empty()) {
        io.err << "no packs under " << config.packs_dir.string() << '\n';
        return 1;
    }
    int exit_code = 0;
    for (const auto& id : packs) {
        const auto inspection = context::inspect_pack(config.packs_dir / id);
        bool fatal = false;
        for (const auto& issue : inspection.issues) {
            fatal = fatal || issue.fatal();
            io.out << id << ": " << (issue.fatal() ? "error: " : "warning: ") << context::describe(issue) << '\n';
        }
        if (fatal) {
            exit_code = 1;
            continue;
        }
        const auto prompt = context::render_system_prompt(inspection.pack);
        if (prompt != context::render_system_prompt(inspection.pack)) {
            io.out << id << ": error: rendering is not deterministic\n";
            exit_code = 1;
            continue;
        }
        const auto estimate = context::estimate_tokens(prompt);
        io.out << id << ": ok, " << inspection.pack.documents.size() << " document(s), ~" << estimate.estimated_tokens
               << " tokens (" << context::to_string(estimate.method) << ")";
        if (inspection.pack.declared_token_size) io.out << ", declared " << *inspection.pack.declared_token_size;
        io.out << '\n';
    }
    return exit_code;
}

int cmd_problems_list(CliIo& io) {
    for (const auto& p : context::problem_registry()) {
        io.out << p.id << "  " << context::to_string(p.background) << "  " << context::to_string(p.sector) << '\n';
    }
    return 0;
}

int cmd_problems_show(const std::string& id, CliIo& io) {
    io.out << context::get_problem(id).statement << '\n';
    return 0;
}

int cmd_config_show(const std::map<std::string, ResolvedValue>& values, CliIo& io) {
    for (const auto& [key, v] : values) {
        io.out << key << " = " << json(v.value).dump() << "  (" << to_string(v.source) << ")\n";
    }
    return 0;
}

}  // namespace casbench::cli
