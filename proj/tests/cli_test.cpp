#include <gtest/gtest.h>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <random>
#include <sstream>
#include <thread>

#include "casbench/agent/transcript_io.hpp"
#include "casbench/cli/app.hpp"
#include "casbench/cli/config.hpp"
#include "casbench/eval/rubric.hpp"
#include "casbench/util/text.hpp"
#include "support/files.hpp"

using namespace casbench;
using namespace casbench::cli;

namespace {

struct Invocation {
    int code = 0;
    std::string out;
    std::string err;
};

Invocation invoke(std::vector<std::string> args, const std::string& input = "",
                  std::map<std::string, std::string> env = {}) {
    std::istringstream in(input);
    std::ostringstream out;
    std::ostringstream err;
    CliIo io{in, out, err, [env](const std::string& name) -> std::optional<std::string> {
                 auto it = env.find(name);
                 if (it == env.end()) return std::nullopt;
                 return it->second;
             }};
    const int code = run_cli(args, io);
    return {code, out.str(), err.str()};
}

std::vector<std::string> with_dirs(std::vector<std::string> args, const support::TempDir& dir) {
    args.insert(args.end(), {"--packs-dir", (support::source_dir / "packs").string(), "--results-dir",
                             (dir.path / "results").string()});
    return args;
}

Invocation run_fixture(const support::TempDir& dir) {
    return invoke(with_dirs({"run", "--pack", "10ex", "--problem", "sRMt", "--mock-llm",
                             support::fixture_path().string(), "--mock-cas", "replay"},
                            dir));
}

std::string random_value(const ConfigKey& key, std::mt19937& rng) {
    const auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    switch (key.kind) {
        case ValueKind::text: return "v" + std::to_string(pick(0, 99999));
        case ValueKind::word_list: return "cmd" + std::to_string(pick(0, 99)) + " -q --x" + std::to_string(pick(0, 9));
        case ValueKind::integer: return std::to_string(pick(1, 500));
        case ValueKind::optional_integer: return pick(0, 3) == 0 ? "off" : std::to_string(pick(1, 8000));
        case ValueKind::number: return std::to_string(pick(1, 600)) + (pick(0, 1) ? ".5" : "");
        case ValueKind::optional_number: return pick(0, 3) == 0 ? "default" : "0." + std::to_string(pick(1, 9));
        case ValueKind::choice: return key.choices.at(static_cast<std::size_t>(pick(0, static_cast<int>(key.choices.size()) - 1)));
    }
    return "";
}

}  // namespace

TEST(Config, PrecedenceFlagOverEnvOverFile) {
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        ConfigValues file;
        ConfigValues env;
        ConfigValues flags;
        std::map<std::string, std::string> expected;
        for (const auto& key : config_keys()) {
            const bool in_file = rng() % 2;
            const bool in_env = rng() % 2;
            const bool in_flags = rng() % 2;
            if (in_file) expected[key.name] = file[key.name] = random_value(key, rng);
            if (in_env) expected[key.name] = env[key.name] = random_value(key, rng);
            if (in_flags) expected[key.name] = flags[key.name] = random_value(key, rng);
        }
        const auto merged = merge_layers(file, env, flags);
        const auto resolved = config_values(build_config(merged));
        const auto defaults = config_values(HarnessConfig{});
        for (const auto& key : config_keys()) {
            auto it = expected.find(key.name);
            const auto want = it == expected.end() ? defaults.at(key.name) : it->second;
            EXPECT_EQ(resolved.at(key.name), want) << key.name;
            const auto source = flags.count(key.name)  ? ConfigSource::flag
                                : env.count(key.name)  ? ConfigSource::environment
                                : file.count(key.name) ? ConfigSource::file
                                                       : ConfigSource::defaults;
            EXPECT_EQ(merged.at(key.name).source, source) << key.name;
        }
    }
}

TEST(Config, EveryKeyReachableFromEachSource) {
    support::TempDir dir;
    for (const auto& key : config_keys()) {
        std::mt19937 rng(static_cast<unsigned>(key.name.size()));
        const auto value = random_value(key, rng);
        const auto canonical = config_values(build_config(merge_layers({}, {}, {{key.name, value}}))).at(key.name);

        nlohmann::json file_json;
        file_json[nlohmann::json::json_pointer("/" + [&] {
            std::string p = key.name;
            for (auto& c : p) c = c == '.' ? '/' : c;
            return p;
        }())] = value;
        const auto from_file = parse_config_file(file_json.dump());
        EXPECT_EQ(from_file.at(key.name), value);

        const auto from_env = environment_values([&](const std::string& name) -> std::optional<std::string> {
            if (name == env_var_for(key.name)) return value;
            return std::nullopt;
        });
        EXPECT_EQ(from_env.at(key.name), value);
        EXPECT_EQ(config_values(resolve_config({}, from_env, {})).at(key.name), canonical);
        EXPECT_EQ(config_values(resolve_config(from_file, {}, {})).at(key.name), canonical);
        EXPECT_EQ(parse_assignments({key.name + "=" + value}).at(key.name), value);
    }
    EXPECT_EQ(env_var_for("run.max_turns"), "CASBENCH_RUN_MAX_TURNS");
}

TEST(Config, FileFormatAndErrors) {
    const auto values = parse_config_file(R"({"run": {"max_turns": 7, "thinking_budget": null},
        "backend": {"command": ["maple", "-q"], "init": ["interface(prettyprint = 0):", "with(Physics):"]},
        "results_dir": "out"})");
    const auto config = resolve_config(values, {}, {});
    EXPECT_EQ(config.defaults.max_turns, 7);
    EXPECT_FALSE(config.defaults.params.thinking_budget);
    EXPECT_EQ(config.backend.launch_command, (std::vector<std::string>{"maple", "-q"}));
    EXPECT_EQ(config.backend.init_statements.size(), 2u);
    EXPECT_EQ(config.results_dir, "out");
    EXPECT_THROW(parse_config_file(R"({"run": {"max_turn": 7}})"), ConfigError);
    EXPECT_THROW(parse_config_file("[1]"), ConfigError);
    EXPECT_THROW(parse_config_file("{"), ConfigError);
    EXPECT_THROW(parse_assignments({"nokey"}), ConfigError);
    try {
        resolve_config({}, {{"run.max_turns", "lots"}}, {});
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("run.max_turns (from env)"), std::string::npos);
    }
    EXPECT_THROW(resolve_config({}, {}, {{"run.max_turns", "0"}}), ConfigError);
    EXPECT_THROW(resolve_config({}, {}, {{"jobs", "0"}}), ConfigError);
}

TEST(Config, DefaultsMatchRunConfig) {
    const HarnessConfig config;
    EXPECT_EQ(config.defaults.max_turns, 100);
    EXPECT_TRUE(config.backend.launch_command.empty());
    EXPECT_TRUE(config.provider.model.empty());
}

TEST(Config, CliFlagBeatsEnvironmentAndFile) {
    support::TempDir dir;
    const auto file = dir.path / "c.json";
    support::spit(file, R"({"run": {"max_turns": 3}, "results_dir": "from-file"})");
    const auto shown = invoke({"config", "show", "--config", file.string(), "--set", "run.max_turns=9"}, "",
                              {{"CASBENCH_RUN_MAX_TURNS", "5"}, {"CASBENCH_RESULTS_DIR", "from-env"}});
    ASSERT_EQ(shown.code, 0) << shown.err;
    EXPECT_NE(shown.out.find("run.max_turns = \"9\"  (flag)"), std::string::npos);
    EXPECT_NE(shown.out.find("results_dir = \"from-env\"  (env)"), std::string::npos);
    const auto via_env_file = invoke({"config", "show"}, "", {{"CASBENCH_CONFIG", file.string()}});
    EXPECT_NE(via_env_file.out.find("run.max_turns = \"3\"  (file)"), std::string::npos);
}

TEST(Cli, FixtureReplayRun) {
    support::TempDir dir;
    const auto start = std::chrono::steady_clock::now();
    const auto r = run_fixture(dir);
    EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(5));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("10ex/sRMt/attempt1  solved_claimed  turns=18  restarts=1"), std::string::npos);
    const auto path = dir.path / "results" / "transcripts" / "10ex__sRMt__attempt1.jsonl";
    const auto transcript = agent::read_transcript(path);
    ASSERT_TRUE(transcript.final);
    EXPECT_EQ(transcript.final->result.turns, 18);
    EXPECT_EQ(transcript.final->result.restarts, 1);
    EXPECT_EQ(transcript.final->result.transcript_ref, "10ex/sRMt/attempt1");

    const auto rendered = invoke(with_dirs({"render", "10ex/sRMt/attempt1"}, dir));
    ASSERT_EQ(rendered.code, 0) << rendered.err;
    EXPECT_EQ(rendered.out, support::slurp(support::fixture_path()));

    // the JSONL recording replays to the same transcript
    support::TempDir second;
    const auto again = invoke(with_dirs({"run", "--pack", "10ex", "--problem", "sRMt", "--mock-llm", path.string(),
                                         "--mock-cas", "replay"},
                                        second));
    ASSERT_EQ(again.code, 0) << again.err;
    EXPECT_NE(again.out.find("turns=18  restarts=1"), std::string::npos);
}

TEST(Cli, UnknownPackWritesNothing) {
    support::TempDir dir;
    const auto r = invoke(with_dirs({"run", "--pack", "nope", "--problem", "sRMt", "--mock-llm",
                                     support::fixture_path().string(), "--mock-cas", "replay"},
                                    dir));
    EXPECT_NE(r.code, 0);
    EXPECT_NE(r.err.find("unknown pack 'nope'"), std::string::npos);
    EXPECT_FALSE(std::filesystem::exists(dir.path / "results"));
}

TEST(Cli, TurnLimitFromFlag) {
    support::TempDir dir;
    support::spit(dir.path / "script.json", R"(["x := 1;", {"text": "x := 2;"}, "# done"])");
    const auto r = invoke(with_dirs({"run", "--pack", "instruction", "--problem", "sRFt", "--mock-llm",
                                     (dir.path / "script.json").string(), "--mock-cas", "echo", "--max-turns", "2"},
                                    dir));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("turn_limit  turns=2"), std::string::npos);
}

TEST(Cli, MatrixFanOut) {
    support::TempDir dir;
    support::spit(dir.path / "script.json", R"(["restart;", "# done"])");
    const auto r = invoke(with_dirs({"run", "--pack", "10ex", "instruction", "--problem", "sRMt", "sRFt", "--mock-llm",
                                     (dir.path / "script.json").string(), "--mock-cas", "echo", "--jobs", "2"},
                                    dir));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto lines = util::split_lines(r.out);
    ASSERT_EQ(lines.size(), 5u);
    EXPECT_EQ(lines[0].substr(0, lines[0].find(' ')), "10ex/sRMt/attempt1");
    EXPECT_EQ(lines[3].substr(0, lines[3].find(' ')), "instruction/sRFt/attempt1");
    for (int i = 0; i < 4; ++i) EXPECT_NE(lines[static_cast<std::size_t>(i)].find("solved_claimed  turns=2  restarts=1"), std::string::npos);
}

TEST(Cli, ReplayNeedsRecording) {
    support::TempDir dir;
    support::spit(dir.path / "script.json", R"(["1;"])");
    const auto r = invoke(with_dirs({"run", "--pack", "10ex", "--problem", "sRMt", "--mock-llm",
                                     (dir.path / "script.json").string(), "--mock-cas", "replay"},
                                    dir));
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("recorded transcript"), std::string::npos);
}

TEST(Cli, LiveRunNeedsModelAndKey) {
    support::TempDir dir;
    const auto no_model = invoke(with_dirs({"run", "--pack", "10ex", "--problem", "sRMt", "--mock-cas", "echo"}, dir));
    EXPECT_EQ(no_model.code, 1);
    EXPECT_NE(no_model.err.find("provider.model"), std::string::npos);
    const auto no_key = invoke(with_dirs({"run", "--pack", "10ex", "--problem", "sRMt", "--mock-cas", "echo", "--set",
                                          "provider.model=m"},
                                         dir));
    EXPECT_EQ(no_key.code, 1);
    EXPECT_NE(no_key.err.find("ANTHROPIC_API_KEY"), std::string::npos);
    const auto no_backend = invoke(with_dirs({"run", "--pack", "10ex", "--problem", "sRMt", "--mock-llm",
                                              support::fixture_path().string()},
                                             dir));
    EXPECT_EQ(no_backend.code, 1);
    EXPECT_NE(no_backend.err.find("backend.command"), std::string::npos);
}

TEST(Cli, ProcessBackendThroughConfig) {
    support::TempDir dir;
    support::spit(dir.path / "script.json", R"(["y := 6*7;", "# done"])");
    const auto r = invoke(with_dirs({"run", "--pack", "instruction", "--problem", "sRMt", "--mock-llm",
                                     (dir.path / "script.json").string(), "--set",
                                     std::string("backend.command=") + CASBENCH_MOCK_CAS, "--set",
                                     "backend.quiescence_ms=20"},
                                    dir));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto transcript =
        agent::read_transcript(dir.path / "results" / "transcripts" / "instruction__sRMt__attempt1.jsonl");
    EXPECT_EQ(transcript.turns.at(0).statement_results.at(0).outputs.at(0).text, "y := 42");
}

TEST(Cli, RenderIncompleteAndMalformed) {
    support::TempDir dir;
    ASSERT_EQ(run_fixture(dir).code, 0);
    const auto path = dir.path / "results" / "transcripts" / "10ex__sRMt__attempt1.jsonl";
    auto lines = util::split_lines(support::slurp(path));
    lines.resize(lines.size() - 2);  // drop final record and the trailing empty piece
    support::spit(dir.path / "partial.jsonl", util::join(lines, "\n") + "\n");
    const auto partial = invoke({"render", (dir.path / "partial.jsonl").string()});
    ASSERT_EQ(partial.code, 0) << partial.err;
    const std::string trailer = "[run incomplete]\n";
    ASSERT_GE(partial.out.size(), trailer.size());
    EXPECT_EQ(partial.out.substr(partial.out.size() - trailer.size()), trailer);

    support::spit(dir.path / "bad.jsonl", "{\"type\":\"turn\"}\n");
    EXPECT_EQ(invoke({"render", (dir.path / "bad.jsonl").string()}).code, 1);
    EXPECT_EQ(invoke(with_dirs({"render", "no/such/attempt1"}, dir)).code, 1);
}

TEST(Cli, GradeInteractive) {
    support::TempDir dir;
    ASSERT_EQ(run_fixture(dir).code, 0);
    const auto grades = dir.path / "results" / "grades.jsonl";

    const auto pass = invoke(with_dirs({"grade", "10ex/sRMt/attempt1", "--grader", "me"}, dir),
                             "ok\n\nharmless\nsign slip\nok\n\nok\n\n");
    ASSERT_EQ(pass.code, 0) << pass.err;
    EXPECT_NE(pass.out.find("verdict: pass"), std::string::npos);

    // R4 cannot be violated; the prompt repeats, and junk is rejected too
    const auto fail = invoke(with_dirs({"grade", "10ex/sRMt/attempt1"}, dir),
                             "ok\n\nok\n\nwhat\nviolated\nwrong reduction\nviolated\nn/a\n\n", {{"USER", "someone"}});
    ASSERT_EQ(fail.code, 0) << fail.err;
    EXPECT_NE(fail.out.find("verdict: fail"), std::string::npos);
    EXPECT_NE(fail.out.find("can only forgive"), std::string::npos);

    const auto records = eval::read_grades(grades);
    ASSERT_EQ(records.size(), 2u);
    EXPECT_EQ(records[0].assessments[1].finding, eval::Finding::violated_but_harmless);
    EXPECT_EQ(records[0].assessments[1].note, "sign slip");
    EXPECT_EQ(records[0].grader, "me");
    EXPECT_EQ(records[1].assessments[2].finding, eval::Finding::violated);
    EXPECT_EQ(records[1].grader, "someone");

    const auto before = support::slurp(grades);
    const auto aborted = invoke(with_dirs({"grade", "10ex/sRMt/attempt1"}, dir), "ok\nnote\nok\n");
    EXPECT_EQ(aborted.code, 1);
    EXPECT_EQ(support::slurp(grades), before);

    const auto unknown = invoke(with_dirs({"grade", "10ex/sRFs/attempt1"}, dir), "ok\n");
    EXPECT_EQ(unknown.code, 1);
    EXPECT_NE(unknown.err.find("unknown run"), std::string::npos);
}

TEST(Cli, ReportReferenceDataset) {
    support::TempDir dir;
    const auto r = invoke(with_dirs({"report", "--input", (support::source_dir / "fixtures" / "reference_results.csv").string()},
                                    dir));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto report = dir.path / "results" / "report";
    const auto summary = support::slurp(report / "summary.csv");
    EXPECT_NE(summary.find("10ex,9,55.889,57,2.333,2,5,9"), std::string::npos);
    EXPECT_NE(summary.find("3broad,9,57,40,2.111,2,5,9"), std::string::npos);
    EXPECT_NE(summary.find("3tailored,9,47.111,41,1.556,1,7,9"), std::string::npos);
    EXPECT_NE(summary.find("instruction,9,67,73,8.667,8,3,9"), std::string::npos);
    EXPECT_EQ(support::slurp(report / "metrics.csv"), support::slurp(support::source_dir / "fixtures" / "reference_results.csv"));
    EXPECT_NE(support::slurp(report / "metrics.md").find("100\\|4 (turn_limit)"), std::string::npos);
    EXPECT_NE(support::slurp(report / "grid.txt").find("passes   5     5       7          3"), std::string::npos);

    const auto csv_only = invoke(with_dirs({"report", "--format", "csv", "--out", (dir.path / "csv").string(), "--input",
                                            (support::source_dir / "fixtures" / "reference_results.csv").string()},
                                           dir));
    ASSERT_EQ(csv_only.code, 0);
    EXPECT_TRUE(std::filesystem::exists(dir.path / "csv" / "metrics.csv"));
    EXPECT_FALSE(std::filesystem::exists(dir.path / "csv" / "metrics.md"));
}

TEST(Cli, ReportEmptyAndSingleCell) {
    support::TempDir dir;
    const auto empty = invoke(with_dirs({"report"}, dir));
    EXPECT_NE(empty.code, 0);
    EXPECT_NE(empty.err.find("no results"), std::string::npos);

    ASSERT_EQ(run_fixture(dir).code, 0);
    ASSERT_EQ(invoke(with_dirs({"grade", "10ex/sRMt/attempt1"}, dir), "ok\n\nok\n\nok\n\nok\n\n").code, 0);
    const auto single = invoke(with_dirs({"report"}, dir));
    ASSERT_EQ(single.code, 0) << single.err;
    const auto report = dir.path / "results" / "report";
    const auto csv = util::split_lines(support::slurp(report / "metrics.csv"));
    ASSERT_EQ(csv.size(), 3u);
    EXPECT_EQ(csv[1], "10ex,sRMt,18,1,solved_claimed,pass");
    const auto grid = support::slurp(report / "grid.txt");
    std::size_t marks = 0;
    for (auto pos = grid.find("●"); pos != std::string::npos; pos = grid.find("●", pos + 1)) ++marks;
    EXPECT_EQ(marks, 1u);
    EXPECT_EQ(grid, "problem  10ex\nsRMt     ●\npasses   1\n");
}

TEST(Cli, PacksAndProblems) {
    const auto packs = (support::source_dir / "packs").string();
    const auto ok = invoke({"packs", "validate", "--packs-dir", packs});
    EXPECT_EQ(ok.code, 0) << ok.err;
    EXPECT_NE(ok.out.find("instruction: ok"), std::string::npos);

    support::TempDir dir;
    support::spit(dir.path / "broken" / "manifest.json",
                  R"({"id": "broken", "documents": [{"title": "Gone", "file": "gone.txt"}]})");
    const auto broken = invoke({"packs", "validate", "broken", "--packs-dir", dir.path.string()});
    EXPECT_EQ(broken.code, 1);
    EXPECT_NE(broken.out.find("broken: error"), std::string::npos);

    const auto list = invoke({"problems", "list"});
    EXPECT_EQ(util::split_lines(list.out).size(), 10u);
    EXPECT_EQ(list.out.substr(0, 4), "R2Fs");
    const auto show = invoke({"problems", "show", "R2Fs"});
    EXPECT_EQ(show.code, 0);
    EXPECT_NE(show.out.find("Jordan frame"), std::string::npos);
    EXPECT_EQ(invoke({"problems", "show", "X"}).code, 1);
    EXPECT_NE(invoke({}).code, 0);
}

TEST(Cli, LivePathAgainstLocalProviderAndToyCas) {
    httplib::Server server;
    std::vector<nlohmann::json> bodies;
    std::mutex mutex;
    server.Post("/v1/messages", [&](const httplib::Request& req, httplib::Response& res) {
        std::lock_guard lock(mutex);
        bodies.push_back(nlohmann::json::parse(req.body));
        const std::string text = bodies.size() == 1 ? "restart;\nx := 2*3;" : "# x is 6";
        nlohmann::json reply{{"content", {{{"type", "text"}, {"text", text}}}},
                             {"usage", {{"input_tokens", 10}, {"output_tokens", 5}}}};
        res.set_content(reply.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread runner([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    support::TempDir dir;
    support::spit(dir.path / "live.json", nlohmann::json{{"provider", {{"endpoint", "http://127.0.0.1:" + std::to_string(port)},
                                                                       {"model", "test-model"},
                                                                       {"key_env", "FAKE_KEY"}}},
                                                         {"backend", {{"command", CASBENCH_MOCK_CAS}, {"quiescence_ms", 20}}},
                                                         {"run", {{"thinking_budget", 2048}}}}
                                              .dump());
    const auto r = invoke(with_dirs({"run", "--config", (dir.path / "live.json").string(), "--pack", "instruction",
                                     "--problem", "sRMt"},
                                    dir),
                          "", {{"FAKE_KEY", "secret"}});
    server.stop();
    runner.join();
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("solved_claimed  turns=2  restarts=1"), std::string::npos);
    ASSERT_EQ(bodies.size(), 2u);
    EXPECT_EQ(bodies[0]["model"], "test-model");
    EXPECT_EQ(bodies[0]["thinking"]["budget_tokens"], 2048);
    EXPECT_EQ(bodies[1]["messages"].back()["content"], "x := 6");
    const auto t = agent::read_transcript(dir.path / "results" / "transcripts" / "instruction__sRMt__attempt1.jsonl");
    EXPECT_EQ(t.meta.params.model_id, "test-model");
    EXPECT_EQ(t.turns[0].usage.input_tokens, 10);
}
