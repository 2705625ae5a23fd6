#include "casbench/cli/app.hpp"

#include <iostream>

#include "CLI11.hpp"

namespace casbench::cli {

namespace {

struct GlobalOptions {
    std::string config_file;
    std::vector<std::string> assignments;
    std::string packs_dir;
    std::string results_dir;
};

ConfigValues flag_values(const GlobalOptions& global, const std::map<std::string, std::string>& extra) {
    ConfigValues flags = parse_assignments(global.assignments);
    if (!global.packs_dir.empty()) flags["packs_dir"] = global.packs_dir;
    if (!global.results_dir.empty()) flags["results_dir"] = global.results_dir;
    for (const auto& [key, value] : extra) flags[key] = value;
    return flags;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, CliIo& io) {
    CLI::App app{"casbench: run, replay, grade and report CAS-agent benchmark episodes", "casbench"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions global;
    app.add_option("--config", global.config_file, "JSON config file (default: $CASBENCH_CONFIG)");
    app.add_option("--set", global.assignments, "override a config key, key=value (repeatable)");
    app.add_option("--packs-dir", global.packs_dir, "directory of context packs");
    app.add_option("--results-dir", global.results_dir, "directory for transcripts, grades and reports");

    std::map<std::string, std::string> extra_flags;
    RunOptions run;
    std::string max_turns;
    std::string thinking_budget;
    std::string jobs;
    std::string mock_llm;
    auto* run_cmd = app.add_subcommand("run", "run episodes for a pack x problem matrix");
    run_cmd->add_option("--pack", run.packs, "pack id(s), or all")->required();
    run_cmd->add_option("--problem", run.problems, "problem id(s), or all")->required();
    run_cmd->add_option("--max-turns", max_turns, "turn budget per run");
    run_cmd->add_option("--thinking-budget", thinking_budget, "thinking tokens per completion, or off");
    run_cmd->add_option("--jobs", jobs, "runs executed in parallel");
    run_cmd->add_option("--mock-llm", mock_llm, "scripted replies: rendered transcript, JSONL transcript or JSON list");
    run_cmd->add_option("--mock-cas", run.mock_cas, "process (default), echo or replay")
        ->check(CLI::IsMember({"process", "echo", "replay"}));
    run_cmd->add_flag("--progress", run.progress, "report every turn on stderr");

    std::string render_target;
    auto* render_cmd = app.add_subcommand("render", "print a transcript in the human-readable layout");
    render_cmd->add_option("transcript", render_target, "transcript file or run id")->required();

    std::string grade_run;
    std::string grader;
    auto* grade_cmd = app.add_subcommand("grade", "grade a run interactively against the four rules");
    grade_cmd->add_option("run_id", grade_run, "pack/problem/attemptN")->required();
    grade_cmd->add_option("--grader", grader, "name stored with the grade (default: $USER)");

    ReportOptions report;
    std::string report_input;
    std::string report_out;
    auto* report_cmd = app.add_subcommand("report", "write the pass grid, metrics and summary");
    report_cmd->add_option("--format", report.format, "csv, markdown or all")
        ->check(CLI::IsMember({"csv", "markdown", "all"}));
    report_cmd->add_option("--input", report_input, "results CSV to report on instead of the transcripts");
    report_cmd->add_option("--out", report_out, "output directory (default: <results_dir>/report)");

    auto* packs_cmd = app.add_subcommand("packs", "context pack tools");
    packs_cmd->require_subcommand(1);
    std::vector<std::string> validate_ids;
    auto* validate_cmd = packs_cmd->add_subcommand("validate", "check manifests, documents and token estimates");
    validate_cmd->add_option("ids", validate_ids, "pack ids (default: all)");

    auto* problems_cmd = app.add_subcommand("problems", "benchmark problems");
    problems_cmd->require_subcommand(1);
    auto* list_cmd = problems_cmd->add_subcommand("list", "list problem ids");
    std::string show_id;
    auto* show_cmd = problems_cmd->add_subcommand("show", "print a problem statement");
    show_cmd->add_option("id", show_id, "problem id")->required();

    auto* config_cmd = app.add_subcommand("config", "inspect configuration");
    config_cmd->require_subcommand(1);
    auto* config_show_cmd = config_cmd->add_subcommand("show", "print every key with its source");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, io.out, io.err);
    }

    try {
        if (!max_turns.empty()) extra_flags["run.max_turns"] = max_turns;
        if (!thinking_budget.empty()) extra_flags["run.thinking_budget"] = thinking_budget;
        if (!jobs.empty()) extra_flags["jobs"] = jobs;

        std::string config_file = global.config_file;
        if (config_file.empty()) config_file = io.env("CASBENCH_CONFIG").value_or("");
        const ConfigValues file = config_file.empty() ? ConfigValues{} : load_config_file(config_file);
        const auto merged = merge_layers(file, environment_values(io.env), flag_values(global, extra_flags));
        const auto config = build_config(merged);

        if (*run_cmd) {
            if (!mock_llm.empty()) run.mock_llm = mock_llm;
            return cmd_run(config, run, io);
        }
        if (*render_cmd) return cmd_render(config, render_target, io);
        if (*grade_cmd) {
            if (grader.empty()) grader = io.env("USER").value_or("unknown");
            return cmd_grade(config, grade_run, grader, io);
        }
        if (*report_cmd) {
            if (!report_input.empty()) report.input_csv = report_input;
            if (!report_out.empty()) report.out_dir = report_out;
            return cmd_report(config, report, io);
        }
        if (*validate_cmd) return cmd_packs_validate(config, validate_ids, io);
        if (*list_cmd) return cmd_problems_list(io);
        if (*show_cmd) return cmd_problems_show(show_id, io);
        if (*config_show_cmd) return cmd_config_show(merged, io);
    } catch (const std::exception& e) {
        io.err << "casbench: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace casbench::cli
