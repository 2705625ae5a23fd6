#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>

#include "casbench/context/pack.hpp"
#include "casbench/context/problem.hpp"
#include "casbench/eval/matrix.hpp"
#include "casbench/eval/metrics.hpp"
#include "casbench/eval/report.hpp"
#include "casbench/eval/rubric.hpp"
#include "casbench/util/text.hpp"
#include "support/files.hpp"
#include "support/source_figures.hpp"

using namespace casbench;
using namespace casbench::eval;

namespace {

std::vector<RuleAssessment> assess(Finding r1, Finding r2, Finding r3, Finding r4) {
    return {{Rule::R1_setup, r1, ""},
            {Rule::R2_background_eom, r2, ""},
            {Rule::R3_perturbation_analysis, r3, ""},
            {Rule::R4_subtlety, r4, ""}};
}

// Truth table written out independently: which findings let a rule pass.
bool oracle_passes(const std::vector<Finding>& findings) {
    static const std::map<Finding, bool> tolerated{{Finding::ok, true},
                                                   {Finding::violated_but_harmless, true},
                                                   {Finding::not_applicable, true},
                                                   {Finding::violated, false}};
    bool all = true;
    for (auto f : findings) all = all && tolerated.at(f);
    return all;
}

// k-th smallest element without sorting: the value with at most k smaller elements
// and more than k smaller-or-equal ones.
int order_statistic(const std::vector<int>& v, std::size_t k) {
    for (int candidate : v) {
        std::size_t less = 0;
        std::size_t less_equal = 0;
        for (int x : v) {
            less += x < candidate;
            less_equal += x <= candidate;
        }
        if (less <= k && k < less_equal) return candidate;
    }
    return -1;
}

double oracle_median(const std::vector<int>& v) {
    const auto n = v.size();
    if (n % 2 == 1) return order_statistic(v, n / 2);
    return (order_statistic(v, n / 2 - 1) + order_statistic(v, n / 2)) / 2.0;
}

ResultsFile reference_results() {
    return parse_results_csv(support::slurp(support::source_dir / "fixtures" / "reference_results.csv"));
}

agent::RunResult result_of(int turns, int restarts, agent::RunStatus status = agent::RunStatus::solved_claimed) {
    agent::RunResult r;
    r.turns = turns;
    r.restarts = restarts;
    r.status = status;
    return r;
}

}  // namespace

TEST(Verdict, TruthTableOver81Combinations) {
    const std::vector<Finding> main_rules{Finding::ok, Finding::violated, Finding::violated_but_harmless};
    const std::vector<Finding> r4_values{Finding::ok, Finding::violated_but_harmless, Finding::not_applicable};
    int combos = 0;
    for (auto a : main_rules)
        for (auto b : main_rules)
            for (auto c : main_rules)
                for (auto d : r4_values) {
                    ++combos;
                    const auto expected = oracle_passes({a, b, c, d}) ? Verdict::pass : Verdict::fail;
                    EXPECT_EQ(derive_verdict(assess(a, b, c, d)), expected);
                }
    EXPECT_EQ(combos, 81);
}

TEST(Verdict, AllFindingsAndOrderIndependence) {
    std::mt19937 rng(5);
    for (auto a : all_findings)
        for (auto b : all_findings)
            for (auto c : all_findings)
                for (auto d : all_findings) {
                    auto list = assess(a, b, c, d);
                    if (d == Finding::violated) {
                        EXPECT_THROW(derive_verdict(list), InvalidFinding);
                        continue;
                    }
                    const auto expected = oracle_passes({a, b, c, d}) ? Verdict::pass : Verdict::fail;
                    for (int k = 0; k < 4; ++k) {
                        std::shuffle(list.begin(), list.end(), rng);
                        EXPECT_EQ(derive_verdict(list), expected);
                    }
                }
}

TEST(Verdict, Examples) {
    EXPECT_EQ(derive_verdict(assess(Finding::ok, Finding::violated_but_harmless, Finding::ok, Finding::ok)), Verdict::pass);
    EXPECT_EQ(derive_verdict(assess(Finding::violated, Finding::ok, Finding::ok, Finding::ok)), Verdict::fail);
    EXPECT_EQ(derive_verdict(assess(Finding::ok, Finding::ok, Finding::ok, Finding::ok)), Verdict::pass);
}

TEST(Verdict, IncompleteAssessment) {
    auto list = assess(Finding::ok, Finding::ok, Finding::ok, Finding::ok);
    list.pop_back();
    EXPECT_THROW(derive_verdict(list), IncompleteAssessment);
    list.push_back(list.front());
    EXPECT_THROW(derive_verdict(list), IncompleteAssessment);
    EXPECT_THROW(derive_verdict({}), IncompleteAssessment);
}

TEST(Grades, JsonlRoundTripAndLatestWins) {
    support::TempDir dir;
    const auto path = dir.path / "grades.jsonl";
    auto first = make_grade("10ex/sRMt/attempt1", assess(Finding::violated, Finding::ok, Finding::ok, Finding::ok), "ab",
                            "2025-01-01T00:00:00Z");
    auto second = make_grade("10ex/sRMt/attempt1",
                             assess(Finding::ok, Finding::violated_but_harmless, Finding::ok, Finding::not_applicable),
                             "ab", "2025-01-02T00:00:00Z");
    second.assessments[1].note = "sign slip, \"harmless\"\nsecond line";
    append_grade(path, first);
    append_grade(path, second);
    const auto grades = read_grades(path);
    ASSERT_EQ(grades.size(), 2u);
    EXPECT_EQ(grades[0], first);
    EXPECT_EQ(grades[1], second);
    const auto latest = latest_grades(grades);
    ASSERT_EQ(latest.size(), 1u);
    EXPECT_EQ(latest[0].verdict, Verdict::pass);
    EXPECT_TRUE(read_grades(dir.path / "missing.jsonl").empty());
}

TEST(Grades, ContradictoryVerdictRejected) {
    auto g = make_grade("a/b/attempt1", assess(Finding::violated, Finding::ok, Finding::ok, Finding::ok), "", "");
    auto j = to_json(g);
    j["verdict"] = "pass";
    EXPECT_THROW(grade_from_json(j), GradeFormatError);
    j["verdict"] = "fail";
    j["assessments"][3]["finding"] = "violated";
    EXPECT_THROW(grade_from_json(j), GradeFormatError);
    EXPECT_THROW(parse_grades("{not json}\n"), GradeFormatError);
}

TEST(Matrix, FullGridShape) {
    const auto packs = context::list_packs(support::source_dir / "packs");
    const auto specs = plan_matrix(default_pack_order(), context::problem_ids(), {}, packs);
    ASSERT_EQ(specs.size(), 36u);
    EXPECT_EQ(specs.front().run_id, "10ex/R2Fs/attempt1");
    EXPECT_EQ(specs[9].run_id, "3broad/R2Fs/attempt1");
    EXPECT_EQ(specs.back().run_id, "instruction/sRi2Ft/attempt1");
    for (const auto& s : specs) EXPECT_EQ(parse_run_id(s.run_id), (RunIdParts{s.pack_id, s.problem_id, 1}));
}

TEST(Matrix, SingleAndErrors) {
    const std::vector<std::string> known{"10ex", "instruction"};
    EXPECT_EQ(plan_matrix({"10ex"}, {"sRMt"}, {}, known).size(), 1u);
    EXPECT_THROW(plan_matrix({"10ex"}, {"sRMt", "sRMt"}, {}, known), DuplicateId);
    EXPECT_THROW(plan_matrix({"10ex", "10ex"}, {"sRMt"}, {}, known), DuplicateId);
    EXPECT_THROW(plan_matrix({"nope"}, {"sRMt"}, {}, known), context::UnknownPack);
    EXPECT_THROW(plan_matrix({"10ex"}, {"nope"}, {}, known), context::UnknownProblem);
}

TEST(Matrix, RunIdParsing) {
    EXPECT_EQ(parse_run_id("a/b/attempt12"), (RunIdParts{"a", "b", 12}));
    EXPECT_FALSE(parse_run_id("a/b"));
    EXPECT_FALSE(parse_run_id("a/b/try1"));
    EXPECT_FALSE(parse_run_id("a/b/attempt0"));
    EXPECT_FALSE(parse_run_id("/b/attempt1"));
    EXPECT_FALSE(parse_run_id("a/b/attempt1x"));
}

TEST(Metrics, FixtureMatchesFigureData) {
    const auto fig = support::figure_data();
    ASSERT_EQ(fig.packs, default_pack_order());
    ASSERT_EQ(fig.problems, context::problem_ids());
    ASSERT_EQ(fig.cells.size(), 36u);
    const auto file = reference_results();
    ASSERT_EQ(file.results.size(), 36u);
    for (const auto& cell : file.results) {
        const auto& figure = fig.cells.at({cell.pack_id, cell.problem_id});
        EXPECT_EQ(cell.result.turns, figure.turns) << cell.pack_id << "/" << cell.problem_id;
        EXPECT_EQ(cell.result.restarts, figure.restarts);
        EXPECT_EQ(file.verdicts.at({cell.pack_id, cell.problem_id}) == Verdict::pass, figure.pass);
        EXPECT_EQ(cell.result.status == agent::RunStatus::turn_limit, figure.turns == 100);
    }
}

TEST(Metrics, ReferenceSummaryValues) {
    const auto start = std::chrono::steady_clock::now();
    const auto file = reference_results();
    const auto table = aggregate_metrics(file.results, file.verdicts);
    EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(1));

    // exact values from the figure's cell data
    const std::map<std::string, std::array<double, 4>> exact{{"10ex", {503.0 / 9, 57, 21.0 / 9, 2}},
                                                             {"3broad", {57, 40, 19.0 / 9, 2}},
                                                             {"3tailored", {424.0 / 9, 41, 14.0 / 9, 1}},
                                                             {"instruction", {67, 73, 78.0 / 9, 8}}};
    const std::map<std::string, int> passes{{"10ex", 5}, {"3broad", 5}, {"3tailored", 7}, {"instruction", 3}};
    const bool cross_check = support::have_reference_document();
    const auto fig = cross_check ? support::figure_data() : support::FigureData{};
    if (cross_check) ASSERT_EQ(fig.summary_lines.size(), 4u);
    for (std::size_t p = 0; p < default_pack_order().size(); ++p) {
        const auto& pack = default_pack_order()[p];
        const auto& s = table.per_pack.at(pack);
        const std::array<double, 4> got{s.mean_turns, s.median_turns, s.mean_restarts, s.median_restarts};
        for (std::size_t k = 0; k < 4; ++k) {
            EXPECT_NEAR(got[k], exact.at(pack)[k], 1e-9) << pack << " value " << k;
            // the plotted points carry eight decimals
            if (cross_check) EXPECT_NEAR(got[k], fig.summary_lines[k].at(p), 5e-9) << pack << " plotted " << k;
        }
        EXPECT_EQ(s.pass_count, passes.at(pack));
        EXPECT_EQ(s.cells, 9);
    }
    EXPECT_TRUE(turn_limit_inconsistencies(table, 100).empty());
}

TEST(Metrics, MeanMedianAgainstBruteForce) {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto n = std::uniform_int_distribution<std::size_t>(1, 15)(rng);
        std::vector<CellResult> cells;
        std::vector<int> turns;
        std::vector<int> restarts;
        for (std::size_t i = 0; i < n; ++i) {
            const int t = std::uniform_int_distribution<int>(1, 100)(rng);
            const int r = std::uniform_int_distribution<int>(0, 20)(rng);
            turns.push_back(t);
            restarts.push_back(r);
            cells.push_back({"p", "q" + std::to_string(i), result_of(t, r)});
        }
        const auto table = aggregate_metrics(cells, std::vector<GradeRecord>{});
        const auto& s = table.per_pack.at("p");
        long long sum_t = 0;
        long long sum_r = 0;
        for (std::size_t i = 0; i < n; ++i) {
            sum_t += turns[i];
            sum_r += restarts[i];
        }
        // exact comparison through the rational sum/n
        EXPECT_NEAR(s.mean_turns * static_cast<double>(n), static_cast<double>(sum_t), 1e-9);
        EXPECT_NEAR(s.mean_restarts * static_cast<double>(n), static_cast<double>(sum_r), 1e-9);
        EXPECT_EQ(s.median_turns, oracle_median(turns));
        EXPECT_EQ(s.median_restarts, oracle_median(restarts));
    }
}

TEST(Metrics, SingleCellAndDuplicates) {
    const auto table = aggregate_metrics({{"p", "q", result_of(12, 3)}}, std::vector<GradeRecord>{});
    const auto& s = table.per_pack.at("p");
    EXPECT_EQ(s.mean_turns, 12);
    EXPECT_EQ(s.median_turns, 12);
    EXPECT_EQ(s.mean_restarts, 3);
    EXPECT_EQ(s.median_restarts, 3);
    EXPECT_EQ(s.pass_count, 0);
    EXPECT_EQ(s.graded, 0);
    EXPECT_THROW(aggregate_metrics({{"p", "q", result_of(1, 0)}, {"p", "q", result_of(2, 0)}}, std::vector<GradeRecord>{}),
                 DuplicateCell);
}

TEST(Metrics, UngradedExcludedFromPassCountOnly) {
    std::vector<CellResult> cells{{"p", "a", result_of(10, 1)}, {"p", "b", result_of(20, 2)}, {"p", "c", result_of(30, 3)}};
    const auto grade = make_grade("p/a/attempt1", assess(Finding::ok, Finding::ok, Finding::ok, Finding::ok), "", "");
    const auto stray = make_grade("x/y/attempt1", assess(Finding::ok, Finding::ok, Finding::ok, Finding::ok), "", "");
    const auto table = aggregate_metrics(cells, std::vector<GradeRecord>{grade, stray});
    const auto& s = table.per_pack.at("p");
    EXPECT_EQ(s.cells, 3);
    EXPECT_EQ(s.mean_turns, 20);
    EXPECT_EQ(s.pass_count, 1);
    EXPECT_EQ(s.graded, 1);
    EXPECT_EQ(table.per_cell.size(), 3u);
}

TEST(Metrics, TurnLimitBookkeeping) {
    const auto table = aggregate_metrics({{"p", "a", result_of(100, 1, agent::RunStatus::turn_limit)},
                                          {"p", "b", result_of(100, 1, agent::RunStatus::solved_claimed)},
                                          {"p", "c", result_of(40, 1, agent::RunStatus::turn_limit)},
                                          {"p", "d", result_of(40, 1)}},
                                         std::vector<GradeRecord>{});
    EXPECT_EQ(turn_limit_inconsistencies(table, 100), (std::vector<CellKey>{{"p", "b"}, {"p", "c"}}));
}

TEST(Grid, ReferencePassCounts) {
    const auto file = reference_results();
    const auto grid = render_grid(file.verdicts);
    const auto lines = util::split_lines(grid);
    ASSERT_EQ(lines.size(), 12u);  // header, nine problems, footer, trailing empty
    EXPECT_EQ(lines[0], "problem  10ex  3broad  3tailored  instruction");
    EXPECT_EQ(lines[10], "passes   5     5       7          3");
    EXPECT_EQ(lines[1], "R2Fs     ●     ●       ●          ○");
}

TEST(Grid, EmptyIsAllDots) {
    const auto grid = render_grid(std::map<CellKey, Verdict>{});
    const auto lines = util::split_lines(grid);
    int dots = 0;
    for (std::size_t i = 1; i <= 9; ++i) dots += static_cast<int>(std::count(lines[i].begin(), lines[i].end(), '.'));
    EXPECT_EQ(dots, 36);
    EXPECT_EQ(grid.find("●"), std::string::npos);
    EXPECT_EQ(lines[10], "passes   0     0       0          0");
}

TEST(Grid, SinglePassPosition) {
    const auto g = make_grade("3tailored/sRi2Ft/attempt1", assess(Finding::ok, Finding::ok, Finding::ok, Finding::ok), "", "");
    const auto lines = util::split_lines(render_grid(std::vector<GradeRecord>{g}));
    EXPECT_EQ(lines[9], "sRi2Ft   .     .       ●          .");
    EXPECT_EQ(lines[10], "passes   0     0       1          0");
}

TEST(Grid, CountsAgreeWithCsvRows) {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<CellResult> cells;
        std::map<CellKey, Verdict> verdicts;
        for (const auto& pack : default_pack_order()) {
            for (const auto& problem : context::problem_ids()) {
                if (rng() % 3 == 0) continue;
                cells.push_back({pack, problem, result_of(static_cast<int>(rng() % 99) + 1, static_cast<int>(rng() % 9))});
                if (rng() % 4 != 0) verdicts[{pack, problem}] = rng() % 2 ? Verdict::pass : Verdict::fail;
            }
        }
        if (cells.empty()) continue;
        const auto table = aggregate_metrics(cells, verdicts);
        const auto csv = export_results(table, ExportFormat::csv);
        std::map<std::string, int> from_csv;
        for (const auto& line : util::split_lines(csv)) {
            if (line.size() > 5 && line.substr(line.size() - 5) == ",pass") ++from_csv[line.substr(0, line.find(','))];
        }
        const auto grid = render_grid(table);
        const auto lines = util::split_lines(grid);
        const auto footer = util::split_whitespace(lines[lines.size() - 2]);
        ASSERT_EQ(footer.size(), table.pack_order.size() + 1);
        for (std::size_t c = 0; c < table.pack_order.size(); ++c) {
            const auto& pack = table.pack_order[c];
            EXPECT_EQ(std::stoi(footer[c + 1]), from_csv[pack]);
            EXPECT_EQ(table.per_pack.at(pack).pass_count, from_csv[pack]);
        }
        EXPECT_EQ(parse_results_csv(csv).verdicts, verdicts);
    }
}

TEST(Export, CsvRowsAndEmpty) {
    const auto file = reference_results();
    const auto table = aggregate_metrics(file.results, file.verdicts);
    const auto csv = export_results(table, ExportFormat::csv);
    const auto lines = util::split_lines(csv);
    EXPECT_EQ(lines[0], "pack,problem,turns,restarts,status,verdict");
    EXPECT_EQ(lines[1], "10ex,R2Fs,49,2,solved_claimed,pass");
    EXPECT_EQ(csv, support::slurp(support::source_dir / "fixtures" / "reference_results.csv"));
    EXPECT_EQ(export_results(MetricsTable{}, ExportFormat::csv), "pack,problem,turns,restarts,status,verdict\n");
}

TEST(Export, MarkdownCells) {
    const auto file = reference_results();
    const auto md = export_results(aggregate_metrics(file.results, file.verdicts), ExportFormat::markdown);
    const auto lines = util::split_lines(md);
    EXPECT_EQ(lines[0], "| problem | 10ex | 3broad | 3tailored | instruction |");
    EXPECT_EQ(lines[1], "|---|---|---|---|---|");
    EXPECT_EQ(lines[2], "| R2Fs | 49\\|2 | 75\\|2 | 49\\|1 | 50\\|4 |");
    EXPECT_EQ(lines[3], "| sRFs | 82\\|2 | 89\\|2 | 100\\|4 (turn_limit) | 95\\|13 |");
}

TEST(Export, SummaryNumbers) {
    const auto file = reference_results();
    const auto summary = export_summary(aggregate_metrics(file.results, file.verdicts));
    EXPECT_EQ(summary,
              "pack,cells,mean_turns,median_turns,mean_restarts,median_restarts,pass_count,graded\n"
              "10ex,9,55.889,57,2.333,2,5,9\n"
              "3broad,9,57,40,2.111,2,5,9\n"
              "3tailored,9,47.111,41,1.556,1,7,9\n"
              "instruction,9,67,73,8.667,8,3,9\n");
    EXPECT_EQ(format_number(0), "0");
    EXPECT_EQ(format_number(2.5), "2.5");
    EXPECT_EQ(format_number(1.0005), "1.001");
}

TEST(Export, ResultsCsvErrors) {
    EXPECT_THROW(parse_results_csv(""), ResultsFormatError);
    EXPECT_THROW(parse_results_csv("a,b\n"), ResultsFormatError);
    const std::string header = "pack,problem,turns,restarts,status,verdict\n";
    EXPECT_THROW(parse_results_csv(header + "p,q,1,2,solved_claimed\n"), ResultsFormatError);
    EXPECT_THROW(parse_results_csv(header + "p,q,x,2,solved_claimed,\n"), ResultsFormatError);
    EXPECT_THROW(parse_results_csv(header + "p,q,1,2,finished,\n"), ResultsFormatError);
    EXPECT_THROW(parse_results_csv(header + "p,q,1,2,gave_up,maybe\n"), ResultsFormatError);
    EXPECT_THROW(parse_results_csv(header + "p,q,1,2,gave_up,\np,q,1,2,gave_up,\n"), ResultsFormatError);
    const auto ok = parse_results_csv(header + "p,q,1,2,gave_up,\r\n");
    ASSERT_EQ(ok.results.size(), 1u);
    EXPECT_TRUE(ok.verdicts.empty());
}
