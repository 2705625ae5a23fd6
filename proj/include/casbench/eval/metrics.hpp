#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "casbench/agent/types.hpp"
#include "casbench/eval/rubric.hpp"

namespace casbench::eval {

using CellKey = std::pair<std::string, std::string>;  // (pack, problem)

struct CellResult {
    std::string pack_id;
    std::string problem_id;
    agent::RunResult result;
};

struct CellMetrics {
    int turns = 0;
    int restarts = 0;
    agent::RunStatus status = agent::RunStatus::solved_claimed;
    std::optional<Verdict> verdict;

    bool operator==(const CellMetrics&) const = default;
};

struct PackSummary {
    int cells = 0;
    double mean_turns = 0;
    double median_turns = 0;
    double mean_restarts = 0;
    double median_restarts = 0;
    int pass_count = 0;
    int graded = 0;
};

struct MetricsTable {
    std::map<CellKey, CellMetrics> per_cell;
    std::map<std::string, PackSummary> per_pack;
    std::vector<std::string> pack_order;  // first appearance in the input

    /// Cells with packs in pack_order and problems in registry order (unknown ids last, sorted).
    std::vector<std::pair<CellKey, CellMetrics>> ordered_cells() const;
};

class DuplicateCell : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

double mean(const std::vector<int>& values);

/// Middle of the sorted values; even lengths average the two middle ones. Empty gives 0.
double median(std::vector<int> values);

/// Grades are matched to cells through their run id; the last grade for a run wins
/// and grades for cells without a result are ignored.
MetricsTable aggregate_metrics(const std::vector<CellResult>& results, const std::vector<GradeRecord>& grades);

MetricsTable aggregate_metrics(const std::vector<CellResult>& results, const std::map<CellKey, Verdict>& verdicts);

std::map<CellKey, Verdict> verdicts_of(const std::vector<GradeRecord>& grades);

/// Cells whose status and turn count disagree about hitting the limit.
std::vector<CellKey> turn_limit_inconsistencies(const MetricsTable& table, int max_turns);

}  // namespace casbench::eval
