#include "casbench/eval/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "casbench/context/problem.hpp"
#include "casbench/eval/matrix.hpp"

namespace casbench::eval {

double mean(const std::vector<int>& values) {
    if (values.empty()) return 0;
    const long long sum = std::accumulate(values.begin(), values.end(), 0LL);
    return static_cast<double>(sum) / static_cast<double>(values.size());
}

double median(std::vector<int> values) {
    if (values.empty()) return 0;
    std::sort(values.begin(), values.end());
    const auto n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return (static_cast<double>(values[n / 2 - 1]) + values[n / 2]) / 2.0;
}

std::map<CellKey, Verdict> verdicts_of(const std::vector<GradeRecord>& grades) {
    std::map<CellKey, Verdict> out;
    for (const auto& g : grades) {
        if (auto parts = parse_run_id(g.run_id)) out[{parts->pack_id, parts->problem_id}] = g.verdict;
    }
    return out;
}

MetricsTable aggregate_metrics(const std::vector<CellResult>& results, const std::vector<GradeRecord>& grades) {
    return aggregate_metrics(results, verdicts_of(grades));
}

MetricsTable aggregate_metrics(const std::vector<CellResult>& results, const std::map<CellKey, Verdict>& verdicts) {
    MetricsTable table;
    for (const auto& cell : results) {
        CellKey key{cell.pack_id, cell.problem_id};
        CellMetrics metrics{cell.result.turns, cell.result.restarts, cell.result.status, std::nullopt};
        if (auto it = verdicts.find(key); it != verdicts.end()) metrics.verdict = it->second;
        if (!table.per_cell.emplace(key, metrics).second) {
            throw DuplicateCell("more than one result for " + cell.pack_id + "/" + cell.problem_id);
        }
        if (std::find(table.pack_order.begin(), table.pack_order.end(), cell.pack_id) == table.pack_order.end()) {
            table.pack_order.push_back(cell.pack_id);
        }
    }

    for (const auto& pack : table.pack_order) {
        std::vector<int> turns;
        std::vector<int> restarts;
        PackSummary summary;
        for (const auto& [key, metrics] : table.per_cell) {
            if (key.first != pack) continue;
            turns.push_back(metrics.turns);
            restarts.push_back(metrics.restarts);
            if (metrics.verdict) {
                ++summary.graded;
                if (*metrics.verdict == Verdict::pass) ++summary.pass_count;
            }
        }
        summary.cells = static_cast<int>(turns.size());
        summary.mean_turns = mean(turns);
        summary.mean_restarts = mean(restarts);
        summary.median_restarts = median(std::move(restarts));
        summary.median_turns = median(std::move(turns));
        table.per_pack[pack] = summary;
    }
    return table;
}

std::vector<std::pair<CellKey, CellMetrics>> MetricsTable::ordered_cells() const {
    std::vector<std::pair<CellKey, CellMetrics>> cells(per_cell.begin(), per_cell.end());
    const auto pack_rank = [this](const std::string& pack) {
        return std::find(pack_order.begin(), pack_order.end(), pack) - pack_order.begin();
    };
    const auto problem_rank = [](const std::string& problem) {
        return context::problem_index(problem).value_or(context::problem_registry().size());
    };
    std::stable_sort(cells.begin(), cells.end(), [&](const auto& a, const auto& b) {
        const auto ka = std::make_tuple(pack_rank(a.first.first), problem_rank(a.first.second), a.first.second);
        const auto kb = std::make_tuple(pack_rank(b.first.first), problem_rank(b.first.second), b.first.second);
        return ka < kb;
    });
    return cells;
}

std::vector<CellKey> turn_limit_inconsistencies(const MetricsTable& table, int max_turns) {
    std::vector<CellKey> bad;
    for (const auto& [key, metrics] : table.per_cell) {
        const bool at_limit = metrics.turns == max_turns;
        const bool limited = metrics.status == agent::RunStatus::turn_limit;
        if (at_limit != limited) bad.push_back(key);
    }
    return bad;
}

}  // namespace casbench::eval
