#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "casbench/eval/metrics.hpp"

namespace casbench::eval {

enum class ExportFormat { csv, markdown };

inline constexpr std::string_view pass_mark = "●";
inline constexpr std::string_view fail_mark = "○";
inline constexpr std::string_view ungraded_mark = ".";
inline constexpr std::string_view results_csv_header = "pack,problem,turns,restarts,status,verdict";

/// The four shipped packs, in report column order.
const std::vector<std::string>& default_pack_order();

/// Problems as rows (given order), packs as columns, then a footer of pass counts.
std::string render_grid(const std::map<CellKey, Verdict>& verdicts,
                        const std::vector<std::string>& pack_ids = default_pack_order(),
                        const std::vector<std::string>& problem_ids = {});

std::string render_grid(const std::vector<GradeRecord>& grades,
                        const std::vector<std::string>& pack_ids = default_pack_order());

/// Grid over the table's own packs and problems.
std::string render_grid(const MetricsTable& table);

std::string export_results(const MetricsTable& table, ExportFormat format);

/// One row per pack: cells, means, medians, pass and graded counts.
std::string export_summary(const MetricsTable& table);

/// Up to three decimals, trailing zeros dropped: 55.888.. -> "55.889", 57 -> "57".
std::string format_number(double value);

class ResultsFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ResultsFile {
    std::vector<CellResult> results;
    std::map<CellKey, Verdict> verdicts;
};

/// Reads the CSV written by export_results (an empty verdict means ungraded).
ResultsFile parse_results_csv(std::string_view text);

}  // namespace casbench::eval
