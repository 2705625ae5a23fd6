#include "casbench/eval/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

#include "casbench/context/problem.hpp"
#include "casbench/util/text.hpp"

namespace casbench::eval {

namespace {

std::string pad(std::string_view text, std::size_t display_width, std::size_t width) {
    std::string out(text);
    if (display_width < width) out.append(width - display_width, ' ');
    return out;
}

std::string_view mark_of(const std::map<CellKey, Verdict>& verdicts, const CellKey& key) {
    auto it = verdicts.find(key);
    if (it == verdicts.end()) return ungraded_mark;
    return it->second == Verdict::pass ? pass_mark : fail_mark;
}

// Registry problems first, then anything else the table mentions, sorted.
std::vector<std::string> problems_in(const MetricsTable& table) {
    std::vector<std::string> out;
    std::set<std::string> present;
    for (const auto& [key, metrics] : table.per_cell) present.insert(key.second);
    for (const auto& id : context::problem_ids()) {
        if (present.erase(id) > 0) out.push_back(id);
    }
    out.insert(out.end(), present.begin(), present.end());
    return out;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.emplace_back(util::trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

int parse_count(const std::string& field, int line_number) {
    int value = 0;
    const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || end != field.data() + field.size() || value < 0) {
        throw ResultsFormatError("line " + std::to_string(line_number) + ": '" + field + "' is not a count");
    }
    return value;
}

std::string md_cell(const CellMetrics& m) {
    std::string cell = std::to_string(m.turns) + "\\|" + std::to_string(m.restarts);
    if (m.status != agent::RunStatus::solved_claimed) cell += " (" + std::string(agent::to_string(m.status)) + ")";
    return cell;
}

}  // namespace

const std::vector<std::string>& default_pack_order() {
    static const std::vector<std::string> order{"10ex", "3broad", "3tailored", "instruction"};
    return order;
}

std::string render_grid(const std::map<CellKey, Verdict>& verdicts, const std::vector<std::string>& pack_ids,
                        const std::vector<std::string>& problem_ids) {
    const auto problems = problem_ids.empty() ? context::problem_ids() : problem_ids;
    const std::string corner = "problem";
    const std::string footer = "passes";
    std::size_t label_width = std::max(corner.size(), footer.size());
    for (const auto& p : problems) label_width = std::max(label_width, p.size());

    std::vector<int> passes(pack_ids.size(), 0);
    std::vector<std::size_t> widths;
    for (const auto& pack : pack_ids) widths.push_back(std::max<std::size_t>(pack.size(), 1));

    std::string out = pad(corner, corner.size(), label_width);
    for (std::size_t c = 0; c < pack_ids.size(); ++c) out += "  " + pad(pack_ids[c], pack_ids[c].size(), widths[c]);
    out += '\n';

    for (const auto& problem : problems) {
        std::string row = pad(problem, problem.size(), label_width);
        for (std::size_t c = 0; c < pack_ids.size(); ++c) {
            const auto mark = mark_of(verdicts, {pack_ids[c], problem});
            if (mark == pass_mark) ++passes[c];
            row += "  " + pad(mark, 1, widths[c]);
        }
        while (!row.empty() && row.back() == ' ') row.pop_back();
        out += row + '\n';
    }

    std::string last = pad(footer, footer.size(), label_width);
    for (std::size_t c = 0; c < pack_ids.size(); ++c) {
        const auto count = std::to_string(passes[c]);
        last += "  " + pad(count, count.size(), widths[c]);
    }
    while (!last.empty() && last.back() == ' ') last.pop_back();
    out += last + '\n';
    return out;
}

std::string render_grid(const std::vector<GradeRecord>& grades, const std::vector<std::string>& pack_ids) {
    return render_grid(verdicts_of(latest_grades(grades)), pack_ids);
}

std::string render_grid(const MetricsTable& table) {
    std::map<CellKey, Verdict> verdicts;
    for (const auto& [key, metrics] : table.per_cell) {
        if (metrics.verdict) verdicts[key] = *metrics.verdict;
    }
    return render_grid(verdicts, table.pack_order, problems_in(table));
}

std::string export_results(const MetricsTable& table, ExportFormat format) {
    std::string out;
    if (format == ExportFormat::csv) {
        out = std::string(results_csv_header) + '\n';
        for (const auto& [key, m] : table.ordered_cells()) {
            out += key.first + ',' + key.second + ',' + std::to_string(m.turns) + ',' + std::to_string(m.restarts) +
                   ',' + std::string(agent::to_string(m.status)) + ',' +
                   (m.verdict ? std::string(to_string(*m.verdict)) : std::string()) + '\n';
        }
        return out;
    }

    out = "| problem |";
    std::string rule = "|---|";
    for (const auto& pack : table.pack_order) {
        out += ' ' + pack + " |";
        rule += "---|";
    }
    out += '\n' + rule + '\n';
    for (const auto& problem : problems_in(table)) {
        out += "| " + problem + " |";
        for (const auto& pack : table.pack_order) {
            auto it = table.per_cell.find({pack, problem});
            out += it == table.per_cell.end() ? " |" : ' ' + md_cell(it->second) + " |";
        }
        out += '\n';
    }
    return out;
}

std::string export_summary(const MetricsTable& table) {
    std::string out = "pack,cells,mean_turns,median_turns,mean_restarts,median_restarts,pass_count,graded\n";
    for (const auto& pack : table.pack_order) {
        const auto& s = table.per_pack.at(pack);
        out += pack + ',' + std::to_string(s.cells) + ',' + format_number(s.mean_turns) + ',' +
               format_number(s.median_turns) + ',' + format_number(s.mean_restarts) + ',' +
               format_number(s.median_restarts) + ',' + std::to_string(s.pass_count) + ',' +
               std::to_string(s.graded) + '\n';
    }
    return out;
}

std::string format_number(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.3f", std::round(value * 1000.0) / 1000.0);
    std::string text = buffer;
    while (text.back() == '0') text.pop_back();
    if (text.back() == '.') text.pop_back();
    if (text == "-0") text = "0";
    return text;
}

ResultsFile parse_results_csv(std::string_view text) {
    ResultsFile file;
    int line_number = 0;
    bool header_seen = false;
    std::set<CellKey> seen;
    for (auto line : util::split_lines(text)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (util::trim(line).empty()) continue;
        if (!header_seen) {
            if (line != results_csv_header) {
                throw ResultsFormatError("expected header '" + std::string(results_csv_header) + "'");
            }
            header_seen = true;
            continue;
        }
        const auto fields = split_csv_line(line);
        if (fields.size() != 6) {
            throw ResultsFormatError("line " + std::to_string(line_number) + ": expected 6 fields, got " +
                                     std::to_string(fields.size()));
        }
        CellResult cell;
        cell.pack_id = fields[0];
        cell.problem_id = fields[1];
        cell.result.turns = parse_count(fields[2], line_number);
        cell.result.restarts = parse_count(fields[3], line_number);
        const auto status = agent::run_status_from_string(fields[4]);
        if (!status) throw ResultsFormatError("line " + std::to_string(line_number) + ": unknown status '" + fields[4] + "'");
        cell.result.status = *status;
        if (!fields[5].empty()) {
            const auto verdict = verdict_from_string(fields[5]);
            if (!verdict) {
                throw ResultsFormatError("line " + std::to_string(line_number) + ": unknown verdict '" + fields[5] + "'");
            }
            file.verdicts[{cell.pack_id, cell.problem_id}] = *verdict;
        }
        if (!seen.insert({cell.pack_id, cell.problem_id}).second) {
            throw ResultsFormatError("line " + std::to_string(line_number) + ": duplicate cell " + cell.pack_id + "/" +
                                     cell.problem_id);
        }
        file.results.push_back(std::move(cell));
    }
    if (!header_seen) throw ResultsFormatError("results file is empty");
    return file;
}

}  // namespace casbench::eval
