#include "casbench/cas/session.hpp"

#include "casbench/util/text.hpp"

namespace casbench::cas {

std::string_view to_string(OutputKind kind) {
    switch (kind) {
        case OutputKind::result: return "result";
        case OutputKind::warning: return "warning";
        case OutputKind::error: return "error";
        case OutputKind::banner: return "banner";
    }
    return "result";
}

std::optional<OutputKind> output_kind_from_string(std::string_view name) {
    for (auto kind : {OutputKind::result, OutputKind::warning, OutputKind::error, OutputKind::banner}) {
        if (to_string(kind) == name) return kind;
    }
    return std::nullopt;
}

void BackendDescriptor::validate() const {
    if (prompt_marker.empty()) throw std::invalid_argument("backend '" + name + "': prompt_marker must not be empty");
    if (statement_timeout.count() <= 0) throw std::invalid_argument("backend '" + name + "': statement_timeout must be positive");
    if (output_byte_limit && *output_byte_limit == 0) {
        throw std::invalid_argument("backend '" + name + "': output_byte_limit must be positive when set");
    }
}

std::vector<OutputBlock> segment_output(std::string_view raw, std::string_view warning_prefix,
                                        std::string_view error_prefix) {
    std::vector<OutputBlock> blocks;
    if (raw.empty()) return blocks;
    if (raw.back() == '\n') raw.remove_suffix(1);

    for (const auto& line : util::split_lines(raw)) {
        std::optional<OutputKind> kind;
        if (!warning_prefix.empty() && util::starts_with(line, warning_prefix)) {
            kind = OutputKind::warning;
        } else if (!error_prefix.empty() && util::starts_with(line, error_prefix)) {
            kind = OutputKind::error;
        }
        if (kind) {
            blocks.push_back({*kind, line});
        } else if (!blocks.empty() && blocks.back().kind == OutputKind::result) {
            blocks.back().text.push_back('\n');
            blocks.back().text.append(line);
        } else {
            blocks.push_back({OutputKind::result, line});
        }
    }
    return blocks;
}

std::vector<std::string> output_lines(const StatementResult& result) {
    std::vector<std::string> lines;
    for (const auto& block : result.outputs) {
        for (auto& line : util::split_lines(block.text)) lines.push_back(std::move(line));
    }
    return lines;
}

bool has_error(const std::vector<StatementResult>& results) {
    for (const auto& result : results) {
        for (const auto& block : result.outputs) {
            if (block.kind == OutputKind::error) return true;
        }
    }
    return false;
}

}  // namespace casbench::cas
