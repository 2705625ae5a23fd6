#include "casbench/agent/rendered.hpp"

#include <algorithm>
#include <regex>

#include "casbench/agent/transcript_io.hpp"
#include "casbench/util/text.hpp"

namespace casbench::agent {

namespace {

const std::regex& attempt_pattern() {
    static const std::regex re(R"(# \+{17} META TRY ([0-9]+) \+{14} )");
    return re;
}

const std::regex& turn_pattern() {
    static const std::regex re(R"(# -{17} TURN ([0-9]+) -{17})");
    return re;
}

std::optional<int> header_number(const std::string& line, const std::regex& pattern) {
    std::smatch m;
    if (!std::regex_match(line, m, pattern)) return std::nullopt;
    return std::stoi(m[1].str());
}

bool is_header(const std::string& line) {
    return header_number(line, attempt_pattern()) || header_number(line, turn_pattern());
}

}  // namespace

std::string attempt_header(int attempt) {
    return "# +++++++++++++++++ META TRY " + std::to_string(attempt) + " ++++++++++++++ ";
}

std::string turn_header(int turn) {
    return "# ----------------- TURN " + std::to_string(turn) + " -----------------";
}

RenderedTranscript to_rendered(const Transcript& transcript) {
    RenderedTranscript rendered;
    int attempts = transcript.final ? transcript.final->result.attempts : 1;
    for (const auto& turn : transcript.turns) attempts = std::max(attempts, turn.attempt_index);
    for (int a = 1; a <= attempts; ++a) rendered.attempts.push_back({a, {}});

    for (const auto& turn : transcript.turns) {
        RenderedTurn out{turn.turn_index, turn.assistant_text, {}};
        for (const auto& result : turn.statement_results) {
            for (auto& line : cas::output_lines(result)) out.output_lines.push_back(std::move(line));
        }
        rendered.attempts[static_cast<std::size_t>(turn.attempt_index - 1)].turns.push_back(std::move(out));
    }
    rendered.incomplete = !transcript.final.has_value();
    return rendered;
}

std::string render(const RenderedTranscript& rendered) {
    std::string out;
    for (const auto& attempt : rendered.attempts) {
        out += attempt_header(attempt.index);
        out += "\n\n";
        for (const auto& turn : attempt.turns) {
            out += turn_header(turn.index);
            out += '\n';
            out += turn.text;
            out += '\n';
            for (const auto& line : turn.output_lines) {
                out += output_prefix;
                out += line;
                out += '\n';
            }
        }
    }
    if (rendered.incomplete) {
        out += incomplete_trailer;
        out += '\n';
    }
    return out;
}

std::string render_transcript(const Transcript& transcript) {
    return render(to_rendered(transcript));
}

RenderedTranscript parse_rendered(std::string_view text) {
    RenderedTranscript rendered;
    if (text.empty()) return rendered;
    if (text.back() != '\n') throw SchemaViolation("rendered transcript does not end with a newline");
    auto lines = util::split_lines(text.substr(0, text.size() - 1));

    std::size_t i = 0;
    while (i < lines.size()) {
        const auto& line = lines[i];
        const auto where = "rendered line " + std::to_string(i + 1) + ": ";
        if (auto attempt = header_number(line, attempt_pattern())) {
            if (i + 1 >= lines.size() || !lines[i + 1].empty()) {
                throw SchemaViolation(where + "attempt header must be followed by a blank line");
            }
            rendered.attempts.push_back({*attempt, {}});
            i += 2;
        } else if (auto turn = header_number(line, turn_pattern())) {
            if (rendered.attempts.empty()) throw SchemaViolation(where + "turn header before any attempt header");
            std::size_t end = i + 1;
            while (end < lines.size() && !is_header(lines[end])) ++end;
            if (end == lines.size() && end > i + 1 && lines[end - 1] == incomplete_trailer) {
                rendered.incomplete = true;
                --end;
            }
            std::size_t split = end;
            while (split > i + 1 && util::starts_with(lines[split - 1], output_prefix)) --split;
            RenderedTurn parsed{*turn, {}, {}};
            std::vector<std::string> text_lines(lines.begin() + static_cast<long>(i + 1),
                                                lines.begin() + static_cast<long>(split));
            parsed.text = util::join(text_lines, "\n");
            for (std::size_t k = split; k < end; ++k) parsed.output_lines.push_back(lines[k].substr(output_prefix.size()));
            rendered.attempts.back().turns.push_back(std::move(parsed));
            i = rendered.incomplete ? lines.size() : end;
        } else if (line == incomplete_trailer && i + 1 == lines.size()) {
            rendered.incomplete = true;
            ++i;
        } else {
            throw SchemaViolation(where + "expected an attempt or turn header");
        }
    }
    return rendered;
}

std::optional<std::string> round_trip_hazard(const RenderedTranscript& rendered) {
    for (const auto& attempt : rendered.attempts) {
        for (const auto& turn : attempt.turns) {
            const auto where = "attempt " + std::to_string(attempt.index) + " turn " + std::to_string(turn.index) + ": ";
            const auto lines = util::split_lines(turn.text);
            for (const auto& line : lines) {
                if (is_header(line)) return where + "text line looks like a header";
            }
            if (util::starts_with(lines.back(), output_prefix)) return where + "last text line looks like output";
            for (const auto& line : turn.output_lines) {
                if (line.find('\n') != std::string::npos) return where + "output line contains a newline";
            }
            if (!rendered.incomplete && &attempt == &rendered.attempts.back() && &turn == &attempt.turns.back()) {
                const auto& last = turn.output_lines.empty() ? lines.back() : turn.output_lines.back();
                if (turn.output_lines.empty() && last == incomplete_trailer) return where + "text ends like the trailer";
            }
        }
    }
    return std::nullopt;
}

std::vector<llm::ScriptedResponse> assistant_script(const RenderedTranscript& rendered) {
    std::vector<llm::ScriptedResponse> script;
    for (const auto& attempt : rendered.attempts) {
        for (const auto& turn : attempt.turns) script.push_back({turn.text, {}});
    }
    return script;
}

std::vector<std::vector<std::string>> output_lines_of(const RenderedAttempt& attempt) {
    std::vector<std::vector<std::string>> lines;
    for (const auto& turn : attempt.turns) lines.push_back(turn.output_lines);
    return lines;
}

}  // namespace casbench::agent
