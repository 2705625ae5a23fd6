#pragma once

// Pulls the turn/restart grid, the pass marks and the plotted summary points
// straight out of the LaTeX in paper.md, so fixture tests do not trust the fixture.

#include <map>
#include <regex>
#include <string>
#include <utility>
#include <vector>

#include "support/files.hpp"

namespace support {

struct FigureCell {
    int turns = 0;
    int restarts = 0;
    bool pass = false;
};

struct FigureData {
    std::vector<std::string> packs;     // column labels, x = 1..4
    std::vector<std::string> problems;  // row labels, y = 1..9
    std::map<std::pair<std::string, std::string>, FigureCell> cells;
    // plot lines in source order: mean turns, median turns, mean restarts, median restarts
    std::vector<std::vector<double>> summary_lines;
};

inline std::vector<std::string> foreach_labels(const std::string& text, const std::string& first) {
    const std::regex list(R"(\\foreach \\[xy]/\\label in \{([^}]*)\})");
    for (std::sregex_iterator it(text.begin(), text.end(), list), end; it != end; ++it) {
        const std::string body = (*it)[1];
        if (body.rfind("1/" + first, 0) != 0) continue;
        std::vector<std::string> labels;
        const std::regex item(R"((\d+)/([^,]+))");
        for (std::sregex_iterator j(body.begin(), body.end(), item); j != std::sregex_iterator(); ++j) {
            labels.push_back((*j)[2]);
        }
        return labels;
    }
    return {};
}

inline FigureData figure_data() {
    const std::string text = slurp(source_dir / "paper.md");
    FigureData fig;
    fig.packs = foreach_labels(text, "10ex");
    fig.problems = foreach_labels(text, "R2Fs");

    const std::regex entry(R"(\\entry\{(\d)\}\{(\d)\}\{(?:\\textcolor\{Red\}\{)?(\d+)\}?\}\{(\d+)\})");
    for (std::sregex_iterator it(text.begin(), text.end(), entry), end; it != end; ++it) {
        const auto& m = *it;
        const auto key = std::make_pair(fig.packs.at(std::stoi(m[1]) - 1), fig.problems.at(std::stoi(m[2]) - 1));
        fig.cells[key].turns = std::stoi(m[3]);
        fig.cells[key].restarts = std::stoi(m[4]);
    }

    // Integer coordinates only; the legend marker sits at fractional ones.
    const std::regex pass_node(R"(\\node\[pass\] at \((\d),(\d)\))");
    for (std::sregex_iterator it(text.begin(), text.end(), pass_node), end; it != end; ++it) {
        const auto key = std::make_pair(fig.packs.at(std::stoi((*it)[1]) - 1), fig.problems.at(std::stoi((*it)[2]) - 1));
        fig.cells[key].pass = true;
    }

    const std::regex plot(R"(plot\[mark=[^\]]*\] coordinates \{([^}]*)\})");
    const std::regex point(R"(\((\d),([0-9.]+)\))");
    for (std::sregex_iterator it(text.begin(), text.end(), plot), end; it != end; ++it) {
        const std::string body = (*it)[1];
        std::vector<double> values;
        for (std::sregex_iterator j(body.begin(), body.end(), point); j != std::sregex_iterator(); ++j) {
            values.push_back(std::stod((*j)[2]));
        }
        fig.summary_lines.push_back(values);
    }
    return fig;
}

}  // namespace support
