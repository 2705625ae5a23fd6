// Toy Maple-like REPL used to exercise the subprocess driver without a Maple licence.
//
// Reads statements from stdin, prints "> " after each one. Understands a handful of
// forms: restart, interface(prettyprint[ = N]), name := expr, integer arithmetic,
// print(...), solve(...), error("..."), WARNING("..."), stderr("..."), sleep(s),
// flood(n), anames(), crash(), quit. With --echo every statement is printed back.

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>

#include "casbench/cas/statement.hpp"
#include "casbench/util/text.hpp"

namespace {

using casbench::util::trim;

struct Options {
    bool echo = false;
    bool echo_input = false;
    bool quiet = false;
    bool exit_on_start = false;
    std::string prompt = "> ";
};

class ArithmeticParser {
public:
    explicit ArithmeticParser(std::string_view text) : text_(text) {}

    std::optional<long long> parse() {
        auto value = expression();
        skip_space();
        if (!value || pos_ != text_.size()) return std::nullopt;
        return value;
    }

private:
    void skip_space() {
        while (pos_ < text_.size() && text_[pos_] == ' ') ++pos_;
    }

    std::optional<long long> expression() {
        auto value = term();
        while (value) {
            skip_space();
            if (pos_ >= text_.size() || (text_[pos_] != '+' && text_[pos_] != '-')) break;
            const char op = text_[pos_++];
            auto rhs = term();
            if (!rhs) return std::nullopt;
            value = op == '+' ? *value + *rhs : *value - *rhs;
        }
        return value;
    }

    std::optional<long long> term() {
        auto value = factor();
        while (value) {
            skip_space();
            if (pos_ >= text_.size() || text_[pos_] != '*') break;
            ++pos_;
            auto rhs = factor();
            if (!rhs) return std::nullopt;
            value = *value * *rhs;
        }
        return value;
    }

    std::optional<long long> factor() {
        skip_space();
        if (pos_ >= text_.size()) return std::nullopt;
        if (text_[pos_] == '-') {
            ++pos_;
            auto inner = factor();
            if (!inner) return std::nullopt;
            return -*inner;
        }
        if (text_[pos_] == '(') {
            ++pos_;
            auto inner = expression();
            skip_space();
            if (!inner || pos_ >= text_.size() || text_[pos_] != ')') return std::nullopt;
            ++pos_;
            return inner;
        }
        const auto start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])) != 0) ++pos_;
        if (pos_ == start) return std::nullopt;
        return std::stoll(std::string(text_.substr(start, pos_ - start)));
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

std::string strip_comments(std::string_view text) {
    std::string out;
    bool in_string = false;
    bool in_comment = false;
    for (char c : text) {
        if (in_comment) {
            if (c == '\n') {
                in_comment = false;
                out.push_back(c);
            }
            continue;
        }
        if (c == '"') in_string = !in_string;
        if (c == '#' && !in_string) {
            in_comment = true;
            continue;
        }
        out.push_back(c);
    }
    return out;
}

std::string quoted_argument(std::string_view call) {
    const auto open = call.find('"');
    const auto close = call.rfind('"');
    if (open == std::string_view::npos || close <= open) return std::string(call);
    return std::string(call.substr(open + 1, close - open - 1));
}

std::string call_argument(std::string_view call) {
    const auto open = call.find('(');
    const auto close = call.rfind(')');
    if (open == std::string_view::npos || close == std::string_view::npos || close <= open) return {};
    return std::string(trim(call.substr(open + 1, close - open - 1)));
}

bool looks_like_prose(std::string_view code) {
    // Two bare words in a row is never valid Maple.
    bool in_string = false;
    bool previous_word = false;
    bool gap = false;
    for (char c : code) {
        if (c == '"') in_string = !in_string;
        if (in_string) continue;
        const bool word = std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '\'';
        if (word) {
            if (previous_word && gap) return true;
            previous_word = true;
            gap = false;
        } else if (c == ' ' || c == '\t' || c == '\n') {
            gap = true;
        } else {
            previous_word = false;
            gap = false;
        }
    }
    return false;
}

class ToyMaple {
public:
    explicit ToyMaple(Options options) : options_(std::move(options)) {}

    void prompt() {
        std::cout << options_.prompt << std::flush;
    }

    void feed_line(const std::string& line) {
        if (options_.echo_input) std::cout << options_.prompt << line << '\n' << std::flush;
        buffer_ += line;
        buffer_ += '\n';
        auto statements = casbench::cas::split_statements(buffer_);
        buffer_.clear();
        for (const auto& statement : statements) {
            if (casbench::cas::is_terminated(statement)) {
                evaluate(statement.text);
                prompt();
            } else if (casbench::cas::needs_execution(statement)) {
                buffer_ = statement.text;
            }
        }
    }

private:
    void emit(const std::string& text) {
        std::cout << text << '\n' << std::flush;
    }

    void emit_value(const std::string& value) {
        const auto slash = value.find('/');
        if (prettyprint_ > 0 && slash != std::string::npos) {
            const auto numerator = value.substr(0, slash);
            const auto denominator = value.substr(slash + 1);
            const auto width = std::max(numerator.size(), denominator.size());
            emit(std::string((width - numerator.size()) / 2, ' ') + numerator);
            emit(std::string(width, '-'));
            emit(std::string((width - denominator.size()) / 2, ' ') + denominator);
        } else {
            emit(value);
        }
    }

    std::string evaluate_expression(const std::string& expr) {
        if (auto value = ArithmeticParser(expr).parse()) return std::to_string(*value);
        if (auto it = variables_.find(expr); it != variables_.end()) return it->second;
        return expr;
    }

    void evaluate(const std::string& text) {
        if (options_.echo) {
            std::string echoed = text;
            while (!echoed.empty() && echoed.back() == '\n') echoed.pop_back();
            emit(echoed);
            return;
        }

        std::string code(trim(strip_comments(text)));
        const bool quiet = !code.empty() && code.back() == ':';
        if (!code.empty() && (code.back() == ';' || code.back() == ':')) code.pop_back();
        code = std::string(trim(code));

        if (code.empty()) return;
        if (code == "restart") {
            variables_.clear();
            prettyprint_ = 1;
            return;
        }
        if (code == "quit" || code == "done" || code == "stop") std::exit(0);
        if (code == "crash()") {
            std::cout << "partial output" << std::flush;
            ::_exit(3);
        }
        if (code.rfind("sleep(", 0) == 0) {
            std::this_thread::sleep_for(std::chrono::duration<double>(std::stod(call_argument(code))));
            return;
        }
        if (code.rfind("error(", 0) == 0) {
            emit("Error, " + quoted_argument(code));
            return;
        }
        if (code.rfind("WARNING(", 0) == 0) {
            emit("Warning, " + quoted_argument(code));
            return;
        }
        if (code.rfind("stderr(", 0) == 0) {
            std::cerr << quoted_argument(code) << '\n' << std::flush;
            return;
        }
        if (code.rfind("flood(", 0) == 0) {
            const auto bytes = std::stoul(call_argument(code));
            std::string line(79, 'x');
            for (std::size_t written = 0; written < bytes; written += 80) std::cout << line << '\n';
            std::cout << std::flush;
            return;
        }
        if (code.rfind("print(", 0) == 0) {
            emit(call_argument(code));
            return;
        }
        if (code == "anames()") {
            std::string names;
            for (const auto& [name, value] : variables_) names += (names.empty() ? "" : ", ") + name;
            if (!names.empty()) emit(names);
            return;
        }
        if (code.rfind("interface(", 0) == 0) {
            const auto argument = call_argument(code);
            const auto eq = argument.find('=');
            const int previous = prettyprint_;
            if (trim(argument.substr(0, eq)) != "prettyprint") {
                emit("Error, (in interface) unknown option");
                return;
            }
            if (eq != std::string::npos) prettyprint_ = std::stoi(std::string(trim(argument.substr(eq + 1))));
            if (!quiet) emit(std::to_string(previous));
            return;
        }
        if (code.find('\n') == std::string::npos && looks_like_prose(code)) {
            emit("Error, missing operator or `;`");
            return;
        }
        if (code.find("solve(") != std::string::npos) {
            emit("Warning, solve may be ignoring assumptions on the input variables.");
            if (!quiet) emit(code);
            return;
        }
        if (const auto assign = code.find(":="); assign != std::string::npos) {
            const std::string name(trim(code.substr(0, assign)));
            const auto value = evaluate_expression(std::string(trim(code.substr(assign + 2))));
            variables_[name] = value;
            if (!quiet) emit_value(name + " := " + value);
            return;
        }
        if (!quiet) emit_value(evaluate_expression(code));
    }

    Options options_;
    std::string buffer_;
    std::map<std::string, std::string> variables_;
    int prettyprint_ = 1;
};

}  // namespace

int main(int argc, char** argv) {
    Options options;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--echo") {
            options.echo = true;
        } else if (arg == "--echo-input") {
            options.echo_input = true;
        } else if (arg == "-q" || arg == "--quiet") {
            options.quiet = true;
        } else if (arg == "--exit-on-start") {
            options.exit_on_start = true;
        } else if (arg == "--prompt" && i + 1 < argc) {
            options.prompt = argv[++i];
        } else {
            std::cerr << "mock_cas: unknown argument " << arg << '\n';
            return 2;
        }
    }
    if (options.exit_on_start) return 1;

    if (!options.quiet) {
        std::cout << "    |\\^/|     Toy Maple (mock backend for casbench)\n"
                  << "._|\\|   |/|_. Not a computer algebra system.\n";
    }
    ToyMaple repl(options);
    repl.prompt();
    std::string line;
    while (std::getline(std::cin, line)) repl.feed_line(line);
    return 0;
}
