#include "casbench/cas/statement.hpp"

#include <array>
#include <cctype>

namespace casbench::cas {

namespace {

enum class LexState { code, double_quote, back_quote, comment };

bool is_word_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool is_horizontal_space(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
}

constexpr std::array<std::string_view, 6> block_openers{"proc", "do", "if", "module", "try", "use"};

bool is_block_opener(std::string_view word) {
    for (auto opener : block_openers) {
        if (word == opener) return true;
    }
    return false;
}

// Walks Maple surface syntax and reports top-level terminator positions.
class Scanner {
public:
    explicit Scanner(std::string_view text) : text_(text) {}

    // Advances to the next top-level terminator; returns its index or npos.
    std::size_t next_terminator() {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            switch (state_) {
                case LexState::double_quote:
                    if (c == '\\') {
                        pos_ += 2;
                        continue;
                    }
                    if (c == '"') state_ = LexState::code;
                    ++pos_;
                    continue;
                case LexState::back_quote:
                    if (c == '`') state_ = LexState::code;
                    ++pos_;
                    continue;
                case LexState::comment:
                    if (c == '\n') state_ = LexState::code;
                    ++pos_;
                    continue;
                case LexState::code:
                    break;
            }

            if (c == '"') {
                state_ = LexState::double_quote;
                after_end_ = false;
                ++pos_;
            } else if (c == '`') {
                state_ = LexState::back_quote;
                after_end_ = false;
                ++pos_;
            } else if (c == '#') {
                state_ = LexState::comment;
                ++pos_;
            } else if (is_word_start(c)) {
                std::size_t end = pos_;
                while (end < text_.size() && is_word_char(text_[end])) ++end;
                on_word(text_.substr(pos_, end - pos_));
                pos_ = end;
            } else if (std::isdigit(static_cast<unsigned char>(c)) != 0) {
                while (pos_ < text_.size() && is_word_char(text_[pos_])) ++pos_;
                after_end_ = false;
            } else if (c == ':' && pos_ + 1 < text_.size() && (text_[pos_ + 1] == '=' || text_[pos_ + 1] == ':')) {
                pos_ += 2;
                after_end_ = false;
            } else if ((c == ';' || c == ':') && depth_ == 0) {
                after_end_ = false;
                return pos_++;
            } else {
                if (std::isspace(static_cast<unsigned char>(c)) == 0) after_end_ = false;
                ++pos_;
            }
        }
        return std::string_view::npos;
    }

    std::size_t position() const { return pos_; }
    void seek(std::size_t pos) { pos_ = pos; }

private:
    void on_word(std::string_view word) {
        if (word == "end") {
            if (depth_ > 0) --depth_;
            after_end_ = true;
            return;
        }
        if (after_end_) {
            // `end do`, `end proc`, ... closes rather than opens.
            after_end_ = false;
            if (is_block_opener(word)) return;
        }
        if (word == "od" || word == "fi") {
            if (depth_ > 0) --depth_;
        } else if (is_block_opener(word)) {
            ++depth_;
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    LexState state_ = LexState::code;
    int depth_ = 0;
    bool after_end_ = false;
};

// After a terminator: same-line spaces, an optional same-line comment and one newline.
std::size_t absorb_line_tail(std::string_view chunk, std::size_t pos) {
    while (pos < chunk.size() && is_horizontal_space(chunk[pos])) ++pos;
    if (pos < chunk.size() && chunk[pos] == '#') {
        while (pos < chunk.size() && chunk[pos] != '\n') ++pos;
    }
    if (pos < chunk.size() && chunk[pos] == '\n') ++pos;
    return pos;
}

}  // namespace

std::string_view to_string(StatementKind kind) {
    switch (kind) {
        case StatementKind::executable: return "executable";
        case StatementKind::restart: return "restart";
        case StatementKind::comment_only: return "comment_only";
        case StatementKind::blank: return "blank";
    }
    return "blank";
}

std::optional<StatementKind> statement_kind_from_string(std::string_view name) {
    for (auto kind : {StatementKind::executable, StatementKind::restart, StatementKind::comment_only,
                      StatementKind::blank}) {
        if (to_string(kind) == name) return kind;
    }
    return std::nullopt;
}

StatementKind classify_statement(std::string_view text) {
    bool saw_comment = false;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c)) != 0) {
            ++i;
        } else if (c == '#') {
            saw_comment = true;
            while (i < text.size() && text[i] != '\n') ++i;
        } else {
            if (is_word_start(c)) {
                std::size_t end = i;
                while (end < text.size() && is_word_char(text[end])) ++end;
                if (text.substr(i, end - i) == "restart") return StatementKind::restart;
            }
            return StatementKind::executable;
        }
    }
    return saw_comment ? StatementKind::comment_only : StatementKind::blank;
}

std::vector<Statement> split_statements(std::string_view chunk) {
    std::vector<Statement> statements;
    Scanner scanner(chunk);
    std::size_t start = 0;
    while (true) {
        const std::size_t terminator = scanner.next_terminator();
        if (terminator == std::string_view::npos) break;
        const std::size_t end = absorb_line_tail(chunk, terminator + 1);
        scanner.seek(end);
        auto text = chunk.substr(start, end - start);
        statements.push_back({std::string(text), classify_statement(text)});
        start = end;
    }
    if (start < chunk.size()) {
        auto text = chunk.substr(start);
        statements.push_back({std::string(text), classify_statement(text)});
    }
    return statements;
}

bool is_terminated(const Statement& statement) {
    Scanner scanner(statement.text);
    return scanner.next_terminator() != std::string_view::npos;
}

std::string code_lines(std::string_view text) {
    // A line is dropped only when it starts outside any string or name and holds
    // nothing but whitespace or a comment.
    std::string out;
    LexState state = LexState::code;
    std::size_t line_start = 0;
    while (line_start < text.size()) {
        std::size_t line_end = text.find('\n', line_start);
        const bool has_newline = line_end != std::string_view::npos;
        if (!has_newline) line_end = text.size();
        auto line = text.substr(line_start, line_end - line_start);

        bool droppable = false;
        if (state == LexState::code) {
            auto first = line.find_first_not_of(" \t\r\f\v");
            droppable = first == std::string_view::npos || line[first] == '#';
        }
        if (!droppable) {
            out.append(line);
            if (has_newline) out.push_back('\n');
        }

        for (std::size_t i = 0; i < line.size(); ++i) {
            const char c = line[i];
            if (state == LexState::comment) break;
            if (state == LexState::double_quote) {
                if (c == '\\') {
                    ++i;
                } else if (c == '"') {
                    state = LexState::code;
                }
            } else if (state == LexState::back_quote) {
                if (c == '`') state = LexState::code;
            } else if (c == '"') {
                state = LexState::double_quote;
            } else if (c == '`') {
                state = LexState::back_quote;
            } else if (c == '#') {
                state = LexState::comment;
            }
        }
        if (state == LexState::comment) state = LexState::code;
        line_start = has_newline ? line_end + 1 : text.size();
    }
    return out;
}

}  // namespace casbench::cas
