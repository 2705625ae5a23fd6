#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace casbench::cas {

enum class StatementKind { executable, restart, comment_only, blank };

std::string_view to_string(StatementKind kind);
std::optional<StatementKind> statement_kind_from_string(std::string_view name);

/// One top-level unit of a chunk as the CAS would read it. `text` keeps every byte
/// that belonged to it in the chunk, including leading comments and the terminator.
struct Statement {
    std::string text;
    StatementKind kind = StatementKind::blank;

    bool operator==(const Statement&) const = default;
};

/// Splits Maple-style input into top-level statements.
///
/// `;` and `:` terminate a statement unless they occur inside a double-quoted
/// string, a back-quoted name, a `#` line comment, or an open control block
/// (`proc`, `do`, `if`, `module`, `try`, `use` ... `end`/`od`/`fi`). The `:` of
/// `:=` and `::` never terminates. Concatenating the returned texts reproduces
/// the input byte for byte; a trailing unterminated fragment becomes the last
/// statement and is classified by its content.
std::vector<Statement> split_statements(std::string_view chunk);

StatementKind classify_statement(std::string_view text);

inline bool is_restart(const Statement& statement) {
    return statement.kind == StatementKind::restart;
}

/// True for kinds the CAS must actually evaluate.
inline bool needs_execution(const Statement& statement) {
    return statement.kind == StatementKind::executable || statement.kind == StatementKind::restart;
}

/// Whether the statement ends in a `;`/`:` terminator (ignoring trailing whitespace).
bool is_terminated(const Statement& statement);

/// The statement with whole-line comments and blank lines removed; what a driver
/// should send to an interactive REPL so that no spurious prompts are produced.
std::string code_lines(std::string_view text);

}  // namespace casbench::cas
