#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace casbench::context {

enum class Background { cosmological, flat };
enum class Sector { scalar, vector, tensor };

std::string_view to_string(Background background);
std::string_view to_string(Sector sector);

struct Problem {
    std::string id;
    std::string statement;  // plain ASCII, sent as the first user message
    Background background = Background::cosmological;
    Sector sector = Sector::scalar;
};

class UnknownProblem : public std::out_of_range {
public:
    explicit UnknownProblem(const std::string& id) : std::out_of_range("unknown problem '" + id + "'"), id_(id) {}
    const std::string& id() const { return id_; }

private:
    std::string id_;
};

/// The nine benchmark problems, in their canonical order.
const std::vector<Problem>& problem_registry();

std::vector<std::string> problem_ids();

/// Throws UnknownProblem.
const Problem& get_problem(std::string_view id);

std::optional<std::size_t> problem_index(std::string_view id);

}  // namespace casbench::context
