#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "casbench/agent/types.hpp"

namespace casbench::eval {

struct RunSpec {
    std::string run_id;
    std::string pack_id;
    std::string problem_id;
    agent::RunConfig config;
};

class DuplicateId : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// `pack/problem/attempt1`
std::string make_run_id(std::string_view pack_id, std::string_view problem_id, int attempt = 1);

struct RunIdParts {
    std::string pack_id;
    std::string problem_id;
    int attempt = 1;

    bool operator==(const RunIdParts&) const = default;
};

std::optional<RunIdParts> parse_run_id(std::string_view run_id);

/// Packs outer, problems inner. Every pack must appear in `known_packs`, every
/// problem in the registry. Throws DuplicateId, context::UnknownPack or
/// context::UnknownProblem.
std::vector<RunSpec> plan_matrix(const std::vector<std::string>& pack_ids, const std::vector<std::string>& problem_ids,
                                 const agent::RunConfig& config, const std::vector<std::string>& known_packs);

}  // namespace casbench::eval
