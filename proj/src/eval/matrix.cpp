#include "casbench/eval/matrix.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "casbench/context/pack.hpp"
#include "casbench/context/problem.hpp"

namespace casbench::eval {

namespace {

void reject_duplicates(const std::vector<std::string>& ids, const char* what) {
    std::set<std::string> seen;
    for (const auto& id : ids) {
        if (!seen.insert(id).second) throw DuplicateId(std::string("duplicate ") + what + " id '" + id + "'");
    }
}

}  // namespace

std::string make_run_id(std::string_view pack_id, std::string_view problem_id, int attempt) {
    return std::string(pack_id) + "/" + std::string(problem_id) + "/attempt" + std::to_string(attempt);
}

std::optional<RunIdParts> parse_run_id(std::string_view run_id) {
    const auto first = run_id.find('/');
    if (first == std::string_view::npos) return std::nullopt;
    const auto second = run_id.find('/', first + 1);
    if (second == std::string_view::npos) return std::nullopt;
    const auto tail = run_id.substr(second + 1);
    constexpr std::string_view prefix = "attempt";
    if (tail.substr(0, prefix.size()) != prefix) return std::nullopt;
    RunIdParts parts{std::string(run_id.substr(0, first)), std::string(run_id.substr(first + 1, second - first - 1)), 0};
    const auto digits = tail.substr(prefix.size());
    const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), parts.attempt);
    if (ec != std::errc() || end != digits.data() + digits.size() || parts.attempt < 1) return std::nullopt;
    if (parts.pack_id.empty() || parts.problem_id.empty()) return std::nullopt;
    return parts;
}

std::vector<RunSpec> plan_matrix(const std::vector<std::string>& pack_ids, const std::vector<std::string>& problem_ids,
                                 const agent::RunConfig& config, const std::vector<std::string>& known_packs) {
    reject_duplicates(pack_ids, "pack");
    reject_duplicates(problem_ids, "problem");
    for (const auto& pack : pack_ids) {
        if (std::find(known_packs.begin(), known_packs.end(), pack) == known_packs.end()) {
            throw context::UnknownPack("unknown pack '" + pack + "'");
        }
    }
    for (const auto& problem : problem_ids) context::get_problem(problem);

    std::vector<RunSpec> specs;
    specs.reserve(pack_ids.size() * problem_ids.size());
    for (const auto& pack : pack_ids) {
        for (const auto& problem : problem_ids) specs.push_back({make_run_id(pack, problem), pack, problem, config});
    }
    return specs;
}

}  // namespace casbench::eval
