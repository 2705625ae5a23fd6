#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace casbench::eval {

enum class Rule { R1_setup, R2_background_eom, R3_perturbation_analysis, R4_subtlety };
enum class Finding { ok, violated, violated_but_harmless, not_applicable };
enum class Verdict { pass, fail };

inline constexpr std::array<Rule, 4> all_rules{Rule::R1_setup, Rule::R2_background_eom,
                                               Rule::R3_perturbation_analysis, Rule::R4_subtlety};
inline constexpr std::array<Finding, 4> all_findings{Finding::ok, Finding::violated, Finding::violated_but_harmless,
                                                     Finding::not_applicable};

std::string_view to_string(Rule rule);
std::string_view to_string(Finding finding);
std::string_view to_string(Verdict verdict);
std::optional<Rule> rule_from_string(std::string_view name);
std::optional<Finding> finding_from_string(std::string_view name);
std::optional<Verdict> verdict_from_string(std::string_view name);

/// One-line question shown by the grading prompt.
std::string_view rule_question(Rule rule);

/// R4 can forgive but never fail a run.
bool admissible(Rule rule, Finding finding);

struct RuleAssessment {
    Rule rule = Rule::R1_setup;
    Finding finding = Finding::ok;
    std::string note;

    bool operator==(const RuleAssessment&) const = default;
};

struct GradeRecord {
    std::string run_id;
    std::vector<RuleAssessment> assessments;
    Verdict verdict = Verdict::pass;
    std::string grader;
    std::string graded_at;

    bool operator==(const GradeRecord&) const = default;
};

/// Missing or repeated rule.
class IncompleteAssessment : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InvalidFinding : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class GradeFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// fail iff some finding is `violated`. Order of the list does not matter.
Verdict derive_verdict(const std::vector<RuleAssessment>& assessments);

/// Fills in the verdict; throws like derive_verdict.
GradeRecord make_grade(std::string run_id, std::vector<RuleAssessment> assessments, std::string grader,
                       std::string graded_at);

nlohmann::json to_json(const GradeRecord& grade);
GradeRecord grade_from_json(const nlohmann::json& j);

/// Grades JSONL. Records whose stored verdict disagrees with their findings are rejected.
std::vector<GradeRecord> parse_grades(std::string_view jsonl);
std::vector<GradeRecord> read_grades(const std::filesystem::path& path);
void append_grade(const std::filesystem::path& path, const GradeRecord& grade);

/// Later records for the same run override earlier ones.
std::vector<GradeRecord> latest_grades(const std::vector<GradeRecord>& grades);

}  // namespace casbench::eval
