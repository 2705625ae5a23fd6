#include "casbench/eval/rubric.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "casbench/util/text.hpp"

namespace casbench::eval {

namespace {

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(std::string_view name, const std::array<Enum, N>& values) {
    for (Enum v : values) {
        if (to_string(v) == name) return v;
    }
    return std::nullopt;
}

}  // namespace

std::string_view to_string(Rule rule) {
    switch (rule) {
        case Rule::R1_setup: return "R1_setup";
        case Rule::R2_background_eom: return "R2_background_eom";
        case Rule::R3_perturbation_analysis: return "R3_perturbation_analysis";
        case Rule::R4_subtlety: return "R4_subtlety";
    }
    return "?";
}

std::string_view to_string(Finding finding) {
    switch (finding) {
        case Finding::ok: return "ok";
        case Finding::violated: return "violated";
        case Finding::violated_but_harmless: return "violated_but_harmless";
        case Finding::not_applicable: return "not_applicable";
    }
    return "?";
}

std::string_view to_string(Verdict verdict) {
    return verdict == Verdict::pass ? "pass" : "fail";
}

std::optional<Rule> rule_from_string(std::string_view name) { return lookup(name, all_rules); }
std::optional<Finding> finding_from_string(std::string_view name) { return lookup(name, all_findings); }

std::optional<Verdict> verdict_from_string(std::string_view name) {
    if (name == "pass") return Verdict::pass;
    if (name == "fail") return Verdict::fail;
    return std::nullopt;
}

std::string_view rule_question(Rule rule) {
    switch (rule) {
        case Rule::R1_setup: return "Is the theory set up correctly (action, fields, background)?";
        case Rule::R2_background_eom: return "Are the background equations of motion substituted correctly?";
        case Rule::R3_perturbation_analysis:
            return "Is the quadratic action reduced correctly to the propagating modes?";
        case Rule::R4_subtlety: return "Was a subtlety missed that leaves the result unchanged?";
    }
    return "";
}

bool admissible(Rule rule, Finding finding) {
    return !(rule == Rule::R4_subtlety && finding == Finding::violated);
}

Verdict derive_verdict(const std::vector<RuleAssessment>& assessments) {
    std::array<int, all_rules.size()> seen{};
    bool failed = false;
    for (const auto& a : assessments) {
        const auto index = static_cast<std::size_t>(a.rule);
        if (++seen[index] > 1) throw IncompleteAssessment("rule " + std::string(to_string(a.rule)) + " assessed twice");
        if (!admissible(a.rule, a.finding)) {
            throw InvalidFinding(std::string(to_string(a.rule)) + " cannot be '" + std::string(to_string(a.finding)) + "'");
        }
        if (a.finding == Finding::violated) failed = true;
    }
    for (Rule rule : all_rules) {
        if (seen[static_cast<std::size_t>(rule)] == 0) {
            throw IncompleteAssessment("rule " + std::string(to_string(rule)) + " not assessed");
        }
    }
    return failed ? Verdict::fail : Verdict::pass;
}

GradeRecord make_grade(std::string run_id, std::vector<RuleAssessment> assessments, std::string grader,
                       std::string graded_at) {
    const Verdict verdict = derive_verdict(assessments);
    return {std::move(run_id), std::move(assessments), verdict, std::move(grader), std::move(graded_at)};
}

nlohmann::json to_json(const GradeRecord& grade) {
    nlohmann::json assessments = nlohmann::json::array();
    for (const auto& a : grade.assessments) {
        assessments.push_back({{"rule", to_string(a.rule)}, {"finding", to_string(a.finding)}, {"note", a.note}});
    }
    return {{"run_id", grade.run_id},
            {"assessments", assessments},
            {"verdict", to_string(grade.verdict)},
            {"grader", grade.grader},
            {"graded_at", grade.graded_at}};
}

GradeRecord grade_from_json(const nlohmann::json& j) {
    try {
        GradeRecord grade;
        grade.run_id = j.at("run_id").get<std::string>();
        for (const auto& item : j.at("assessments")) {
            const auto rule = rule_from_string(item.at("rule").get<std::string>());
            const auto finding = finding_from_string(item.at("finding").get<std::string>());
            if (!rule || !finding) throw GradeFormatError("unknown rule or finding in " + item.dump());
            grade.assessments.push_back({*rule, *finding, item.value("note", "")});
        }
        const auto verdict = verdict_from_string(j.at("verdict").get<std::string>());
        if (!verdict) throw GradeFormatError("bad verdict in grade for " + grade.run_id);
        grade.verdict = *verdict;
        grade.grader = j.value("grader", "");
        grade.graded_at = j.value("graded_at", "");
        if (derive_verdict(grade.assessments) != grade.verdict) {
            throw GradeFormatError("stored verdict for " + grade.run_id + " contradicts its findings");
        }
        return grade;
    } catch (const nlohmann::json::exception& e) {
        throw GradeFormatError(std::string("malformed grade record: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw GradeFormatError(std::string("invalid grade record: ") + e.what());
    }
}

std::vector<GradeRecord> parse_grades(std::string_view jsonl) {
    std::vector<GradeRecord> grades;
    int line_number = 0;
    for (const auto& line : util::split_lines(jsonl)) {
        ++line_number;
        if (util::trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw GradeFormatError("grades line " + std::to_string(line_number) + ": " + e.what());
        }
        grades.push_back(grade_from_json(j));
    }
    return grades;
}

std::vector<GradeRecord> read_grades(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_grades(buffer.str());
}

void append_grade(const std::filesystem::path& path, const GradeRecord& grade) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for appending");
    out << to_json(grade).dump() << '\n';
    out.flush();
    if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

std::vector<GradeRecord> latest_grades(const std::vector<GradeRecord>& grades) {
    std::map<std::string, std::size_t> position;
    std::vector<GradeRecord> out;
    for (const auto& g : grades) {
        if (auto it = position.find(g.run_id); it != position.end()) {
            out[it->second] = g;
        } else {
            position[g.run_id] = out.size();
            out.push_back(g);
        }
    }
    return out;
}

}  // namespace casbench::eval
