#include "casbench/context/problem.hpp"

namespace casbench::context {

namespace {

constexpr const char* find_scalar = "Find the quadratic action for the scalar perturbations around this background, "
                                    "and express it in terms of the propagating modes.";
constexpr const char* find_vector = "Find the quadratic action for the vector perturbations around this background, "
                                    "and express it in terms of the propagating modes.";
constexpr const char* find_tensor = "Find the quadratic action for the tensor perturbations around this background, "
                                    "and express it in terms of the propagating modes.";

const std::string sigma_f_terms =
    "where Mp is the Planck mass, Lambda is the cosmological constant, sigma is the scalar field, m^2 is the mass, "
    "and f(R) is a function of Ricci scalar. ";
const std::string sigma_f_terms_no_lambda =
    "where Mp is the Planck mass, sigma is the scalar field, m^2 is the mass, and f(R) is a function of Ricci scalar. ";
const std::string sigma_xi_terms =
    "where Mp is the Planck mass, sigma is the scalar field, m^2 is the mass, and xi is the coupling constant; "
    "Rmn*Rmn stands for the Ricci tensor contracted with itself, R_mu_nu*R^mu^nu. ";

const std::string f_action = "Consider Mp^2/2*(R-2*Lambda)+1/2*sigma^2*(m^2+f(R)) gravity";
const std::string xi_action = "Consider Mp^2/2*(R-2*Lambda)+1/2*sigma^2*(m^2+xi*Rmn*Rmn) gravity";

std::vector<Problem> build_registry() {
    return {
        {"R2Fs",
         "Consider Mp^2/2*R+beta*R^2 gravity on a cosmological background, where Mp is the Planck mass, and beta is "
         "the coupling. Find the quadratic action for the scalar perturbation around this background, and express it "
         "in terms of the propagating modes. Perform the calculation in the Jordan frame, you are not allowed to use "
         "the Einstein frame.",
         Background::cosmological, Sector::scalar},
        {"sRFs", f_action + " on a cosmological background, " + sigma_f_terms + find_scalar, Background::cosmological,
         Sector::scalar},
        {"sRFv", f_action + " on a cosmological background, " + sigma_f_terms + find_vector, Background::cosmological,
         Sector::vector},
        {"sRFt", f_action + " on a cosmological background, " + sigma_f_terms + find_tensor, Background::cosmological,
         Sector::tensor},
        {"sRMs", f_action + " on a flat background, " + sigma_f_terms_no_lambda + find_scalar, Background::flat,
         Sector::scalar},
        {"sRMt",
         "Consider Mp^2/2*R+1/2*sigma^2*(m^2+f(R)) gravity on a flat background, " + sigma_f_terms_no_lambda +
             find_tensor,
         Background::flat, Sector::tensor},
        {"sRi2Ms", xi_action + " on a flat background, " + sigma_xi_terms + find_scalar, Background::flat,
         Sector::scalar},
        {"sRi2Fs", xi_action + " on a cosmological background, " + sigma_xi_terms + find_scalar,
         Background::cosmological, Sector::scalar},
        {"sRi2Ft", xi_action + " on a cosmological background, " + sigma_xi_terms + find_tensor,
         Background::cosmological, Sector::tensor},
    };
}

}  // namespace

std::string_view to_string(Background background) {
    return background == Background::flat ? "flat" : "cosmological";
}

std::string_view to_string(Sector sector) {
    switch (sector) {
        case Sector::scalar: return "scalar";
        case Sector::vector: return "vector";
        case Sector::tensor: return "tensor";
    }
    return "scalar";
}

const std::vector<Problem>& problem_registry() {
    static const std::vector<Problem> registry = build_registry();
    return registry;
}

std::vector<std::string> problem_ids() {
    std::vector<std::string> ids;
    for (const auto& p : problem_registry()) ids.push_back(p.id);
    return ids;
}

std::optional<std::size_t> problem_index(std::string_view id) {
    const auto& registry = problem_registry();
    for (std::size_t i = 0; i < registry.size(); ++i) {
        if (registry[i].id == id) return i;
    }
    return std::nullopt;
}

const Problem& get_problem(std::string_view id) {
    const auto index = problem_index(id);
    if (!index) throw UnknownProblem(std::string(id));
    return problem_registry()[*index];
}

}  // namespace casbench::context
