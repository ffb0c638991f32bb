// Acceptance run: one PASS/FAIL line per criterion, each at its stated tolerance.
// Exit status is 0 only when every criterion passes.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "wslrr/wslrr.hpp"

using namespace wslrr;
using namespace wslrr::scenario;

namespace {

constexpr int kJoints = 20;
constexpr int kDim = 3;

struct Outcome {
    std::size_t checks = 0;
    std::size_t failed = 0;
    double worst = 0.0;   ///< worst max_abs_err
    double tol = 0.0;     ///< stated tolerance
    std::string note;     ///< first failure, or extra facts
};

void absorb(Outcome& o, const CheckReport& r) {
    ++o.checks;
    o.worst = std::max(o.worst, r.max_abs_err);
    if (!r.pass) {
        ++o.failed;
        if (o.note.empty()) o.note = r.name + " [" + r.scenario + "] " + (r.error.empty() ? "err=" + std::to_string(r.max_abs_err) : r.error);
    }
}

void absorb(Outcome& o, const std::vector<CheckReport>& rs) {
    for (const auto& r : rs) absorb(o, r);
}

/// Seeded joint number t: n_x cycles over 3..8, K over 2..5 for multiclass scenarios.
FiniteJoint trial_joint(const std::string& name, int t, std::uint64_t seed) {
    const int K = is_binary_scenario(name) ? 2 : 2 + t % 4;
    return random_joint(K, 3 + t % 6, kDim, seed);
}

std::uint64_t trial_seed(int criterion, int t) { return 1000003ull * static_cast<std::uint64_t>(criterion) + static_cast<std::uint64_t>(t); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome criterion1() {
    Outcome o{0, 0, 0.0, 1e-10, {}};
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& name : core_scenarios())
        for (int t = 0; t < kJoints; ++t) {
            const std::uint64_t s = trial_seed(1, t);
            const FiniteJoint j = trial_joint(name, t, s);
            absorb(o, verify_risk_equality(random_spec(name, j.K, j.n_x(), s), j, random_model(j.K, kDim, s), LossKind::Logistic, o.tol,
                                           MethodSelector::Auto, s));
        }
    const double secs = seconds_since(t0);
    o.note += (o.note.empty() ? "" : "; ") + std::string("runtime ") + std::to_string(secs) + " s (budget 10 s)";
    if (secs >= 10.0) ++o.failed;
    return o;
}

Outcome criterion2() {
    Outcome o{0, 0, 0.0, 1e-12, {}};
    std::vector<std::string> names = core_scenarios();
    names.insert(names.end(), abstraction_scenarios().begin(), abstraction_scenarios().end());
    for (const auto& name : names)
        for (int t = 0; t < kJoints; ++t) {
            const std::uint64_t s = trial_seed(2, t);
            const FiniteJoint j = trial_joint(name, t, s);
            const ScenarioSpec spec = random_spec(name, j.K, j.n_x(), s);
            absorb(o, verify_reconstruction(spec, j, o.tol, MethodSelector::Auto, s));
            const Family f = family_of(spec);
            if (f == Family::CCN) absorb(o, verify_reconstruction(spec, j, o.tol, MethodSelector::MarginalChain, s));
            const bool invertible = f == Family::MCD || f == Family::Conf || name == "CL" || name == "CCN" || name == "MCL";
            if (invertible) absorb(o, verify_reconstruction(spec, j, o.tol, MethodSelector::Inversion, s));
        }
    return o;
}

Outcome criterion3() {
    Outcome o{0, 0, 0.0, 1e-14, "M_CL exact, inverse <= 1e-15, chain <= 1e-14"};
    for (int t = 0; t < kJoints; ++t) absorb(o, verify_worked_example(trial_seed(3, t)));
    return o;
}

Outcome criterion4() {
    Outcome o{0, 0, 0.0, 1e-10, {}};
    absorb(o, verify_mcl_blocks(6, 1e-12));
    for (int t = 0; t < kJoints; ++t) {
        const std::uint64_t s = trial_seed(4, t);
        const FiniteJoint j = random_joint(3 + t % 3, 3 + t % 6, kDim, s);
        const ScenarioSpec spec = random_spec("MCL", j.K, j.n_x(), s);
        const LinearModel m = random_model(j.K, kDim, s);
        absorb(o, detail::run_check("mcl-method-agreement", "MCL", json::object(), o.tol, s, [&] {
            return std::abs(rewritten_risk(spec, j, m, LossKind::Logistic, MethodSelector::Inversion) -
                            rewritten_risk(spec, j, m, LossKind::Logistic, MethodSelector::MarginalChain));
        }));
    }
    return o;
}

Outcome criterion5() {
    Outcome o{0, 0, 0.0, 1e-12, "PCPL half-identity 1e-12; PPL M-dagger 1e-14"};
    for (int t = 0; t < kJoints; ++t) {
        const std::uint64_t s = trial_seed(5, t);
        const FiniteJoint j = random_joint(3 + t % 3, 3 + t % 6, kDim, s);
        absorb(o, verify_pcpl_half_identity(j, random_model(j.K, kDim, s), LossKind::Logistic, 1e-12, s));
        absorb(o, verify_ppl_mdagger(random_spec("PPL", j.K, j.n_x(), s), j, 1e-14, s));
        absorb(o, verify_ppl_mdagger(PCPL{}, j, 1e-14, s));
    }
    return o;
}

Outcome criterion6() {
    Outcome o{0, 0, 0.0, 1e-15, {}};
    for (int t = 0; t < kJoints; ++t) {
        const std::uint64_t s = trial_seed(6, t);
        absorb(o, verify_reduction_graph(random_joint(2, 3 + t % 6, kDim, s), o.tol, s));
        absorb(o, verify_reduction_graph(random_joint(3 + t % 3, 3 + t % 6, kDim, s), o.tol, s));
    }
    return o;
}

Outcome criterion7() {
    Outcome o{0, 0, 0.0, 1e-12, {}};
    for (int t = 0; t < kJoints; ++t) {
        const std::uint64_t s = trial_seed(7, t);
        absorb(o, verify_pair_identities(random_joint(2, 3 + t % 6, kDim, s), o.tol, s, 10));
    }
    return o;
}

Outcome criterion8() {
    Outcome o{0, 0, 0.0, 1e-12, {}};
    std::size_t scenarios = 0;
    for (const auto& name : core_scenarios()) {
        if (name == "CL" || name == "MCL") continue;
        ++scenarios;
        for (int t = 0; t < kJoints; ++t) {
            const std::uint64_t s = trial_seed(8, t);
            const FiniteJoint j = trial_joint(name, t, s);
            absorb(o, verify_closed_form(random_spec(name, j.K, j.n_x(), s), j, random_model(j.K, kDim, s), LossKind::Logistic, o.tol, s));
        }
    }
    o.note = std::to_string(scenarios) + " scenarios";
    return o;
}

Outcome criterion9() {
    Outcome o{0, 0, 0.0, 5.0, {}};
    for (const char* name : {"PU", "CL", "Soft"}) {
        const std::uint64_t s = trial_seed(9, 0);
        const int K = is_binary_scenario(name) ? 2 : 4;
        const FiniteJoint j = random_joint(K, 6, kDim, s);
        const auto rs = verify_monte_carlo(scenario_from_name(name, json::object()), j, random_model(K, kDim, s), LossKind::Logistic, 100000,
                                           5.0, s);
        for (const auto& r : rs) {
            ++o.checks;
            if (!r.pass) {
                ++o.failed;
                if (o.note.empty()) o.note = r.name + " [" + r.scenario + "]";
            }
        }
        // Report the deviation in units of standard errors.
        if (rs[0].tolerance > 0.0) o.worst = std::max(o.worst, 5.0 * rs[0].max_abs_err / rs[0].tolerance);
    }
    return o;
}

Outcome criterion10() {
    Outcome o{0, 0, 0.0, 1e-5, {}};
    std::vector<std::string> names = core_scenarios();
    names.insert(names.end(), abstraction_scenarios().begin(), abstraction_scenarios().end());
    for (const auto& name : names)
        for (LossKind loss : {LossKind::Logistic, LossKind::Squared})
            for (int t = 0; t < 3; ++t) {
                const std::uint64_t s = trial_seed(10, t);
                const FiniteJoint j = trial_joint(name, t + 2, s);
                absorb(o, verify_gradient(random_spec(name, j.K, j.n_x(), s), j, loss, 200, o.tol, s));
            }
    return o;
}

Outcome criterion11() {
    Outcome o{0, 0, 0.0, 0.05, "error = 1 - agreement"};
    absorb(o, verify_erm_sanity(trial_seed(11, 0), 0.95));
    return o;
}

Outcome criterion12() {
    Outcome o{1, 0, 0.0, 60.0, {}};
    const auto out = std::filesystem::temp_directory_path() / "wslrr_acceptance_verify_all.json";
    const std::string cmd = std::string(WSLRR_CLI_PATH) + " verify-all --out " + out.string() + " > /dev/null";
    const auto t0 = std::chrono::steady_clock::now();
    const int status = std::system(cmd.c_str());
    const double secs = seconds_since(t0);
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    o.worst = secs;
    o.note = "exit " + std::to_string(code) + ", " + std::to_string(secs) + " s";
    if (code != 0 || secs >= 60.0) o.failed = 1;
    std::filesystem::remove(out);
    return o;
}

} // namespace

int main() {
    struct Criterion {
        const char* title;
        Outcome (*run)();
    };
    const Criterion criteria[] = {
        {"risk-rewrite equality, 15 scenarios x 20 joints", criterion1},
        {"reconstruction M-dagger corrP = P, every scenario/method", criterion2},
        {"worked example: CL K=4 matrices and marginal chain", criterion3},
        {"MCL blocks M_d^-1 M_d = I (K<=6); inversion = marginal chain", criterion4},
        {"PCPL half-identity; PPL closed-form M-dagger", criterion5},
        {"reduction graph edges entrywise", criterion6},
        {"pair symmetry and Pcomp Sup/Inf marginals", criterion7},
        {"closed-form vs generic corrected losses", criterion8},
        {"Monte-Carlo consistency (PU, CL, Soft; n=1e5; in SE units)", criterion9},
        {"gradient check vs central differences", criterion10},
        {"ERM sanity: PU vs supervised argmax agreement", criterion11},
        {"verify-all default run exits 0 (seconds)", criterion12},
    };
    int failed = 0, idx = 0;
    for (const auto& c : criteria) {
        ++idx;
        const Outcome o = c.run();
        const bool pass = o.failed == 0 && o.checks > 0;
        failed += pass ? 0 : 1;
        std::printf("%s %2d  %-62s checks=%zu failed=%zu worst=%.3g tol=%.3g%s%s\n", pass ? "PASS" : "FAIL", idx, c.title, o.checks,
                    o.failed, o.worst, o.tol, o.note.empty() ? "" : "  | ", o.note.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", idx - failed, idx);
    return failed == 0 ? 0 : 1;
}
