/**
 * @file verify.hpp
 * @brief Oracle harness: runs the framework's identities on seeded random
 *        instances and collects structured pass/fail reports.
 */
#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "wslrr/io.hpp"
#include "wslrr/train.hpp"

namespace wslrr {

/** @brief Default tolerances of the harness. */
struct Tolerances {
    double matrix = 1e-12;
    double risk = 1e-10;
    double reduction = 1e-15;
    double exact_example = 1e-15;
    double closed_form_mdagger = 1e-14;
    double monte_carlo_se = 5.0;
    double gradient = 1e-5;
    double erm_agreement = 0.95;
};

/** @brief Outcome of one check; pass iff no error and max_abs_err <= tolerance. */
struct CheckReport {
    std::string name;
    std::string scenario;
    json params = json::object();
    double max_abs_err = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::uint64_t seed = 0;
    double elapsed_ms = 0.0;
    std::string error;
};

inline json report_to_json(const CheckReport& r) {
    json o = {{"name", r.name},       {"scenario", r.scenario}, {"params", r.params},
              {"tolerance", r.tolerance}, {"pass", r.pass},     {"seed", r.seed},
              {"elapsed_ms", r.elapsed_ms}};
    o["max_abs_err"] = std::isfinite(r.max_abs_err) ? json(r.max_abs_err) : json(nullptr);
    if (!r.error.empty()) o["error"] = r.error;
    return o;
}

inline CheckReport report_from_json(const json& o) {
    CheckReport r;
    r.name = detail::get_field<std::string>(o, "name", "check");
    r.scenario = detail::get_field<std::string>(o, "scenario", "check");
    r.params = o.value("params", json::object());
    r.max_abs_err = !o.contains("max_abs_err") || o.at("max_abs_err").is_null() ? std::numeric_limits<double>::infinity() : o.at("max_abs_err").get<double>();
    r.tolerance = detail::get_field<double>(o, "tolerance", "check");
    r.pass = detail::get_field<bool>(o, "pass", "check");
    r.seed = detail::get_field<std::uint64_t>(o, "seed", "check");
    r.elapsed_ms = detail::get_field<double>(o, "elapsed_ms", "check");
    r.error = o.value("error", std::string());
    return r;
}

/** @brief Aggregate report: seed, checks in registry order, overall pass. */
struct VerifyReport {
    std::uint64_t seed = 0;
    std::vector<CheckReport> checks;

    bool pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const CheckReport& c) { return c.pass; });
    }
};

inline json verify_report_to_json(const VerifyReport& r) {
    json checks = json::array();
    for (const auto& c : r.checks) checks.push_back(report_to_json(c));
    return {{"seed", r.seed}, {"checks", checks}, {"pass", r.pass()}};
}

inline VerifyReport verify_report_from_json(const json& o) {
    VerifyReport r;
    r.seed = detail::get_field<std::uint64_t>(o, "seed", "report");
    for (const auto& c : detail::get_field<json>(o, "checks", "report")) r.checks.push_back(report_from_json(c));
    return r;
}

namespace detail {

/// Runs @p body, which returns the max error, and fills timing, pass flag and error records.
inline CheckReport run_check(std::string name, std::string scen, json params, double tol, std::uint64_t seed,
                             const std::function<double()>& body) {
    CheckReport r{std::move(name), std::move(scen), std::move(params), 0.0, tol, false, seed, 0.0, {}};
    const auto t0 = std::chrono::steady_clock::now();
    try {
        r.max_abs_err = body();
        r.pass = r.max_abs_err <= tol;
    } catch (const Error& e) {
        r.max_abs_err = std::numeric_limits<double>::infinity();
        r.error = e.what();
    }
    r.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

inline double max_abs(const Matrix& A) { return A.size() == 0 ? 0.0 : A.cwiseAbs().maxCoeff(); }

} // namespace detail

// ---------------------------------------------------------------------------
// Random instances
// ---------------------------------------------------------------------------

/** @brief The fifteen weak-supervision scenarios, followed by the three abstractions. */
inline const std::vector<std::string>& core_scenarios() {
    static const std::vector<std::string> v = {"PU", "UU",   "SU",  "DU",     "SD",      "Pcomp",  "Sconf", "CL",
                                               "MCL", "PCPL", "PPL", "SCConf", "SubConf", "Pconf", "Soft"};
    return v;
}

inline const std::vector<std::string>& abstraction_scenarios() {
    static const std::vector<std::string> v = {"MCD", "CCN", "GCCN"};
    return v;
}

/** @brief Scenarios that exist only for K = 2. */
inline bool is_binary_scenario(const std::string& name) {
    static const std::vector<std::string> v = {"MCD", "UU", "PU", "SU", "DU", "SD", "Pcomp", "Sconf", "CCN", "Pconf"};
    return std::find(v.begin(), v.end(), name) != v.end();
}

/** @brief Random positive probability vector (normalized uniforms). */
inline std::vector<double> random_simplex(CounterRng& rng, int n) {
    std::vector<double> w(static_cast<std::size_t>(n));
    double s = 0.0;
    for (auto& v : w) {
        v = rng.uniform(0.05, 1.0);
        s += v;
    }
    for (auto& v : w) v /= s;
    return w;
}

/**
 * @brief Seeded random joint: normalized uniforms, with rejection of joints whose
 *        confidences fall below 1e-3 and, for K = 2, whose prior is within 0.05 of 1/2.
 */
inline FiniteJoint random_joint(int K, int n_x, int d_feat, std::uint64_t seed) {
    for (std::uint64_t attempt = 0;; ++attempt) {
        CounterRng rng(seed, 1000 + attempt);
        Matrix P(K, n_x);
        double tot = 0.0;
        for (int i = 0; i < n_x; ++i)
            for (int k = 0; k < K; ++k) {
                P(k, i) = rng.uniform();
                tot += P(k, i);
            }
        P /= tot;
        std::vector<Vector> feats;
        for (int i = 0; i < n_x; ++i) {
            Vector x(d_feat);
            for (int f = 0; f < d_feat; ++f) x(f) = rng.uniform(-1.0, 1.0);
            feats.push_back(x);
        }
        FiniteJoint j;
        try {
            j = validate_joint(K, feats, P);
        } catch (const Error&) {
            continue; // total mass rounding; redraw
        }
        const Marginals m = marginals(j);
        if (m.class_probabilities.minCoeff() < 1e-3) continue;
        if (K == 2 && std::abs(m.priors(0) - 0.5) < 0.05) continue;
        return j;
    }
}

/** @brief Seeded random linear model with weights and biases uniform in (-1, 1). */
inline LinearModel random_model(int K, int d_feat, std::uint64_t seed) {
    CounterRng rng(seed, 77);
    LinearModel m{Matrix(K, d_feat), Vector(K)};
    for (int k = 0; k < K; ++k)
        for (int f = 0; f < d_feat; ++f) m.W(k, f) = rng.uniform(-1.0, 1.0);
    for (int k = 0; k < K; ++k) m.b(k) = rng.uniform(-1.0, 1.0);
    return m;
}

/** @brief Random column-stochastic matrix with strictly positive entries. */
inline Matrix random_column_stochastic(CounterRng& rng, int rows, int cols) {
    Matrix M(rows, cols);
    for (int c = 0; c < cols; ++c) {
        const auto w = random_simplex(rng, rows);
        for (int r = 0; r < rows; ++r) M(r, c) = w[static_cast<std::size_t>(r)];
    }
    return M;
}

/**
 * @brief A random proper partial-label table C (|S| x n_x), strictly positive.
 *
 * Each column mixes the uniform PCPL weights with indicator weights of random
 * set partitions of the classes; every ingredient is proper, hence so is the mix.
 */
inline Matrix random_proper_C(CounterRng& rng, int K, int n_x) {
    const auto labels = compound_label_space(K);
    const auto S = static_cast<Eigen::Index>(labels.size());
    Matrix C(S, n_x);
    const double uniform = 1.0 / (std::ldexp(1.0, K - 1) - 1.0);
    for (int i = 0; i < n_x; ++i) {
        const double alpha = rng.uniform(0.2, 0.8);
        Vector col = Vector::Constant(S, alpha * uniform);
        const int parts = 2;
        for (int p = 0; p < parts; ++p) {
            // Random partition into at least two blocks, so every block is a strict subset.
            std::vector<std::uint32_t> blocks;
            while (true) {
                const int nb = 2 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(K - 1));
                blocks.assign(static_cast<std::size_t>(nb), 0u);
                for (int k = 0; k < K; ++k) blocks[rng.next_u64() % static_cast<std::uint64_t>(nb)] |= 1u << k;
                int nonempty = 0;
                for (auto b : blocks) nonempty += b != 0u;
                if (nonempty >= 2) break;
            }
            for (auto b : blocks) {
                if (b == 0u) continue;
                for (Eigen::Index t = 0; t < S; ++t)
                    if (labels[static_cast<std::size_t>(t)].mask == b) col(t) += (1.0 - alpha) / parts;
            }
        }
        C.col(i) = col;
    }
    return C;
}

/**
 * @brief A seeded random instance of a scenario's parameters for a joint of class count K.
 * @throws Error SchemaMismatch for unknown names
 */
inline ScenarioSpec random_spec(const std::string& name, int K, int n_x, std::uint64_t seed) {
    using namespace scenario;
    CounterRng rng(seed, 4242);
    if (name == "MCD") {
        while (true) {
            const double a = rng.uniform(0.0, 0.9), b = rng.uniform(0.0, 0.9);
            if (a + b < 0.9) return MCD{a, b};
        }
    }
    if (name == "UU") {
        while (true) {
            const double a = rng.uniform(), b = rng.uniform();
            if (std::abs(a + b - 1.0) >= 0.1) return UU{a, b};
        }
    }
    if (name == "CCN") {
        std::vector<Matrix> flips;
        for (int i = 0; i < n_x; ++i) {
            Matrix F(2, 2);
            const double a = rng.uniform(0.55, 1.0), b = rng.uniform(0.55, 1.0);
            F << a, 1.0 - b, 1.0 - a, b;
            flips.push_back(F);
        }
        return CCN{flips};
    }
    if (name == "GCCN") {
        const int S = static_cast<int>(compound_label_space(K).size());
        std::vector<Matrix> cond;
        for (int i = 0; i < n_x; ++i) cond.push_back(random_column_stochastic(rng, S, K));
        return GCCN{cond};
    }
    if (name == "PPL") return PPL{random_proper_C(rng, K, n_x)};
    if (name == "MCL") return MCL{random_simplex(rng, K - 1)};
    if (name == "SubConf") {
        const std::uint32_t full = (1u << K) - 1u;
        std::uint32_t mask = 0;
        while (mask == 0 || mask == full) mask = static_cast<std::uint32_t>(rng.next_u64()) & full;
        return SubConf{CompoundLabel{mask}.members()};
    }
    if (name == "SCConf") return SCConf{1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(K))};
    return scenario_from_name(name, json::object());
}

// ---------------------------------------------------------------------------
// Individual checks
// ---------------------------------------------------------------------------

/**
 * @brief max_x || M-dagger(x) corrP(x) - P(x) ||_inf; for Sconf max_x || sum_x' M~-dagger M~ - I ||.
 */
inline CheckReport verify_reconstruction(const ScenarioSpec& spec, const FiniteJoint& j, double tol,
                                         MethodSelector sel = MethodSelector::Auto, std::uint64_t seed = 0) {
    std::string name = "reconstruction";
    if (sel == MethodSelector::Inversion) name += ":inversion";
    if (sel == MethodSelector::MarginalChain) name += ":marginal-chain";
    return detail::run_check(name, scenario_name(spec), scenario_to_json(spec)["params"], tol, seed, [&] {
        const Marginals m = marginals(j);
        validate_spec(spec, m);
        double err = 0.0;
        if (family_of(spec) == Family::SconfPair) {
            for (int i = 0; i < j.n_x(); ++i)
                err = std::max(err, detail::max_abs(sconf_tilde_product(m, i) - Matrix::Identity(2, 2)));
            return err;
        }
        const ContaminationModel cm = observed_distribution(spec, j);
        const DecontaminationResult dr = decontaminate(spec, j, sel);
        for (int i = 0; i < j.n_x(); ++i)
            err = std::max(err, detail::max_abs(dr.Mdagger[static_cast<std::size_t>(i)] * cm.corrP[static_cast<std::size_t>(i)] -
                                                risk_vector(j, i)));
        return err;
    });
}

/** @brief corrP(x) = M(x) M_trsf(x) P(x) checked against an independent evaluation of each channel density. */
inline CheckReport verify_observed_distribution(const ScenarioSpec& spec, const FiniteJoint& j, double tol, std::uint64_t seed = 0) {
    return detail::run_check("observed-distribution", scenario_name(spec), scenario_to_json(spec)["params"], tol, seed, [&] {
        const Marginals m = marginals(j);
        const ContaminationModel cm = observed_distribution(spec, j);
        double err = 0.0;
        if (cm.family == Family::SconfPair) {
            // Both rows of M_Sconf(x, x') B(x) equal P(x)P(x').
            for (int i = 0; i < j.n_x(); ++i)
                for (int i2 = 0; i2 < j.n_x(); ++i2) {
                    const Vector& c = cm.corrP[static_cast<std::size_t>(i * j.n_x() + i2)];
                    const double target = m.instance_marginal(i) * m.instance_marginal(i2);
                    err = std::max({err, std::abs(c(0) - target), std::abs(c(1) - target)});
                }
            return err;
        }
        for (int i = 0; i < j.n_x(); ++i) {
            const Vector B = base_distributions(spec, m, i);
            const Vector direct = cm.M[static_cast<std::size_t>(i)] * B;
            err = std::max(err, (direct - cm.corrP[static_cast<std::size_t>(i)]).cwiseAbs().maxCoeff());
            if (cm.family == Family::CCN) // compound-label joints sum to P(x)
                err = std::max(err, std::abs(cm.corrP[static_cast<std::size_t>(i)].sum() - m.instance_marginal(i)));
            if (cm.family == Family::CCN) {
                const Matrix& M = cm.M[static_cast<std::size_t>(i)];
                for (Eigen::Index k = 0; k < M.cols(); ++k) {
                    // MCL rows already carry q; columns of every CCN-family matrix are conditionals.
                    err = std::max(err, std::abs(M.col(k).sum() - 1.0));
                }
            }
        }
        return err;
    });
}

/**
 * @brief |rewritten risk - classification risk|.  With @p inject_fault the first
 *        channel's corrected loss is negated, which must make the check fail.
 */
inline CheckReport verify_risk_equality(const ScenarioSpec& spec, const FiniteJoint& j, const LinearModel& model, LossKind loss,
                                        double tol, MethodSelector sel = MethodSelector::Auto, std::uint64_t seed = 0,
                                        bool inject_fault = false) {
    std::string name = "risk-equality";
    if (sel == MethodSelector::Inversion) name += ":inversion";
    if (sel == MethodSelector::MarginalChain) name += ":marginal-chain";
    return detail::run_check(name, scenario_name(spec), scenario_to_json(spec)["params"], tol, seed, [&] {
        const double exact = classification_risk(j, model, loss);
        if (!inject_fault) return std::abs(rewritten_risk(spec, j, model, loss, sel) - exact);
        const Matrix T = loss_table(j, model, loss);
        double r = 0.0;
        if (family_of(spec) == Family::SconfPair) {
            const Marginals m = marginals(j);
            for (int i = 0; i < j.n_x(); ++i)
                for (int i2 = 0; i2 < j.n_x(); ++i2) {
                    const auto [a, b] = sconf_weights(m.priors(0), sconf_confidence(m, i, i2));
                    r += m.instance_marginal(i) * m.instance_marginal(i2) *
                         (-a * (T(0, i) + T(0, i2)) / 2.0 + b * (T(1, i) + T(1, i2)) / 2.0);
                }
            return std::abs(r - exact);
        }
        const ContaminationModel cm = observed_distribution(spec, j);
        const DecontaminationResult dr = decontaminate(spec, j, sel);
        for (int i = 0; i < j.n_x(); ++i) {
            Vector cl = corrected_losses(T.col(i), dr.Mdagger[static_cast<std::size_t>(i)]);
            cl(0) = -cl(0);
            r += cl.dot(cm.corrP[static_cast<std::size_t>(i)]);
        }
        return std::abs(r - exact);
    });
}

/**
 * @brief Closed-form corrected losses against the generic L^T M-dagger, entrywise.
 *
 * CL and MCL compare the inversion closed forms with the inversion pipeline.
 */
inline CheckReport verify_closed_form(const ScenarioSpec& spec, const FiniteJoint& j, const LinearModel& model, LossKind loss,
                                      double tol, std::uint64_t seed = 0) {
    return detail::run_check("closed-form", scenario_name(spec), scenario_to_json(spec)["params"], tol, seed, [&] {
        const Marginals m = marginals(j);
        const Matrix T = loss_table(j, model, loss);
        double err = 0.0;
        if (family_of(spec) == Family::SconfPair) {
            const DecontaminationResult dr = decontaminate(spec, j, MethodSelector::Auto);
            for (int i = 0; i < j.n_x(); ++i)
                for (int i2 = 0; i2 < j.n_x(); ++i2) {
                    const Vector generic = corrected_losses(T.col(i), dr.Mdagger[static_cast<std::size_t>(i * j.n_x() + i2)]);
                    err = std::max(err, (generic - closed_form_sconf_loss(m, i, i2, T.col(i))).cwiseAbs().maxCoeff());
                }
            return err;
        }
        const bool inversion = std::holds_alternative<scenario::CL>(spec) || std::holds_alternative<scenario::MCL>(spec);
        const DecontaminationResult dr = decontaminate(spec, j, inversion ? MethodSelector::Inversion : MethodSelector::Auto);
        for (int i = 0; i < j.n_x(); ++i) {
            const Vector generic = corrected_losses(T.col(i), dr.Mdagger[static_cast<std::size_t>(i)]);
            err = std::max(err, (generic - closed_form_corrected_loss(spec, m, i, T.col(i))).cwiseAbs().maxCoeff());
        }
        return err;
    });
}

/** @brief Every reduction-graph edge applicable to the joint's K, entrywise matrix equality. */
inline std::vector<CheckReport> verify_reduction_graph(const FiniteJoint& j, double tol, std::uint64_t seed = 0) {
    using namespace scenario;
    const Marginals m = marginals(j);
    const int K = j.K, n = j.n_x();
    std::vector<std::pair<std::string, ScenarioSpec>> edges;
    if (K == 2) {
        edges.push_back({"UU", random_spec("MCD", K, n, seed)});
        for (const char* c : {"PU", "SU", "DU", "SD", "Pcomp"}) edges.push_back({"UU", scenario_from_name(c, json::object())});
        edges.push_back({"GCCN", random_spec("CCN", K, n, seed)});
        edges.push_back({"SCConf", Pconf{}});
    }
    edges.push_back({"GCCN", random_spec("PPL", K, n, seed)});
    edges.push_back({"PPL", PCPL{}});
    edges.push_back({"PPL", random_spec("MCL", K, n, seed)});
    edges.push_back({"MCL", CL{}});
    edges.push_back({"SubConf", random_spec("SCConf", K, n, seed)});
    edges.push_back({"SubConf", Soft{}});

    std::vector<CheckReport> out;
    const auto labels = compound_label_space(K);
    for (const auto& [parent, child] : edges) {
        const std::string cname = scenario_name(child);
        json params = scenario_to_json(child)["params"];
        params["parent"] = parent;
        out.push_back(detail::run_check("reduction:" + parent + "->" + cname, cname, params, tol, seed, [&] {
            const ReductionResult rr = reduce(parent, child, m);
            double err = 0.0;
            for (int i = 0; i < n; ++i) {
                const Matrix P = contamination_matrix(rr.parent_instance, m, i);
                const Matrix C = contamination_matrix(child, m, i);
                if (parent == "PPL" && cname == "MCL") {
                    // Complementary label s of MCL is the partial label [K] \ s of PPL.
                    const std::uint32_t full = (1u << K) - 1u;
                    for (std::size_t t = 0; t < labels.size(); ++t) {
                        std::size_t u = 0;
                        while (labels[u].mask != (full & ~labels[t].mask)) ++u;
                        err = std::max(err, detail::max_abs(C.row(static_cast<Eigen::Index>(t)) - P.row(static_cast<Eigen::Index>(u))));
                    }
                } else if (parent == "MCL" && cname == "CL") {
                    // Size-1 rows reproduce CL; all other rows vanish.
                    err = std::max(err, detail::max_abs(P.topRows(K) - C));
                    err = std::max(err, detail::max_abs(P.bottomRows(P.rows() - K)));
                } else {
                    if (P.rows() != C.rows() || P.cols() != C.cols()) throw Error(ErrorCode::ShapeMismatch, "edge matrices differ in shape");
                    err = std::max(err, detail::max_abs(P - C));
                }
            }
            return err;
        }));
    }
    return out;
}

/** @brief Pseudo-rational check of (J - I)/3 and its inverse for K = 4, plus marginal-chain recovery. */
inline std::vector<CheckReport> verify_worked_example(std::uint64_t seed, const Tolerances& tol = {}) {
    std::vector<CheckReport> out;
    const int K = 4;
    Matrix features(K, 1);
    CounterRng rng(seed, 9);
    std::vector<Vector> f;
    Matrix P(K, 1);
    const auto p = random_simplex(rng, K);
    for (int k = 0; k < K; ++k) P(k, 0) = p[static_cast<std::size_t>(k)];
    P /= P.sum();
    f.push_back(Vector::Constant(1, 1.0));
    const FiniteJoint j = validate_joint(K, f, P);
    const Marginals m = marginals(j);
    const ScenarioSpec cl = scenario::CL{};
    out.push_back(detail::run_check("worked-example:M_CL", "CL", json::object(), 0.0, seed, [&] {
        const Matrix M = contamination_matrix(cl, m, 0);
        double err = 0.0;
        for (int r = 0; r < K; ++r)
            for (int c = 0; c < K; ++c) err = std::max(err, std::abs(M(r, c) - (r == c ? 0.0 : 1.0 / 3.0)));
        return err;
    }));
    out.push_back(detail::run_check("worked-example:M_CL_inverse", "CL", json::object(), tol.exact_example, seed, [&] {
        const DecontaminationResult dr = decontaminate(cl, j, MethodSelector::Inversion);
        double err = 0.0;
        for (int r = 0; r < K; ++r)
            for (int c = 0; c < K; ++c) err = std::max(err, std::abs(dr.Mdagger[0](r, c) - (r == c ? -2.0 : 1.0)));
        return err;
    }));
    out.push_back(detail::run_check("worked-example:marginal-chain", "CL", json::object(), 1e-14, seed, [&] {
        const ContaminationModel cm = observed_distribution(cl, j);
        const DecontaminationResult dr = decontaminate(cl, j, MethodSelector::MarginalChain);
        return detail::max_abs(dr.Mdagger[0] * cm.corrP[0] - P.col(0));
    }));
    return out;
}

/** @brief M_d^{-1} M_d = I for every K <= K_hi and d in [1, K-1]. */
inline CheckReport verify_mcl_blocks(int K_hi, double tol, std::uint64_t seed = 0) {
    return detail::run_check("mcl-block-inverse", "MCL", json{{"K_max", K_hi}}, tol, seed, [&] {
        double err = 0.0;
        for (int K = 2; K <= K_hi; ++K)
            for (int d = 1; d < K; ++d)
                err = std::max(err, detail::max_abs(mcl_block_inverse(K, d) * mcl_block(K, d) - Matrix::Identity(K, K)));
        return err;
    });
}

/** @brief PCPL: E[corr_l_S] = (1/2) E[sum_k r_k l_k / sum_{a in S} r_a]. */
inline CheckReport verify_pcpl_half_identity(const FiniteJoint& j, const LinearModel& model, LossKind loss, double tol,
                                             std::uint64_t seed = 0) {
    return detail::run_check("pcpl-half-identity", "PCPL", json::object(), tol, seed, [&] {
        const ScenarioSpec spec = scenario::PCPL{};
        const Marginals m = marginals(j);
        const ContaminationModel cm = observed_distribution(spec, j);
        const DecontaminationResult dr = decontaminate(spec, j, MethodSelector::MarginalChain);
        const Matrix T = loss_table(j, model, loss);
        const auto labels = compound_label_space(j.K);
        double lhs = 0.0, rhs = 0.0;
        for (int i = 0; i < j.n_x(); ++i) {
            const Vector cl = corrected_losses(T.col(i), dr.Mdagger[static_cast<std::size_t>(i)]);
            for (std::size_t s = 0; s < labels.size(); ++s) {
                const double mass = cm.corrP[static_cast<std::size_t>(i)](static_cast<Eigen::Index>(s));
                lhs += mass * cl(static_cast<Eigen::Index>(s));
                double den = 0.0, num = 0.0;
                for (int k = 0; k < j.K; ++k) {
                    if (labels[s].contains(k)) den += m.class_probabilities(k, i);
                    num += m.class_probabilities(k, i) * T(k, i);
                }
                rhs += mass * num / den;
            }
        }
        return std::abs(lhs - 0.5 * rhs);
    });
}

/** @brief PPL marginal-chain M-dagger against r_k 1{k in s} / sum_{a in s} r_a. */
inline CheckReport verify_ppl_mdagger(const ScenarioSpec& spec, const FiniteJoint& j, double tol, std::uint64_t seed = 0) {
    return detail::run_check("ppl-mdagger-closed-form", scenario_name(spec), scenario_to_json(spec)["params"], tol, seed, [&] {
        const Marginals m = marginals(j);
        const DecontaminationResult dr = decontaminate(spec, j, MethodSelector::MarginalChain);
        const auto labels = compound_label_space(j.K);
        double err = 0.0;
        for (int i = 0; i < j.n_x(); ++i)
            for (std::size_t s = 0; s < labels.size(); ++s) {
                double den = 0.0;
                for (int k = 0; k < j.K; ++k)
                    if (labels[s].contains(k)) den += m.class_probabilities(k, i);
                for (int k = 0; k < j.K; ++k) {
                    const double expected = labels[s].contains(k) ? m.class_probabilities(k, i) / den : 0.0;
                    err = std::max(err, std::abs(dr.Mdagger[static_cast<std::size_t>(i)](k, static_cast<Eigen::Index>(s)) - expected));
                }
            }
        return err;
    });
}

/** @brief Pairwise symmetry E[h(X)] = E[h(X')] for random h, and pair-marginal consistency. */
inline std::vector<CheckReport> verify_pair_identities(const FiniteJoint& j, double tol, std::uint64_t seed, int n_h = 10) {
    std::vector<CheckReport> out;
    const Marginals m = marginals(j);
    for (PairKind kind : {PairKind::Similar, PairKind::Dissimilar}) {
        const std::string scen = kind == PairKind::Similar ? "SU" : "DU";
        out.push_back(detail::run_check(std::string("pair-symmetry:") + pair_kind_name(kind), scen, json{{"functions", n_h}}, tol, seed,
                                        [&] {
                                            const PairDistribution pd = pair_distribution(kind, m);
                                            CounterRng rng(seed, 31);
                                            double err = 0.0;
                                            for (int t = 0; t < n_h; ++t) {
                                                Vector h(j.n_x());
                                                for (int i = 0; i < j.n_x(); ++i) h(i) = rng.uniform(-5.0, 5.0);
                                                double ex = 0.0, ex2 = 0.0;
                                                for (int i = 0; i < j.n_x(); ++i)
                                                    for (int i2 = 0; i2 < j.n_x(); ++i2) {
                                                        ex += pd.P(i, i2) * h(i);
                                                        ex2 += pd.P(i, i2) * h(i2);
                                                    }
                                                err = std::max(err, std::abs(ex - ex2));
                                            }
                                            return err;
                                        }));
    }
    // Row sums of the S and D pair matrices are the tilde densities of SU and DU; Pcomp: Sup/Inf.
    const std::vector<std::tuple<PairKind, ScenarioSpec, std::string>> marg = {
        {PairKind::Similar, scenario::SU{}, "SU"}, {PairKind::Dissimilar, scenario::DU{}, "DU"}, {PairKind::Pcomp, scenario::Pcomp{}, "Pcomp"}};
    for (const auto& [kind, spec, scen] : marg) {
        out.push_back(detail::run_check(std::string("pair-marginals:") + pair_kind_name(kind), scen, json::object(), tol, seed, [&] {
            const PairDistribution pd = pair_distribution(kind, m);
            const ContaminationModel cm = observed_distribution(spec, j);
            double err = std::abs(pd.P.sum() - 1.0);
            for (int i = 0; i < j.n_x(); ++i) {
                err = std::max(err, std::abs(pd.P.row(i).sum() - cm.corrP[static_cast<std::size_t>(i)](0)));
                if (kind == PairKind::Pcomp) err = std::max(err, std::abs(pd.P.col(i).sum() - cm.corrP[static_cast<std::size_t>(i)](1)));
            }
            return err;
        }));
    }
    return out;
}

/** @brief Pairwise rewritten risks (SU, DU, SD, Pcomp, and Sconf X-only) against the classification risk. */
inline std::vector<CheckReport> verify_pairwise_risks(const FiniteJoint& j, const LinearModel& model, LossKind loss, double tol,
                                                      std::uint64_t seed) {
    std::vector<CheckReport> out;
    for (const char* name : {"SU", "DU", "SD", "Pcomp"}) {
        const ScenarioSpec spec = scenario_from_name(name, json::object());
        out.push_back(detail::run_check("pairwise-risk", name, json::object(), tol, seed,
                                        [&] { return std::abs(pairwise_risk(spec, j, model, loss) - classification_risk(j, model, loss)); }));
    }
    out.push_back(detail::run_check("sconf-x-only-risk", "Sconf", json::object(), tol, seed,
                                    [&] { return std::abs(sconf_risk_x_only(j, model, loss) - classification_risk(j, model, loss)); }));
    return out;
}

/**
 * @brief Monte-Carlo consistency: |empirical - exact| <= k SE, and a same-seed rerun is bit-identical.
 */
inline std::vector<CheckReport> verify_monte_carlo(const ScenarioSpec& spec, const FiniteJoint& j, const LinearModel& model,
                                                   LossKind loss, std::size_t n, double k_se, std::uint64_t seed) {
    std::vector<CheckReport> out;
    const std::string scen = scenario_name(spec);
    json params = scenario_to_json(spec)["params"];
    params["n"] = n;
    WeakDataset ds;
    EmpiricalEstimate est;
    CheckReport mc = detail::run_check("monte-carlo", scen, params, 0.0, seed, [&] {
        ds = sample_weak_dataset(spec, j, uniform_sizes(spec, n), seed);
        est = empirical_risk(ds, j, model, loss);
        return std::abs(est.risk - classification_risk(j, model, loss));
    });
    mc.tolerance = k_se * est.standard_error;
    mc.pass = mc.error.empty() && mc.max_abs_err <= mc.tolerance;
    mc.params["standard_error"] = est.standard_error;
    out.push_back(mc);
    out.push_back(detail::run_check("monte-carlo-rerun", scen, params, 0.0, seed, [&] {
        const WeakDataset again = sample_weak_dataset(spec, j, uniform_sizes(spec, n), seed);
        const EmpiricalEstimate e2 = empirical_risk(again, j, model, loss);
        bool same = again.channels.size() == ds.channels.size();
        for (std::size_t c = 0; same && c < ds.channels.size(); ++c) same = again.channels[c].items == ds.channels[c].items;
        same = same && std::memcmp(&e2.risk, &est.risk, sizeof(double)) == 0;
        return same ? 0.0 : 1.0;
    }));
    return out;
}

/** @brief Analytic vs central-difference gradient of the empirical corrected risk. */
inline CheckReport verify_gradient(const ScenarioSpec& spec, const FiniteJoint& j, LossKind loss, std::size_t n, double tol,
                                   std::uint64_t seed, double l2 = 0.0) {
    json params = scenario_to_json(spec)["params"];
    params["loss"] = loss_name(loss);
    return detail::run_check("gradient", scenario_name(spec), params, tol, seed, [&] {
        const WeakDataset ds = sample_weak_dataset(spec, j, uniform_sizes(spec, n), seed);
        const Matrix A = aggregate_weights(compile_design(ds, j), j.n_x());
        return gradient_check(A, j, random_model(j.K, j.d_feat(), seed + 1), loss, l2);
    });
}

/**
 * @brief A separable binary joint: points uniform in [-1,1]^2 labelled by a fixed
 *        line, with margin 0.1, each carrying mass 1/n_x on its own class.
 */
inline FiniteJoint separable_binary_joint(int n_x, std::uint64_t seed) {
    CounterRng rng(seed, 55);
    std::vector<Vector> feats;
    Matrix P = Matrix::Zero(2, n_x);
    int npos = 0;
    while (static_cast<int>(feats.size()) < n_x) {
        Vector x(2);
        x << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0);
        const double s = x(0) + 0.5 * x(1) - 0.2;
        if (std::abs(s) < 0.1) continue;
        const int i = static_cast<int>(feats.size());
        P(s > 0 ? 0 : 1, i) = 1.0 / n_x;
        npos += s > 0;
        feats.push_back(x);
    }
    (void)npos;
    return validate_joint(2, feats, P);
}

/** @brief Fraction of instances where two models have the same argmax prediction. */
inline double argmax_agreement(const FiniteJoint& j, const LinearModel& a, const LinearModel& b) {
    int same = 0;
    for (const auto& x : j.features) same += argmax(a.scores(x)) == argmax(b.scores(x));
    return static_cast<double>(same) / static_cast<double>(j.n_x());
}

/**
 * @brief PU-trained vs fully supervised (UU with gamma = 0) logistic ERM on a separable joint.
 *        The reported error is 1 - agreement; the tolerance is 1 - required agreement.
 */
inline CheckReport verify_erm_sanity(std::uint64_t seed, double required = 0.95) {
    return detail::run_check("erm-pu-vs-supervised", "PU", json{{"n_per_channel", 20000}, {"epochs", 2000}}, 1.0 - required, seed, [&] {
        const FiniteJoint j = separable_binary_joint(40, seed);
        const TrainConfig cfg{0.5, 2000, seed, 0.0};
        const ScenarioSpec pu = scenario::PU{}, sup = scenario::UU{0.0, 0.0};
        const auto pu_ds = sample_weak_dataset(pu, j, uniform_sizes(pu, 20000), seed);
        const auto sup_ds = sample_weak_dataset(sup, j, uniform_sizes(sup, 20000), seed);
        const TrainResult a = train_erm(pu_ds, j, LossKind::Logistic, cfg);
        const TrainResult b = train_erm(sup_ds, j, LossKind::Logistic, cfg);
        return 1.0 - argmax_agreement(j, a.model, b.model);
    });
}

/** @brief Supervised logistic training with a small step never increases the objective. */
inline CheckReport verify_monotone_descent(const FiniteJoint& j, std::uint64_t seed) {
    return detail::run_check("monotone-descent", "UU", json{{"gamma_1", 0.0}, {"gamma_2", 0.0}}, 0.0, seed, [&] {
        const ScenarioSpec sup = scenario::UU{0.0, 0.0};
        const auto ds = sample_weak_dataset(sup, j, uniform_sizes(sup, 500), seed);
        const TrainResult r = train_erm(ds, j, LossKind::Logistic, TrainConfig{0.05, 200, seed, 0.0});
        double worst = 0.0;
        for (std::size_t e = 1; e < r.trace.size(); ++e) worst = std::max(worst, r.trace[e] - r.trace[e - 1]);
        return worst;
    });
}

/** @brief Sconf: both rows of M_Sconf B reproduce P(x)P(x') and sum_x' M~-dagger M~ = I. */
inline std::vector<CheckReport> verify_sconf_identities(const FiniteJoint& j, double tol, std::uint64_t seed) {
    const ScenarioSpec s = scenario::Sconf{};
    return {verify_observed_distribution(s, j, tol, seed), verify_reconstruction(s, j, tol, MethodSelector::Auto, seed)};
}

// ---------------------------------------------------------------------------
// Single-scenario and full harness
// ---------------------------------------------------------------------------

/** @brief All checks that apply to one scenario on one joint. */
inline std::vector<CheckReport> verify_scenario(const ScenarioSpec& spec, const FiniteJoint& j, std::uint64_t seed,
                                                const Tolerances& tol = {}, bool inject_fault = false) {
    std::vector<CheckReport> out;
    const LinearModel model = random_model(j.K, j.d_feat(), seed);
    const LossKind loss = LossKind::Logistic;
    out.push_back(verify_observed_distribution(spec, j, tol.matrix, seed));
    out.push_back(verify_reconstruction(spec, j, tol.matrix, MethodSelector::Auto, seed));
    out.push_back(verify_risk_equality(spec, j, model, loss, tol.risk, MethodSelector::Auto, seed, inject_fault));
    const bool square_ccn = std::holds_alternative<scenario::CL>(spec) || std::holds_alternative<scenario::CCN>(spec);
    if (square_ccn || std::holds_alternative<scenario::MCL>(spec)) {
        out.push_back(verify_reconstruction(spec, j, tol.matrix, MethodSelector::Inversion, seed));
        out.push_back(verify_risk_equality(spec, j, model, loss, tol.risk, MethodSelector::Inversion, seed));
    }
    if (std::holds_alternative<scenario::MCL>(spec)) {
        out.push_back(detail::run_check("mcl-method-agreement", "MCL", scenario_to_json(spec)["params"], tol.risk, seed, [&] {
            return std::abs(rewritten_risk(spec, j, model, loss, MethodSelector::Inversion) -
                            rewritten_risk(spec, j, model, loss, MethodSelector::MarginalChain));
        }));
    }
    if (!std::holds_alternative<scenario::CCN>(spec) && !std::holds_alternative<scenario::GCCN>(spec))
        out.push_back(verify_closed_form(spec, j, model, loss, tol.matrix, seed));
    if (std::holds_alternative<scenario::PPL>(spec) || std::holds_alternative<scenario::PCPL>(spec))
        out.push_back(verify_ppl_mdagger(spec, j, tol.closed_form_mdagger, seed));
    if (std::holds_alternative<scenario::PCPL>(spec)) out.push_back(verify_pcpl_half_identity(j, model, loss, tol.matrix, seed));
    if (std::holds_alternative<scenario::Sconf>(spec)) {
        out.push_back(detail::run_check("sconf-x-only-risk", "Sconf", json::object(), tol.risk, seed, [&] {
            return std::abs(sconf_risk_x_only(j, model, loss) - classification_risk(j, model, loss));
        }));
    }
    if (std::holds_alternative<scenario::SU>(spec) || std::holds_alternative<scenario::DU>(spec) ||
        std::holds_alternative<scenario::SD>(spec) || std::holds_alternative<scenario::Pcomp>(spec)) {
        out.push_back(detail::run_check("pairwise-risk", scenario_name(spec), json::object(), tol.risk, seed, [&] {
            return std::abs(pairwise_risk(spec, j, model, loss) - classification_risk(j, model, loss));
        }));
    }
    return out;
}

/** @brief Settings of the full harness. */
struct VerifyConfig {
    int K = 4;
    int nx = 6;
    int trials = 20;
    std::uint64_t seed = 7;
    std::optional<std::vector<std::string>> scenarios; ///< unset: every scenario
    bool inject_fault = false;
    unsigned threads = 0;                               ///< 0: WSLRR_THREADS or hardware concurrency
    std::size_t monte_carlo_n = 100000;
    Tolerances tol{};
};

/** @brief Thread count from WSLRR_THREADS, else the hardware concurrency. */
inline unsigned harness_threads() {
    if (const char* env = std::getenv("WSLRR_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1u : hc;
}

/** @brief Runs independent tasks on up to @p threads workers; results keep task order. */
inline std::vector<CheckReport> run_tasks(const std::vector<std::function<std::vector<CheckReport>()>>& tasks, unsigned threads) {
    std::vector<std::vector<CheckReport>> results(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t = next++; t < tasks.size(); t = next++) results[t] = tasks[t]();
    };
    const unsigned nt = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(tasks.size())));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < nt; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    std::vector<CheckReport> out;
    for (auto& r : results) out.insert(out.end(), r.begin(), r.end());
    return out;
}

/**
 * @brief The full seeded grid: per trial and scenario every applicable check, plus
 *        reduction graph, worked example, MCL blocks, pair identities, Monte-Carlo,
 *        gradients, descent and ERM sanity.  trials = 0 or an empty scenario list
 *        gives an empty report.
 */
inline VerifyReport verify_all(const VerifyConfig& cfg) {
    VerifyReport report{cfg.seed, {}};
    if (cfg.trials <= 0) return report;
    std::vector<std::string> names;
    if (cfg.scenarios) names = *cfg.scenarios;
    else {
        names = core_scenarios();
        names.insert(names.end(), abstraction_scenarios().begin(), abstraction_scenarios().end());
    }
    if (names.empty()) return report;
    const int K_hi = std::max(2, cfg.K);
    const int nx_hi = std::max(3, cfg.nx);
    const int d_feat = 3;
    auto has = [&](const std::string& s) { return std::find(names.begin(), names.end(), s) != names.end(); };

    std::vector<std::function<std::vector<CheckReport>()>> tasks;
    for (int t = 0; t < cfg.trials; ++t) {
        const std::uint64_t s = cfg.seed * 1000003ull + static_cast<std::uint64_t>(t);
        const int n_x = 3 + t % (nx_hi - 2);
        const int K_multi = 2 + t % (K_hi - 1);
        for (const auto& name : names) {
            tasks.push_back([=, &cfg] {
                const int K = is_binary_scenario(name) ? 2 : K_multi;
                const FiniteJoint j = random_joint(K, n_x, d_feat, s);
                const ScenarioSpec spec = random_spec(name, K, n_x, s);
                return verify_scenario(spec, j, s, cfg.tol, cfg.inject_fault);
            });
        }
        tasks.push_back([=, &cfg] {
            std::vector<CheckReport> out;
            const FiniteJoint jb = random_joint(2, n_x, d_feat, s);
            const FiniteJoint jm = random_joint(std::max(3, K_multi), n_x, d_feat, s);
            for (const auto& j : {jb, jm}) {
                auto r = verify_reduction_graph(j, cfg.tol.reduction, s);
                out.insert(out.end(), r.begin(), r.end());
            }
            auto p = verify_pair_identities(jb, cfg.tol.matrix, s);
            out.insert(out.end(), p.begin(), p.end());
            auto q = verify_pairwise_risks(jb, random_model(2, d_feat, s), LossKind::Logistic, cfg.tol.risk, s);
            out.insert(out.end(), q.begin(), q.end());
            auto w = verify_worked_example(s, cfg.tol);
            out.insert(out.end(), w.begin(), w.end());
            out.push_back(verify_mcl_blocks(6, cfg.tol.matrix, s));
            auto sc = verify_sconf_identities(jb, cfg.tol.matrix, s);
            out.insert(out.end(), sc.begin(), sc.end());
            out.push_back(verify_monotone_descent(jb, s));
            return out;
        });
        if (has("PU") || has("CL") || has("Soft")) {
            for (const char* mc : {"PU", "CL", "Soft"}) {
                if (!has(mc)) continue;
                tasks.push_back([=, &cfg] {
                    const int K = is_binary_scenario(mc) ? 2 : std::max(3, K_multi);
                    const FiniteJoint j = random_joint(K, n_x, d_feat, s);
                    return verify_monte_carlo(scenario_from_name(mc, json::object()), j, random_model(K, d_feat, s),
                                              LossKind::Logistic, cfg.monte_carlo_n, cfg.tol.monte_carlo_se, s);
                });
            }
        }
        tasks.push_back([=, &cfg] {
            std::vector<CheckReport> out;
            for (const auto& name : names) {
                const int K = is_binary_scenario(name) ? 2 : K_multi;
                const FiniteJoint j = random_joint(K, n_x, d_feat, s);
                const ScenarioSpec spec = random_spec(name, K, n_x, s);
                out.push_back(verify_gradient(spec, j, LossKind::Logistic, 200, cfg.tol.gradient, s));
            }
            return out;
        });
        if (has("PU")) tasks.push_back([=, &cfg] { return std::vector<CheckReport>{verify_erm_sanity(s, cfg.tol.erm_agreement)}; });
    }
    report.checks = run_tasks(tasks, cfg.threads == 0 ? harness_threads() : cfg.threads);
    return report;
}

} // namespace wslrr
