/**
 * @file scenarios.hpp
 * @brief Weak-supervision scenarios: contamination matrices M(x), transform
 *        matrices M_trsf(x), observed distributions corrP(x) = M M_trsf P(x),
 *        pair distributions, and the reduction graph between scenarios.
 *
 * Class labels inside scenario parameters (Y_s, y_s, compound-label members)
 * are 1-based as in the usual mathematical notation; matrix and instance
 * indices are 0-based.  Binary scenarios use class 1 as "p" and class 2 as "n".
 */
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wslrr/core.hpp"

namespace wslrr {

namespace scenario {
/// Mutually contaminated distributions with flip rates gamma_p, gamma_n (gamma_p + gamma_n < 1).
struct MCD { double gamma_p = 0.0, gamma_n = 0.0; };
/// Two unlabeled sets mixing the class-conditionals (gamma_1 + gamma_2 != 1).
struct UU { double gamma_1 = 0.0, gamma_2 = 0.0; };
struct PU {};
struct SU {};
struct DU {};
struct SD {};
struct Pcomp {};
struct Sconf {};
/// Binary label noise; flip[i](j,k) = P(noisy=j | Y=k, x_i).  A single matrix is shared by all instances.
struct CCN { std::vector<Matrix> flip; };
/// General compound-label noise; cond[i](j,k) = P(S=s_j | Y=k, x_i).  A single matrix is shared.
struct GCCN { std::vector<Matrix> cond; };
/// Proper partial labels; C(j, i) = C(s_j, x_i) over the canonical compound-label order.
struct PPL { Matrix C; };
struct PCPL {};
/// Multiple complementary labels; q[d-1] = probability that the complementary set has size d.
struct MCL { std::vector<double> q; };
struct CL {};
/// Subset confidence: confidences r_k(x) observed on samples with Y in Y_s (1-based members).
/// Y_s = [K] is accepted and reproduces Soft; scenario files must give a strict subset.
struct SubConf { std::vector<int> Y_s; };
/// Single-class confidence for class y_s (1-based).
struct SCConf { int y_s = 1; };
struct Pconf {};
struct Soft {};
} // namespace scenario

/** @brief Tagged union of every supported scenario together with its parameters. */
using ScenarioSpec = std::variant<scenario::MCD, scenario::UU, scenario::PU, scenario::SU, scenario::DU,
                                  scenario::SD, scenario::Pcomp, scenario::Sconf, scenario::CCN, scenario::GCCN,
                                  scenario::PPL, scenario::PCPL, scenario::MCL, scenario::CL, scenario::SubConf,
                                  scenario::SCConf, scenario::Pconf, scenario::Soft>;

/** @brief Which decontamination machinery a scenario belongs to. */
enum class Family { MCD, CCN, Conf, SconfPair };

inline const char* family_name(Family f) {
    switch (f) {
    case Family::MCD: return "MCD";
    case Family::CCN: return "CCN";
    case Family::Conf: return "Conf";
    case Family::SconfPair: return "Sconf";
    }
    return "?";
}

/** @brief Canonical scenario tag, also used as the "name" field of scenario JSON. */
inline std::string scenario_name(const ScenarioSpec& s) {
    static const char* names[] = {"MCD", "UU",  "PU",   "SU", "DU",      "SD",     "Pcomp", "Sconf", "CCN",
                                  "GCCN", "PPL", "PCPL", "MCL", "CL",     "SubConf", "SCConf", "Pconf", "Soft"};
    return names[s.index()];
}

inline Family family_of(const ScenarioSpec& s) {
    switch (s.index()) {
    case 0: case 1: case 2: case 3: case 4: case 5: case 6: return Family::MCD;
    case 7: return Family::SconfPair;
    case 8: case 9: case 10: case 11: case 12: case 13: return Family::CCN;
    default: return Family::Conf;
    }
}

/** @brief True for the seven binary scenarios whose base distributions are the class-conditionals. */
inline bool is_mcd_family(const ScenarioSpec& s) { return family_of(s) == Family::MCD; }

/** @brief Largest class count accepted for compound-label scenarios (2^K - 2 channels). */
inline constexpr int kDefaultKMax = 8;

/** @brief A nonempty strict subset of the classes, stored as a bitmask over 0-based indices. */
struct CompoundLabel {
    std::uint32_t mask = 0;

    bool contains(int k0) const { return (mask >> k0) & 1u; }
    int size() const { return std::popcount(mask); }
    /// 1-based members in increasing order.
    std::vector<int> members() const {
        std::vector<int> out;
        for (int k = 0; k < 32; ++k)
            if (contains(k)) out.push_back(k + 1);
        return out;
    }
    std::string str() const {
        std::string s = "{";
        bool first = true;
        for (int k : members()) {
            if (!first) s += ",";
            s += std::to_string(k);
            first = false;
        }
        return s + "}";
    }
    bool operator==(const CompoundLabel&) const = default;
};

/**
 * @brief All 2^K - 2 compound labels, ordered by size and then lexicographically.
 * @throws Error KTooLarge when K exceeds @p K_max, BadSize when K < 2
 */
inline std::vector<CompoundLabel> compound_label_space(int K, int K_max = kDefaultKMax) {
    if (K < 2) throw Error(ErrorCode::BadSize, "K must be at least 2");
    if (K > K_max) throw Error(ErrorCode::KTooLarge, "K=" + std::to_string(K) + " exceeds K_max=" + std::to_string(K_max));
    std::vector<CompoundLabel> out;
    for (int d = 1; d < K; ++d) {
        // Lexicographic enumeration of d-combinations of {0..K-1}.
        std::vector<int> idx(d);
        for (int t = 0; t < d; ++t) idx[t] = t;
        while (true) {
            std::uint32_t mask = 0;
            for (int t : idx) mask |= 1u << t;
            out.push_back({mask});
            int t = d - 1;
            while (t >= 0 && idx[t] == K - d + t) --t;
            if (t < 0) break;
            ++idx[t];
            for (int u = t + 1; u < d; ++u) idx[u] = idx[u - 1] + 1;
        }
    }
    return out;
}

/** @brief Compound labels of exactly size @p d, in canonical order. */
inline std::vector<CompoundLabel> compound_labels_of_size(int K, int d) {
    std::vector<CompoundLabel> out;
    for (const auto& s : compound_label_space(K))
        if (s.size() == d) out.push_back(s);
    return out;
}

/** @brief Binomial coefficient as a double (exact for the sizes used here). */
inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int t = 1; t <= k; ++t) r = r * (n - k + t) / t;
    return std::round(r);
}

namespace detail {

inline constexpr double kParamTol = 1e-9;
inline constexpr double kStochasticTol = 1e-12;

inline void require_binary(const Marginals& m, const std::string& who) {
    if (m.K() != 2) throw Error(ErrorCode::NotBinary, who + " requires K = 2");
}

inline void require_unbalanced(const Marginals& m, const std::string& who) {
    require_binary(m, who);
    if (std::abs(m.priors(0) - 0.5) <= kParamTol)
        throw Error(ErrorCode::DegenerateParams, who + " requires pi_p != 1/2");
}

inline Matrix mcd_matrix(double g1, double g2) {
    Matrix M(2, 2);
    M << 1.0 - g1, g1, g2, 1.0 - g2;
    return M;
}

inline void check_column_stochastic(const Matrix& M, const std::string& who) {
    for (Eigen::Index k = 0; k < M.cols(); ++k) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < M.rows(); ++j) {
            if (M(j, k) < 0.0) throw Error(ErrorCode::InvalidParams, who + " has a negative probability");
            s += M(j, k);
        }
        if (std::abs(s - 1.0) > kStochasticTol)
            throw Error(ErrorCode::InvalidParams, who + " column " + std::to_string(k) + " does not sum to 1");
    }
}

inline const Matrix& per_instance(const std::vector<Matrix>& v, int i, const std::string& who) {
    if (v.empty()) throw Error(ErrorCode::InvalidParams, who + " has no matrices");
    if (v.size() == 1) return v.front();
    if (i < 0 || i >= static_cast<int>(v.size())) throw Error(ErrorCode::IndexOutOfRange, who + " instance " + std::to_string(i));
    return v[static_cast<std::size_t>(i)];
}

inline std::uint32_t mask_of(const std::vector<int>& members, int K, const std::string& who) {
    std::uint32_t mask = 0;
    for (int k : members) {
        if (k < 1 || k > K) throw Error(ErrorCode::InvalidParams, who + " member " + std::to_string(k) + " outside [1,K]");
        if ((mask >> (k - 1)) & 1u) throw Error(ErrorCode::InvalidParams, who + " has a repeated member");
        mask |= 1u << (k - 1);
    }
    if (mask == 0) throw Error(ErrorCode::InvalidParams, who + " must be nonempty");
    return mask;
}

/// r_{Y_s}(x) = sum of class probabilities over the mask.
inline double subset_confidence(const Marginals& m, std::uint32_t mask, int i) {
    double s = 0.0;
    for (int k = 0; k < m.K(); ++k)
        if ((mask >> k) & 1u) s += m.class_probabilities(k, i);
    return s;
}

/// diag(r_{Y_s}/r_k); the whole label set gives diag(1/r_k).
inline Matrix subset_conf_matrix(const Marginals& m, std::uint32_t mask, int i) {
    const int K = m.K();
    const double rs = subset_confidence(m, mask, i);
    Matrix M = Matrix::Zero(K, K);
    for (int k = 0; k < K; ++k) {
        const double rk = m.class_probabilities(k, i);
        if (rk <= 0.0)
            throw Error(ErrorCode::ZeroConfidence, "r_" + std::to_string(k + 1) + "(x_" + std::to_string(i) + ") = 0");
        M(k, k) = rs / rk;
    }
    return M;
}

inline void check_instance(const Marginals& m, int i) {
    if (i < 0 || i >= m.n_x()) throw Error(ErrorCode::IndexOutOfRange, "instance index " + std::to_string(i));
}

} // namespace detail

/**
 * @brief Validates the parameter invariants of a spec against a distribution's marginals.
 * @throws Error DegenerateParams, InvalidParams, NotBinary, ShapeMismatch, KTooLarge
 */
inline void validate_spec(const ScenarioSpec& spec, const Marginals& m) {
    using namespace scenario;
    const int K = m.K(), n = m.n_x();
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, MCD>) {
                detail::require_binary(m, "MCD");
                if (s.gamma_p < 0 || s.gamma_p > 1 || s.gamma_n < 0 || s.gamma_n > 1)
                    throw Error(ErrorCode::InvalidParams, "MCD gammas must lie in [0,1]");
                if (s.gamma_p + s.gamma_n >= 1.0)
                    throw Error(ErrorCode::DegenerateParams, "MCD requires gamma_p + gamma_n < 1");
            } else if constexpr (std::is_same_v<T, UU>) {
                detail::require_binary(m, "UU");
                if (s.gamma_1 < 0 || s.gamma_1 > 1 || s.gamma_2 < 0 || s.gamma_2 > 1)
                    throw Error(ErrorCode::InvalidParams, "UU gammas must lie in [0,1]");
                if (std::abs(s.gamma_1 + s.gamma_2 - 1.0) <= detail::kParamTol)
                    throw Error(ErrorCode::DegenerateParams, "UU requires gamma_1 + gamma_2 != 1");
            } else if constexpr (std::is_same_v<T, PU> || std::is_same_v<T, Pcomp> || std::is_same_v<T, Pconf>) {
                detail::require_binary(m, scenario_name(spec));
            } else if constexpr (std::is_same_v<T, SU> || std::is_same_v<T, DU> || std::is_same_v<T, SD> ||
                                 std::is_same_v<T, Sconf>) {
                detail::require_unbalanced(m, scenario_name(spec));
            } else if constexpr (std::is_same_v<T, CCN>) {
                detail::require_binary(m, "CCN");
                if (s.flip.size() != 1 && static_cast<int>(s.flip.size()) != n)
                    throw Error(ErrorCode::ShapeMismatch, "CCN needs one flip matrix or one per instance");
                for (const auto& f : s.flip) {
                    if (f.rows() != 2 || f.cols() != 2) throw Error(ErrorCode::ShapeMismatch, "CCN flip must be 2x2");
                    detail::check_column_stochastic(f, "CCN flip");
                }
            } else if constexpr (std::is_same_v<T, GCCN>) {
                const auto S = static_cast<Eigen::Index>(compound_label_space(K).size());
                if (s.cond.size() != 1 && static_cast<int>(s.cond.size()) != n)
                    throw Error(ErrorCode::ShapeMismatch, "GCCN needs one conditional or one per instance");
                for (const auto& c : s.cond) {
                    if (c.rows() != S || c.cols() != K) throw Error(ErrorCode::ShapeMismatch, "GCCN conditional must be |S| x K");
                    detail::check_column_stochastic(c, "GCCN conditional");
                }
            } else if constexpr (std::is_same_v<T, PPL>) {
                const auto labels = compound_label_space(K);
                if (s.C.rows() != static_cast<Eigen::Index>(labels.size()) || s.C.cols() != n)
                    throw Error(ErrorCode::ShapeMismatch, "PPL C must be |S| x n_x");
                if ((s.C.array() < 0.0).any()) throw Error(ErrorCode::InvalidParams, "PPL C must be nonnegative");
                for (int i = 0; i < n; ++i)
                    for (int y = 0; y < K; ++y) {
                        double tot = 0.0;
                        for (std::size_t j = 0; j < labels.size(); ++j)
                            if (labels[j].contains(y)) tot += s.C(static_cast<Eigen::Index>(j), i);
                        if (std::abs(tot - 1.0) > detail::kStochasticTol)
                            throw Error(ErrorCode::InvalidParams, "PPL C is not proper at class " + std::to_string(y + 1) +
                                                                      ", instance " + std::to_string(i));
                    }
            } else if constexpr (std::is_same_v<T, PCPL> || std::is_same_v<T, CL>) {
                compound_label_space(K);
            } else if constexpr (std::is_same_v<T, MCL>) {
                compound_label_space(K);
                if (static_cast<int>(s.q.size()) != K - 1) throw Error(ErrorCode::ShapeMismatch, "MCL q must have K-1 entries");
                double tot = 0.0;
                for (double v : s.q) {
                    if (v < 0.0) throw Error(ErrorCode::InvalidParams, "MCL q must be nonnegative");
                    tot += v;
                }
                if (std::abs(tot - 1.0) > detail::kStochasticTol) throw Error(ErrorCode::InvalidParams, "MCL q must sum to 1");
            } else if constexpr (std::is_same_v<T, SubConf>) {
                const auto mask = detail::mask_of(s.Y_s, K, "SubConf Y_s");
                (void)mask;
            } else if constexpr (std::is_same_v<T, SCConf>) {
                if (s.y_s < 1 || s.y_s > K) throw Error(ErrorCode::InvalidParams, "SCConf y_s outside [1,K]");
            }
        },
        spec);
}

/** @brief Channel labels, i.e. the row labels of M(x), in the order used everywhere. */
inline std::vector<std::string> channel_labels(const ScenarioSpec& spec, int K) {
    using namespace scenario;
    switch (spec.index()) {
    case 0: return {"P~", "N~"};
    case 1: return {"U1", "U2"};
    case 2: return {"P", "U"};
    case 3: return {"S~", "U"};
    case 4: return {"D~", "U"};
    case 5: return {"S~", "D~"};
    case 6: return {"Sup", "Inf"};
    case 7: return {"XX'#1", "XX'#2"};
    case 8: return {"{1}", "{2}"};
    case 13: {
        std::vector<std::string> out;
        for (int k = 1; k <= K; ++k) out.push_back("{" + std::to_string(k) + "}");
        return out;
    }
    case 9: case 10: case 11: case 12: {
        std::vector<std::string> out;
        for (const auto& s : compound_label_space(K)) out.push_back(s.str());
        return out;
    }
    default: {
        std::vector<std::string> out;
        for (int k = 1; k <= K; ++k) out.push_back("conf#" + std::to_string(k));
        return out;
    }
    }
}

/**
 * @brief The per-instance contamination matrix M(x_i) of a pointwise scenario.
 *
 * MCD-family matrices do not depend on x; Sconf is pairwise and is built by
 * sconf_contamination_matrix() instead.
 * @throws Error ZeroConfidence, DegenerateParams, InvalidParams, WrongFamily
 */
inline Matrix contamination_matrix(const ScenarioSpec& spec, const Marginals& m, int i) {
    using namespace scenario;
    validate_spec(spec, m);
    detail::check_instance(m, i);
    const int K = m.K();
    return std::visit(
        [&](const auto& s) -> Matrix {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, MCD>) {
                return detail::mcd_matrix(s.gamma_p, s.gamma_n);
            } else if constexpr (std::is_same_v<T, UU>) {
                return detail::mcd_matrix(s.gamma_1, s.gamma_2);
            } else if constexpr (std::is_same_v<T, PU>) {
                const double pp = m.priors(0), pn = m.priors(1);
                Matrix M(2, 2);
                M << 1.0, 0.0, pp, pn;
                return M;
            } else if constexpr (std::is_same_v<T, SU>) {
                const double pp = m.priors(0), pn = m.priors(1), Q = pp * pp + pn * pn;
                Matrix M(2, 2);
                M << pp * pp / Q, pn * pn / Q, pp, pn;
                return M;
            } else if constexpr (std::is_same_v<T, DU>) {
                const double pp = m.priors(0), pn = m.priors(1);
                Matrix M(2, 2);
                M << 0.5, 0.5, pp, pn;
                return M;
            } else if constexpr (std::is_same_v<T, SD>) {
                const double pp = m.priors(0), pn = m.priors(1), Q = pp * pp + pn * pn;
                Matrix M(2, 2);
                M << pp * pp / Q, pn * pn / Q, 0.5, 0.5;
                return M;
            } else if constexpr (std::is_same_v<T, Pcomp>) {
                const double pp = m.priors(0), pn = m.priors(1);
                const double d1 = pp + pn * pn, d2 = pp * pp + pn;
                Matrix M(2, 2);
                M << pp / d1, pn * pn / d1, pp * pp / d2, pn / d2;
                return M;
            } else if constexpr (std::is_same_v<T, Sconf>) {
                throw Error(ErrorCode::WrongFamily, "Sconf is pairwise; use sconf_contamination_matrix");
            } else if constexpr (std::is_same_v<T, CCN>) {
                return detail::per_instance(s.flip, i, "CCN flip");
            } else if constexpr (std::is_same_v<T, GCCN>) {
                return detail::per_instance(s.cond, i, "GCCN conditional");
            } else if constexpr (std::is_same_v<T, PPL>) {
                const auto labels = compound_label_space(K);
                Matrix M = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), K);
                for (std::size_t j = 0; j < labels.size(); ++j)
                    for (int k = 0; k < K; ++k)
                        if (labels[j].contains(k)) M(static_cast<Eigen::Index>(j), k) = s.C(static_cast<Eigen::Index>(j), i);
                return M;
            } else if constexpr (std::is_same_v<T, PCPL>) {
                const auto labels = compound_label_space(K);
                const double c = 1.0 / (std::ldexp(1.0, K - 1) - 1.0);
                Matrix M = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), K);
                for (std::size_t j = 0; j < labels.size(); ++j)
                    for (int k = 0; k < K; ++k)
                        if (labels[j].contains(k)) M(static_cast<Eigen::Index>(j), k) = c;
                return M;
            } else if constexpr (std::is_same_v<T, MCL>) {
                const auto labels = compound_label_space(K);
                Matrix M = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), K);
                for (std::size_t j = 0; j < labels.size(); ++j) {
                    const int d = labels[j].size();
                    const double w = s.q[static_cast<std::size_t>(d - 1)] / binomial(K - 1, d);
                    for (int k = 0; k < K; ++k)
                        if (!labels[j].contains(k)) M(static_cast<Eigen::Index>(j), k) = w;
                }
                return M;
            } else if constexpr (std::is_same_v<T, CL>) {
                Matrix M = Matrix::Constant(K, K, 1.0 / (K - 1));
                M.diagonal().setZero();
                return M;
            } else if constexpr (std::is_same_v<T, SubConf>) {
                return detail::subset_conf_matrix(m, detail::mask_of(s.Y_s, K, "SubConf Y_s"), i);
            } else if constexpr (std::is_same_v<T, SCConf>) {
                return detail::subset_conf_matrix(m, 1u << (s.y_s - 1), i);
            } else if constexpr (std::is_same_v<T, Pconf>) {
                return detail::subset_conf_matrix(m, 1u, i);
            } else {
                return detail::subset_conf_matrix(m, (1u << K) - 1u, i);
            }
        },
        spec);
}

/**
 * @brief M_trsf(x): diag(1/pi) for MCD-family and Sconf, identity otherwise.
 * @throws Error EmptyClass
 */
inline Matrix transform_matrix(const ScenarioSpec& spec, const Marginals& m, int i) {
    detail::check_instance(m, i);
    const int K = m.K();
    const Family f = family_of(spec);
    if (f == Family::MCD || f == Family::SconfPair) {
        Matrix T = Matrix::Zero(K, K);
        for (int k = 0; k < K; ++k) {
            if (m.priors(k) <= 0.0) throw Error(ErrorCode::EmptyClass, "class with zero prior");
            T(k, k) = 1.0 / m.priors(k);
        }
        return T;
    }
    return Matrix::Identity(K, K);
}

/** @brief B(x): class-conditionals for MCD-family and Sconf, the risk vector otherwise. */
inline Vector base_distributions(const ScenarioSpec& spec, const Marginals& m, int i) {
    detail::check_instance(m, i);
    const Family f = family_of(spec);
    if (f == Family::MCD || f == Family::SconfPair) return m.class_conditionals.col(i);
    return m.class_probabilities.col(i) * m.instance_marginal(i);
}

/**
 * @brief Sconf pair confidence r(x, x') = P(Y = Y' | x, x').
 * @throws Error NotBinary, ZeroPairMass
 */
inline double sconf_confidence(const Marginals& m, int i, int i2) {
    detail::require_binary(m, "Sconf");
    detail::check_instance(m, i);
    detail::check_instance(m, i2);
    const double mass = m.instance_marginal(i) * m.instance_marginal(i2);
    if (mass <= 0.0) throw Error(ErrorCode::ZeroPairMass, "P(x)P(x') = 0");
    const double pp = m.priors(0), pn = m.priors(1);
    const auto& C = m.class_conditionals;
    return (pp * pp * C(0, i) * C(0, i2) + pn * pn * C(1, i) * C(1, i2)) / mass;
}

inline double sconf_confidence(const FiniteJoint& j, int i, int i2) { return sconf_confidence(marginals(j), i, i2); }

/**
 * @brief The Sconf contamination matrix at the pair (x_i, x_i2), acting on class-conditionals of x_i.
 * @throws Error DegenerateParams when r(x,x') equals pi_n or pi_p (the matrix is undefined there)
 */
inline Matrix sconf_contamination_matrix(const Marginals& m, int i, int i2) {
    detail::require_unbalanced(m, "Sconf");
    const double pp = m.priors(0), pn = m.priors(1);
    const double r = sconf_confidence(m, i, i2);
    const double a = r - pn, b = pp - r;
    if (std::abs(a) <= detail::kParamTol || std::abs(b) <= detail::kParamTol)
        throw Error(ErrorCode::DegenerateParams, "Sconf matrix undefined where r(x,x') equals a class prior");
    const double cp = m.class_conditionals(0, i2), cn = m.class_conditionals(1, i2);
    Matrix M(2, 2);
    M << pp * (pp * pp * cp - pn * pn * cn) / a, pp * (pn * pn * cn - pn * pn * cp) / a,
        pn * (pp * pp * cn - pp * pp * cp) / b, pn * (pp * pp * cp - pn * pn * cn) / b;
    return M;
}

/** @brief Kind tag of a pair distribution. */
enum class PairKind { Similar, Dissimilar, Pcomp, Sconf };

inline const char* pair_kind_name(PairKind k) {
    switch (k) {
    case PairKind::Similar: return "S";
    case PairKind::Dissimilar: return "D";
    case PairKind::Pcomp: return "PC";
    case PairKind::Sconf: return "XX'";
    }
    return "?";
}

/** @brief n_x x n_x pair probabilities; entry (i, i2) is the probability of the ordered pair. */
struct PairDistribution {
    PairKind kind = PairKind::Similar;
    Matrix P;
};

/**
 * @brief Exact pair distribution of the similar, dissimilar, Pcomp or Sconf pair generators.
 * @throws Error NotBinary
 */
inline PairDistribution pair_distribution(PairKind kind, const Marginals& m) {
    detail::require_binary(m, "pair distributions");
    const int n = m.n_x();
    const double pp = m.priors(0), pn = m.priors(1);
    const auto& C = m.class_conditionals;
    PairDistribution out{kind, Matrix(n, n)};
    for (int i = 0; i < n; ++i)
        for (int i2 = 0; i2 < n; ++i2) {
            const double p1 = C(0, i), n1 = C(1, i), p2 = C(0, i2), n2 = C(1, i2);
            double v = 0.0;
            switch (kind) {
            case PairKind::Similar: v = (pp * pp * p1 * p2 + pn * pn * n1 * n2) / (pp * pp + pn * pn); break;
            case PairKind::Dissimilar: v = (p1 * n2 + n1 * p2) / 2.0; break;
            case PairKind::Pcomp:
                v = (pp * pp * p1 * p2 + pp * pn * p1 * n2 + pn * pn * n1 * n2) / (pp * pp + pp * pn + pn * pn);
                break;
            case PairKind::Sconf: v = m.instance_marginal(i) * m.instance_marginal(i2); break;
            }
            out.P(i, i2) = v;
        }
    return out;
}

inline PairDistribution pair_distribution(PairKind kind, const FiniteJoint& j) { return pair_distribution(kind, marginals(j)); }

/**
 * @brief Contamination structure of a scenario over the whole instance set.
 *
 * For pointwise scenarios the vectors are indexed by instance.  For Sconf they
 * are indexed by ordered pair i * n_x + i2, and @c pair holds P(x)P(x').
 */
struct ContaminationModel {
    Family family = Family::MCD;
    std::vector<std::string> channels;
    std::vector<Matrix> M;
    std::vector<Matrix> M_trsf;
    std::vector<Vector> corrP;
    std::optional<PairDistribution> pair;
};

/**
 * @brief corrP(x) = M(x) M_trsf(x) P(x) for every instance (every pair for Sconf).
 * @throws Error propagated from contamination_matrix()
 */
inline ContaminationModel observed_distribution(const ScenarioSpec& spec, const FiniteJoint& j) {
    const Marginals m = marginals(j);
    validate_spec(spec, m);
    ContaminationModel cm;
    cm.family = family_of(spec);
    cm.channels = channel_labels(spec, j.K);
    const int n = j.n_x();
    if (cm.family == Family::SconfPair) {
        for (int i = 0; i < n; ++i) {
            const Matrix T = transform_matrix(spec, m, i);
            for (int i2 = 0; i2 < n; ++i2) {
                Matrix M = sconf_contamination_matrix(m, i, i2);
                cm.corrP.push_back(M * (T * risk_vector(j, i)));
                cm.M.push_back(std::move(M));
                cm.M_trsf.push_back(T);
            }
        }
        cm.pair = pair_distribution(PairKind::Sconf, m);
        return cm;
    }
    for (int i = 0; i < n; ++i) {
        Matrix M = contamination_matrix(spec, m, i);
        Matrix T = transform_matrix(spec, m, i);
        cm.corrP.push_back(M * (T * risk_vector(j, i)));
        cm.M.push_back(std::move(M));
        cm.M_trsf.push_back(std::move(T));
    }
    return cm;
}

/** @brief Outcome of reduce(): the parent scenario instantiated so that its matrix equals the child's. */
struct ReductionResult {
    ScenarioSpec parent_instance;
    std::map<std::string, double> assignments;
};

/** @brief Spec-name lookup for reduce(); returns std::nullopt for unknown names. */
inline std::optional<std::size_t> scenario_index(const std::string& name) {
    static const char* names[] = {"MCD", "UU",  "PU",   "SU", "DU",      "SD",     "Pcomp", "Sconf", "CCN",
                                  "GCCN", "PPL", "PCPL", "MCL", "CL",     "SubConf", "SCConf", "Pconf", "Soft"};
    for (std::size_t t = 0; t < std::size(names); ++t)
        if (name == names[t]) return t;
    return std::nullopt;
}

/**
 * @brief Instantiates the parent of a reduction-graph edge so that it reproduces @p child.
 *
 * The child carries its own parameters (e.g. q for MCL, C for PPL); the parent's
 * parameters are the ones assigned along the edge.  For PPL -> MCL the parent's
 * partial label s corresponds to the child's complementary label [K] \ s.
 * For SubConf -> Soft the parent uses Y_s = [K], which is what Soft realizes.
 * @throws Error NotAnEdge
 */
inline ReductionResult reduce(const std::string& parent, const ScenarioSpec& child, const Marginals& m) {
    using namespace scenario;
    const int K = m.K();
    const std::string c = scenario_name(child);
    const double pp = m.priors(0), pn = K >= 2 ? m.priors(1) : 0.0;
    ReductionResult r{child, {}};
    auto uu = [&](double g1, double g2) {
        r.parent_instance = UU{g1, g2};
        r.assignments = {{"gamma_1", g1}, {"gamma_2", g2}};
    };
    if (parent == "UU" && K == 2) {
        if (c == "MCD") {
            const auto& s = std::get<MCD>(child);
            uu(s.gamma_p, s.gamma_n);
            return r;
        }
        const double Q = pp * pp + pn * pn;
        if (c == "PU") { uu(0.0, pp); return r; }
        if (c == "SU") { uu(pn * pn / Q, pp); return r; }
        if (c == "DU") { uu(0.5, pp); return r; }
        if (c == "SD") { uu(pn * pn / Q, 0.5); return r; }
        if (c == "Pcomp") { uu(pn * pn / (pp + pn * pn), pp * pp / (pp * pp + pn)); return r; }
    }
    if (parent == "GCCN") {
        if (c == "CCN" && K == 2) {
            r.parent_instance = GCCN{std::get<CCN>(child).flip};
            return r;
        }
        if (c == "PPL") {
            const auto& s = std::get<PPL>(child);
            const auto labels = compound_label_space(K);
            std::vector<Matrix> cond;
            for (int i = 0; i < m.n_x(); ++i) {
                Matrix C = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), K);
                for (std::size_t j = 0; j < labels.size(); ++j)
                    for (int k = 0; k < K; ++k)
                        if (labels[j].contains(k)) C(static_cast<Eigen::Index>(j), k) = s.C(static_cast<Eigen::Index>(j), i);
                cond.push_back(std::move(C));
            }
            r.parent_instance = GCCN{std::move(cond)};
            return r;
        }
    }
    if (parent == "PPL") {
        const auto labels = compound_label_space(K);
        const auto S = static_cast<Eigen::Index>(labels.size());
        if (c == "PCPL") {
            const double v = 1.0 / (std::ldexp(1.0, K - 1) - 1.0);
            r.parent_instance = PPL{Matrix::Constant(S, m.n_x(), v)};
            r.assignments = {{"C", v}};
            return r;
        }
        if (c == "MCL") {
            const auto& s = std::get<MCL>(child);
            Matrix C(S, m.n_x());
            for (Eigen::Index j = 0; j < S; ++j) {
                const int d = K - labels[static_cast<std::size_t>(j)].size(); // size of the complementary set
                C.row(j).setConstant(s.q[static_cast<std::size_t>(d - 1)] / binomial(K - 1, d));
            }
            r.parent_instance = PPL{C};
            for (int d = 1; d < K; ++d)
                r.assignments["C(|s|=" + std::to_string(K - d) + ")"] = s.q[static_cast<std::size_t>(d - 1)] / binomial(K - 1, d);
            return r;
        }
    }
    if (parent == "MCL" && c == "CL") {
        std::vector<double> q(static_cast<std::size_t>(K - 1), 0.0);
        q[0] = 1.0;
        r.parent_instance = MCL{q};
        r.assignments = {{"q_1", 1.0}};
        return r;
    }
    if (parent == "SubConf") {
        if (c == "SCConf") {
            const int ys = std::get<SCConf>(child).y_s;
            r.parent_instance = SubConf{{ys}};
            r.assignments = {{"Y_s", static_cast<double>(ys)}};
            return r;
        }
        if (c == "Soft") {
            std::vector<int> all;
            for (int k = 1; k <= K; ++k) all.push_back(k);
            r.parent_instance = SubConf{all};
            r.assignments = {{"r_Ys", 1.0}};
            return r;
        }
    }
    if (parent == "SCConf" && c == "Pconf" && K == 2) {
        r.parent_instance = SCConf{1};
        r.assignments = {{"y_s", 1.0}};
        return r;
    }
    throw Error(ErrorCode::NotAnEdge, parent + " -> " + c + " is not an edge of the reduction graph");
}

} // namespace wslrr
