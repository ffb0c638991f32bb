/**
 * @file decontam.hpp
 * @brief Decontamination matrices M-dagger with M-dagger(x) corrP(x) = P(x):
 *        inversion, marginal chain, the blockwise MCL inverse, the Sconf
 *        diagonal, and the confidence-family diagonal inverse.
 */
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "wslrr/scenarios.hpp"

namespace wslrr {

/** @brief How a decontamination matrix was obtained. */
enum class Method { Inversion, MarginalChain, SconfSpecial, MclBlockwise };

/** @brief User-facing method selector; Auto picks the family default. */
enum class MethodSelector { Inversion, MarginalChain, Auto };

inline const char* method_name(Method m) {
    switch (m) {
    case Method::Inversion: return "inversion";
    case Method::MarginalChain: return "marginal-chain";
    case Method::SconfSpecial: return "sconf-special";
    case Method::MclBlockwise: return "mcl-blockwise";
    }
    return "?";
}

/** @throws Error InvalidParams for an unknown selector string */
inline MethodSelector parse_method(const std::string& s) {
    if (s == "inversion") return MethodSelector::Inversion;
    if (s == "marginal-chain") return MethodSelector::MarginalChain;
    if (s == "auto") return MethodSelector::Auto;
    throw Error(ErrorCode::InvalidParams, "unknown method '" + s + "' (inversion | marginal-chain | auto)");
}

/**
 * @brief Per-instance decontamination matrices (K x m); for Sconf per ordered
 *        pair i * n_x + i2, each a 2x2 diagonal.
 */
struct DecontaminationResult {
    Method method = Method::Inversion;
    std::vector<Matrix> Mdagger;
};

/** @brief Determinant threshold, applied after scaling each row to unit max-norm. */
inline constexpr double kSingularTol = 1e-12;

/**
 * @brief Inverse of a square matrix with a conditioning guard.
 *
 * 2x2 matrices use the adjugate formula; larger ones use partial-pivot LU.
 * @throws Error NonSquare, Singular
 */
inline Matrix invert_checked(const Matrix& A) {
    if (A.rows() != A.cols()) throw Error(ErrorCode::NonSquare, "cannot invert a non-square matrix");
    Matrix scaled = A;
    for (Eigen::Index r = 0; r < A.rows(); ++r) {
        const double mx = A.row(r).cwiseAbs().maxCoeff();
        if (mx == 0.0) throw Error(ErrorCode::Singular, "matrix has a zero row");
        scaled.row(r) /= mx;
    }
    if (A.rows() == 2) {
        const double ds = scaled(0, 0) * scaled(1, 1) - scaled(0, 1) * scaled(1, 0);
        if (std::abs(ds) < kSingularTol) throw Error(ErrorCode::Singular, "determinant below threshold");
        const double det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
        Matrix inv(2, 2);
        inv << A(1, 1) / det, -A(0, 1) / det, -A(1, 0) / det, A(0, 0) / det;
        return inv;
    }
    Eigen::PartialPivLU<Matrix> lu(scaled);
    if (std::abs(lu.determinant()) < kSingularTol) throw Error(ErrorCode::Singular, "determinant below threshold");
    return Eigen::PartialPivLU<Matrix>(A).inverse();
}

/**
 * @brief (M(x_i) M_trsf(x_i))^{-1}; for MCD-family this equals Pi M^{-1}.
 * @throws Error NonSquare, Singular
 */
inline Matrix decontaminate_inversion(const ContaminationModel& cm, int i) {
    if (i < 0 || i >= static_cast<int>(cm.M.size())) throw Error(ErrorCode::IndexOutOfRange, "instance index");
    return invert_checked(cm.M[static_cast<std::size_t>(i)] * cm.M_trsf[static_cast<std::size_t>(i)]);
}

/**
 * @brief Marginal-chain decontamination: entry (k, j) = P(Y=k | S=s_j, x).
 *
 * Channels with zero observed mass at x get a zero column.
 * @throws Error WrongFamily for scenarios outside the CCN family
 */
inline Matrix decontaminate_marginal_chain(const ScenarioSpec& spec, const FiniteJoint& j, int i) {
    if (family_of(spec) != Family::CCN)
        throw Error(ErrorCode::WrongFamily, "marginal chain is defined for CCN-family scenarios only");
    const Marginals m = marginals(j);
    const Matrix M = contamination_matrix(spec, m, i);
    const Vector P = risk_vector(j, i);
    const Vector corrP = M * P;
    Matrix D = Matrix::Zero(j.K, M.rows());
    for (Eigen::Index c = 0; c < M.rows(); ++c) {
        if (corrP(c) <= 0.0) continue;
        for (int k = 0; k < j.K; ++k) D(k, c) = M(c, k) * P(k) / corrP(c);
    }
    return D;
}

/**
 * @brief The size-d MCL block M_d (N_d x K), entry 1{k not in s} / C(K-1, d).
 * @throws Error BadSize
 */
inline Matrix mcl_block(int K, int d) {
    if (d < 1 || d > K - 1) throw Error(ErrorCode::BadSize, "block size d must lie in [1, K-1]");
    const auto labels = compound_labels_of_size(K, d);
    Matrix B = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), K);
    const double w = 1.0 / binomial(K - 1, d);
    for (std::size_t t = 0; t < labels.size(); ++t)
        for (int k = 0; k < K; ++k)
            if (!labels[t].contains(k)) B(static_cast<Eigen::Index>(t), k) = w;
    return B;
}

/**
 * @brief Left inverse of M_d as a K x N_d matrix: entry (i, j) = 1 - ((K-1)/d) 1{i in s_{d,j}}.
 * @throws Error BadSize
 */
inline Matrix mcl_block_inverse(int K, int d) {
    if (d < 1 || d > K - 1) throw Error(ErrorCode::BadSize, "block size d must lie in [1, K-1]");
    const auto labels = compound_labels_of_size(K, d);
    Matrix B(K, static_cast<Eigen::Index>(labels.size()));
    const double c = static_cast<double>(K - 1) / d;
    for (int k = 0; k < K; ++k)
        for (std::size_t t = 0; t < labels.size(); ++t)
            B(k, static_cast<Eigen::Index>(t)) = labels[t].contains(k) ? 1.0 - c : 1.0;
    return B;
}

/**
 * @brief [M_1^{-1} ... M_{K-1}^{-1}] aligned with the canonical channel order; a left inverse of M_MCL.
 * @throws Error propagated from validation
 */
inline Matrix mcl_inverse(const scenario::MCL& spec, int K) {
    if (static_cast<int>(spec.q.size()) != K - 1) throw Error(ErrorCode::ShapeMismatch, "MCL q must have K-1 entries");
    const auto S = static_cast<Eigen::Index>(compound_label_space(K).size());
    Matrix out(K, S);
    Eigen::Index col = 0;
    for (int d = 1; d < K; ++d) {
        const Matrix B = mcl_block_inverse(K, d);
        out.middleCols(col, B.cols()) = B;
        col += B.cols();
    }
    return out;
}

/**
 * @brief diag((r - pi_n)/(pi_p - pi_n), (pi_p - r)/(pi_p - pi_n)).
 * @throws Error DegenerateParams when pi_p = 1/2
 */
inline Matrix sconf_decontamination(double pi_p, double r) {
    const double pi_n = 1.0 - pi_p;
    if (std::abs(pi_p - 0.5) <= detail::kParamTol) throw Error(ErrorCode::DegenerateParams, "Sconf requires pi_p != 1/2");
    Matrix D = Matrix::Zero(2, 2);
    D(0, 0) = (r - pi_n) / (pi_p - pi_n);
    D(1, 1) = (pi_p - r) / (pi_p - pi_n);
    return D;
}

/**
 * @brief Integrand of the Sconf tilde matrix at (x_i, x_i2), before summing over x'.
 *
 * Summing over i2 gives the tilde matrix of x_i once the r-dependent
 * decontamination diagonal has been applied pairwise (see sconf_tilde_product()).
 */
inline Matrix sconf_tilde_integrand(const Marginals& m, int i, int i2) {
    const double pp = m.priors(0), pn = m.priors(1);
    const double r = sconf_confidence(m, i, i2);
    const double a = r - pn, b = pp - r;
    if (std::abs(a) <= detail::kParamTol || std::abs(b) <= detail::kParamTol)
        throw Error(ErrorCode::DegenerateParams, "Sconf tilde matrix undefined where r(x,x') equals a class prior");
    const double cp = m.class_conditionals(0, i2), cn = m.class_conditionals(1, i2);
    Matrix T(2, 2);
    T << (pp * pp * cp - pn * pn * cn) / a, (pn * pn * cn - pn * pn * cp) / a, (pp * pp * cn - pp * pp * cp) / b,
        (pp * pp * cp - pn * pn * cn) / b;
    return T;
}

/** @brief sum over x' of M-tilde-dagger(x,x') times the tilde integrand at x; equals I. */
inline Matrix sconf_tilde_product(const Marginals& m, int i) {
    detail::require_unbalanced(m, "Sconf");
    Matrix acc = Matrix::Zero(2, 2);
    for (int i2 = 0; i2 < m.n_x(); ++i2)
        acc += sconf_decontamination(m.priors(0), sconf_confidence(m, i, i2)) * sconf_tilde_integrand(m, i, i2);
    return acc;
}

/**
 * @brief diag(r_1/r_{Y_s}, ..., r_K/r_{Y_s}) for the confidence family (Soft: r_{Y_s} = 1).
 * @throws Error ZeroConfidence when r_{Y_s}(x) = 0, WrongFamily otherwise
 */
inline Matrix conf_diagonal_inverse(const ScenarioSpec& spec, const Marginals& m, int i) {
    using namespace scenario;
    if (family_of(spec) != Family::Conf) throw Error(ErrorCode::WrongFamily, "not a confidence-family scenario");
    validate_spec(spec, m);
    detail::check_instance(m, i);
    const int K = m.K();
    std::uint32_t mask = (1u << K) - 1u;
    if (const auto* s = std::get_if<SubConf>(&spec)) mask = detail::mask_of(s->Y_s, K, "SubConf Y_s");
    if (const auto* s = std::get_if<SCConf>(&spec)) mask = 1u << (s->y_s - 1);
    if (std::holds_alternative<Pconf>(spec)) mask = 1u;
    const double rs = std::holds_alternative<Soft>(spec) ? 1.0 : detail::subset_confidence(m, mask, i);
    if (rs <= 0.0) throw Error(ErrorCode::ZeroConfidence, "P(Y in Y_s | x_" + std::to_string(i) + ") = 0");
    Matrix D = Matrix::Zero(K, K);
    for (int k = 0; k < K; ++k) D(k, k) = m.class_probabilities(k, i) / rs;
    return D;
}

/**
 * @brief Decontaminates every instance (every pair for Sconf) of a scenario.
 *
 * Auto selects inversion for MCD-family, the marginal chain for the CCN family,
 * the diagonal inverse for the confidence family and the Sconf diagonal for Sconf.
 * Explicit inversion of MCL uses the blockwise left inverse.
 * @throws Error WrongFamily, NonSquare, Singular, ZeroConfidence and validation errors
 */
inline DecontaminationResult decontaminate(const ScenarioSpec& spec, const FiniteJoint& j, MethodSelector sel) {
    const Marginals m = marginals(j);
    validate_spec(spec, m);
    const Family f = family_of(spec);
    const int n = j.n_x();
    DecontaminationResult out;
    if (f == Family::SconfPair) {
        if (sel != MethodSelector::Auto) throw Error(ErrorCode::WrongFamily, "Sconf supports only its dedicated decontamination");
        out.method = Method::SconfSpecial;
        for (int i = 0; i < n; ++i)
            for (int i2 = 0; i2 < n; ++i2)
                out.Mdagger.push_back(sconf_decontamination(m.priors(0), sconf_confidence(m, i, i2)));
        return out;
    }
    if (f == Family::Conf) {
        if (sel == MethodSelector::MarginalChain)
            throw Error(ErrorCode::WrongFamily, "marginal chain is defined for CCN-family scenarios only");
        out.method = Method::Inversion;
        for (int i = 0; i < n; ++i) out.Mdagger.push_back(conf_diagonal_inverse(spec, m, i));
        return out;
    }
    const bool chain = sel == MethodSelector::MarginalChain || (sel == MethodSelector::Auto && f == Family::CCN);
    if (chain) {
        out.method = Method::MarginalChain;
        for (int i = 0; i < n; ++i) out.Mdagger.push_back(decontaminate_marginal_chain(spec, j, i));
        return out;
    }
    if (const auto* mcl = std::get_if<scenario::MCL>(&spec)) {
        out.method = Method::MclBlockwise;
        const Matrix inv = mcl_inverse(*mcl, j.K);
        out.Mdagger.assign(static_cast<std::size_t>(n), inv);
        return out;
    }
    const ContaminationModel cm = observed_distribution(spec, j);
    out.method = Method::Inversion;
    for (int i = 0; i < n; ++i) out.Mdagger.push_back(decontaminate_inversion(cm, i));
    return out;
}

} // namespace wslrr
