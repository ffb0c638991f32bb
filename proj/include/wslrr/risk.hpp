/**
 * @file risk.hpp
 * @brief Loss families, linear score functions, the exact classification risk,
 *        corrected losses L^T M-dagger, rewritten risks (pointwise and pairwise),
 *        and closed-form corrected losses for cross-checking the generic path.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "wslrr/decontam.hpp"

namespace wslrr {

/** @brief Per-class loss family. */
enum class LossKind { ZeroOne, Logistic, Squared };

inline const char* loss_name(LossKind l) {
    switch (l) {
    case LossKind::ZeroOne: return "zero-one";
    case LossKind::Logistic: return "logistic";
    case LossKind::Squared: return "squared";
    }
    return "?";
}

/** @throws Error InvalidParams for an unknown loss name */
inline LossKind parse_loss(const std::string& s) {
    if (s == "zero-one") return LossKind::ZeroOne;
    if (s == "logistic") return LossKind::Logistic;
    if (s == "squared") return LossKind::Squared;
    throw Error(ErrorCode::InvalidParams, "unknown loss '" + s + "' (zero-one | logistic | squared)");
}

inline bool is_differentiable(LossKind l) { return l != LossKind::ZeroOne; }

namespace detail {
inline void check_scores(const Vector& g) {
    if (!g.allFinite()) throw Error(ErrorCode::NonFiniteScore, "scores must be finite");
}
inline double log_sum_exp(const Vector& g) {
    const double mx = g.maxCoeff();
    double s = 0.0;
    for (Eigen::Index j = 0; j < g.size(); ++j) s += std::exp(g(j) - mx);
    return mx + std::log(s);
}
} // namespace detail

/** @brief Index of the largest score, lowest index on ties. */
inline int argmax(const Vector& g) {
    int best = 0;
    for (Eigen::Index j = 1; j < g.size(); ++j)
        if (g(j) > g(best)) best = static_cast<int>(j);
    return best;
}

/**
 * @brief L = (l_1(g), ..., l_K(g)).
 *
 * zero-one: 1{argmax g != k}; logistic: multinomial logistic (softmax
 * cross-entropy) log sum_j exp(g_j) - g_k, which for K = 2 is the logistic loss
 * of the margin; squared: sum_j (g_j - 1{j = k})^2.
 * @throws Error NonFiniteScore
 */
inline Vector loss_vector(LossKind kind, const Vector& g) {
    detail::check_scores(g);
    const auto K = g.size();
    Vector L(K);
    switch (kind) {
    case LossKind::ZeroOne: {
        const int a = argmax(g);
        for (Eigen::Index k = 0; k < K; ++k) L(k) = k == a ? 0.0 : 1.0;
        break;
    }
    case LossKind::Logistic: {
        const double lse = detail::log_sum_exp(g);
        for (Eigen::Index k = 0; k < K; ++k) L(k) = lse - g(k);
        break;
    }
    case LossKind::Squared: {
        for (Eigen::Index k = 0; k < K; ++k) {
            double s = 0.0;
            for (Eigen::Index j = 0; j < K; ++j) {
                const double t = g(j) - (j == k ? 1.0 : 0.0);
                s += t * t;
            }
            L(k) = s;
        }
        break;
    }
    }
    return L;
}

/**
 * @brief Jacobian J(k, j) = d l_k / d g_j.
 * @throws Error NonDifferentiableLoss for zero-one, NonFiniteScore
 */
inline Matrix loss_jacobian(LossKind kind, const Vector& g) {
    detail::check_scores(g);
    const auto K = g.size();
    Matrix J(K, K);
    if (kind == LossKind::ZeroOne) throw Error(ErrorCode::NonDifferentiableLoss, "zero-one loss has no gradient");
    if (kind == LossKind::Logistic) {
        const double lse = detail::log_sum_exp(g);
        for (Eigen::Index j = 0; j < K; ++j) {
            const double sj = std::exp(g(j) - lse);
            for (Eigen::Index k = 0; k < K; ++k) J(k, j) = sj - (j == k ? 1.0 : 0.0);
        }
    } else {
        for (Eigen::Index k = 0; k < K; ++k)
            for (Eigen::Index j = 0; j < K; ++j) J(k, j) = 2.0 * (g(j) - (j == k ? 1.0 : 0.0));
    }
    return J;
}

/** @brief Linear score function g(x) = W x + b. */
struct LinearModel {
    Matrix W;
    Vector b;

    int K() const { return static_cast<int>(W.rows()); }
    int d() const { return static_cast<int>(W.cols()); }
    Vector scores(const Vector& x) const {
        if (x.size() != W.cols()) throw Error(ErrorCode::ShapeMismatch, "feature dimension does not match the model");
        return W * x + b;
    }
};

/** @brief Loss vectors of every instance, column i = L(g(x_i)). */
inline Matrix loss_table(const FiniteJoint& j, const LinearModel& model, LossKind loss) {
    Matrix T(j.K, j.n_x());
    for (int i = 0; i < j.n_x(); ++i) T.col(i) = loss_vector(loss, model.scores(j.features[static_cast<std::size_t>(i)]));
    return T;
}

/** @brief R(g) = sum_k sum_i P(Y=k, x_i) l_k(g(x_i)), summed left to right. */
inline double classification_risk(const FiniteJoint& j, const LinearModel& model, LossKind loss) {
    if (model.K() != j.K) throw Error(ErrorCode::ShapeMismatch, "model class count does not match the joint");
    double r = 0.0;
    for (int i = 0; i < j.n_x(); ++i) {
        const Vector L = loss_vector(loss, model.scores(j.features[static_cast<std::size_t>(i)]));
        for (int k = 0; k < j.K; ++k) r += j.joint(k, i) * L(k);
    }
    return r;
}

/**
 * @brief corr_L^T = L^T M-dagger.
 * @throws Error ShapeMismatch
 */
inline Vector corrected_losses(const Vector& L, const Matrix& Mdagger) {
    if (Mdagger.rows() != L.size()) throw Error(ErrorCode::ShapeMismatch, "loss vector and decontamination matrix disagree");
    return Mdagger.transpose() * L;
}

/** @brief Sconf weights a(r) = (r - pi_n)/(pi_p - pi_n) and b(r) = (pi_p - r)/(pi_p - pi_n). */
inline std::pair<double, double> sconf_weights(double pi_p, double r) {
    const Matrix D = sconf_decontamination(pi_p, r);
    return {D(0, 0), D(1, 1)};
}

/**
 * @brief Sconf risk in its X-only form sum_{x,x'} P(x)P(x')[a l_p(x) + b l_n(x)].
 * @throws Error DegenerateParams when pi_p = 1/2
 */
inline double sconf_risk_x_only(const FiniteJoint& j, const LinearModel& model, LossKind loss) {
    const Marginals m = marginals(j);
    detail::require_unbalanced(m, "Sconf");
    const Matrix T = loss_table(j, model, loss);
    double r = 0.0;
    for (int i = 0; i < j.n_x(); ++i)
        for (int i2 = 0; i2 < j.n_x(); ++i2) {
            const auto [a, b] = sconf_weights(m.priors(0), sconf_confidence(m, i, i2));
            r += m.instance_marginal(i) * m.instance_marginal(i2) * (a * T(0, i) + b * T(1, i));
        }
    return r;
}

/**
 * @brief Sconf risk in its symmetric form, averaging the losses of x and x'.
 * @throws Error DegenerateParams when pi_p = 1/2
 */
inline double sconf_risk_symmetric(const FiniteJoint& j, const LinearModel& model, LossKind loss) {
    const Marginals m = marginals(j);
    detail::require_unbalanced(m, "Sconf");
    const Matrix T = loss_table(j, model, loss);
    double r = 0.0;
    for (int i = 0; i < j.n_x(); ++i)
        for (int i2 = 0; i2 < j.n_x(); ++i2) {
            const auto [a, b] = sconf_weights(m.priors(0), sconf_confidence(m, i, i2));
            r += m.instance_marginal(i) * m.instance_marginal(i2) *
                 (a * (T(0, i) + T(0, i2)) / 2.0 + b * (T(1, i) + T(1, i2)) / 2.0);
        }
    return r;
}

/**
 * @brief Rewritten risk sum_x corr_L(x)^T corrP(x) computed through the generic pipeline.
 *
 * Sconf uses its symmetric pair form with the Sconf decontamination diagonal.
 * @throws Error propagated from decontamination
 */
inline double rewritten_risk(const ScenarioSpec& spec, const FiniteJoint& j, const LinearModel& model, LossKind loss,
                             MethodSelector sel = MethodSelector::Auto) {
    if (family_of(spec) == Family::SconfPair) {
        if (sel != MethodSelector::Auto) throw Error(ErrorCode::WrongFamily, "Sconf supports only its dedicated decontamination");
        return sconf_risk_symmetric(j, model, loss);
    }
    const ContaminationModel cm = observed_distribution(spec, j);
    const DecontaminationResult dr = decontaminate(spec, j, sel);
    const Matrix T = loss_table(j, model, loss);
    double r = 0.0;
    for (int i = 0; i < j.n_x(); ++i) {
        const Vector cl = corrected_losses(T.col(i), dr.Mdagger[static_cast<std::size_t>(i)]);
        const Vector& cp = cm.corrP[static_cast<std::size_t>(i)];
        for (Eigen::Index c = 0; c < cl.size(); ++c) r += cl(c) * cp(c);
    }
    return r;
}

/**
 * @brief Rewrites expressed through pair distributions (SU, DU, SD, Pcomp, Sconf).
 *
 * SU:  Q E_S[(Lc(x)+Lc(x'))/2] + E_U[L-];   DU: 2 pi_p pi_n E_D[-(Lc(x)+Lc(x'))/2] + E_U[L+];
 * SD:  Q E_S[(L+(x)+L+(x'))/2] + 2 pi_p pi_n E_D[(L-(x)+L-(x'))/2];
 * Pcomp: E_PC[corr_l_Sup(x) + corr_l_Inf(x')];  Sconf: symmetric pair form.
 * Here Q = pi_p^2 + pi_n^2, Lc = (l_p - l_n)/(pi_p - pi_n),
 * L+ = (pi_p l_p - pi_n l_n)/(pi_p - pi_n), L- = (-pi_n l_p + pi_p l_n)/(pi_p - pi_n).
 * @throws Error UnsupportedScenario for other scenarios
 */
inline double pairwise_risk(const ScenarioSpec& spec, const FiniteJoint& j, const LinearModel& model, LossKind loss) {
    using namespace scenario;
    if (std::holds_alternative<Sconf>(spec)) return sconf_risk_symmetric(j, model, loss);
    const Marginals m = marginals(j);
    validate_spec(spec, m);
    const double pp = m.priors(0), pn = m.priors(1), Q = pp * pp + pn * pn;
    const Matrix T = loss_table(j, model, loss);
    const int n = j.n_x();
    auto lc = [&](int i) { return (T(0, i) - T(1, i)) / (pp - pn); };
    auto lplus = [&](int i) { return (pp * T(0, i) - pn * T(1, i)) / (pp - pn); };
    auto lminus = [&](int i) { return (-pn * T(0, i) + pp * T(1, i)) / (pp - pn); };
    auto pair_mean = [&](PairKind kind, auto&& h) {
        const PairDistribution pd = pair_distribution(kind, m);
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int i2 = 0; i2 < n; ++i2) s += pd.P(i, i2) * h(i, i2);
        return s;
    };
    auto u_mean = [&](auto&& h) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += m.instance_marginal(i) * h(i);
        return s;
    };
    if (std::holds_alternative<SU>(spec))
        return Q * pair_mean(PairKind::Similar, [&](int a, int b) { return (lc(a) + lc(b)) / 2.0; }) + u_mean(lminus);
    if (std::holds_alternative<DU>(spec))
        return 2.0 * pp * pn * pair_mean(PairKind::Dissimilar, [&](int a, int b) { return -(lc(a) + lc(b)) / 2.0; }) +
               u_mean(lplus);
    if (std::holds_alternative<SD>(spec))
        return Q * pair_mean(PairKind::Similar, [&](int a, int b) { return (lplus(a) + lplus(b)) / 2.0; }) +
               2.0 * pp * pn * pair_mean(PairKind::Dissimilar, [&](int a, int b) { return (lminus(a) + lminus(b)) / 2.0; });
    if (std::holds_alternative<Pcomp>(spec))
        return pair_mean(PairKind::Pcomp,
                         [&](int a, int b) { return (T(0, a) - pp * T(1, a)) + (-pn * T(0, b) + T(1, b)); });
    throw Error(ErrorCode::UnsupportedScenario, scenario_name(spec) + " has no pairwise form");
}

/**
 * @brief Hand-written corrected losses of each scenario at instance i for loss vector L.
 *
 * CL and MCL return the inversion-based forms sum_k l_k - (K-1) l_s and
 * sum_{k not in s} l_k - ((K-1-d)/d) sum_{k in s} l_k; every other scenario
 * returns the form that the generic auto pipeline also produces.
 * @throws Error UnsupportedScenario for CCN, GCCN and Sconf (use closed_form_sconf_loss)
 */
inline Vector closed_form_corrected_loss(const ScenarioSpec& spec, const Marginals& m, int i, const Vector& L) {
    using namespace scenario;
    validate_spec(spec, m);
    detail::check_instance(m, i);
    const int K = m.K();
    if (L.size() != K) throw Error(ErrorCode::ShapeMismatch, "loss vector must have K entries");
    Vector out;
    if (is_mcd_family(spec)) {
        const double pp = m.priors(0), pn = m.priors(1), lp = L(0), ln = L(1), Q = pp * pp + pn * pn;
        out.resize(2);
        auto mcd = [&](double g1, double g2) {
            const double den = 1.0 - g1 - g2;
            out << ((1.0 - g2) * pp * lp - g2 * pn * ln) / den, (-g1 * pp * lp + (1.0 - g1) * pn * ln) / den;
        };
        if (const auto* s = std::get_if<MCD>(&spec)) mcd(s->gamma_p, s->gamma_n);
        else if (const auto* s = std::get_if<UU>(&spec)) mcd(s->gamma_1, s->gamma_2);
        else if (std::holds_alternative<PU>(spec)) out << pp * lp - pp * ln, ln;
        else if (std::holds_alternative<SU>(spec))
            out << Q / (2.0 * pp - 1.0) * (lp - ln), -pn / (2.0 * pp - 1.0) * lp + pp / (2.0 * pp - 1.0) * ln;
        else if (std::holds_alternative<DU>(spec))
            out << 2.0 * pp * pn * (lp - ln) / (pn - pp), -pp / (pn - pp) * lp + pn / (pn - pp) * ln;
        else if (std::holds_alternative<SD>(spec))
            out << Q * (pp * lp - pn * ln) / (pp - pn), 2.0 * pp * pn * (-pn * lp + pp * ln) / (pp - pn);
        else out << lp - pp * ln, -pn * lp + ln; // Pcomp
        return out;
    }
    if (std::holds_alternative<PPL>(spec) || std::holds_alternative<PCPL>(spec)) {
        const auto labels = compound_label_space(K);
        out = Vector::Zero(static_cast<Eigen::Index>(labels.size()));
        for (std::size_t t = 0; t < labels.size(); ++t) {
            double num = 0.0, den = 0.0;
            for (int k = 0; k < K; ++k)
                if (labels[t].contains(k)) {
                    num += m.class_probabilities(k, i) * L(k);
                    den += m.class_probabilities(k, i);
                }
            if (den > 0.0) out(static_cast<Eigen::Index>(t)) = num / den;
        }
        return out;
    }
    if (std::holds_alternative<CL>(spec)) {
        out.resize(K);
        const double tot = L.sum();
        for (int s = 0; s < K; ++s) out(s) = tot - (K - 1) * L(s);
        return out;
    }
    if (std::holds_alternative<MCL>(spec)) {
        const auto labels = compound_label_space(K);
        out.resize(static_cast<Eigen::Index>(labels.size()));
        for (std::size_t t = 0; t < labels.size(); ++t) {
            const int d = labels[t].size();
            double in = 0.0, outside = 0.0;
            for (int k = 0; k < K; ++k) (labels[t].contains(k) ? in : outside) += L(k);
            out(static_cast<Eigen::Index>(t)) = outside - static_cast<double>(K - 1 - d) / d * in;
        }
        return out;
    }
    if (family_of(spec) == Family::Conf) {
        std::uint32_t mask = (1u << K) - 1u;
        if (const auto* s = std::get_if<SubConf>(&spec)) mask = detail::mask_of(s->Y_s, K, "SubConf Y_s");
        if (const auto* s = std::get_if<SCConf>(&spec)) mask = 1u << (s->y_s - 1);
        if (std::holds_alternative<Pconf>(spec)) {
            const double r = m.class_probabilities(0, i);
            out.resize(2);
            out << L(0), (1.0 - r) / r * L(1);
            return out;
        }
        const double rs = std::holds_alternative<Soft>(spec) ? 1.0 : detail::subset_confidence(m, mask, i);
        if (rs <= 0.0) throw Error(ErrorCode::ZeroConfidence, "P(Y in Y_s | x) = 0");
        out.resize(K);
        for (int k = 0; k < K; ++k) out(k) = m.class_probabilities(k, i) / rs * L(k);
        return out;
    }
    throw Error(ErrorCode::UnsupportedScenario, scenario_name(spec) + " has no closed-form corrected loss");
}

/** @brief Sconf corrected losses at the pair (x_i, x_i2): (a l_p(x_i), b l_n(x_i)). */
inline Vector closed_form_sconf_loss(const Marginals& m, int i, int i2, const Vector& L) {
    detail::require_unbalanced(m, "Sconf");
    const double pp = m.priors(0), pn = m.priors(1);
    const double r = sconf_confidence(m, i, i2);
    Vector out(2);
    out << (r - pn) / (pp - pn) * L(0), (pp - r) / (pp - pn) * L(1);
    return out;
}

} // namespace wslrr
