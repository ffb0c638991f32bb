/**
 * @file core.hpp
 * @brief Finite joint distributions P(Y=k, x_i), their marginals, and validation.
 */
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wslrr/error.hpp"

namespace wslrr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/** @brief Absolute tolerance on the total mass of a joint distribution. */
inline constexpr double kNormalizationTol = 1e-12;

/**
 * @brief Ground-truth joint distribution over K classes and a finite instance set.
 *
 * Entry (k, i) of @c joint is P(Y=k, x_i); instances are identified by position.
 * Construct through validate_joint() so that the invariants hold.
 */
struct FiniteJoint {
    int K = 0;
    std::vector<Vector> features;
    Matrix joint;

    int n_x() const { return static_cast<int>(joint.cols()); }
    int d_feat() const { return features.empty() ? 0 : static_cast<int>(features.front().size()); }
};

/** @brief Quantities derived from a FiniteJoint (priors, P(x), P(x|k), r_k(x)). */
struct Marginals {
    Vector priors;             ///< pi_k = P(Y=k)
    Vector instance_marginal;  ///< P(x_i)
    Matrix class_conditionals; ///< K x n_x, P(x_i | Y=k)
    Matrix class_probabilities;///< K x n_x, r_k(x_i) = P(Y=k | x_i)

    int K() const { return static_cast<int>(priors.size()); }
    int n_x() const { return static_cast<int>(instance_marginal.size()); }
};

/**
 * @brief Checks shapes, signs and normalization, returning a FiniteJoint.
 * @throws Error ShapeMismatch, NegativeEntry, NonNormalized, ZeroInstanceMass
 */
inline FiniteJoint validate_joint(int K, std::vector<Vector> features, const Matrix& joint) {
    if (K < 2) throw Error(ErrorCode::ShapeMismatch, "K must be at least 2");
    if (joint.rows() != K) throw Error(ErrorCode::ShapeMismatch, "joint must have K rows");
    if (joint.cols() < 1) throw Error(ErrorCode::ShapeMismatch, "joint must have at least one column");
    if (static_cast<Eigen::Index>(features.size()) != joint.cols())
        throw Error(ErrorCode::ShapeMismatch, "one feature vector per joint column is required");
    const auto d = features.front().size();
    if (d < 1) throw Error(ErrorCode::ShapeMismatch, "feature dimension must be at least 1");
    for (const auto& f : features) {
        if (f.size() != d) throw Error(ErrorCode::ShapeMismatch, "feature vectors differ in dimension");
        if (!f.allFinite()) throw Error(ErrorCode::ShapeMismatch, "feature vectors must be finite");
    }
    double total = 0.0;
    for (Eigen::Index i = 0; i < joint.cols(); ++i) {
        double column = 0.0;
        for (Eigen::Index k = 0; k < joint.rows(); ++k) {
            const double v = joint(k, i);
            if (!std::isfinite(v)) throw Error(ErrorCode::NonNormalized, "joint entries must be finite");
            if (v < 0.0) throw Error(ErrorCode::NegativeEntry, "joint entry (" + std::to_string(k) + "," +
                                                                  std::to_string(i) + ") is negative");
            column += v;
        }
        total += column;
    }
    if (std::abs(total - 1.0) > kNormalizationTol)
        throw Error(ErrorCode::NonNormalized, "joint sums to " + std::to_string(total));
    for (Eigen::Index i = 0; i < joint.cols(); ++i)
        if (joint.col(i).sum() <= 0.0)
            throw Error(ErrorCode::ZeroInstanceMass, "instance " + std::to_string(i) + " has zero mass");
    return FiniteJoint{K, std::move(features), joint};
}

/** @brief Convenience overload taking nested vectors (row-major K x n_x). */
inline FiniteJoint validate_joint(int K, const std::vector<std::vector<double>>& features,
                                  const std::vector<std::vector<double>>& joint) {
    if (static_cast<int>(joint.size()) != K) throw Error(ErrorCode::ShapeMismatch, "joint must have K rows");
    const std::size_t n = joint.front().size();
    Matrix m(K, static_cast<Eigen::Index>(n));
    for (int k = 0; k < K; ++k) {
        if (joint[k].size() != n) throw Error(ErrorCode::ShapeMismatch, "joint rows differ in length");
        for (std::size_t i = 0; i < n; ++i) m(k, static_cast<Eigen::Index>(i)) = joint[k][i];
    }
    std::vector<Vector> f;
    f.reserve(features.size());
    for (const auto& row : features) f.push_back(Eigen::Map<const Vector>(row.data(), static_cast<Eigen::Index>(row.size())));
    return validate_joint(K, std::move(f), m);
}

/**
 * @brief Priors, instance marginal, class-conditionals and class probabilities.
 * @throws Error EmptyClass when some prior is zero
 */
inline Marginals marginals(const FiniteJoint& j) {
    const int K = j.K, n = j.n_x();
    Marginals m;
    m.priors = Vector::Zero(K);
    m.instance_marginal = Vector::Zero(n);
    for (int k = 0; k < K; ++k)
        for (int i = 0; i < n; ++i) {
            m.priors(k) += j.joint(k, i);
            m.instance_marginal(i) += j.joint(k, i);
        }
    for (int k = 0; k < K; ++k)
        if (m.priors(k) <= 0.0) throw Error(ErrorCode::EmptyClass, "class " + std::to_string(k + 1) + " has zero prior");
    m.class_conditionals.resize(K, n);
    m.class_probabilities.resize(K, n);
    for (int k = 0; k < K; ++k)
        for (int i = 0; i < n; ++i) {
            m.class_conditionals(k, i) = j.joint(k, i) / m.priors(k);
            m.class_probabilities(k, i) = j.joint(k, i) / m.instance_marginal(i);
        }
    return m;
}

/**
 * @brief The risk-defining vector P(x_i) = (P(Y=1,x_i), ..., P(Y=K,x_i)).
 * @throws Error IndexOutOfRange
 */
inline Vector risk_vector(const FiniteJoint& j, int i) {
    if (i < 0 || i >= j.n_x()) throw Error(ErrorCode::IndexOutOfRange, "instance index " + std::to_string(i));
    return j.joint.col(i);
}

} // namespace wslrr
