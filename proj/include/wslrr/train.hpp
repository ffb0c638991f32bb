/**
 * @file train.hpp
 * @brief Empirical risk minimization of corrected risks with a linear model:
 *        initialization, analytic gradients, finite-difference checking and
 *        full-batch gradient descent.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "wslrr/empirical.hpp"

namespace wslrr {

/** @brief Gradient descent settings. */
struct TrainConfig {
    double learning_rate = 0.1;
    int epochs = 100;
    std::uint64_t seed = 0;
    double l2 = 0.0;
};

/** @brief Gradient with respect to W and b. */
struct ModelGradient {
    Matrix W;
    Vector b;
};

/** @brief Weights and bias drawn from uniform(-0.1, 0.1) with the keyed generator. */
inline LinearModel init_model(int K, int d_feat, std::uint64_t seed) {
    if (K < 2 || d_feat < 1) throw Error(ErrorCode::BadSize, "model needs K >= 2 and d_feat >= 1");
    CounterRng rng(seed, 0);
    LinearModel m{Matrix(K, d_feat), Vector(K)};
    for (int k = 0; k < K; ++k)
        for (int f = 0; f < d_feat; ++f) m.W(k, f) = rng.uniform(-0.1, 0.1);
    for (int k = 0; k < K; ++k) m.b(k) = rng.uniform(-0.1, 0.1);
    return m;
}

/** @brief sum_i A_i . L(g(x_i)) + l2 ||W||_F^2 for per-instance loss weights A. */
inline double weighted_objective(const Matrix& A, const FiniteJoint& j, const LinearModel& model, LossKind loss, double l2) {
    double r = 0.0;
    for (int i = 0; i < j.n_x(); ++i) {
        if (A.col(i).isZero(0.0)) continue;
        r += A.col(i).dot(loss_vector(loss, model.scores(j.features[static_cast<std::size_t>(i)])));
    }
    return r + l2 * model.W.squaredNorm();
}

/**
 * @brief Analytic gradient of weighted_objective().
 * @throws Error NonDifferentiableLoss for zero-one
 */
inline ModelGradient weighted_gradient(const Matrix& A, const FiniteJoint& j, const LinearModel& model, LossKind loss, double l2) {
    if (!is_differentiable(loss)) throw Error(ErrorCode::NonDifferentiableLoss, "zero-one loss has no gradient");
    ModelGradient g{2.0 * l2 * model.W, Vector::Zero(model.K())};
    for (int i = 0; i < j.n_x(); ++i) {
        if (A.col(i).isZero(0.0)) continue;
        const Vector& x = j.features[static_cast<std::size_t>(i)];
        const Vector dscore = loss_jacobian(loss, model.scores(x)).transpose() * A.col(i);
        g.W += dscore * x.transpose();
        g.b += dscore;
    }
    return g;
}

/**
 * @brief Gradient of the empirical corrected risk plus l2 ||W||^2.
 * @throws Error NonDifferentiableLoss and dataset errors
 */
inline ModelGradient empirical_gradient(const WeakDataset& ds, const FiniteJoint& j, const LinearModel& model, LossKind loss,
                                        double l2) {
    if (!is_differentiable(loss)) throw Error(ErrorCode::NonDifferentiableLoss, "zero-one loss has no gradient");
    return weighted_gradient(aggregate_weights(compile_design(ds, j), j.n_x()), j, model, loss, l2);
}

/**
 * @brief Largest relative deviation between the analytic gradient and central differences.
 *
 * Each parameter contributes |analytic - numeric| / max(|analytic|, |numeric|);
 * parameters where both are below @p floor contribute their absolute deviation.
 */
inline double gradient_check(const Matrix& A, const FiniteJoint& j, const LinearModel& model, LossKind loss, double l2,
                             double eps = 1e-6, double floor = 1e-8) {
    const ModelGradient g = weighted_gradient(A, j, model, loss, l2);
    double worst = 0.0;
    auto compare = [&](double analytic, double numeric) {
        const double scale = std::max(std::abs(analytic), std::abs(numeric));
        const double dev = std::abs(analytic - numeric);
        worst = std::max(worst, scale < floor ? dev : dev / scale);
    };
    LinearModel probe = model;
    for (int k = 0; k < model.K(); ++k) {
        for (int f = 0; f < model.d(); ++f) {
            const double keep = probe.W(k, f);
            probe.W(k, f) = keep + eps;
            const double up = weighted_objective(A, j, probe, loss, l2);
            probe.W(k, f) = keep - eps;
            const double down = weighted_objective(A, j, probe, loss, l2);
            probe.W(k, f) = keep;
            compare(g.W(k, f), (up - down) / (2.0 * eps));
        }
        const double keep = probe.b(k);
        probe.b(k) = keep + eps;
        const double up = weighted_objective(A, j, probe, loss, l2);
        probe.b(k) = keep - eps;
        const double down = weighted_objective(A, j, probe, loss, l2);
        probe.b(k) = keep;
        compare(g.b(k), (up - down) / (2.0 * eps));
    }
    return worst;
}

/** @brief Final model and the objective after each epoch (entry 0 is the initial model). */
struct TrainResult {
    LinearModel model;
    std::vector<double> trace;
};

/**
 * @brief Full-batch gradient descent on a precompiled per-instance weighting.
 * @throws Error Diverged when the objective or the parameters become non-finite
 */
inline TrainResult train_weighted(const Matrix& A, const FiniteJoint& j, LossKind loss, const TrainConfig& cfg) {
    if (!(cfg.learning_rate >= 0.0) || cfg.epochs < 1 || !(cfg.l2 >= 0.0))
        throw Error(ErrorCode::InvalidParams, "need learning rate >= 0, epochs >= 1, l2 >= 0");
    if (!is_differentiable(loss)) throw Error(ErrorCode::NonDifferentiableLoss, "zero-one loss has no gradient");
    TrainResult out{init_model(j.K, j.d_feat(), cfg.seed), {}};
    auto objective = [&](const LinearModel& m) {
        if (!m.W.allFinite() || !m.b.allFinite()) return std::numeric_limits<double>::infinity();
        try {
            return weighted_objective(A, j, m, loss, cfg.l2);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::NonFiniteScore) return std::numeric_limits<double>::infinity();
            throw;
        }
    };
    out.trace.push_back(objective(out.model));
    for (int e = 1; e <= cfg.epochs; ++e) {
        if (!std::isfinite(out.trace.back()))
            throw Error(ErrorCode::Diverged, "objective became non-finite at epoch " + std::to_string(e - 1));
        const ModelGradient g = weighted_gradient(A, j, out.model, loss, cfg.l2);
        out.model.W -= cfg.learning_rate * g.W;
        out.model.b -= cfg.learning_rate * g.b;
        out.trace.push_back(objective(out.model));
    }
    if (!std::isfinite(out.trace.back()))
        throw Error(ErrorCode::Diverged, "objective became non-finite at epoch " + std::to_string(cfg.epochs));
    return out;
}

/**
 * @brief ERM on the empirical corrected risk of a weak dataset.
 * @throws Error Diverged, NonDifferentiableLoss and dataset errors
 */
inline TrainResult train_erm(const WeakDataset& ds, const FiniteJoint& j, LossKind loss, const TrainConfig& cfg) {
    return train_weighted(aggregate_weights(compile_design(ds, j), j.n_x()), j, loss, cfg);
}

} // namespace wslrr
