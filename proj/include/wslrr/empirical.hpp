/**
 * @file empirical.hpp
 * @brief Empirical corrected risks of weak datasets.
 *
 * Every scenario's estimator is a sum over channels of (scale x sample mean of
 * per-sample values), and each per-sample value is linear in the loss vectors
 * of at most two instances.  A dataset is therefore compiled once into an
 * EmpiricalDesign holding those loss weights; risks, standard errors and
 * gradients are then cheap to evaluate for any model.
 */
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "wslrr/datagen.hpp"
#include "wslrr/risk.hpp"

namespace wslrr {

/** @brief Loss weights of one channel: value_t = wa_t . L(xa_t) + wb_t . L(xb_t). */
struct ChannelDesign {
    std::string label;
    double scale = 1.0;
    std::vector<int> xa, xb;  ///< xb_t = -1 when the sample has a single instance
    Matrix wa, wb;            ///< K x n_samples
};

struct EmpiricalDesign {
    int K = 0;
    std::vector<ChannelDesign> channels;
};

/** @brief Empirical risk with its standard error (channels treated as independent samples). */
struct EmpiricalEstimate {
    double risk = 0.0;
    double standard_error = 0.0;
};

/**
 * @brief Compiles a dataset into loss weights using the parameters of @p j
 *        (priors, and class probabilities for the CCN-family marginal chain).
 *
 * @p sel picks the decontamination of pointwise MCD- and CCN-family channels;
 * Inversion turns CL and MCL samples into the sum_k l_k - (K-1) l_s style losses.
 * @throws Error SpecMismatch, EmptyChannel, IndexOutOfRange
 */
inline EmpiricalDesign compile_design(const WeakDataset& ds, const FiniteJoint& j, MethodSelector sel = MethodSelector::Auto) {
    const ScenarioSpec& spec = ds.spec;
    const Marginals m = marginals(j);
    validate_spec(spec, m);
    const auto expected = dataset_channels(spec);
    if (expected.size() != ds.channels.size())
        throw Error(ErrorCode::SpecMismatch, "dataset channels do not match " + scenario_name(spec));
    for (std::size_t c = 0; c < expected.size(); ++c)
        if (expected[c].first != ds.channels[c].label || expected[c].second != ds.channels[c].kind)
            throw Error(ErrorCode::SpecMismatch, "dataset channel '" + ds.channels[c].label + "' does not match " + scenario_name(spec));
    const int K = j.K, n = j.n_x();
    auto check_index = [&](int i) {
        if (i < 0 || i >= n) throw Error(ErrorCode::IndexOutOfRange, "dataset refers to instance " + std::to_string(i));
    };

    const Family f = family_of(spec);
    DecontaminationResult dr;
    if (f == Family::MCD || f == Family::CCN) dr = decontaminate(spec, j, sel);
    std::uint32_t mask = 0;
    double conf_scale = 1.0;
    if (f == Family::Conf) {
        mask = conf_mask(spec, K);
        if (!std::holds_alternative<scenario::Soft>(spec)) {
            conf_scale = 0.0;
            for (int k = 0; k < K; ++k)
                if ((mask >> k) & 1u) conf_scale += m.priors(k);
        }
    }

    EmpiricalDesign design{K, {}};
    for (std::size_t c = 0; c < ds.channels.size(); ++c) {
        const WeakChannel& ch = ds.channels[c];
        const auto ns = static_cast<Eigen::Index>(ch.items.size());
        if (ns == 0) throw Error(ErrorCode::EmptyChannel, "channel '" + ch.label + "' has no samples");
        ChannelDesign cd{ch.label, 1.0, {}, {}, Matrix::Zero(K, ns), Matrix::Zero(K, ns)};
        cd.xa.resize(static_cast<std::size_t>(ns));
        cd.xb.assign(static_cast<std::size_t>(ns), -1);
        for (Eigen::Index t = 0; t < ns; ++t) {
            const WeakItem& it = ch.items[static_cast<std::size_t>(t)];
            check_index(it.x);
            cd.xa[static_cast<std::size_t>(t)] = it.x;
            switch (ch.kind) {
            case ItemKind::Index:
                // MCD-family pointwise channel: the corrected loss of channel c.
                cd.wa.col(t) = dr.Mdagger[static_cast<std::size_t>(it.x)].col(static_cast<Eigen::Index>(c));
                break;
            case ItemKind::Pair: {
                check_index(it.x2);
                cd.xb[static_cast<std::size_t>(t)] = it.x2;
                const Matrix& D = dr.Mdagger[static_cast<std::size_t>(it.x)];
                if (ch.label == "PC") {
                    cd.wa.col(t) = D.col(0);
                    cd.wb.col(t) = dr.Mdagger[static_cast<std::size_t>(it.x2)].col(1);
                } else {
                    // Symmetric pair loss of the tilde channel at index c of M's rows.
                    cd.wa.col(t) = D.col(static_cast<Eigen::Index>(c)) / 2.0;
                    cd.wb.col(t) = dr.Mdagger[static_cast<std::size_t>(it.x2)].col(static_cast<Eigen::Index>(c)) / 2.0;
                }
                break;
            }
            case ItemKind::ConfidentPair: {
                check_index(it.x2);
                cd.xb[static_cast<std::size_t>(t)] = it.x2;
                if (it.conf.size() != 1) throw Error(ErrorCode::SpecMismatch, "Sconf pairs carry exactly one confidence");
                const auto [a, b] = sconf_weights(m.priors(0), it.conf[0]);
                cd.wa(0, t) = cd.wb(0, t) = a / 2.0;
                cd.wa(1, t) = cd.wb(1, t) = b / 2.0;
                break;
            }
            case ItemKind::LabeledIndex: {
                const Matrix& D = dr.Mdagger[static_cast<std::size_t>(it.x)];
                if (it.s < 0 || it.s >= D.cols()) throw Error(ErrorCode::IndexOutOfRange, "compound-label index out of range");
                cd.wa.col(t) = D.col(it.s);
                break;
            }
            case ItemKind::ConfidentIndex: {
                if (static_cast<int>(it.conf.size()) != K) throw Error(ErrorCode::SpecMismatch, "confidence vectors must have K entries");
                double rs = 0.0;
                for (int k = 0; k < K; ++k)
                    if ((mask >> k) & 1u) rs += it.conf[static_cast<std::size_t>(k)];
                if (std::holds_alternative<scenario::Soft>(spec)) rs = 1.0;
                if (rs <= 0.0) throw Error(ErrorCode::ZeroConfidence, "sample with zero subset confidence");
                for (int k = 0; k < K; ++k) cd.wa(k, t) = it.conf[static_cast<std::size_t>(k)] / rs;
                cd.scale = conf_scale;
                break;
            }
            }
        }
        design.channels.push_back(std::move(cd));
    }
    return design;
}

/**
 * @brief Estimate sum_c scale_c * mean_t value_t with its standard error.
 * @throws Error NonFiniteScore
 */
inline EmpiricalEstimate empirical_estimate(const EmpiricalDesign& d, const FiniteJoint& j, const LinearModel& model,
                                            LossKind loss) {
    const Matrix T = loss_table(j, model, loss);
    EmpiricalEstimate e;
    double var_total = 0.0;
    for (const auto& ch : d.channels) {
        const auto ns = static_cast<Eigen::Index>(ch.xa.size());
        std::vector<double> v(static_cast<std::size_t>(ns));
        double mean = 0.0;
        for (Eigen::Index t = 0; t < ns; ++t) {
            double val = ch.wa.col(t).dot(T.col(ch.xa[static_cast<std::size_t>(t)]));
            if (ch.xb[static_cast<std::size_t>(t)] >= 0) val += ch.wb.col(t).dot(T.col(ch.xb[static_cast<std::size_t>(t)]));
            v[static_cast<std::size_t>(t)] = val;
            mean += val;
        }
        mean /= static_cast<double>(ns);
        // Deviations are taken about the first sample, so a constant channel has exactly zero variance.
        double shift = 0.0;
        for (double val : v) shift += val - v.front();
        shift /= static_cast<double>(ns);
        double ss = 0.0;
        for (double val : v) ss += (val - v.front() - shift) * (val - v.front() - shift);
        const double var = ns > 1 ? ss / static_cast<double>(ns - 1) : 0.0;
        e.risk += ch.scale * mean;
        var_total += ch.scale * ch.scale * var / static_cast<double>(ns);
    }
    e.standard_error = std::sqrt(var_total);
    return e;
}

/**
 * @brief Empirical corrected risk of a dataset for a model.
 * @throws Error EmptyChannel, SpecMismatch and propagated errors
 */
inline EmpiricalEstimate empirical_risk(const WeakDataset& ds, const FiniteJoint& j, const LinearModel& model, LossKind loss,
                                        MethodSelector sel = MethodSelector::Auto) {
    return empirical_estimate(compile_design(ds, j, sel), j, model, loss);
}

/**
 * @brief Per-instance loss weights A (K x n_x) with empirical risk = sum_i A_i . L(x_i).
 *
 * This is the design collapsed onto instances; it is what training evaluates.
 */
inline Matrix aggregate_weights(const EmpiricalDesign& d, int n_x) {
    Matrix A = Matrix::Zero(d.K, n_x);
    for (const auto& ch : d.channels) {
        const double f = ch.scale / static_cast<double>(ch.xa.size());
        for (std::size_t t = 0; t < ch.xa.size(); ++t) {
            A.col(ch.xa[t]) += f * ch.wa.col(static_cast<Eigen::Index>(t));
            if (ch.xb[t] >= 0) A.col(ch.xb[t]) += f * ch.wb.col(static_cast<Eigen::Index>(t));
        }
    }
    return A;
}

} // namespace wslrr
