/**
 * @file datagen.hpp
 * @brief Sampling weak-supervision datasets from a finite joint under each
 *        scenario's data-generating process.
 *
 * Dataset channels:
 *   MCD/UU/PU        two pointwise channels ("P~","N~" / "U1","U2" / "P","U")
 *   SU, DU           a pair channel ("S" or "D") and a pointwise "U" channel
 *   SD               pair channels "S" and "D"
 *   Pcomp            pair channel "PC" of (superior, inferior) pairs
 *   Sconf            pair channel "XX'" with the pair confidence attached
 *   CCN family       one channel "S" of (compound-label index, instance) records
 *   Conf family      one channel "X" of instances with their confidence vectors
 */
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wslrr/decontam.hpp"
#include "wslrr/rng.hpp"

namespace wslrr {

/** @brief Shape of the records of a dataset channel. */
enum class ItemKind { Index, Pair, LabeledIndex, ConfidentIndex, ConfidentPair };

/** @brief One sampled record; unused fields stay at their defaults. */
struct WeakItem {
    int x = -1;                ///< instance index
    int x2 = -1;               ///< second instance of a pair
    int s = -1;                ///< compound-label index in canonical order
    std::vector<double> conf;  ///< attached confidences (r_1..r_K, or r(x,x') for Sconf)

    bool operator==(const WeakItem&) const = default;
};

struct WeakChannel {
    std::string label;
    ItemKind kind = ItemKind::Index;
    std::vector<WeakItem> items;
};

/** @brief A sampled weak dataset together with the spec and seed that produced it. */
struct WeakDataset {
    ScenarioSpec spec;
    std::uint64_t seed = 0;
    std::vector<WeakChannel> channels;
};

/** @brief Per-channel sample sizes keyed by dataset channel label. */
using SampleSizes = std::map<std::string, std::size_t>;

/** @brief Labels and item kinds of the dataset channels of a scenario. */
inline std::vector<std::pair<std::string, ItemKind>> dataset_channels(const ScenarioSpec& spec) {
    switch (spec.index()) {
    case 0: return {{"P~", ItemKind::Index}, {"N~", ItemKind::Index}};
    case 1: return {{"U1", ItemKind::Index}, {"U2", ItemKind::Index}};
    case 2: return {{"P", ItemKind::Index}, {"U", ItemKind::Index}};
    case 3: return {{"S", ItemKind::Pair}, {"U", ItemKind::Index}};
    case 4: return {{"D", ItemKind::Pair}, {"U", ItemKind::Index}};
    case 5: return {{"S", ItemKind::Pair}, {"D", ItemKind::Pair}};
    case 6: return {{"PC", ItemKind::Pair}};
    case 7: return {{"XX'", ItemKind::ConfidentPair}};
    default:
        if (family_of(spec) == Family::CCN) return {{"S", ItemKind::LabeledIndex}};
        return {{"X", ItemKind::ConfidentIndex}};
    }
}

/** @brief The same size for every channel of the scenario. */
inline SampleSizes uniform_sizes(const ScenarioSpec& spec, std::size_t n) {
    SampleSizes out;
    for (const auto& [label, kind] : dataset_channels(spec)) out[label] = n;
    return out;
}

/** @brief Subset mask of the conditioning event of a confidence-family scenario. */
inline std::uint32_t conf_mask(const ScenarioSpec& spec, int K) {
    if (const auto* s = std::get_if<scenario::SubConf>(&spec)) return detail::mask_of(s->Y_s, K, "SubConf Y_s");
    if (const auto* s = std::get_if<scenario::SCConf>(&spec)) return 1u << (s->y_s - 1);
    if (std::holds_alternative<scenario::Pconf>(spec)) return 1u;
    return (1u << K) - 1u;
}

/**
 * @brief Exact (unnormalized) distribution over the categories of a dataset channel.
 *
 * Categories are instances (pointwise), i * n_x + i2 (pairs), or s * n_x + i
 * (compound-label records).  Pointwise MCD channels carry the observed
 * densities corrP_j; compound-label records carry the joint P(S=s, x).
 * @throws Error InvalidParams for an unknown channel label
 */
inline std::vector<double> exact_channel_distribution(const ScenarioSpec& spec, const FiniteJoint& j, const std::string& label) {
    const Marginals m = marginals(j);
    validate_spec(spec, m);
    const int n = j.n_x();
    const auto chans = dataset_channels(spec);
    std::size_t c = chans.size();
    for (std::size_t t = 0; t < chans.size(); ++t)
        if (chans[t].first == label) c = t;
    if (c == chans.size()) throw Error(ErrorCode::InvalidParams, "unknown channel '" + label + "' for " + scenario_name(spec));
    const ItemKind kind = chans[c].second;
    std::vector<double> w;
    if (kind == ItemKind::Pair || kind == ItemKind::ConfidentPair) {
        PairKind pk = PairKind::Sconf;
        if (label == "S") pk = PairKind::Similar;
        if (label == "D") pk = PairKind::Dissimilar;
        if (label == "PC") pk = PairKind::Pcomp;
        const PairDistribution pd = pair_distribution(pk, m);
        for (int i = 0; i < n; ++i)
            for (int i2 = 0; i2 < n; ++i2) w.push_back(pd.P(i, i2));
        return w;
    }
    if (kind == ItemKind::LabeledIndex) {
        const ContaminationModel cm = observed_distribution(spec, j);
        const auto S = cm.corrP.front().size();
        for (Eigen::Index s = 0; s < S; ++s)
            for (int i = 0; i < n; ++i) w.push_back(cm.corrP[static_cast<std::size_t>(i)](s));
        return w;
    }
    if (kind == ItemKind::ConfidentIndex) {
        const std::uint32_t mask = conf_mask(spec, j.K);
        for (int i = 0; i < n; ++i) {
            double v = 0.0;
            for (int k = 0; k < j.K; ++k)
                if ((mask >> k) & 1u) v += j.joint(k, i);
            w.push_back(v);
        }
        return w;
    }
    // Pointwise MCD-family channel: the U channel of SU/DU is row 1 of M, others follow channel order.
    const ContaminationModel cm = observed_distribution(spec, j);
    const Eigen::Index row = (label == "U" || label == "N~" || label == "U2") ? 1 : 0;
    for (int i = 0; i < n; ++i) w.push_back(cm.corrP[static_cast<std::size_t>(i)](row));
    return w;
}

/** @brief Category index of an item, matching exact_channel_distribution(). */
inline std::size_t item_category(const WeakItem& it, ItemKind kind, int n_x) {
    switch (kind) {
    case ItemKind::Pair:
    case ItemKind::ConfidentPair: return static_cast<std::size_t>(it.x) * n_x + static_cast<std::size_t>(it.x2);
    case ItemKind::LabeledIndex: return static_cast<std::size_t>(it.s) * n_x + static_cast<std::size_t>(it.x);
    default: return static_cast<std::size_t>(it.x);
    }
}

/**
 * @brief Draws a weak dataset; deterministic in (spec, joint, sizes, seed).
 *
 * Draw t of channel c uses key (seed, c, t).  MCL records first draw the size
 * d of the complementary set from q and then (s, x) from the size-d
 * conditional, using keys (seed, c, 2t) and (seed, c, 2t+1).
 * @throws Error ZeroChannelMass, InvalidParams for unknown channel names
 */
inline WeakDataset sample_weak_dataset(const ScenarioSpec& spec, const FiniteJoint& j, const SampleSizes& sizes,
                                       std::uint64_t seed) {
    const Marginals m = marginals(j);
    validate_spec(spec, m);
    const auto chans = dataset_channels(spec);
    for (const auto& [label, n] : sizes) {
        bool known = false;
        for (const auto& ch : chans) known = known || ch.first == label;
        if (!known) throw Error(ErrorCode::InvalidParams, "unknown channel '" + label + "' for " + scenario_name(spec));
    }
    const int n_x = j.n_x();
    WeakDataset ds{spec, seed, {}};
    for (std::size_t c = 0; c < chans.size(); ++c) {
        const auto& [label, kind] = chans[c];
        WeakChannel ch{label, kind, {}};
        const auto it = sizes.find(label);
        const std::size_t count = it == sizes.end() ? 0 : it->second;
        if (count == 0) {
            ds.channels.push_back(std::move(ch));
            continue;
        }
        const std::vector<double> w = exact_channel_distribution(spec, j, label);
        ch.items.reserve(count);
        const auto* mcl = std::get_if<scenario::MCL>(&spec);
        if (mcl != nullptr) {
            // Two-stage draw: |S| ~ q, then (s, x) within that size.
            const auto labels = compound_label_space(j.K);
            const CategoricalSampler size_sampler(mcl->q);
            std::vector<CategoricalSampler> within;
            std::vector<std::vector<std::size_t>> cat_of;
            for (int d = 1; d < j.K; ++d) {
                std::vector<double> wd;
                std::vector<std::size_t> cats;
                for (std::size_t s = 0; s < labels.size(); ++s)
                    if (labels[s].size() == d)
                        for (int i = 0; i < n_x; ++i) {
                            wd.push_back(w[s * static_cast<std::size_t>(n_x) + static_cast<std::size_t>(i)]);
                            cats.push_back(s * static_cast<std::size_t>(n_x) + static_cast<std::size_t>(i));
                        }
                if (mcl->q[static_cast<std::size_t>(d - 1)] > 0.0) within.emplace_back(wd);
                else within.emplace_back(std::vector<double>(wd.size(), 1.0)); // never selected
                cat_of.push_back(std::move(cats));
            }
            for (std::size_t t = 0; t < count; ++t) {
                const std::size_t d = size_sampler.draw(keyed_u64(seed, c, 2 * t) >> 11);
                const std::size_t cat = cat_of[d][within[d].draw(keyed_u64(seed, c, 2 * t + 1) >> 11)];
                WeakItem item;
                item.s = static_cast<int>(cat / static_cast<std::size_t>(n_x));
                item.x = static_cast<int>(cat % static_cast<std::size_t>(n_x));
                ch.items.push_back(std::move(item));
            }
            ds.channels.push_back(std::move(ch));
            continue;
        }
        const CategoricalSampler sampler(w);
        for (std::size_t t = 0; t < count; ++t) {
            const std::size_t cat = sampler.draw(keyed_u64(seed, c, t) >> 11);
            WeakItem item;
            switch (kind) {
            case ItemKind::Pair:
            case ItemKind::ConfidentPair:
                item.x = static_cast<int>(cat / static_cast<std::size_t>(n_x));
                item.x2 = static_cast<int>(cat % static_cast<std::size_t>(n_x));
                if (kind == ItemKind::ConfidentPair) item.conf = {sconf_confidence(m, item.x, item.x2)};
                break;
            case ItemKind::LabeledIndex:
                item.s = static_cast<int>(cat / static_cast<std::size_t>(n_x));
                item.x = static_cast<int>(cat % static_cast<std::size_t>(n_x));
                break;
            case ItemKind::ConfidentIndex: {
                item.x = static_cast<int>(cat);
                const Vector r = m.class_probabilities.col(item.x);
                item.conf.assign(r.data(), r.data() + r.size());
                break;
            }
            case ItemKind::Index: item.x = static_cast<int>(cat); break;
            }
            ch.items.push_back(std::move(item));
        }
        ds.channels.push_back(std::move(ch));
    }
    return ds;
}

} // namespace wslrr
