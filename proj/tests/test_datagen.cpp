// Keyed generator, categorical sampler and weak-dataset sampling.

#include <gtest/gtest.h>

#include <functional>

#include <cmath>
#include <map>

#include "wslrr/datagen.hpp"

using namespace wslrr;
using namespace wslrr::scenario;

namespace {

FiniteJoint joint(int K, const Matrix& P) {
    std::vector<Vector> f;
    for (Eigen::Index i = 0; i < P.cols(); ++i) f.push_back(Vector::Constant(1, static_cast<double>(i)));
    return validate_joint(K, f, P);
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an Error";
    return ErrorCode::ParseError;
}

/// Max over categories of |observed count - n p| / sqrt(n p (1 - p)).
double max_z(const std::vector<double>& w, const std::vector<std::size_t>& counts, std::size_t n) {
    double tot = 0.0;
    for (double v : w) tot += v;
    double worst = 0.0;
    for (std::size_t c = 0; c < w.size(); ++c) {
        const double p = w[c] / tot;
        if (p == 0.0) {
            if (counts[c] != 0) return INFINITY;
            continue;
        }
        const double sd = std::sqrt(static_cast<double>(n) * p * (1.0 - p));
        worst = std::max(worst, std::abs(static_cast<double>(counts[c]) - static_cast<double>(n) * p) / sd);
    }
    return worst;
}

} // namespace

TEST(KeyedRng, DeterministicAndKeySensitive) {
    EXPECT_EQ(keyed_u64(7, 1, 2), keyed_u64(7, 1, 2));
    EXPECT_NE(keyed_u64(7, 1, 2), keyed_u64(7, 1, 3));
    EXPECT_NE(keyed_u64(7, 1, 2), keyed_u64(7, 2, 2));
    EXPECT_NE(keyed_u64(7, 1, 2), keyed_u64(8, 1, 2));
    CounterRng a(3, 4), b(3, 4);
    for (int t = 0; t < 5; ++t) {
        const double u = a.uniform();
        EXPECT_EQ(u, b.uniform());
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
    // SplitMix64 reference value for input 0.
    EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafull);
}

TEST(CategoricalSampler, ThresholdsAndZeroMass) {
    const CategoricalSampler s({0.0, 1.0, 0.0, 3.0});
    EXPECT_EQ(s.draw(0), 1u);
    EXPECT_EQ(s.draw((std::uint64_t{1} << 53) / 4 - 1), 1u);
    EXPECT_EQ(s.draw((std::uint64_t{1} << 53) - 1), 3u);
    EXPECT_EQ(code_of([] { CategoricalSampler({0.0, 0.0}); }), ErrorCode::ZeroChannelMass);
    EXPECT_EQ(code_of([] { CategoricalSampler({0.5, -0.1}); }), ErrorCode::InvalidParams);
}

TEST(Sample, PUDeterministicJoint) {
    Matrix P(2, 2);
    P << 0.5, 0.0, 0.0, 0.5;
    const FiniteJoint j = joint(2, P);
    const WeakDataset ds = sample_weak_dataset(PU{}, j, {{"P", 5}, {"U", 5}}, 11);
    ASSERT_EQ(ds.channels.size(), 2u);
    EXPECT_EQ(ds.channels[0].label, "P");
    ASSERT_EQ(ds.channels[0].items.size(), 5u);
    for (const auto& it : ds.channels[0].items) EXPECT_EQ(it.x, 0);
    EXPECT_EQ(ds.channels[1].items.size(), 5u);
}

TEST(Sample, SameSeedSameDatasetDifferentSeedDiffers) {
    Matrix P(2, 3);
    P << 0.2, 0.15, 0.05, 0.1, 0.2, 0.3;
    const FiniteJoint j = joint(2, P);
    const auto a = sample_weak_dataset(SU{}, j, uniform_sizes(SU{}, 200), 5);
    const auto b = sample_weak_dataset(SU{}, j, uniform_sizes(SU{}, 200), 5);
    const auto c = sample_weak_dataset(SU{}, j, uniform_sizes(SU{}, 200), 6);
    for (std::size_t ch = 0; ch < 2; ++ch) EXPECT_EQ(a.channels[ch].items, b.channels[ch].items);
    EXPECT_NE(a.channels[0].items, c.channels[0].items);
}

TEST(Sample, CLFrequenciesMatchExactChannelMasses) {
    Matrix P(4, 3);
    P << 0.05, 0.1, 0.08, 0.1, 0.02, 0.1, 0.07, 0.12, 0.06, 0.08, 0.15, 0.07;
    const FiniteJoint j = joint(4, P);
    const std::size_t n = 200000;
    const WeakDataset ds = sample_weak_dataset(CL{}, j, uniform_sizes(CL{}, n), 21);
    const auto w = exact_channel_distribution(CL{}, j, "S");
    std::vector<std::size_t> counts(w.size(), 0);
    for (const auto& it : ds.channels[0].items) ++counts[item_category(it, ItemKind::LabeledIndex, 3)];
    EXPECT_LT(max_z(w, counts, n), 5.0);
    // Exact mass of complementary label s at x is (sum_{k != s} P(k, x)) / 3.
    EXPECT_NEAR(w[0 * 3 + 1], (0.02 + 0.12 + 0.15) / 3.0, 1e-16);
}

TEST(Sample, MCLTwoStageDrawFollowsQ) {
    Matrix P(4, 2);
    P << 0.1, 0.15, 0.2, 0.05, 0.1, 0.1, 0.2, 0.1;
    const FiniteJoint j = joint(4, P);
    const MCL spec{{0.5, 0.0, 0.5}};
    const std::size_t n = 100000;
    const WeakDataset ds = sample_weak_dataset(spec, j, uniform_sizes(spec, n), 3);
    const auto labels = compound_label_space(4);
    std::map<int, std::size_t> sizes;
    for (const auto& it : ds.channels[0].items) ++sizes[labels[static_cast<std::size_t>(it.s)].size()];
    EXPECT_EQ(sizes[2], 0u);
    const double sd = std::sqrt(n * 0.25);
    EXPECT_LT(std::abs(static_cast<double>(sizes[1]) - n * 0.5), 5 * sd);
    // Joint frequencies against exact masses.
    const auto w = exact_channel_distribution(spec, j, "S");
    std::vector<std::size_t> counts(w.size(), 0);
    for (const auto& it : ds.channels[0].items) ++counts[item_category(it, ItemKind::LabeledIndex, 2)];
    EXPECT_LT(max_z(w, counts, n), 5.0);
}

TEST(Sample, SoftCarriesOracleConfidences) {
    Matrix P(3, 2);
    P << 0.15, 0.1, 0.3, 0.2, 0.05, 0.2;
    const FiniteJoint j = joint(3, P);
    const Marginals m = marginals(j);
    const WeakDataset ds = sample_weak_dataset(Soft{}, j, {{"X", 50}}, 2);
    for (const auto& it : ds.channels[0].items) {
        ASSERT_EQ(it.conf.size(), 3u);
        for (int k = 0; k < 3; ++k) EXPECT_EQ(it.conf[static_cast<std::size_t>(k)], m.class_probabilities(k, it.x));
    }
}

TEST(Sample, SconfPairsCarryPairConfidence) {
    Matrix P(2, 3);
    P << 0.2, 0.15, 0.05, 0.1, 0.2, 0.3;
    const FiniteJoint j = joint(2, P);
    const WeakDataset ds = sample_weak_dataset(Sconf{}, j, {{"XX'", 30}}, 2);
    for (const auto& it : ds.channels[0].items) EXPECT_EQ(it.conf.at(0), sconf_confidence(j, it.x, it.x2));
}

TEST(Sample, UnknownChannelAndZeroSizes) {
    Matrix P(2, 2);
    P << 0.3, 0.1, 0.2, 0.4;
    const FiniteJoint j = joint(2, P);
    EXPECT_EQ(code_of([&] { sample_weak_dataset(PU{}, j, {{"Q", 3}}, 1); }), ErrorCode::InvalidParams);
    const WeakDataset ds = sample_weak_dataset(PU{}, j, {{"P", 3}}, 1);
    EXPECT_TRUE(ds.channels[1].items.empty());
}

TEST(Sample, PointwiseChannelsAreObservedDensities) {
    Matrix P(2, 3);
    P << 0.2, 0.15, 0.05, 0.1, 0.2, 0.3;
    const FiniteJoint j = joint(2, P);
    const Marginals m = marginals(j);
    const auto pw = exact_channel_distribution(PU{}, j, "P");
    const auto uw = exact_channel_distribution(PU{}, j, "U");
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(pw[static_cast<std::size_t>(i)], m.class_conditionals(0, i), 1e-15);
        EXPECT_NEAR(uw[static_cast<std::size_t>(i)], m.instance_marginal(i), 1e-15);
    }
}
