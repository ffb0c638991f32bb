// Empirical corrected risks of sampled weak datasets.

#include <gtest/gtest.h>

#include <functional>

#include "wslrr/empirical.hpp"

using namespace wslrr;
using namespace wslrr::scenario;

namespace {

FiniteJoint joint(int K, const Matrix& P) {
    std::vector<Vector> f;
    for (Eigen::Index i = 0; i < P.cols(); ++i) {
        Vector x(2);
        x << std::cos(1.3 * static_cast<double>(i)), std::sin(0.7 * static_cast<double>(i) + 0.2);
        f.push_back(x);
    }
    return validate_joint(K, f, P);
}

LinearModel model(int K) {
    LinearModel m{Matrix(K, 2), Vector(K)};
    for (int k = 0; k < K; ++k) {
        m.W(k, 0) = 0.5 * k - 0.4;
        m.W(k, 1) = 0.3 - 0.2 * k;
        m.b(k) = 0.1 * k;
    }
    return m;
}

FiniteJoint binary() {
    Matrix P(2, 3);
    P << 0.2, 0.15, 0.05, 0.1, 0.2, 0.3;
    return joint(2, P);
}

FiniteJoint multiclass() {
    Matrix P(4, 3);
    P << 0.05, 0.1, 0.08, 0.1, 0.02, 0.1, 0.07, 0.12, 0.06, 0.08, 0.15, 0.07;
    return joint(4, P);
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

} // namespace

TEST(EmpiricalRisk, PUApproachesExactRisk) {
    const FiniteJoint j = binary();
    const WeakDataset ds = sample_weak_dataset(PU{}, j, uniform_sizes(PU{}, 100000), 4);
    const EmpiricalEstimate e = empirical_risk(ds, j, model(2), LossKind::Logistic);
    const double exact = classification_risk(j, model(2), LossKind::Logistic);
    EXPECT_GT(e.standard_error, 0.0);
    EXPECT_LT(std::abs(e.risk - exact), 5.0 * e.standard_error);
    EXPECT_LT(e.standard_error, 0.01);
}

TEST(EmpiricalRisk, EveryScenarioWithinFiveStandardErrors) {
    const std::vector<ScenarioSpec> bin = {UU{0.2, 0.7}, PU{}, SU{}, DU{}, SD{}, Pcomp{}, Sconf{}, Pconf{}, MCD{0.1, 0.2}};
    const std::vector<ScenarioSpec> mul = {CL{}, PCPL{}, MCL{{0.3, 0.4, 0.3}}, SubConf{{1, 2}}, SCConf{4}, Soft{}};
    std::uint64_t seed = 100;
    for (const auto* group : {&bin, &mul}) {
        const FiniteJoint j = group == &bin ? binary() : multiclass();
        const double exact = classification_risk(j, model(j.K), LossKind::Logistic);
        for (const auto& s : *group) {
            const WeakDataset ds = sample_weak_dataset(s, j, uniform_sizes(s, 50000), ++seed);
            const EmpiricalEstimate e = empirical_risk(ds, j, model(j.K), LossKind::Logistic);
            EXPECT_LT(std::abs(e.risk - exact), 5.0 * e.standard_error) << scenario_name(s);
        }
    }
}

TEST(EmpiricalRisk, CLInversionEstimatorIsClosedFormMean) {
    const FiniteJoint j = multiclass();
    const WeakDataset ds = sample_weak_dataset(CL{}, j, uniform_sizes(CL{}, 500), 9);
    const Matrix T = loss_table(j, model(4), LossKind::Logistic);
    double mean = 0.0;
    for (const auto& it : ds.channels[0].items) mean += T.col(it.x).sum() - 3.0 * T(it.s, it.x);
    mean /= 500.0;
    EXPECT_NEAR(empirical_risk(ds, j, model(4), LossKind::Logistic, MethodSelector::Inversion).risk, mean, 1e-12);
}

TEST(EmpiricalRisk, AggregateWeightsReproduceRisk) {
    const FiniteJoint j = binary();
    const WeakDataset ds = sample_weak_dataset(SD{}, j, uniform_sizes(SD{}, 300), 12);
    const EmpiricalDesign d = compile_design(ds, j);
    const Matrix A = aggregate_weights(d, j.n_x());
    const Matrix T = loss_table(j, model(2), LossKind::Squared);
    double viaA = 0.0;
    for (int i = 0; i < j.n_x(); ++i) viaA += A.col(i).dot(T.col(i));
    EXPECT_NEAR(viaA, empirical_estimate(d, j, model(2), LossKind::Squared).risk, 1e-12);
}

TEST(EmpiricalRisk, ConstantSamplesHaveZeroStandardError) {
    Matrix P(2, 2);
    P << 0.5, 0.0, 0.0, 0.5;
    const FiniteJoint j = joint(2, P);
    const WeakDataset ds = sample_weak_dataset(UU{0.0, 0.0}, j, uniform_sizes(UU{0.0, 0.0}, 20), 1);
    const EmpiricalEstimate e = empirical_risk(ds, j, model(2), LossKind::Logistic);
    EXPECT_EQ(e.standard_error, 0.0);
    EXPECT_NEAR(e.risk, classification_risk(j, model(2), LossKind::Logistic), 1e-15);
}

TEST(EmpiricalRisk, EmptyChannelAndSpecMismatch) {
    const FiniteJoint j = binary();
    const WeakDataset ds = sample_weak_dataset(PU{}, j, {{"P", 10}}, 1);
    EXPECT_EQ(code_of([&] { empirical_risk(ds, j, model(2), LossKind::Logistic); }), ErrorCode::EmptyChannel);
    WeakDataset other = sample_weak_dataset(PU{}, j, uniform_sizes(PU{}, 10), 1);
    other.spec = SU{};
    EXPECT_EQ(code_of([&] { empirical_risk(other, j, model(2), LossKind::Logistic); }), ErrorCode::SpecMismatch);
    WeakDataset bad = sample_weak_dataset(PU{}, j, uniform_sizes(PU{}, 10), 1);
    bad.channels[0].items[0].x = 7;
    EXPECT_EQ(code_of([&] { empirical_risk(bad, j, model(2), LossKind::Logistic); }), ErrorCode::IndexOutOfRange);
}
