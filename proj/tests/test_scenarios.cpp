// Contamination matrices, transforms, observed distributions, compound labels,
// pair distributions and reduction-graph edges.

#include <gtest/gtest.h>

#include <functional>

#include "wslrr/scenarios.hpp"

using namespace wslrr;
using namespace wslrr::scenario;

namespace {

FiniteJoint joint(int K, const Matrix& P) {
    std::vector<Vector> f;
    for (Eigen::Index i = 0; i < P.cols(); ++i) f.push_back(Vector::Constant(1, static_cast<double>(i)));
    return validate_joint(K, f, P);
}

FiniteJoint example_joint() {
    Matrix P(2, 2);
    P << 0.3, 0.1, 0.2, 0.4;
    return joint(2, P);
}

/// Prior pi_p = 0.4 with distinct conditionals over three instances.
FiniteJoint prior04_joint() {
    Matrix P(2, 3);
    P << 0.2, 0.15, 0.05, 0.1, 0.2, 0.3;
    return joint(2, P);
}

FiniteJoint multiclass_joint() {
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

double max_abs(const Matrix& A) { return A.cwiseAbs().maxCoeff(); }

} // namespace

TEST(CompoundLabels, CanonicalOrder) {
    const auto k2 = compound_label_space(2);
    ASSERT_EQ(k2.size(), 2u);
    EXPECT_EQ(k2[0].str(), "{1}");
    EXPECT_EQ(k2[1].str(), "{2}");
    std::vector<std::string> k3;
    for (const auto& s : compound_label_space(3)) k3.push_back(s.str());
    EXPECT_EQ(k3, (std::vector<std::string>{"{1}", "{2}", "{3}", "{1,2}", "{1,3}", "{2,3}"}));
    EXPECT_EQ(compound_label_space(8).size(), 254u);
    EXPECT_EQ(code_of([] { compound_label_space(9); }), ErrorCode::KTooLarge);
    EXPECT_EQ(compound_labels_of_size(5, 2).size(), 10u);
}

TEST(Transform, ReciprocalPriorsAndIdentity) {
    const Marginals m = marginals(example_joint());
    const Matrix T = transform_matrix(PU{}, m, 0);
    EXPECT_NEAR(T(0, 0), 2.5, 1e-15);
    EXPECT_NEAR(T(1, 1), 5.0 / 3.0, 1e-15);
    EXPECT_EQ(T(0, 1), 0.0);
    const Marginals m4 = marginals(multiclass_joint());
    EXPECT_TRUE(transform_matrix(PCPL{}, m4, 1).isIdentity(0.0));
    Matrix U(2, 2);
    U << 0.25, 0.25, 0.25, 0.25;
    const Matrix T2 = transform_matrix(MCD{0.1, 0.2}, marginals(joint(2, U)), 0);
    EXPECT_EQ(T2(0, 0), 2.0);
    EXPECT_EQ(T2(1, 1), 2.0);
}

TEST(BaseDistributions, ClassConditionalsOrRiskVector) {
    const Marginals m = marginals(example_joint());
    const Vector B = base_distributions(PU{}, m, 0);
    EXPECT_NEAR(B(0), 0.75, 1e-15); // 0.3 / 0.4
    EXPECT_NEAR(B(1), 1.0 / 3.0, 1e-15);
    Matrix U(2, 2);
    U << 0.25, 0.25, 0.25, 0.25;
    const Vector S = base_distributions(Soft{}, marginals(joint(2, U)), 1);
    EXPECT_EQ(S(0), 0.25);
    EXPECT_EQ(S(1), 0.25);
    const Marginals m4 = marginals(multiclass_joint());
    EXPECT_LT(max_abs(base_distributions(CL{}, m4, 2) - multiclass_joint().joint.col(2)), 1e-15);
}

TEST(ContaminationMatrix, MCDFamilyMatrices) {
    const Marginals m = marginals(prior04_joint());
    const double pp = 0.4, pn = 0.6, Q = pp * pp + pn * pn;
    Matrix expected(2, 2);
    expected << 1, 0, pp, pn;
    EXPECT_LT(max_abs(contamination_matrix(PU{}, m, 0) - expected), 1e-15);
    EXPECT_TRUE(contamination_matrix(UU{0.0, 0.0}, m, 0).isIdentity(0.0));
    expected << pp * pp / Q, pn * pn / Q, pp, pn;
    EXPECT_LT(max_abs(contamination_matrix(SU{}, m, 1) - expected), 1e-15);
    expected << 0.5, 0.5, pp, pn;
    EXPECT_LT(max_abs(contamination_matrix(DU{}, m, 1) - expected), 1e-15);
    expected << pp * pp / Q, pn * pn / Q, 0.5, 0.5;
    EXPECT_LT(max_abs(contamination_matrix(SD{}, m, 1) - expected), 1e-15);
    expected << pp / (pp + pn * pn), pn * pn / (pp + pn * pn), pp * pp / (pp * pp + pn), pn / (pp * pp + pn);
    EXPECT_LT(max_abs(contamination_matrix(Pcomp{}, m, 2) - expected), 1e-15);
    expected << 0.8, 0.2, 0.3, 0.7;
    EXPECT_LT(max_abs(contamination_matrix(MCD{0.2, 0.3}, m, 0) - expected), 1e-15);
}

TEST(ContaminationMatrix, ComplementaryLabelsK4) {
    const Marginals m = marginals(multiclass_joint());
    const Matrix M = contamination_matrix(CL{}, m, 0);
    ASSERT_EQ(M.rows(), 4);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) EXPECT_EQ(M(r, c), r == c ? 0.0 : 1.0 / 3.0);
}

TEST(ContaminationMatrix, CCNFamilyColumnsAreConditionals) {
    const Marginals m = marginals(multiclass_joint());
    const std::vector<ScenarioSpec> specs = {CL{}, PCPL{}, MCL{{0.2, 0.5, 0.3}}};
    for (const auto& s : specs)
        for (int i = 0; i < 3; ++i) {
            const Matrix M = contamination_matrix(s, m, i);
            EXPECT_EQ(M.rows(), std::holds_alternative<CL>(s) ? 4 : 14); // K labels, or 2^K - 2 label sets
            for (int k = 0; k < 4; ++k) EXPECT_NEAR(M.col(k).sum(), 1.0, 1e-12) << scenario_name(s);
        }
    // PCPL entries: 1/(2^{K-1}-1) = 1/7 whenever k is in s.
    const Matrix P = contamination_matrix(PCPL{}, m, 0);
    EXPECT_NEAR(P(4, 0), 1.0 / 7.0, 1e-16); // {1,2} contains class 1
    EXPECT_EQ(P(1, 0), 0.0);                // {2} does not
}

TEST(ContaminationMatrix, ConfidenceFamilyIsDiagonalRatio) {
    Matrix P(3, 2);
    P << 0.15, 0.1, 0.3, 0.2, 0.05, 0.2; // column 0: r = (0.3, 0.6, 0.1)
    const Marginals m = marginals(joint(3, P));
    const Matrix M = contamination_matrix(SCConf{2}, m, 0);
    EXPECT_NEAR(M(0, 0), 2.0, 1e-14);
    EXPECT_NEAR(M(1, 1), 1.0, 1e-14);
    EXPECT_NEAR(M(2, 2), 6.0, 1e-13);
    EXPECT_EQ(M(0, 1), 0.0);
}

TEST(ContaminationMatrix, ErrorsAndValidation) {
    const Marginals m = marginals(prior04_joint());
    EXPECT_EQ(code_of([&] { contamination_matrix(UU{0.4, 0.6}, m, 0); }), ErrorCode::DegenerateParams);
    EXPECT_EQ(code_of([&] { contamination_matrix(UU{1.2, 0.0}, m, 0); }), ErrorCode::InvalidParams);
    EXPECT_EQ(code_of([&] { contamination_matrix(Sconf{}, m, 0); }), ErrorCode::WrongFamily);
    const Marginals m4 = marginals(multiclass_joint());
    EXPECT_EQ(code_of([&] { contamination_matrix(PU{}, m4, 0); }), ErrorCode::NotBinary);
    EXPECT_EQ(code_of([&] { contamination_matrix(MCL{{0.5, 0.6, -0.1}}, m4, 0); }), ErrorCode::InvalidParams);
    EXPECT_EQ(code_of([&] { contamination_matrix(SubConf{{5}}, m4, 0); }), ErrorCode::InvalidParams);
    // Improper PPL: a column of C that makes P(S|Y) fail to sum to one.
    EXPECT_EQ(code_of([&] { contamination_matrix(PPL{Matrix::Constant(14, 3, 0.5)}, m4, 0); }), ErrorCode::InvalidParams);
    Matrix Z(2, 2);
    Z << 0.5, 0.0, 0.0, 0.5; // instance 1 has r_p = 0
    EXPECT_EQ(code_of([&] { contamination_matrix(Pconf{}, marginals(joint(2, Z)), 1); }), ErrorCode::ZeroConfidence);
}

TEST(ObservedDistribution, PUChannelsAreConditionalAndMarginal) {
    const FiniteJoint j = prior04_joint();
    const Marginals m = marginals(j);
    const ContaminationModel cm = observed_distribution(PU{}, j);
    EXPECT_EQ(cm.channels, (std::vector<std::string>{"P", "U"}));
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(cm.corrP[static_cast<std::size_t>(i)](0), m.class_conditionals(0, i), 1e-15);
        EXPECT_NEAR(cm.corrP[static_cast<std::size_t>(i)](1), m.instance_marginal(i), 1e-15);
    }
    const ContaminationModel id = observed_distribution(UU{0.0, 0.0}, j);
    for (int i = 0; i < 3; ++i)
        EXPECT_LT((id.corrP[static_cast<std::size_t>(i)] - m.class_conditionals.col(i)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ObservedDistribution, CLChannelMassesExcludeTheLabel) {
    Matrix P = Matrix::Constant(4, 2, 0.125); // uniform class probabilities at every x
    const FiniteJoint j = joint(4, P);
    const ContaminationModel cm = observed_distribution(CL{}, j);
    for (int s = 0; s < 4; ++s) EXPECT_NEAR(cm.corrP[0](s), 3 * 0.125 / 3.0, 1e-16);
    const FiniteJoint g = multiclass_joint();
    const ContaminationModel cg = observed_distribution(CL{}, g);
    for (int s = 0; s < 4; ++s) {
        double other = 0.0;
        for (int k = 0; k < 4; ++k)
            if (k != s) other += g.joint(k, 1);
        EXPECT_NEAR(cg.corrP[1](s), other / 3.0, 1e-16);
    }
}

TEST(ObservedDistribution, SconfRowsAreInstanceProducts) {
    const FiniteJoint j = prior04_joint();
    const Marginals m = marginals(j);
    const ContaminationModel cm = observed_distribution(Sconf{}, j);
    ASSERT_EQ(cm.corrP.size(), 9u);
    ASSERT_TRUE(cm.pair.has_value());
    for (int i = 0; i < 3; ++i)
        for (int i2 = 0; i2 < 3; ++i2) {
            const double target = m.instance_marginal(i) * m.instance_marginal(i2);
            EXPECT_NEAR(cm.corrP[static_cast<std::size_t>(i * 3 + i2)](0), target, 1e-15);
            EXPECT_NEAR(cm.corrP[static_cast<std::size_t>(i * 3 + i2)](1), target, 1e-15);
        }
}

TEST(PairDistribution, SimilarIsSymmetricAndNormalized) {
    const Marginals m = marginals(example_joint());
    const PairDistribution s = pair_distribution(PairKind::Similar, m);
    EXPECT_NEAR(s.P.sum(), 1.0, 1e-15);
    EXPECT_LT(max_abs(s.P - s.P.transpose()), 1e-16);
    const PairDistribution d = pair_distribution(PairKind::Dissimilar, m);
    // Diagonal: P(x|p)P(x|n) only.
    EXPECT_NEAR(d.P(0, 0), 0.75 * (1.0 / 3.0), 1e-16);
    EXPECT_NEAR(d.P.sum(), 1.0, 1e-15);
}

TEST(PairDistribution, PcompDenominatorAtBalancedPrior) {
    Matrix U(2, 2);
    U << 0.3, 0.2, 0.1, 0.4; // pi_p = 0.5
    const Marginals m = marginals(joint(2, U));
    const PairDistribution pc = pair_distribution(PairKind::Pcomp, m);
    const auto& C = m.class_conditionals;
    const double num = 0.25 * C(0, 0) * C(0, 1) + 0.25 * C(0, 0) * C(1, 1) + 0.25 * C(1, 0) * C(1, 1);
    EXPECT_NEAR(pc.P(0, 1), num / 0.75, 1e-16);
    EXPECT_NEAR(pc.P.sum(), 1.0, 1e-15);
    EXPECT_EQ(code_of([&] { pair_distribution(PairKind::Similar, marginals(multiclass_joint())); }), ErrorCode::NotBinary);
}

TEST(SconfConfidence, DeterministicAndMixedJoints) {
    Matrix P(2, 3);
    P << 0.3, 0.3, 0.0, 0.0, 0.0, 0.4;
    const FiniteJoint det = joint(2, P);
    EXPECT_NEAR(sconf_confidence(det, 0, 1), 1.0, 1e-15);
    EXPECT_NEAR(sconf_confidence(det, 0, 2), 0.0, 1e-15);
    const FiniteJoint j = prior04_joint();
    for (int i = 0; i < 3; ++i)
        for (int i2 = 0; i2 < 3; ++i2) {
            double same = 0.0;
            for (int y = 0; y < 2; ++y) same += j.joint(y, i) * j.joint(y, i2);
            const double px = j.joint.col(i).sum() * j.joint.col(i2).sum();
            EXPECT_NEAR(sconf_confidence(j, i, i2), same / px, 1e-15);
        }
}

TEST(Reduce, UUToPUAssignsPrior) {
    const Marginals m = marginals(prior04_joint());
    const ReductionResult r = reduce("UU", PU{}, m);
    EXPECT_EQ(r.assignments.at("gamma_1"), 0.0);
    EXPECT_NEAR(r.assignments.at("gamma_2"), 0.4, 1e-16);
    EXPECT_LT(max_abs(contamination_matrix(r.parent_instance, m, 0) - contamination_matrix(PU{}, m, 0)), 1e-15);
}

TEST(Reduce, MCLToCLAndPPLToPCPL) {
    const Marginals m = marginals(multiclass_joint());
    const ReductionResult r = reduce("MCL", CL{}, m);
    EXPECT_EQ(std::get<MCL>(r.parent_instance).q, (std::vector<double>{1.0, 0.0, 0.0}));
    const ReductionResult p = reduce("PPL", PCPL{}, m);
    EXPECT_NEAR(p.assignments.at("C"), 1.0 / 7.0, 1e-17);
    EXPECT_EQ(max_abs(contamination_matrix(p.parent_instance, m, 1) - contamination_matrix(PCPL{}, m, 1)), 0.0);
}

TEST(Reduce, SubConfToSoftUsesFullSet) {
    const Marginals m = marginals(multiclass_joint());
    const ReductionResult r = reduce("SubConf", Soft{}, m);
    EXPECT_EQ(std::get<SubConf>(r.parent_instance).Y_s, (std::vector<int>{1, 2, 3, 4}));
    EXPECT_EQ(max_abs(contamination_matrix(r.parent_instance, m, 0) - contamination_matrix(Soft{}, m, 0)), 0.0);
}

TEST(Reduce, NonEdgesRejected) {
    const Marginals m = marginals(multiclass_joint());
    EXPECT_EQ(code_of([&] { reduce("UU", CL{}, m); }), ErrorCode::NotAnEdge);
    EXPECT_EQ(code_of([&] { reduce("Soft", SubConf{{1}}, m); }), ErrorCode::NotAnEdge);
}

TEST(ChannelLabels, NamesFollowScenario) {
    EXPECT_EQ(channel_labels(PU{}, 2), (std::vector<std::string>{"P", "U"}));
    EXPECT_EQ(channel_labels(CL{}, 3), (std::vector<std::string>{"{1}", "{2}", "{3}"}));
    EXPECT_EQ(channel_labels(PCPL{}, 3).back(), "{2,3}");
}
