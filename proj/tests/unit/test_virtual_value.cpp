#include "../oracles/example1.hpp"
#include "../oracles/families.hpp"
#include "seqscreen/errors.hpp"
#include "seqscreen/virtual_value.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <memory>

using namespace seqscreen;
namespace ex1 = oracle::example1;

namespace {

std::shared_ptr<const Model> example1() { return std::make_shared<const Model>(example1_model()); }

} // namespace

TEST(DynamicVirtualValue, KnownValues) {
    const VirtualValueField field(example1());
    EXPECT_NEAR(field.dynamic(2.0, 2.0), 2.0, 1e-15);
    for (double v : {0.5, 0.75, 1.0}) EXPECT_NEAR(field.dynamic(1.0, v), 0.0, 1e-15);
    EXPECT_NEAR(field.dynamic(1.5, 1.5), 1.0, 1e-15);
}

TEST(StaticVirtualValue, KnownValues) {
    const VirtualValueField field(example1());
    EXPECT_NEAR(field.static_value(1.0), 0.0, 1e-15);
    EXPECT_NEAR(field.static_value(2.0), 2.0, 1e-15);
    EXPECT_NEAR(field.static_value(1.5), 1.0, 1e-15);
}

TEST(DynamicVirtualValue, MatchesClosedFormAndIdentity) {
    const VirtualValueField field(example1());
    for (double t : Grid::uniform(1.0, 2.0, 41).points())
        for (double v : Grid::uniform(0.5, 2.0, 41).points()) {
            EXPECT_NEAR(field.dynamic(t, v), ex1::phi(t, v), 1e-12);
            EXPECT_NEAR(field.dynamic(t, v), (v / t) * field.static_value(t), 1e-10);
        }
}

TEST(DynamicVirtualValue, GenericFormulaOnSupportAgreesWithMultiplicative) {
    // Same family through the generic formula v + hazard * dG/dtheta / g.
    const auto m = example1_model();
    const auto& fam = *m.values;
    const VirtualValueField field(example1());
    for (double t : {1.1, 1.4, 1.8})
        for (double z : {0.55, 0.7, 0.95}) {
            const double v = t * z;
            const double generic = v + m.signal.inverse_hazard(t) * fam.theta_partial(v, t) / fam.pdf(v, t);
            EXPECT_NEAR(field.dynamic(t, v), generic, 1e-12);
        }
}

TEST(DynamicVirtualValue, TopTypeAndUpperBound) {
    const auto cs = oracle::common_support_model();
    const VirtualValueField field(cs);
    for (double v : {0.0, 0.3, 1.0}) EXPECT_DOUBLE_EQ(field.dynamic(1.0, v), v);
    for (double t : Grid::uniform(0.0, 1.0, 21).points())
        for (double v : Grid::uniform(0.0, 1.0, 21).points()) EXPECT_LE(field.dynamic(t, v), v + 1e-15);

    const VirtualValueField e1(example1());
    for (double t : Grid::uniform(1.0, 2.0, 21).points())
        for (double v : Grid::uniform(0.5, 2.0, 21).points()) EXPECT_LE(e1.dynamic(t, v), v + 1e-15);
}

TEST(DynamicVirtualValue, UndefinedDensityWithoutExtension) {
    const VirtualValueField field(oracle::inverse_family_model());
    // Type theta = 2 has values in [0.25, 0.5]; v = 0.9 is off its support and g = 0 there.
    EXPECT_THROW((void)field.dynamic(1.5, 0.9), UndefinedDensityError);
    EXPECT_FALSE(field.try_dynamic(1.5, 0.9).has_value());
}


TEST(Regularity, Example1PassesBimodalFails) {
    const auto thetas = Grid::uniform(1.0, 2.0, 101);
    const auto vs = Grid::uniform(0.5, 2.0, 101);
    EXPECT_TRUE(regularity_check(VirtualValueField(example1()), thetas, vs).passed);

    const auto bimodal = regularity_check(VirtualValueField(oracle::bimodal_model()), thetas, vs);
    EXPECT_FALSE(bimodal.passed);
    EXPECT_GT(bimodal.worst, 0.1);
}

TEST(Regularity, ThetaIndependentFieldPasses) {
    // G(v | theta) = v on [0, 1] for every theta: phi = v, constant in theta.
    auto family = std::make_shared<FunctionalFamily>(
        [](double v, double) { return std::clamp(v, 0.0, 1.0); }, [](double, double) { return 1.0; },
        FunctionalFamily::Fn2([](double, double) { return 0.0; }), [](double) { return 0.0; },
        [](double) { return 1.0; }, 0.0, 1.0);
    auto model = std::make_shared<const Model>(Model{Environment{}, SignalDistribution::uniform(0.0, 1.0), family});
    const VirtualValueField field(model);
    EXPECT_DOUBLE_EQ(field.dynamic(0.2, 0.7), field.dynamic(0.9, 0.7));
    EXPECT_TRUE(regularity_check(field, Grid::uniform(0.0, 1.0, 21), Grid::uniform(0.0, 1.0, 21)).passed);
}

TEST(Regularity, ExcludedRegionIsNotAViolation) {
    // phi_F = 2 theta - 1.5 is negative below 0.75; only the positive part must be monotone.
    const auto thetas = Grid::uniform(0.5, 1.5, 51);
    const auto vs = Grid::uniform(0.25, 1.5, 51);
    EXPECT_TRUE(regularity_check(VirtualValueField(oracle::shifted_model()), thetas, vs).passed);
}

TEST(Regularity, CommonSupportFamilyPasses) {
    const VirtualValueField field(oracle::common_support_model());
    EXPECT_TRUE(regularity_check(field, Grid::uniform(0.0, 1.0, 51), Grid::uniform(0.0, 1.0, 51)).passed);
}

TEST(Mhr, KnownValues) {
    EXPECT_TRUE(mhr_check(SignalDistribution::uniform(1.0, 2.0), Grid::uniform(1.0, 2.0, 101)).passed);
    EXPECT_FALSE(mhr_check(oracle::bimodal_signal(), Grid::uniform(1.0, 2.0, 101)).passed);
    // Two points with equal inverse hazard: weakly decreasing.
    const SignalDistribution flat(0.0, 1.0, [](double t) { return 1.0 - std::exp(-t); },
                                  [](double t) { return std::exp(-t); });
    const double two[] = {0.2, 0.6};
    EXPECT_TRUE(mhr_check(flat, two).passed);
}

TEST(StaticVirtualValue, ZeroDensityThrows) {
    const SignalDistribution gap(
        1.0, 3.0, [](double t) { return t < 2.0 ? (t - 1.0) / 2.0 : (t < 2.5 ? 0.5 : 0.5 + (t - 2.5)); },
        [](double t) { return t < 2.0 ? 0.5 : (t < 2.5 ? 0.0 : 1.0); }, {2.0, 2.5});
    const VirtualValueField field(std::make_shared<const Model>(
        multiplicative_model(Environment{}, gap, ShockDistribution::uniform(0.5, 1.0))));
    EXPECT_THROW((void)field.static_value(2.2), UndefinedDensityError);
    EXPECT_THROW((void)field.dynamic(2.2, 2.0), UndefinedDensityError);
    EXPECT_NEAR(field.static_value(3.0), 3.0, 1e-15);
}
