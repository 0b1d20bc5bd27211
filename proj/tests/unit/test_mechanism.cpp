#include "../oracles/brute_force.hpp"
#include "../oracles/example1.hpp"
#include "../oracles/families.hpp"
#include "seqscreen/errors.hpp"
#include "seqscreen/mechanism.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <sstream>

using namespace seqscreen;
namespace ex1 = oracle::example1;

namespace {

std::shared_ptr<const OptimalMechanism> example1_mechanism() {
    static const auto mech =
        std::make_shared<const OptimalMechanism>(std::make_shared<const Model>(example1_model()));
    return mech;
}

} // namespace

TEST(OptimalQuantity, KnownValues) {
    const auto m = example1_mechanism();
    EXPECT_NEAR(m->quantity(2.0, 2.0), 1.0, 1e-14);
    for (double v : {0.5, 0.8, 1.0}) EXPECT_EQ(m->quantity(1.0, v), 0.0);
    EXPECT_NEAR(m->quantity(1.5, 1.5), 0.25, 1e-14);
}

TEST(OptimalQuantity, BeatsDenseQuantityGrid) {
    const auto m = example1_mechanism();
    const double alpha = 0.5, c = 1.0;
    for (double t : Grid::uniform(1.0, 2.0, 11).points())
        for (double v : Grid::uniform(0.5, 2.0, 11).points()) {
            const double phi = m->field().dynamic(t, v);
            const double q = m->quantity(t, v);
            const double best = phi * std::pow(q, alpha) - c * q;
            const auto grid = Grid::uniform(0.0, 2.0, 10000);
            for (double x : grid.points()) EXPECT_GE(best + 1e-9, phi * std::pow(x, alpha) - c * x);
            EXPECT_NEAR(q, oracle::argmax_quantity(phi, alpha, c, 2.0, 10000), 2.0 / 9999.0);
        }
}

TEST(OptimalQuantity, MonotoneInBothArguments) {
    const auto m = example1_mechanism();
    const auto ts = Grid::uniform(1.0, 2.0, 31);
    const auto vs = Grid::uniform(0.5, 2.0, 31);
    for (double t : ts.points()) {
        std::vector<double> row;
        for (double v : vs.points()) row.push_back(m->quantity(t, v));
        EXPECT_TRUE(is_monotone(row, Direction::increasing, 0.0));
    }
    for (double v : vs.points()) {
        std::vector<double> col;
        for (double t : ts.points()) col.push_back(m->quantity(t, v));
        EXPECT_TRUE(is_monotone(col, Direction::increasing, 0.0));
    }
}

TEST(ExpectedUtility, KnownValuesAndOracle) {
    const auto m = example1_mechanism();
    EXPECT_NEAR(m->expected_utility(1.0), 0.0, 1e-14);
    EXPECT_NEAR(m->expected_utility(2.0), 7.0 / 24.0, 1e-8);
    EXPECT_NEAR(m->expected_utility(1.5), 7.0 / 96.0, 1e-8);
    for (double t : {1.013, 1.25, 1.377, 1.71, 1.999}) EXPECT_NEAR(m->expected_utility(t), ex1::expected_utility(t), 1e-12);
    EXPECT_THROW((void)m->expected_utility(2.5), DomainError);
    EXPECT_THROW((void)m->expected_utility(0.5), DomainError);
}

TEST(ExpectedUtility, EnvelopeSlope) {
    const auto m = example1_mechanism();
    for (double t : {1.1, 1.5, 1.9}) {
        EXPECT_NEAR(m->utility_slope(t), ex1::utility_slope(t), 1e-12);
        const double fd = derivative([&](double s) { return m->expected_utility(s); }, t);
        EXPECT_NEAR(fd, m->utility_slope(t), 1e-5);
    }
}

TEST(ExpostUtility, KnownValues) {
    const auto m = example1_mechanism();
    EXPECT_NEAR(m->expost_utility(2.0, 0.5), -11.0 / 48.0, 1e-8);
    EXPECT_NEAR(m->expost_utility(2.0, 1.0), -1.0 / 24.0, 1e-8);
    for (double v : {0.5, 0.9}) EXPECT_NEAR(m->expost_utility(1.0, v), 0.0, 1e-12);
    EXPECT_DOUBLE_EQ(m->anchor(), 0.5);
}

TEST(ExpostUtility, OracleAndEnvelopeInValue) {
    const auto m = example1_mechanism();
    for (double t : {1.0, 1.3, 1.62, 2.0})
        for (double v : {0.5, 0.77, 1.1, 1.6, 2.0}) {
            EXPECT_NEAR(m->expost_utility(t, v), ex1::expost_utility(t, v), 1e-12);
            if (v > 0.5 && v < 2.0) {
                const double fd = derivative([&](double x) { return m->expost_utility(t, x); }, v);
                EXPECT_NEAR(fd, m->quantity_power(t, v), 1e-5);
            }
        }
    for (double t : Grid::uniform(1.0, 2.0, 21).points()) EXPECT_LE(m->anchor_utility(t), 1e-15);
}

TEST(Transfer, KnownValues) {
    const auto m = example1_mechanism();
    EXPECT_NEAR(m->transfer(2.0, 1.0), 13.0 / 24.0, 1e-8);
    EXPECT_NEAR(m->transfer(2.0, 2.0), 31.0 / 24.0, 1e-8);
    for (double v : {0.5, 1.0}) EXPECT_NEAR(m->transfer(1.0, v), 0.0, 1e-12);
}

TEST(Transfer, IdentityAndBatch) {
    const auto m = example1_mechanism();
    const std::vector<double> vs{0.6, 0.9, 1.4, 1.9};
    for (double t : {1.2, 1.55, 1.95}) {
        const auto batch = m->transfers(t, vs);
        for (std::size_t i = 0; i < vs.size(); ++i) {
            const double t1 = m->transfer(t, vs[i]);
            EXPECT_NEAR(batch[i], t1, 1e-14);
            EXPECT_NEAR(t1, vs[i] * std::sqrt(m->quantity(t, vs[i])) - m->expost_utility(t, vs[i]), 1e-14);
            EXPECT_NEAR(t1, ex1::transfer(t, vs[i]), 1e-12);
        }
    }
}

TEST(SellerProfit, Example1) {
    const auto m = example1_mechanism();
    EXPECT_NEAR(seller_profit(*m), 7.0 / 36.0, 1e-7);
    EXPECT_NEAR(m->virtual_surplus(), seller_profit(*m), 1e-10);
}

TEST(SellerProfit, SimpsonOracle) {
    // Independent nested Simpson integration of the closed-form transfers.
    const double profit = oracle::simpson(
        [](double t) {
            return oracle::simpson(
                [t](double v) { return (ex1::transfer(t, v) - ex1::quantity(t, v)) * 2.0 / t; }, t / 2.0, t, 200);
        },
        1.0, 2.0, 200);
    EXPECT_NEAR(profit, ex1::profit, 1e-9);
    EXPECT_NEAR(seller_profit(*example1_mechanism()), profit, 1e-9);
}

TEST(SellerProfit, HighCostVanishes) {
    auto model = example1_model();
    model.env.cost = 1e6;
    const OptimalMechanism m(std::make_shared<const Model>(model));
    EXPECT_NEAR(seller_profit(m), 0.0, 1e-6);
    EXPECT_LT(m.quantity(2.0, 2.0), 1e-11);
}

TEST(SellerProfit, OtherElasticity) {
    // alpha = 1/3: q*^alpha = (phi/(3c))^(1/2); profit = E[phi q^alpha - c q] = E[2 (phi/3)^(3/2)].
    auto model = example1_model();
    model.env.alpha = 1.0 / 3.0;
    const OptimalMechanism m(std::make_shared<const Model>(model));
    const double want = oracle::simpson(
        [](double t) {
            return oracle::simpson(
                [t](double v) { return 2.0 * std::pow(ex1::phi(t, v) / 3.0, 1.5) * 2.0 / t; }, t / 2.0, t,
                400);
        },
        1.0, 2.0, 400);
    EXPECT_NEAR(seller_profit(m), want, 1e-8);
    EXPECT_NEAR(m.expected_utility(1.0), 0.0, 1e-14);
}

TEST(MarginalPrice, KnownValues) {
    const auto m = example1_mechanism();
    for (double v : {1.0, 1.5, 2.0}) EXPECT_NEAR(m->marginal_price(2.0, v), 1.0, 1e-12);
    EXPECT_NEAR(m->marginal_price(1.5, 1.0), 1.5, 1e-12);
    EXPECT_NEAR(m->marginal_price(1.25, 0.9), 2.5, 1e-12);
    EXPECT_THROW((void)m->marginal_price(1.0, 0.8), ExcludedPointError);
}

TEST(MarginalPrice, MatchesTransferSlope) {
    const auto m = example1_mechanism();
    const double t = 1.6, v = 1.2, h = 1e-5;
    const double dt = m->transfer(t, v + h) - m->transfer(t, v - h);
    const double dq = m->quantity(t, v + h) - m->quantity(t, v - h);
    EXPECT_NEAR(dt / dq, m->marginal_price(t, v), 1e-6);
}

TEST(OptimalMechanism, RefusesIrregularModels) {
    EXPECT_THROW(OptimalMechanism(oracle::bimodal_model()), AssumptionError);
    MechanismOptions opts;
    opts.require_assumptions = false;
    EXPECT_NO_THROW(OptimalMechanism(oracle::bimodal_model(), opts));
}

TEST(OptimalMechanism, ShiftedModelExcludesLowTypes) {
    const OptimalMechanism m(oracle::shifted_model());
    const auto breaks = m.signal_breaks();
    ASSERT_EQ(breaks.size(), 1u);
    EXPECT_NEAR(breaks[0], 0.75, 1e-9);
    EXPECT_EQ(m.quantity(0.7, 0.6), 0.0);
    EXPECT_GT(m.quantity(0.8, 0.6), 0.0);
    // Zero rents until the exclusion cutoff.
    EXPECT_NEAR(m.expected_utility(0.75), 0.0, 1e-12);
    // dU/dtheta = E[z^2] phi_F(theta) / 2 for alpha = 1/2, c = 1, so U(1.5) = (7/24) int_{0.75}^{1.5} (2x - 1.5) dx.
    const double want = 7.0 / 24.0 * ((1.5 * 1.5 - 1.5 * 1.5) - (0.75 * 0.75 - 1.5 * 0.75));
    EXPECT_NEAR(m.expected_utility(1.5), want, 1e-10);
}

TEST(OptimalMechanism, CommonSupportFamily) {
    const OptimalMechanism m(oracle::common_support_model());
    EXPECT_NEAR(m.expected_utility(0.0), 0.0, 1e-14);
    std::vector<double> us;
    for (double t : m.theta_grid().points()) us.push_back(m.expected_utility(t));
    EXPECT_TRUE(is_monotone(us, Direction::increasing, 0.0));
    for (double t : {0.3, 0.7}) {
        const double fd = derivative([&](double s) { return m.expected_utility(s); }, t);
        EXPECT_NEAR(fd, m.utility_slope(t), 1e-6);
        // Interim utility from ex-post utilities matches the envelope value.
        const double direct = expect_given_signal(m.model(), t, [&](double v) { return m.expost_utility(t, v); });
        EXPECT_NEAR(direct, m.expected_utility(t), 1e-9);
    }
    EXPECT_NEAR(m.virtual_surplus(), seller_profit(m), 1e-8);
}

TEST(OptimalMechanism, InterimProfitMatchesGenericQuadrature) {
    const auto m = example1_mechanism();
    for (double t : {1.2, 1.8}) {
        const double generic = expect_given_signal(
            m->model(), t, [&](double v) { return m->transfer(t, v) - m->quantity(t, v); });
        EXPECT_NEAR(m->interim_profit(t), generic, 1e-13);
    }
}

TEST(ExportMechanismCsv, HeaderAndGoldenRow) {
    MechanismOptions opts;
    opts.theta_points = 3;
    opts.v_points = 4;
    const OptimalMechanism m(std::make_shared<const Model>(example1_model()), opts);
    std::ostringstream out;
    export_mechanism_csv(m, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "theta,v,phi,q,t,u");
    std::vector<std::string> rows;
    while (std::getline(in, line)) rows.push_back(line);
    ASSERT_EQ(rows.size(), 12u);
    EXPECT_EQ(rows.back(), "2,2,2,1,1.29166667,0.708333333");
}
