#include "../oracles/brute_force.hpp"
#include "../oracles/example1.hpp"
#include "../oracles/families.hpp"
#include "seqscreen/errors.hpp"
#include "seqscreen/frictions.hpp"

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

/// Seller profit with the cutoff at theta*: spot replication below, discounted optimum above.
double constrained_profit_oracle(double p) {
    const double ts = ex1::cutoff(p);
    auto base = [](double t) { return 7.0 * (t - 1.0) / 12.0 - 7.0 * (t - 1.0) * (t - 1.0) / 24.0; };
    auto spot = [p](double t) { return (p - 1.0) * ex1::second_moment(t) / (4.0 * p * p); };
    return oracle::simpson(spot, 1.0, ts) + oracle::simpson(base, ts, 2.0) - ex1::discount(p) * (2.0 - ts);
}

} // namespace

TEST(PayoffWithGamma, ChargesOnlyPositiveUpfront) {
    EXPECT_DOUBLE_EQ(payoff_with_gamma(2.0, 1.0, 0.5, 0.5, 0.1, 0.5), 2.0 - 1.1 * 0.5 - 0.5);
    EXPECT_DOUBLE_EQ(payoff_with_gamma(2.0, 1.0, 0.0, 1.0, 0.1, 0.5), 1.0);
    EXPECT_DOUBLE_EQ(payoff_with_gamma(2.0, 1.0, -0.5, 1.0, 0.1, 0.5), 1.5);
    EXPECT_THROW((void)payoff_with_gamma(2.0, -1.0, 0.0, 0.0, 0.1, 0.5), DomainError);
}

TEST(PayoffWithGamma, InterimTariffSplit) {
    const auto m = example1_mechanism();
    EXPECT_NEAR(interim_payoff_with_gamma(*m, 2.0, ex1::upfront(2.0), 0.1), 0.268750, 1e-9);
    EXPECT_NEAR(interim_payoff_with_gamma(*m, 2.0, 0.0, 0.1), 7.0 / 24.0, 1e-9);
}

TEST(GammaContract, CommittedSpendDominates) {
    const auto grid = Grid::uniform(1.0, 2.0, 11);
    const auto g = optimal_contract_under_gamma(example1_mechanism(), 0.1, grid.points());
    EXPECT_TRUE(g.dominates);
    EXPECT_NEAR(g.seller_profit, ex1::profit, 1e-8);
    ASSERT_EQ(g.rows.size(), 11u);
    const auto& top = g.rows.back();
    EXPECT_NEAR(top.committed_payoff, ex1::expected_utility(2.0), 1e-9);
    EXPECT_NEAR(top.tariff_payoff, 0.268750, 1e-9);
    EXPECT_LT(top.best_split_payoff, top.committed_payoff);
    EXPECT_NEAR(g.contract.budget(2.0), 13.0 / 24.0, 1e-10);
}

TEST(GammaContract, BottomTypeHasNoSplit) {
    const double grid[] = {1.0};
    const auto g = optimal_contract_under_gamma(example1_mechanism(), 0.1, grid);
    EXPECT_TRUE(std::isnan(g.rows.front().best_split_payoff));
}

TEST(GammaContract, RequiresPositiveGamma) {
    const double grid[] = {1.5};
    EXPECT_THROW((void)optimal_contract_under_gamma(example1_mechanism(), 0.0, grid), DomainError);
    EXPECT_THROW((void)optimal_contract_under_gamma(example1_mechanism(), -0.1, grid), DomainError);
}

TEST(SpotCutoff, Example1) {
    const auto& model = example1_mechanism()->model();
    EXPECT_NEAR(spot_cutoff(model, 2.0), 4.0 / 3.0, 1e-9);
    for (double p : {1.5, 3.0, 4.0}) EXPECT_NEAR(spot_cutoff(model, p), ex1::cutoff(p), 1e-9) << p;
}

TEST(SpotCutoff, NonincreasingInPrice) {
    const auto& model = example1_mechanism()->model();
    double prev = spot_cutoff(model, 1.05);
    for (double p = 1.1; p < 6.0; p += 0.1) {
        const double cur = spot_cutoff(model, p);
        EXPECT_LE(cur, prev + 1e-12) << p;
        prev = cur;
    }
}

TEST(SpotCutoff, Refusals) {
    const auto& model = example1_mechanism()->model();
    EXPECT_THROW((void)spot_cutoff(model, 1.0), DomainError);
    EXPECT_THROW((void)spot_cutoff(model, 0.5), DomainError);
    EXPECT_THROW((void)spot_cutoff(*oracle::common_support_model(), 2.0), UnsupportedModelError);
}

TEST(SpotPayoff, ClosedForm) {
    const auto& model = example1_mechanism()->model();
    EXPECT_NEAR(spot_interim_payoff(model, 4.0 / 3.0, 2.0), 7.0 / 54.0, 1e-10);
    EXPECT_NEAR(spot_interim_payoff(model, 2.0, 2.0), 7.0 / 24.0, 1e-10);
    for (double t : {1.0, 1.4, 1.9}) {
        EXPECT_NEAR(spot_interim_payoff(model, t, 3.0), ex1::spot_payoff(t, 3.0), 1e-10);
        EXPECT_NEAR(spot_utility_slope(model, t, 3.0), ex1::spot_slope(t, 3.0), 1e-10);
    }
}

TEST(EnvelopeRatio, Example1) {
    const auto& model = example1_mechanism()->model();
    EXPECT_NEAR(envelope_derivative_ratio(model, 4.0 / 3.0, 2.0), 1.0, 1e-12);
    EXPECT_NEAR(envelope_derivative_ratio(model, 2.0, 2.0), 2.0, 1e-12);
    EXPECT_THROW((void)envelope_derivative_ratio(model, 1.0, 2.0), ExcludedPointError);
}

TEST(EnvelopeRatio, IncreasingInSignal) {
    const auto& model = example1_mechanism()->model();
    double prev = 0.0;
    for (double t = 1.05; t <= 2.0; t += 0.05) {
        const double r = envelope_derivative_ratio(model, t, 2.0);
        EXPECT_GT(r, prev);
        prev = r;
    }
}

TEST(SpotConstrained, DiscountGolden) {
    const auto sol = solve_spot_constrained(example1_mechanism(), 2.0);
    EXPECT_NEAR(sol.theta_star, 4.0 / 3.0, 1e-9);
    EXPECT_NEAR(sol.discount, 7.0 / 72.0, 1e-9);
    EXPECT_TRUE(sol.heuristic);
    EXPECT_GT(sol.heuristic_gap, 0.0);
}

TEST(SpotConstrained, DiscountNonnegative) {
    for (double p : {1.2, 1.5, 2.0, 3.0, 5.0}) {
        const auto sol = solve_spot_constrained(example1_mechanism(), p);
        EXPECT_GE(sol.discount, 0.0) << p;
        EXPECT_NEAR(sol.discount, ex1::discount(p), 1e-9) << p;
    }
}

TEST(SpotConstrained, BuyerWeaklyPrefersContract) {
    const auto sol = solve_spot_constrained(example1_mechanism(), 2.0);
    for (double t : Grid::uniform(1.0, 2.0, 41).points())
        EXPECT_GE(sol.mechanism->interim_utility(t), sol.u_spot(t) - 1e-9) << t;
}

TEST(SpotConstrained, AllocationBySide) {
    const auto sol = solve_spot_constrained(example1_mechanism(), 2.0);
    const auto& m = *sol.mechanism;
    EXPECT_TRUE(m.replicates_spot(1.2));
    EXPECT_FALSE(m.replicates_spot(1.5));
    // Spot best response: q = (v / 2p)^2, paid at p per unit.
    EXPECT_NEAR(m.quantity(1.2, 1.0), 1.0 / 16.0, 1e-12);
    EXPECT_NEAR(m.transfer(1.2, 1.0), 2.0 / 16.0, 1e-12);
    EXPECT_NEAR(m.quantity(2.0, 2.0), 1.0, 1e-12);
    EXPECT_NEAR(m.transfer(2.0, 2.0), ex1::transfer(2.0, 2.0) - 7.0 / 72.0, 1e-9);
}

TEST(SpotConstrained, SellerProfitOracle) {
    for (double p : {1.5, 2.0, 4.0}) {
        const auto sol = solve_spot_constrained(example1_mechanism(), p);
        const double profit = seller_profit(*sol.mechanism);
        EXPECT_NEAR(profit, constrained_profit_oracle(p), 1e-8) << p;
        EXPECT_LT(profit, ex1::profit);
    }
}

TEST(SpotConstrained, CsvColumns) {
    const auto sol = solve_spot_constrained(example1_mechanism(), 2.0);
    const double grid[] = {1.0, 2.0};
    std::ostringstream out;
    export_spot_csv(sol, grid, out);
    const auto text = out.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "theta,cutoff_flag,q_source,t_discount,u_spot,u_contract");
    EXPECT_NE(text.find("spot_replication"), std::string::npos);
    EXPECT_NE(text.find("optimal"), std::string::npos);
}
