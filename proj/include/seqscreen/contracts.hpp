#pragma once

#include "seqscreen/mechanism.hpp"

#include <functional>
#include <memory>
#include <ostream>
#include <vector>

namespace seqscreen {

/// Per-type price schedule p(q) tabulated at equilibrium quantities.
///
/// Off the tabulated range: p(0) is `floor_payment` (the decline option), any
/// 0 < q below the first point costs the first payment, segments are linear,
/// and beyond the last point the last segment's slope is extrapolated.
class PriceSchedule {
public:
    struct Point {
        double quantity;
        double payment;
    };

    PriceSchedule(std::vector<Point> points, double floor_payment);

    /// Builds from (q, p) pairs in increasing-v order; repeated quantities keep the first pair.
    static PriceSchedule from_pairs(std::span<const double> quantities, std::span<const double> payments,
                                    double floor_payment);

    [[nodiscard]] double operator()(double q) const;
    [[nodiscard]] double min_payment() const;
    /// sup { q : p(q) <= budget }; +inf when the schedule is eventually flat below budget.
    [[nodiscard]] double quantity_for_payment(double budget) const;
    [[nodiscard]] std::span<const Point> points() const noexcept { return points_; }
    [[nodiscard]] double floor_payment() const noexcept { return floor_; }

private:
    std::vector<Point> points_;
    double floor_;
};

struct ContractOptions {
    std::size_t v_points = 101;  // equilibrium points per type schedule
};

/// Upfront fee t0(theta) plus a per-type schedule whose minimum payment is 0.
class TwoPartTariff {
public:
    TwoPartTariff(ScalarFn upfront, std::function<PriceSchedule(double)> schedules);

    [[nodiscard]] double upfront(double theta) const { return upfront_(theta); }
    [[nodiscard]] PriceSchedule schedule(double theta) const { return schedules_(theta); }
    /// t0(theta) + p_theta(q).
    [[nodiscard]] double total_payment(double theta, double q) const { return upfront(theta) + schedule(theta)(q); }

private:
    ScalarFn upfront_;
    std::function<PriceSchedule(double)> schedules_;
};

/// One schedule per type whose minimum payment B(theta) is the committed spend.
class CommittedSpendContract {
public:
    CommittedSpendContract(ScalarFn budget, std::function<PriceSchedule(double)> schedules);

    [[nodiscard]] double budget(double theta) const { return budget_(theta); }
    [[nodiscard]] PriceSchedule schedule(double theta) const { return schedules_(theta); }

private:
    ScalarFn budget_;
    std::function<PriceSchedule(double)> schedules_;
};

/// t0 = -u(theta, v_lo), t1 = t + u(theta, v_lo); p_theta(q(theta, v)) = t1(theta, v) on path.
TwoPartTariff build_two_part_tariff(std::shared_ptr<const Mechanism> mech, ContractOptions options = {});

/// B(theta) = t(theta, lower_support(theta)), zero at the bottom signal; p_theta(q(theta, v)) = t(theta, v).
CommittedSpendContract build_committed_spend(std::shared_ptr<const Mechanism> mech, ContractOptions options = {});

/// |phi(theta, lower_support(theta))| <= tol: the upfront/usage split is unique.
bool uniqueness_condition(const VirtualValueField& field, double theta, double tol = 1e-9);

/// phi(theta, lower_support(theta)) > 0 for every grid signal above the bottom.
bool positive_quantity_condition(const VirtualValueField& field, std::span<const double> theta_grid);

/// Every type above the bottom has a positive committed spend that buys a positive quantity.
bool guaranteed_positive_quantity(const CommittedSpendContract& contract, double theta_lo,
                                  std::span<const double> theta_grid);

/// True iff the average price t/q is constant (within tol) over the type's tabulated points.
bool linear_pricing_diagnostic(const CommittedSpendContract& contract, double theta, double tol = 1e-9);

/// E[t0 + p_theta(q) - c q] with quantities from `mech`.
double tariff_profit(const TwoPartTariff& tariff, const Mechanism& mech);

/// E[p_theta(q) - c q] with quantities from `mech`.
double committed_profit(const CommittedSpendContract& contract, const Mechanism& mech);

/// c theta / phi_F(theta) style unit price: c v / phi at the type's lowest value. NaN when excluded.
double unit_price(const OptimalMechanism& mech, double theta);

/// CSV `theta,t0,unit_price`.
void export_tariff_csv(const TwoPartTariff& tariff, const OptimalMechanism& mech, std::ostream& out);

/// CSV `theta,B,unit_price`.
void export_committed_csv(const CommittedSpendContract& contract, const OptimalMechanism& mech, std::ostream& out);

} // namespace seqscreen
