#include "seqscreen/contracts.hpp"

#include "seqscreen/csv.hpp"
#include "seqscreen/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace seqscreen {

PriceSchedule::PriceSchedule(std::vector<Point> points, double floor_payment)
    : points_(std::move(points)), floor_(floor_payment) {
    if (points_.empty()) throw DomainError("price schedule needs at least one point");
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (points_[i].quantity < 0.0) throw DomainError("schedule quantities must be non-negative");
        if (i > 0 && !(points_[i].quantity > points_[i - 1].quantity))
            throw DomainError("schedule quantities must be strictly increasing");
    }
}

PriceSchedule PriceSchedule::from_pairs(std::span<const double> quantities, std::span<const double> payments,
                                        double floor_payment) {
    std::vector<Point> pts;
    for (std::size_t i = 0; i < quantities.size(); ++i) {
        if (!pts.empty() && !(quantities[i] > pts.back().quantity)) continue;
        pts.push_back({quantities[i], payments[i]});
    }
    return PriceSchedule(std::move(pts), floor_payment);
}

double PriceSchedule::operator()(double q) const {
    if (q < 0.0) throw DomainError("negative quantity");
    const auto& first = points_.front();
    if (q <= first.quantity) {
        if (q == 0.0 && first.quantity > 0.0) return floor_;
        return first.payment;
    }
    const auto& last = points_.back();
    if (q >= last.quantity) {
        if (points_.size() < 2) return last.payment;
        const auto& prev = points_[points_.size() - 2];
        const double slope = (last.payment - prev.payment) / (last.quantity - prev.quantity);
        return last.payment + slope * (q - last.quantity);
    }
    auto it = std::upper_bound(points_.begin(), points_.end(), q,
                               [](double x, const Point& p) { return x < p.quantity; });
    const Point& hi = *it;
    const Point& lo = *(it - 1);
    const double r = (q - lo.quantity) / (hi.quantity - lo.quantity);
    return lo.payment + r * (hi.payment - lo.payment);
}

double PriceSchedule::min_payment() const {
    double m = points_.front().quantity > 0.0 ? std::min(floor_, points_.front().payment) : points_.front().payment;
    for (const auto& p : points_) m = std::min(m, p.payment);
    return m;
}

double PriceSchedule::quantity_for_payment(double budget) const {
    constexpr double slack = 1e-12;
    const double tol = slack * std::max(1.0, std::abs(budget));
    if (points_.front().payment > budget + tol) return 0.0;
    std::size_t k = 0;
    while (k + 1 < points_.size() && points_[k + 1].payment <= budget + tol) ++k;
    if (k + 1 < points_.size()) {
        const Point& lo = points_[k];
        const Point& hi = points_[k + 1];
        const double r = std::clamp((budget - lo.payment) / (hi.payment - lo.payment), 0.0, 1.0);
        return lo.quantity + r * (hi.quantity - lo.quantity);
    }
    if (points_.size() < 2) return std::numeric_limits<double>::infinity();
    const auto& last = points_.back();
    const auto& prev = points_[points_.size() - 2];
    const double slope = (last.payment - prev.payment) / (last.quantity - prev.quantity);
    if (!(slope > 0.0)) return std::numeric_limits<double>::infinity();
    return last.quantity + (budget - last.payment) / slope;
}

TwoPartTariff::TwoPartTariff(ScalarFn upfront, std::function<PriceSchedule(double)> schedules)
    : upfront_(std::move(upfront)), schedules_(std::move(schedules)) {}

CommittedSpendContract::CommittedSpendContract(ScalarFn budget, std::function<PriceSchedule(double)> schedules)
    : budget_(std::move(budget)), schedules_(std::move(schedules)) {}

namespace {

struct PathPoints {
    std::vector<double> quantities;
    std::vector<double> transfers;
};

PathPoints equilibrium_path(const Mechanism& mech, double theta, std::size_t points) {
    const auto& fam = *mech.model().values;
    const double lo = fam.lower_support(theta);
    const double hi = fam.upper_support(theta);
    std::vector<double> vs;
    if (!(hi > lo) || points < 2) {
        vs.push_back(lo);
    } else {
        const auto grid = Grid::uniform(lo, hi, points);
        vs.assign(grid.points().begin(), grid.points().end());
    }
    PathPoints path;
    for (double v : vs) path.quantities.push_back(mech.quantity(theta, v));
    path.transfers = mech.transfers(theta, vs);
    return path;
}

} // namespace

TwoPartTariff build_two_part_tariff(std::shared_ptr<const Mechanism> mech, ContractOptions options) {
    const double anchor = mech->model().values->global_lo();
    auto upfront = [mech, anchor](double theta) { return -mech->expost_utility(theta, anchor); };
    auto schedules = [mech, upfront, options](double theta) {
        auto path = equilibrium_path(*mech, theta, options.v_points);
        const double t0 = upfront(theta);
        for (double& t : path.transfers) t -= t0;
        return PriceSchedule::from_pairs(path.quantities, path.transfers, 0.0);
    };
    return TwoPartTariff(upfront, schedules);
}

CommittedSpendContract build_committed_spend(std::shared_ptr<const Mechanism> mech, ContractOptions options) {
    const double theta_lo = mech->model().signal.lo();
    auto budget = [mech, theta_lo](double theta) {
        if (theta <= theta_lo) return 0.0;
        return mech->transfer(theta, mech->model().values->lower_support(theta));
    };
    auto schedules = [mech, budget, options](double theta) {
        const auto path = equilibrium_path(*mech, theta, options.v_points);
        return PriceSchedule::from_pairs(path.quantities, path.transfers, budget(theta));
    };
    return CommittedSpendContract(budget, schedules);
}

bool uniqueness_condition(const VirtualValueField& field, double theta, double tol) {
    const double v = field.model().values->lower_support(theta);
    return std::abs(field.dynamic(theta, v)) <= tol;
}

bool positive_quantity_condition(const VirtualValueField& field, std::span<const double> theta_grid) {
    const double theta_lo = field.model().signal.lo();
    for (double theta : theta_grid) {
        if (theta <= theta_lo) continue;
        if (!(field.dynamic(theta, field.model().values->lower_support(theta)) > 0.0)) return false;
    }
    return true;
}

bool guaranteed_positive_quantity(const CommittedSpendContract& contract, double theta_lo,
                                  std::span<const double> theta_grid) {
    constexpr double positive = 1e-12;
    for (double theta : theta_grid) {
        if (theta <= theta_lo) continue;
        const double b = contract.budget(theta);
        // A committed spend must be positive above the bottom signal.
        if (!(b > positive)) return false;
        if (!(contract.schedule(theta).quantity_for_payment(b) > 0.0)) return false;
    }
    return true;
}

bool linear_pricing_diagnostic(const CommittedSpendContract& contract, double theta, double tol) {
    const auto schedule = contract.schedule(theta);
    std::optional<double> first;
    for (const auto& p : schedule.points()) {
        if (!(p.quantity > 0.0)) continue;
        const double avg = p.payment / p.quantity;
        if (!first) {
            first = avg;
        } else if (std::abs(avg - *first) > tol * std::max(1.0, std::abs(*first))) {
            return false;
        }
    }
    return true;
}

double tariff_profit(const TwoPartTariff& tariff, const Mechanism& mech) {
    const double c = mech.model().env.cost;
    return expect_over_signal(
        mech.model(),
        [&](double theta) {
            const double t0 = tariff.upfront(theta);
            const auto p = tariff.schedule(theta);
            return expect_given_signal(mech.model(), theta, [&](double v) {
                const double q = mech.quantity(theta, v);
                return t0 + p(q) - c * q;
            });
        },
        mech.signal_breaks());
}

double committed_profit(const CommittedSpendContract& contract, const Mechanism& mech) {
    const double c = mech.model().env.cost;
    return expect_over_signal(
        mech.model(),
        [&](double theta) {
            const auto p = contract.schedule(theta);
            return expect_given_signal(mech.model(), theta, [&](double v) {
                const double q = mech.quantity(theta, v);
                return p(q) - c * q;
            });
        },
        mech.signal_breaks());
}

double unit_price(const OptimalMechanism& mech, double theta) {
    try {
        return mech.marginal_price(theta, mech.model().values->lower_support(theta));
    } catch (const ExcludedPointError&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

void export_tariff_csv(const TwoPartTariff& tariff, const OptimalMechanism& mech, std::ostream& out) {
    csv::Writer w(out, {"theta", "t0", "unit_price"});
    for (double theta : mech.theta_grid().points())
        w.row({csv::number(theta), csv::number(tariff.upfront(theta)), csv::number(unit_price(mech, theta))});
}

void export_committed_csv(const CommittedSpendContract& contract, const OptimalMechanism& mech, std::ostream& out) {
    csv::Writer w(out, {"theta", "B", "unit_price"});
    for (double theta : mech.theta_grid().points())
        w.row({csv::number(theta), csv::number(contract.budget(theta)), csv::number(unit_price(mech, theta))});
}

} // namespace seqscreen
