#include "seqscreen/mechanism.hpp"

#include "seqscreen/csv.hpp"
#include "seqscreen/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace seqscreen {

Mechanism::Mechanism(std::shared_ptr<const Model> model) : model_(std::move(model)) {
    if (!model_ || !model_->values) throw DomainError("mechanism needs a model");
}

double Mechanism::expost_utility(double theta, double v) const {
    return v * std::pow(quantity(theta, v), model_->env.alpha) - transfer(theta, v);
}

double Mechanism::interim_utility(double theta) const {
    return expect_given_signal(*model_, theta, [&](double v) { return expost_utility(theta, v); });
}

double Mechanism::interim_profit(double theta) const {
    const double c = model_->env.cost;
    return expect_given_signal(*model_, theta,
                               [&](double v) { return transfer(theta, v) - c * quantity(theta, v); });
}

std::vector<double> Mechanism::transfers(double theta, std::span<const double> vs) const {
    std::vector<double> out;
    out.reserve(vs.size());
    for (double v : vs) out.push_back(transfer(theta, v));
    return out;
}

FunctionalMechanism::FunctionalMechanism(std::shared_ptr<const Model> model, Fn2 quantity, Fn2 transfer,
                                         std::vector<double> breaks)
    : Mechanism(std::move(model)), q_(std::move(quantity)), t_(std::move(transfer)), breaks_(std::move(breaks)) {}

// ---------------------------------------------------------------------------

namespace {

/// Roots of `fn` located by scanning `grid` for sign changes.
std::vector<double> sign_changes(const std::function<std::optional<double>(double)>& fn,
                                 std::span<const double> grid, double tol) {
    std::vector<double> roots;
    std::optional<double> prev_x, prev_y;
    for (double x : grid) {
        const auto y = fn(x);
        if (!y) continue;
        if (prev_y && std::signbit(*prev_y) != std::signbit(*y) && *prev_y != 0.0) {
            try {
                roots.push_back(find_root([&](double s) { return fn(s).value_or(0.0); }, *prev_x, x, tol));
            } catch (const BracketError&) {
            }
        }
        prev_x = x;
        prev_y = y;
    }
    return roots;
}

} // namespace

OptimalMechanism::OptimalMechanism(std::shared_ptr<const Model> model, MechanismOptions options)
    : Mechanism(std::move(model)), field_(model_), options_(options),
      theta_grid_(Grid::uniform(model_->signal.lo(), model_->signal.hi(), options.theta_points)),
      v_grid_(Grid::uniform(model_->values->global_lo(), model_->values->global_hi(), options.v_points)) {
    model_->env.validate();
    const auto& fam = *model_->values;

    if (options_.require_assumptions) {
        const auto fosd = fosd_check(fam, theta_grid_, v_grid_, options_.tol.monotone);
        if (!fosd.passed) throw AssumptionError("refused: values are not ordered by first-order stochastic dominance");
        const auto reg = regularity_check(field_, theta_grid_, v_grid_, options_.tol.monotone);
        if (!reg.passed) throw AssumptionError("refused: virtual value is not monotone (regularity violated)");
    }

    // Exclusion boundaries: where phi at the bottom or top of a type's support changes sign.
    auto at_lower = [&](double t) { return field_.try_dynamic(t, fam.lower_support(t)); };
    auto at_upper = [&](double t) { return field_.try_dynamic(t, fam.upper_support(t)); };
    const auto fine = Grid::uniform(theta_grid_.lo(), theta_grid_.hi(), 4 * options_.theta_points + 1);
    for (double r : sign_changes(at_lower, fine, options_.tol.root)) breaks_.push_back(r);
    for (double r : sign_changes(at_upper, fine, options_.tol.root)) breaks_.push_back(r);
    std::sort(breaks_.begin(), breaks_.end());
    breaks_.erase(std::unique(breaks_.begin(), breaks_.end()), breaks_.end());

    std::vector<double> cuts(breaks_);
    cuts.insert(cuts.end(), model_->signal.kinks().begin(), model_->signal.kinks().end());

    // The slope vanishes like a power at exclusion boundaries, so accumulate U on points
    // graded toward them and toward the support ends.
    const double lo = theta_grid_.lo();
    const double hi = theta_grid_.hi();
    std::vector<double> base(theta_grid_.points().begin(), theta_grid_.points().end());
    for (double c : cuts)
        if (c > lo && c < hi) base.push_back(c);
    std::sort(base.begin(), base.end());
    base.erase(std::unique(base.begin(), base.end()), base.end());
    auto singular = [&](double x) {
        return x == lo || x == hi || std::find(breaks_.begin(), breaks_.end(), x) != breaks_.end();
    };
    constexpr int levels = 20;
    const double floor_width = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
    accum_points_.assign(1, base.front());
    for (std::size_t k = 1; k < base.size(); ++k) {
        const double a = base[k - 1];
        const double b = base[k];
        const double half = 0.5 * (b - a);
        std::vector<double> inner;
        for (int l = levels; l >= 1; --l) {
            const double d = std::ldexp(half, -l);
            if (d < floor_width) continue;
            if (singular(a)) inner.push_back(a + d);
            if (singular(b)) inner.push_back(b - d);
        }
        if (singular(a) || singular(b)) inner.push_back(a + half);
        std::sort(inner.begin(), inner.end());
        accum_points_.insert(accum_points_.end(), inner.begin(), inner.end());
        accum_points_.push_back(b);
    }
    accum_utility_.assign(accum_points_.size(), 0.0);
    for (std::size_t k = 1; k < accum_points_.size(); ++k)
        accum_utility_[k] = accum_utility_[k - 1] +
                            integrate([&](double t) { return utility_slope(t); }, accum_points_[k - 1], accum_points_[k]);
    utility_nodes_.resize(theta_grid_.size());
    for (std::size_t k = 0; k < theta_grid_.size(); ++k) {
        const auto it = std::lower_bound(accum_points_.begin(), accum_points_.end(), theta_grid_[k]);
        utility_nodes_[k] = accum_utility_[static_cast<std::size_t>(it - accum_points_.begin())];
    }
    anchor_nodes_.resize(theta_grid_.size());
    for (std::size_t k = 0; k < theta_grid_.size(); ++k)
        anchor_nodes_[k] = utility_nodes_[k] - expected_accumulated_power(theta_grid_[k]);
}

double OptimalMechanism::power_of(double phi) const {
    if (!(phi > 0.0)) return 0.0;
    const double a = model_->env.alpha;
    return std::pow(a * phi / model_->env.cost, a / (1.0 - a));
}

double OptimalMechanism::quantity(double theta, double v) const {
    const double phi = field_.dynamic(theta, v);
    if (!(phi > 0.0)) return 0.0;
    const double a = model_->env.alpha;
    return std::pow(a * phi / model_->env.cost, 1.0 / (1.0 - a));
}

double OptimalMechanism::quantity_power(double theta, double v) const { return power_of(field_.dynamic(theta, v)); }

std::vector<double> OptimalMechanism::value_breaks(double theta, double lo, double hi) const {
    if (model_->multiplicative() || !(hi > lo)) return {};
    const auto a = field_.try_dynamic(theta, lo);
    const auto b = field_.try_dynamic(theta, hi);
    if (!a || !b || std::signbit(*a) == std::signbit(*b)) return {};
    try {
        return {find_root([&](double v) { return field_.try_dynamic(theta, v).value_or(0.0); }, lo, hi,
                          options_.tol.root)};
    } catch (const BracketError&) {
        return {};
    }
}

double OptimalMechanism::accumulated_power(double theta, double lo, double hi) const {
    if (hi < lo) return -accumulated_power(theta, hi, lo);
    return integrate_piecewise([&](double x) { return quantity_power(theta, x); }, lo, hi,
                               value_breaks(theta, lo, hi));
}

double OptimalMechanism::expected_accumulated_power(double theta) const {
    // E[int_{v_lo}^{v} q^alpha dx | theta] = int_{v_lo}^{vbar} q^alpha (1 - G) dx.
    const auto& fam = *model_->values;
    const double lo = fam.lower_support(theta);
    const double hi = fam.upper_support(theta);
    const double below = accumulated_power(theta, anchor(), lo);
    if (!(hi > lo)) return below;
    return below + integrate_piecewise(
                       [&](double x) { return quantity_power(theta, x) * (1.0 - fam.cdf(x, theta)); }, lo, hi,
                       value_breaks(theta, lo, hi));
}

double OptimalMechanism::utility_slope(double theta) const {
    const auto& fam = *model_->values;
    const double lo = fam.lower_support(theta);
    const double hi = fam.upper_support(theta);
    if (!(hi > lo)) return 0.0;
    return -integrate_piecewise([&](double v) { return quantity_power(theta, v) * fam.theta_partial(v, theta); },
                                lo, hi, value_breaks(theta, lo, hi));
}

double OptimalMechanism::expected_utility(double theta) const {
    const double lo = theta_grid_.lo();
    const double hi = theta_grid_.hi();
    constexpr double slack = 1e-12;
    if (theta < lo - slack || theta > hi + slack) {
        std::ostringstream os;
        os << "signal " << theta << " outside [" << lo << ", " << hi << "]";
        throw DomainError(os.str());
    }
    theta = std::clamp(theta, lo, hi);
    const std::size_t k = theta_grid_.locate(theta);
    if (theta == theta_grid_[k]) return utility_nodes_[k];
    if (theta == theta_grid_[k + 1]) return utility_nodes_[k + 1];
    const auto it = std::upper_bound(accum_points_.begin(), accum_points_.end(), theta);
    const std::size_t j = static_cast<std::size_t>(it - accum_points_.begin()) - 1;
    if (theta == accum_points_[j]) return accum_utility_[j];
    return accum_utility_[j] +
           integrate([&](double t) { return utility_slope(t); }, accum_points_[j], theta);
}

double OptimalMechanism::anchor_or_node(double theta) const {
    const std::size_t k = theta_grid_.locate(std::clamp(theta, theta_grid_.lo(), theta_grid_.hi()));
    if (theta == theta_grid_[k]) return anchor_nodes_[k];
    if (theta == theta_grid_[k + 1]) return anchor_nodes_[k + 1];
    return expected_utility(theta) - expected_accumulated_power(theta);
}

double OptimalMechanism::anchor_utility(double theta) const { return anchor_or_node(theta); }

double OptimalMechanism::expost_utility(double theta, double v) const {
    return anchor_or_node(theta) + accumulated_power(theta, anchor(), v);
}

double OptimalMechanism::transfer(double theta, double v) const {
    return v * quantity_power(theta, v) - expost_utility(theta, v);
}

std::vector<double> OptimalMechanism::transfers(double theta, std::span<const double> vs) const {
    const double base = anchor_or_node(theta);
    std::vector<double> out;
    out.reserve(vs.size());
    for (double v : vs) out.push_back(v * quantity_power(theta, v) - base - accumulated_power(theta, anchor(), v));
    return out;
}

double OptimalMechanism::interim_profit(double theta) const {
    const double base = anchor_or_node(theta);
    const double c = model_->env.cost;
    const double a = model_->env.alpha;
    const auto& fam = *model_->values;
    return expect_given_signal(
        *model_, theta,
        [&](double v) {
            const double qa = quantity_power(theta, v);
            const double q = qa > 0.0 ? std::pow(qa, 1.0 / a) : 0.0;
            return v * qa - base - accumulated_power(theta, anchor(), v) - c * q;
        },
        value_breaks(theta, fam.lower_support(theta), fam.upper_support(theta)));
}

double OptimalMechanism::marginal_price(double theta, double v) const {
    const double phi = field_.dynamic(theta, v);
    if (!(phi > 0.0)) {
        std::ostringstream os;
        os << "marginal price undefined at excluded point (theta, v) = (" << theta << ", " << v << ")";
        throw ExcludedPointError(os.str());
    }
    return model_->env.cost * v / phi;
}

double OptimalMechanism::virtual_surplus() const {
    const double c = model_->env.cost;
    const double a = model_->env.alpha;
    const auto& fam = *model_->values;
    return expect_over_signal(
        *model_,
        [&](double theta) {
            return expect_given_signal(
                *model_, theta,
                [&](double v) {
                    const double phi = field_.dynamic(theta, v);
                    const double qa = power_of(phi);
                    const double q = qa > 0.0 ? std::pow(qa, 1.0 / a) : 0.0;
                    return phi * qa - c * q;
                },
                value_breaks(theta, fam.lower_support(theta), fam.upper_support(theta)));
        },
        breaks_);
}

double seller_profit(const Mechanism& mech) {
    const auto breaks = mech.signal_breaks();
    return expect_over_signal(mech.model(), [&](double theta) { return mech.interim_profit(theta); }, breaks);
}

void export_mechanism_csv(const OptimalMechanism& mech, std::ostream& out) {
    csv::Writer w(out, {"theta", "v", "phi", "q", "t", "u"});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (double theta : mech.theta_grid().points())
        for (double v : mech.v_grid().points()) {
            const auto phi = mech.field().try_dynamic(theta, v);
            if (!phi) {
                w.row({csv::number(theta), csv::number(v), csv::number(nan), csv::number(nan), csv::number(nan),
                       csv::number(nan)});
                continue;
            }
            const double u = mech.expost_utility(theta, v);
            const double qa = mech.quantity_power(theta, v);
            w.row({csv::number(theta), csv::number(v), csv::number(*phi), csv::number(mech.quantity(theta, v)),
                   csv::number(v * qa - u), csv::number(u)});
        }
}

} // namespace seqscreen
