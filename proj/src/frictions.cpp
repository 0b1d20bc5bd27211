#include "seqscreen/frictions.hpp"

#include "seqscreen/csv.hpp"
#include "seqscreen/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace seqscreen {

double payoff_with_gamma(double v, double q, double t0, double t1, double gamma, double alpha) {
    if (q < 0.0) throw DomainError("negative quantity");
    const double penalty = t0 > 0.0 ? gamma : 0.0;
    return v * std::pow(q, alpha) - (1.0 + penalty) * t0 - t1;
}

double interim_payoff_with_gamma(const Mechanism& mech, double theta, double upfront, double gamma) {
    const double alpha = mech.model().env.alpha;
    const auto& fam = *mech.model().values;
    const double lo = fam.lower_support(theta);
    const double hi = fam.upper_support(theta);
    if (!(hi > lo)) {
        return payoff_with_gamma(lo, mech.quantity(theta, lo), upfront, mech.transfer(theta, lo) - upfront, gamma,
                                 alpha);
    }
    const QuadratureRule& rule = default_rule();
    std::vector<double> vs(rule.nodes.size());
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    for (std::size_t i = 0; i < vs.size(); ++i) vs[i] = mid + half * rule.nodes[i];
    const auto ts = mech.transfers(theta, vs);
    double sum = 0.0;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        const double q = mech.quantity(theta, vs[i]);
        sum += rule.weights[i] * fam.pdf(vs[i], theta) *
               payoff_with_gamma(vs[i], q, upfront, ts[i] - upfront, gamma, alpha);
    }
    return half * sum;
}

GammaContract optimal_contract_under_gamma(std::shared_ptr<const OptimalMechanism> mech, double gamma,
                                           std::span<const double> theta_grid, ContractOptions options) {
    if (!(gamma > 0.0)) throw DomainError("commitment cost gamma must be positive");
    auto contract = build_committed_spend(mech, options);
    const auto tariff = build_two_part_tariff(mech, options);

    GammaContract out{gamma, contract, {}, committed_profit(contract, *mech), true};
    for (double theta : theta_grid) {
        const double committed = interim_payoff_with_gamma(*mech, theta, 0.0, gamma);
        const double budget = contract.budget(theta);
        const double t0 = tariff.upfront(theta);
        const double tariff_payoff = interim_payoff_with_gamma(*mech, theta, t0, gamma);
        double best = std::numeric_limits<double>::quiet_NaN();
        for (double split : {t0, 0.25 * budget, 0.5 * budget, budget}) {
            if (!(split > 0.0)) continue;
            const double payoff = interim_payoff_with_gamma(*mech, theta, split, gamma);
            if (std::isnan(best) || payoff > best) best = payoff;
            if (!(committed > payoff)) out.dominates = false;
        }
        out.rows.push_back({theta, committed, best, tariff_payoff});
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

const MultiplicativeFamily& require_multiplicative(const Model& model) {
    const auto* fam = model.multiplicative();
    if (!fam) throw UnsupportedModelError("spot-market analysis requires multiplicative values");
    return *fam;
}

} // namespace

double spot_cutoff(const Model& model, double spot_price, double tol) {
    require_multiplicative(model);
    const double c = model.env.cost;
    if (!(spot_price > c)) throw DomainError("spot price must exceed marginal cost");
    const auto& F = model.signal;
    const auto grid = Grid::uniform(F.lo(), F.hi(), 101);
    if (!mhr_check(F, grid).passed) throw AssumptionError("refused: signal distribution violates monotone hazard rate");

    const double target = c / spot_price;
    auto gap = [&](double theta) { return (theta - F.inverse_hazard(theta)) / theta - target; };
    if (gap(F.lo()) >= 0.0) return F.lo();
    if (gap(F.hi()) <= 0.0) return F.hi();
    return find_root(gap, F.lo(), F.hi(), tol);
}

double spot_interim_payoff(const Model& model, double theta, double spot_price) {
    const double alpha = model.env.alpha;
    return expect_given_signal(model, theta,
                               [&](double v) { return spot_best_response(v, spot_price, alpha).payoff; });
}

double spot_utility_slope(const Model& model, double theta, double spot_price) {
    const auto& fam = *model.values;
    const double alpha = model.env.alpha;
    const double lo = fam.lower_support(theta);
    const double hi = fam.upper_support(theta);
    if (!(hi > lo)) return 0.0;
    return -integrate(
        [&](double v) {
            const double qa = v > 0.0 ? std::pow(alpha * v / spot_price, alpha / (1.0 - alpha)) : 0.0;
            return qa * fam.theta_partial(v, theta);
        },
        lo, hi);
}

double envelope_derivative_ratio(const Model& model, double theta, double spot_price) {
    require_multiplicative(model);
    const double phi_f = theta - model.signal.inverse_hazard(theta);
    if (!(phi_f > 0.0)) throw ExcludedPointError("static virtual value is non-positive");
    const double alpha = model.env.alpha;
    return std::pow(spot_price / model.env.cost * phi_f / theta, alpha / (1.0 - alpha));
}

// ---------------------------------------------------------------------------

SpotConstrainedMechanism::SpotConstrainedMechanism(std::shared_ptr<const OptimalMechanism> base, double spot_price,
                                                   double cutoff, double discount)
    : Mechanism(base->model_ptr()), base_(std::move(base)), spot_price_(spot_price), cutoff_(cutoff),
      discount_(discount) {}

double SpotConstrainedMechanism::quantity(double theta, double v) const {
    if (!replicates_spot(theta)) return base_->quantity(theta, v);
    return spot_best_response(v, spot_price_, model_->env.alpha).quantity;
}

double SpotConstrainedMechanism::transfer(double theta, double v) const {
    if (!replicates_spot(theta)) return base_->transfer(theta, v) - discount_;
    return spot_price_ * spot_best_response(v, spot_price_, model_->env.alpha).quantity;
}

std::vector<double> SpotConstrainedMechanism::transfers(double theta, std::span<const double> vs) const {
    if (replicates_spot(theta)) return Mechanism::transfers(theta, vs);
    auto out = base_->transfers(theta, vs);
    for (double& t : out) t -= discount_;
    return out;
}

double SpotConstrainedMechanism::interim_utility(double theta) const {
    if (!replicates_spot(theta)) return base_->expected_utility(theta) + discount_;
    return spot_interim_payoff(*model_, theta, spot_price_);
}

double SpotConstrainedMechanism::interim_profit(double theta) const {
    if (!replicates_spot(theta)) return base_->interim_profit(theta) - discount_;
    const double margin = spot_price_ - model_->env.cost;
    return expect_given_signal(
        *model_, theta, [&](double v) { return margin * spot_best_response(v, spot_price_, model_->env.alpha).quantity; });
}

std::vector<double> SpotConstrainedMechanism::signal_breaks() const {
    auto breaks = base_->signal_breaks();
    breaks.push_back(cutoff_);
    return breaks;
}

double SpotMarketSolution::u_spot(double theta) const {
    return spot_interim_payoff(mechanism->model(), theta, spot_price);
}

SpotMarketSolution solve_spot_constrained(std::shared_ptr<const OptimalMechanism> mech, double spot_price) {
    const Model& model = mech->model();
    const double cutoff = spot_cutoff(model, spot_price, mech->options().tol.root);
    const double discount = spot_interim_payoff(model, cutoff, spot_price) - mech->expected_utility(cutoff);
    auto constrained = std::make_shared<SpotConstrainedMechanism>(mech, spot_price, cutoff, discount);

    const auto& F = model.signal;
    std::vector<double> cuts(F.kinks().begin(), F.kinks().end());
    const auto breaks = mech->signal_breaks();
    cuts.insert(cuts.end(), breaks.begin(), breaks.end());
    const double gap = integrate_piecewise(
        [&](double theta) {
            return (mech->interim_profit(theta) - constrained->interim_profit(theta)) * F.pdf(theta);
        },
        F.lo(), cutoff, cuts);
    return SpotMarketSolution{spot_price, cutoff, discount, true, gap, std::move(constrained)};
}

void export_spot_csv(const SpotMarketSolution& sol, std::span<const double> theta_grid, std::ostream& out) {
    csv::Writer w(out, {"theta", "cutoff_flag", "q_source", "t_discount", "u_spot", "u_contract"});
    for (double theta : theta_grid) {
        const bool above = !sol.mechanism->replicates_spot(theta);
        w.row({csv::number(theta), above ? "1" : "0", above ? "optimal" : "spot_replication",
               csv::number(above ? sol.discount : 0.0), csv::number(sol.u_spot(theta)),
               csv::number(sol.mechanism->interim_utility(theta))});
    }
}

} // namespace seqscreen
