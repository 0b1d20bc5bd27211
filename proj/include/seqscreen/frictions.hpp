#pragma once

#include "seqscreen/contracts.hpp"
#include "seqscreen/mechanism.hpp"

#include <memory>
#include <ostream>
#include <vector>

namespace seqscreen {

// ---------------------------------------------------------------------------
// Commitment cost
// ---------------------------------------------------------------------------

/// v q^alpha - (1 + gamma [t0 > 0]) t0 - t1.
double payoff_with_gamma(double v, double q, double t0, double t1, double gamma, double alpha);

/// Interim payoff of a truthful buyer when `upfront` of the total transfer is paid in period 0.
double interim_payoff_with_gamma(const Mechanism& mech, double theta, double upfront, double gamma);

struct GammaDominanceRow {
    double theta;
    double committed_payoff;     // upfront = 0
    double best_split_payoff;    // best payoff over tested splits with upfront > 0; NaN if none
    double tariff_payoff;        // split with upfront = t0(theta) of the two-part tariff
};

struct GammaContract {
    double gamma;
    CommittedSpendContract contract;
    std::vector<GammaDominanceRow> rows;
    double seller_profit;         // total payments are only retimed
    bool dominates;               // committed payoff >= every tested split, strictly where upfront > 0
};

/// Committed-spend contract with maximal B, plus the dominance audit over `theta_grid`.
/// Tested splits: the tariff upfront t0(theta) and fractions of B(theta).
/// Throws DomainError unless gamma > 0.
GammaContract optimal_contract_under_gamma(std::shared_ptr<const OptimalMechanism> mech, double gamma,
                                           std::span<const double> theta_grid, ContractOptions options = {});

// ---------------------------------------------------------------------------
// Spot market
// ---------------------------------------------------------------------------

/// Root of phi_F(theta)/theta = c / p_s, clamped to the signal support.
/// Requires multiplicative values and p_s > c.
double spot_cutoff(const Model& model, double spot_price, double tol = 1e-10);

/// u_S(theta) = E[max_q { v q^alpha - p_s q } | theta].
double spot_interim_payoff(const Model& model, double theta, double spot_price);

/// d u_S / d theta = -int q_S(v)^alpha dG/dtheta dv.
double spot_utility_slope(const Model& model, double theta, double spot_price);

/// (p_s/c * phi_F(theta)/theta)^(alpha/(1-alpha)); ExcludedPointError when phi_F <= 0.
double envelope_derivative_ratio(const Model& model, double theta, double spot_price);

/// Mechanism constrained by the spot market. Above the cutoff it is q*, t* - t_c;
/// below it replicates the spot market (heuristic lower bound, not the optimum).
class SpotConstrainedMechanism final : public Mechanism {
public:
    SpotConstrainedMechanism(std::shared_ptr<const OptimalMechanism> base, double spot_price, double cutoff,
                             double discount);

    double quantity(double theta, double v) const override;
    double transfer(double theta, double v) const override;
    double interim_utility(double theta) const override;
    double interim_profit(double theta) const override;
    std::vector<double> transfers(double theta, std::span<const double> vs) const override;
    std::vector<double> signal_breaks() const override;

    [[nodiscard]] bool replicates_spot(double theta) const noexcept { return theta < cutoff_; }

private:
    std::shared_ptr<const OptimalMechanism> base_;
    double spot_price_;
    double cutoff_;
    double discount_;
};

struct SpotMarketSolution {
    double spot_price;
    double theta_star;
    double discount;          // t_c = u_S(theta*) - U(theta*)
    bool heuristic = true;    // allocation below theta* is spot replication
    double heuristic_gap;     // relaxed minus fallback revenue on [theta_lo, theta*)
    std::shared_ptr<const SpotConstrainedMechanism> mechanism;

    [[nodiscard]] double u_spot(double theta) const;
};

SpotMarketSolution solve_spot_constrained(std::shared_ptr<const OptimalMechanism> mech, double spot_price);

/// CSV `theta,cutoff_flag,q_source,t_discount,u_spot,u_contract` over `theta_grid`.
void export_spot_csv(const SpotMarketSolution& sol, std::span<const double> theta_grid, std::ostream& out);

} // namespace seqscreen
