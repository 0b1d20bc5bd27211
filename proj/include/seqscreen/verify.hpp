#pragma once

#include "seqscreen/contracts.hpp"
#include "seqscreen/mechanism.hpp"

#include <string>
#include <utility>
#include <vector>

namespace seqscreen {

/// w(theta, theta') = E[u(theta', v) | theta]: interim payoff of reporting theta'
/// and then reporting v truthfully.
struct DeviationMatrix {
    std::vector<double> thetas;
    std::vector<double> w;  // row-major, row = true signal

    [[nodiscard]] std::size_t size() const noexcept { return thetas.size(); }
    [[nodiscard]] double operator()(std::size_t truth, std::size_t report) const {
        return w[truth * thetas.size() + report];
    }
};

/// Interim payoff of a type-theta buyer who reports `report` in period 0.
double report_payoff(const Mechanism& mech, double theta, double report);

DeviationMatrix deviation_matrix(const Mechanism& mech, std::span<const double> theta_grid);

struct CheckResult {
    std::string name;
    bool passed = true;
    double worst_violation = 0.0;  // payoff units; 0 when nothing is violated
    std::vector<std::pair<std::string, double>> at;
    double tolerance = 0.0;
    std::vector<double> binding;   // where an IR constraint holds with equality
};

/// Truthful report maximizes every row within tol.
CheckResult check_ic0(const DeviationMatrix& matrix, double tol);

/// For theta_L < theta_H, theta -> w(theta, theta_H) - w(theta, theta_L) is nondecreasing.
CheckResult check_single_crossing(const DeviationMatrix& matrix, double tol);

/// v q(theta, v)^alpha - t(theta, v) >= v q(theta, v')^alpha - t(theta, v') - tol on the grid.
CheckResult check_ic1(const Mechanism& mech, double theta, std::span<const double> v_grid, double tol);

/// check_ic1 at every listed signal; the worst violation over all of them is reported.
CheckResult check_ic1(const Mechanism& mech, std::span<const double> thetas, std::span<const double> v_grid,
                      double tol);

/// interim_utility(theta) >= outside_option(theta) - tol; binding where |gap| <= tol.
CheckResult check_ir(const Mechanism& mech, const ScalarFn& outside_option, std::span<const double> theta_grid,
                     double tol);

struct EquivalenceTolerances {
    double payment = 1e-10;
    double profit = 1e-7;
};

/// Total payments agree pointwise on each type's equilibrium points, and expected profits agree.
CheckResult check_revenue_equivalence(const Mechanism& mech, const TwoPartTariff& tariff,
                                      const CommittedSpendContract& contract, std::span<const double> theta_grid,
                                      std::size_t v_points, EquivalenceTolerances tol = {});

/// q*(theta, v) against the argmax of phi q^alpha - c q over `q_points` evenly spaced
/// quantities; a point passes when it is within one grid step of the brute-force maximizer.
CheckResult check_allocation_oracle(const OptimalMechanism& mech, std::span<const double> thetas,
                                    std::span<const double> vs, std::size_t q_points);

/// Converts a monotonicity or ordering diagnostic into a check entry.
CheckResult as_check(const DiagnosticReport& report, double tol);

/// Inserts factor - 1 evenly spaced points inside every grid interval.
Grid refine(const Grid& grid, std::size_t factor);

struct VerificationReport {
    std::vector<CheckResult> checks;

    [[nodiscard]] bool passed() const;
    /// JSON array of {check, pass, worst_violation, at, tolerance[, binding]}.
    [[nodiscard]] std::string to_json() const;
};

} // namespace seqscreen
