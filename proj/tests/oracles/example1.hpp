#pragma once

// Closed forms for the running example: theta ~ U[1,2], v = theta z with z ~ U[1/2,1],
// alpha = 1/2, c = 1. Derived by hand, independent of the solver.

#include <algorithm>

namespace oracle::example1 {

inline double phi_f(double theta) { return 2.0 * (theta - 1.0); }
inline double phi(double theta, double v) { return 2.0 * v * (theta - 1.0) / theta; }
inline double quantity(double theta, double v) {
    const double p = std::max(phi(theta, v), 0.0);
    return p * p / 4.0;
}

/// E[v^2 | theta] = theta^2 E[z^2] = 7 theta^2 / 12.
inline double second_moment(double theta) { return 7.0 * theta * theta / 12.0; }

inline double expected_utility(double theta) { return 7.0 * (theta - 1.0) * (theta - 1.0) / 24.0; }
inline double utility_slope(double theta) { return 7.0 * (theta - 1.0) / 12.0; }

/// u(theta, 1/2).
inline double anchor_utility(double theta) { return -(theta - 1.0) * (7.0 * theta - 3.0) / (24.0 * theta); }

/// u(theta, v) = u(theta, 1/2) + int_{1/2}^{v} x (theta-1)/theta dx.
inline double expost_utility(double theta, double v) {
    return anchor_utility(theta) + (theta - 1.0) / (2.0 * theta) * (v * v - 0.25);
}

/// v q^alpha - u with q^alpha = v (theta-1)/theta.
inline double transfer(double theta, double v) { return v * v * (theta - 1.0) / theta - expost_utility(theta, v); }

inline double upfront(double theta) { return -anchor_utility(theta); }
inline double budget(double theta) { return theta <= 1.0 ? 0.0 : transfer(theta, theta / 2.0); }

inline constexpr double profit = 7.0 / 36.0;

inline double unit_price(double theta) { return theta / (2.0 * (theta - 1.0)); }

/// E[max_q v sqrt(q) - p q | theta] = E[v^2]/(4p).
inline double spot_payoff(double theta, double p) { return second_moment(theta) / (4.0 * p); }
inline double spot_slope(double theta, double p) { return 7.0 * theta / (24.0 * p); }

/// Root of 2(theta-1)/theta = c/p with c = 1.
inline double cutoff(double p) { return 2.0 * p / (2.0 * p - 1.0); }
inline double discount(double p) { return spot_payoff(cutoff(p), p) - expected_utility(cutoff(p)); }

} // namespace oracle::example1
