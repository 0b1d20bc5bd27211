#include "seqscreen/verify.hpp"

#include "seqscreen/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace seqscreen {

namespace {

/// Records a violation if it is the worst so far.
void note(CheckResult& r, double violation, std::vector<std::pair<std::string, double>> at) {
    if (violation > r.tolerance) r.passed = false;
    if (violation > r.worst_violation) {
        r.worst_violation = violation;
        r.at = std::move(at);
    }
}

CheckResult start(std::string name, double tol) {
    CheckResult r;
    r.name = std::move(name);
    r.tolerance = tol;
    return r;
}

} // namespace

double report_payoff(const Mechanism& mech, double theta, double report) {
    const auto& fam = *mech.model().values;
    const double alpha = mech.model().env.alpha;
    const double lo = fam.lower_support(theta);
    const double hi = fam.upper_support(theta);
    if (!(hi > lo)) return mech.expost_utility(report, lo);

    const QuadratureRule& rule = default_rule();
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    std::vector<double> vs(rule.nodes.size());
    for (std::size_t i = 0; i < vs.size(); ++i) vs[i] = mid + half * rule.nodes[i];
    const auto ts = mech.transfers(report, vs);
    double sum = 0.0;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        const double u = vs[i] * std::pow(mech.quantity(report, vs[i]), alpha) - ts[i];
        sum += rule.weights[i] * fam.pdf(vs[i], theta) * u;
    }
    return half * sum;
}

DeviationMatrix deviation_matrix(const Mechanism& mech, std::span<const double> theta_grid) {
    DeviationMatrix m;
    m.thetas.assign(theta_grid.begin(), theta_grid.end());
    const std::size_t n = m.thetas.size();
    m.w.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m.w[i * n + j] = report_payoff(mech, m.thetas[i], m.thetas[j]);
    return m;
}

CheckResult check_ic0(const DeviationMatrix& matrix, double tol) {
    auto r = start("ic0", tol);
    const std::size_t n = matrix.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            note(r, matrix(i, j) - matrix(i, i), {{"theta", matrix.thetas[i]}, {"theta_report", matrix.thetas[j]}});
    return r;
}

CheckResult check_single_crossing(const DeviationMatrix& matrix, double tol) {
    auto r = start("single_crossing", tol);
    const std::size_t n = matrix.size();
    for (std::size_t lo = 0; lo < n; ++lo)
        for (std::size_t hi = lo + 1; hi < n; ++hi)
            for (std::size_t i = 1; i < n; ++i) {
                const double prev = matrix(i - 1, hi) - matrix(i - 1, lo);
                const double cur = matrix(i, hi) - matrix(i, lo);
                note(r, prev - cur,
                     {{"theta", matrix.thetas[i]}, {"theta_low", matrix.thetas[lo]}, {"theta_high", matrix.thetas[hi]}});
            }
    return r;
}

CheckResult check_ic1(const Mechanism& mech, double theta, std::span<const double> v_grid, double tol) {
    const double thetas[] = {theta};
    return check_ic1(mech, thetas, v_grid, tol);
}

CheckResult check_ic1(const Mechanism& mech, std::span<const double> thetas, std::span<const double> v_grid,
                      double tol) {
    auto r = start("ic1", tol);
    const double alpha = mech.model().env.alpha;
    for (double theta : thetas) {
        const auto ts = mech.transfers(theta, v_grid);
        std::vector<double> qa(v_grid.size());
        for (std::size_t k = 0; k < v_grid.size(); ++k) qa[k] = std::pow(mech.quantity(theta, v_grid[k]), alpha);
        for (std::size_t i = 0; i < v_grid.size(); ++i) {
            const double truthful = v_grid[i] * qa[i] - ts[i];
            for (std::size_t j = 0; j < v_grid.size(); ++j)
                note(r, v_grid[i] * qa[j] - ts[j] - truthful,
                     {{"theta", theta}, {"v", v_grid[i]}, {"v_report", v_grid[j]}});
        }
    }
    return r;
}

CheckResult check_ir(const Mechanism& mech, const ScalarFn& outside_option, std::span<const double> theta_grid,
                     double tol) {
    auto r = start("ir", tol);
    for (double theta : theta_grid) {
        const double gap = mech.interim_utility(theta) - outside_option(theta);
        if (std::abs(gap) <= tol) r.binding.push_back(theta);
        note(r, -gap, {{"theta", theta}});
    }
    return r;
}

CheckResult check_revenue_equivalence(const Mechanism& mech, const TwoPartTariff& tariff,
                                      const CommittedSpendContract& contract, std::span<const double> theta_grid,
                                      std::size_t v_points, EquivalenceTolerances tol) {
    auto r = start("revenue_equivalence", tol.payment);
    const auto& fam = *mech.model().values;
    for (double theta : theta_grid) {
        const double lo = fam.lower_support(theta);
        const double hi = fam.upper_support(theta);
        std::vector<double> vs{lo};
        if (hi > lo && v_points >= 2) {
            const auto g = Grid::uniform(lo, hi, v_points);
            vs.assign(g.points().begin(), g.points().end());
        }
        const auto direct = mech.transfers(theta, vs);
        const double t0 = tariff.upfront(theta);
        const auto usage = tariff.schedule(theta);
        const auto committed = contract.schedule(theta);
        for (std::size_t i = 0; i < vs.size(); ++i) {
            const double q = mech.quantity(theta, vs[i]);
            const double gap = std::max(std::abs(t0 + usage(q) - direct[i]), std::abs(committed(q) - direct[i]));
            note(r, gap, {{"theta", theta}, {"v", vs[i]}});
        }
    }

    const double direct = seller_profit(mech);
    const double gap = std::max(std::abs(tariff_profit(tariff, mech) - direct),
                                std::abs(committed_profit(contract, mech) - direct));
    if (gap > tol.profit) {
        r.passed = false;
        if (gap > r.worst_violation) {
            r.worst_violation = gap;
            r.at = {{"profit", direct}};
        }
    }
    return r;
}

CheckResult check_allocation_oracle(const OptimalMechanism& mech, std::span<const double> thetas,
                                    std::span<const double> vs, std::size_t q_points) {
    if (q_points < 2) throw DomainError("allocation oracle needs at least two quantities");
    const double alpha = mech.model().env.alpha;
    const double c = mech.model().env.cost;

    double phi_max = 0.0;
    for (double theta : thetas)
        for (double v : vs)
            if (const auto phi = mech.field().try_dynamic(theta, v)) phi_max = std::max(phi_max, *phi);
    const double q_hi = phi_max > 0.0 ? 2.0 * std::pow(alpha * phi_max / c, 1.0 / (1.0 - alpha)) : 1.0;
    const double step = q_hi / static_cast<double>(q_points - 1);

    auto r = start("allocation_oracle", step);
    for (double theta : thetas)
        for (double v : vs) {
            const auto phi = mech.field().try_dynamic(theta, v);
            if (!phi) continue;
            double best_q = 0.0;
            double best = 0.0;
            for (std::size_t k = 1; k < q_points; ++k) {
                const double q = step * static_cast<double>(k);
                const double obj = *phi * std::pow(q, alpha) - c * q;
                if (obj > best) {
                    best = obj;
                    best_q = q;
                }
            }
            note(r, std::abs(mech.quantity(theta, v) - best_q), {{"theta", theta}, {"v", v}});
        }
    return r;
}

CheckResult as_check(const DiagnosticReport& report, double tol) {
    auto r = start(report.name, tol);
    r.passed = report.passed;
    r.worst_violation = report.worst;
    for (const auto& v : report.violations)
        if (v.magnitude == report.worst) {
            r.at = v.at;
            break;
        }
    return r;
}

Grid refine(const Grid& grid, std::size_t factor) {
    if (factor == 0) throw DomainError("refinement factor must be positive");
    if (factor == 1) return grid;
    std::vector<double> pts;
    pts.reserve((grid.size() - 1) * factor + 1);
    for (std::size_t k = 0; k + 1 < grid.size(); ++k)
        for (std::size_t s = 0; s < factor; ++s)
            pts.push_back(grid[k] + (grid[k + 1] - grid[k]) * static_cast<double>(s) / static_cast<double>(factor));
    pts.push_back(grid[grid.size() - 1]);
    return Grid(std::move(pts), grid.lo(), grid.hi());
}

bool VerificationReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::string VerificationReport::to_json() const {
    using json = nlohmann::ordered_json;
    auto num = [](double x) -> json { return std::isfinite(x) ? json(x) : json(nullptr); };
    json out = json::array();
    for (const auto& c : checks) {
        json at = json::object();
        for (const auto& [k, v] : c.at) at[k] = num(v);
        json entry = {{"check", c.name},
                      {"pass", c.passed},
                      {"worst_violation", num(c.worst_violation)},
                      {"at", at},
                      {"tolerance", num(c.tolerance)}};
        if (!c.binding.empty()) {
            json b = json::array();
            for (double t : c.binding) b.push_back(num(t));
            entry["binding"] = b;
        }
        out.push_back(entry);
    }
    return out.dump(2) + "\n";
}

} // namespace seqscreen
