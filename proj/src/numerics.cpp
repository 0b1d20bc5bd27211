#include "seqscreen/numerics.hpp"

#include "seqscreen/errors.hpp"

#include <boost/math/special_functions/legendre.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace seqscreen {

namespace {

std::string describe(const char* what, double a, double b) {
    std::ostringstream os;
    os.precision(17);
    os << what << " (" << a << ", " << b << ")";
    return os.str();
}

double checked(const ScalarFn& f, double x) {
    const double y = f(x);
    if (!std::isfinite(y)) throw EvaluationError(x, y);
    return y;
}

} // namespace

EvaluationError::EvaluationError(double abscissa, double value)
    : Error(describe("non-finite evaluation at (x, f(x)) =", abscissa, value)),
      abscissa_(abscissa), value_(value) {}

BracketError::BracketError(double lo, double hi, double f_lo, double f_hi)
    : Error(describe("no sign change on", lo, hi) + describe(" with endpoint values", f_lo, f_hi)) {}

Grid::Grid(std::vector<double> points, double lo, double hi)
    : points_(std::move(points)), lo_(lo), hi_(hi) {
    if (!(lo < hi)) throw DomainError(describe("grid bounds must satisfy lo < hi, got", lo, hi));
    if (points_.size() < 2) throw DomainError("grid needs at least two points");
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (points_[i] < lo_ || points_[i] > hi_) throw DomainError("grid point outside bounds");
        if (i > 0 && !(points_[i] > points_[i - 1])) throw DomainError("grid points must be strictly increasing");
    }
}

Grid Grid::uniform(double lo, double hi, std::size_t n) {
    if (n < 2) throw DomainError("uniform grid needs at least two points");
    std::vector<double> pts(n);
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) pts[i] = lo + step * static_cast<double>(i);
    pts.back() = hi;
    return Grid(std::move(pts), lo, hi);
}

std::size_t Grid::locate(double x) const {
    auto it = std::upper_bound(points_.begin(), points_.end(), x);
    std::size_t k = it == points_.begin() ? 0 : static_cast<std::size_t>(it - points_.begin()) - 1;
    return std::min(k, points_.size() - 2);
}

QuadratureRule QuadratureRule::gauss_legendre(int order) {
    if (order < 1) throw DomainError("quadrature order must be positive");
    QuadratureRule rule;
    rule.order = order;
    rule.nodes.assign(static_cast<std::size_t>(order), 0.0);
    rule.weights.assign(static_cast<std::size_t>(order), 0.0);
    if (order == 1) {
        rule.weights[0] = 2.0;
        return rule;
    }
    // Nonnegative zeros of P_n in increasing order; the rule is symmetric.
    const auto zeros = boost::math::legendre_p_zeros<double>(order);
    const auto n = static_cast<std::size_t>(order);
    for (std::size_t i = 0; i < zeros.size(); ++i) {
        const double x = zeros[i];
        const double dp = boost::math::legendre_p_prime<double>(order, x);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        const std::size_t up = n / 2 + i;
        const std::size_t down = (n - 1) / 2 - i;
        rule.nodes[up] = x;
        rule.weights[up] = w;
        rule.nodes[down] = -x;
        rule.weights[down] = w;
    }
    return rule;
}

const QuadratureRule& default_rule() {
    static const QuadratureRule rule = QuadratureRule::gauss_legendre(64);
    return rule;
}

double integrate(const ScalarFn& f, double lo, double hi, const QuadratureRule& rule, int panels) {
    if (hi < lo) throw DomainError(describe("integration bounds reversed", lo, hi));
    if (hi == lo) return 0.0;
    if (panels < 1) panels = 1;
    const double width = (hi - lo) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double a = lo + width * p;
        const double b = p + 1 == panels ? hi : a + width;
        const double mid = 0.5 * (a + b);
        const double half = 0.5 * (b - a);
        double sum = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            sum += rule.weights[i] * checked(f, mid + half * rule.nodes[i]);
        total += half * sum;
    }
    return total;
}

double integrate_piecewise(const ScalarFn& f, double lo, double hi, std::span<const double> breaks,
                           const QuadratureRule& rule) {
    if (hi < lo) throw DomainError(describe("integration bounds reversed", lo, hi));
    std::vector<double> cuts{lo};
    for (double b : breaks)
        if (b > lo && b < hi) cuts.push_back(b);
    std::sort(cuts.begin() + 1, cuts.end());
    cuts.push_back(hi);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += integrate(f, cuts[i], cuts[i + 1], rule);
    return total;
}

double integrate_graded(const ScalarFn& f, double lo, double hi, const QuadratureRule& rule, int levels) {
    if (hi < lo) throw DomainError(describe("integration bounds reversed", lo, hi));
    if (hi == lo) return 0.0;
    const double mid = 0.5 * (lo + hi);
    const double half = mid - lo;
    // Panels narrower than this would put nodes outside [lo, hi] after rounding.
    const double floor_width = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
    while (levels > 0 && std::ldexp(half, -levels) < floor_width) --levels;
    if (levels == 0) return integrate(f, lo, hi, rule);
    double total = 0.0;
    double inner = std::ldexp(half, -levels);
    total += integrate(f, lo, lo + inner, rule) + integrate(f, hi - inner, hi, rule);
    for (int k = levels; k > 0; --k) {
        const double outer = k == 1 ? half : std::ldexp(half, -(k - 1));
        total += integrate(f, lo + inner, k == 1 ? mid : lo + outer, rule);
        total += integrate(f, k == 1 ? mid : hi - outer, hi - inner, rule);
        inner = outer;
    }
    return total;
}

double integrate_piecewise_graded(const ScalarFn& f, double lo, double hi, std::span<const double> breaks,
                                  const QuadratureRule& rule, int levels) {
    if (hi < lo) throw DomainError(describe("integration bounds reversed", lo, hi));
    std::vector<double> cuts{lo};
    for (double b : breaks)
        if (b > lo && b < hi) cuts.push_back(b);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += integrate_graded(f, cuts[i], cuts[i + 1], rule, levels);
    return total;
}

const QuadratureRule& panel_rule() {
    static const QuadratureRule rule = QuadratureRule::gauss_legendre(16);
    return rule;
}

double find_root(const ScalarFn& f, double lo, double hi, double tol) {
    if (!(tol > 0.0)) throw DomainError("root tolerance must be positive");
    if (hi < lo) std::swap(lo, hi);
    double a = lo;
    double b = hi;
    double fa = checked(f, a);
    double fb = checked(f, b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (std::signbit(fa) == std::signbit(fb)) throw BracketError(lo, hi, fa, fb);

    boost::uintmax_t max_iter = 200;
    const auto [a1, b1] = boost::math::tools::toms748_solve(
        [&](double x) { return checked(f, x); }, a, b, fa, fb, [tol](double l, double r) { return r - l <= tol; },
        max_iter);
    return 0.5 * (a1 + b1);
}

double derivative(const ScalarFn& f, double x, double h) {
    if (!(h > 0.0)) h = 1e-5 * std::max(1.0, std::abs(x));
    return (checked(f, x + h) - checked(f, x - h)) / (2.0 * h);
}

bool is_monotone(std::span<const double> values, Direction direction, double tol) {
    if (values.empty()) throw DomainError("monotonicity check needs at least one value");
    for (std::size_t i = 1; i < values.size(); ++i) {
        const double step = values[i] - values[i - 1];
        if (direction == Direction::increasing ? step < -tol : step > tol) return false;
    }
    return true;
}

} // namespace seqscreen
