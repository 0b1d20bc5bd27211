#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace seqscreen {

using ScalarFn = std::function<double(double)>;

/// Strictly increasing set of abscissae inside [lo, hi]. At least two points.
class Grid {
public:
    Grid(std::vector<double> points, double lo, double hi);

    /// `n` evenly spaced points including both ends.
    static Grid uniform(double lo, double hi, std::size_t n);

    [[nodiscard]] std::span<const double> points() const& noexcept { return points_; }
    /// On a temporary grid the points are moved out, so `for (x : Grid::uniform(..).points())` is safe.
    [[nodiscard]] std::vector<double> points() && { return std::move(points_); }
    [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return points_[i]; }
    [[nodiscard]] double lo() const noexcept { return lo_; }
    [[nodiscard]] double hi() const noexcept { return hi_; }

    /// Index k of the last point with points[k] <= x (clamped to [0, size-2]).
    [[nodiscard]] std::size_t locate(double x) const;

    operator std::span<const double>() const noexcept { return points_; }

private:
    std::vector<double> points_;
    double lo_;
    double hi_;
};

/// Gauss-Legendre nodes and weights on [-1, 1]. Exact for polynomials of degree 2n-1.
struct QuadratureRule {
    int order = 0;
    std::vector<double> nodes;
    std::vector<double> weights;

    static QuadratureRule gauss_legendre(int order);
    [[nodiscard]] int exact_degree() const noexcept { return 2 * order - 1; }
};

/// Shared default rule (order 64).
const QuadratureRule& default_rule();

/// Composite quadrature of `f` over [lo, hi] with `panels` equal subintervals.
/// Returns 0 for an empty interval. Throws EvaluationError on a non-finite sample.
double integrate(const ScalarFn& f, double lo, double hi, const QuadratureRule& rule = default_rule(),
                 int panels = 1);

/// Like integrate(), but splits at every breakpoint strictly inside (lo, hi).
double integrate_piecewise(const ScalarFn& f, double lo, double hi, std::span<const double> breaks,
                           const QuadratureRule& rule = default_rule());

/// Panels graded geometrically toward both ends: [lo, m] is cut at lo + (m-lo) 2^-k for
/// k = 1..levels, and symmetrically on [m, hi]. Resolves endpoint behaviour like (x-lo)^beta.
double integrate_graded(const ScalarFn& f, double lo, double hi, const QuadratureRule& rule, int levels = 20);

/// integrate_graded on each piece of [lo, hi] cut at `breaks`.
double integrate_piecewise_graded(const ScalarFn& f, double lo, double hi, std::span<const double> breaks,
                                  const QuadratureRule& rule, int levels = 20);

/// Shared 16-point rule used on graded panels.
const QuadratureRule& panel_rule();

/// Bracketed root of `f` on [lo, hi] by TOMS 748; returns the midpoint of a bracket
/// no wider than tol. Throws BracketError without a sign change.
double find_root(const ScalarFn& f, double lo, double hi, double tol = 1e-10);

/// Central difference (f(x+h) - f(x-h)) / 2h. A non-positive `h` selects 1e-5 * max(1, |x|).
double derivative(const ScalarFn& f, double x, double h = 0.0);

enum class Direction { increasing, decreasing };

/// True iff each consecutive step moves in `direction`, allowing `tol` of slack.
/// Throws DomainError on an empty list.
bool is_monotone(std::span<const double> values, Direction direction, double tol = 1e-9);

/// Default tolerances; every consumer takes these by value so they can be overridden.
struct Tolerances {
    double root = 1e-10;
    double integration = 1e-10;
    double monotone = 1e-9;
    double ic = 1e-7;
};

} // namespace seqscreen
