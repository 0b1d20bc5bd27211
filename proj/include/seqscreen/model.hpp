#pragma once

#include "seqscreen/numerics.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace seqscreen {

/// Payoff primitives: buyer gets v q^alpha - t, seller gets t - c q.
struct Environment {
    double alpha = 0.5;
    double cost = 1.0;
    double gamma = 0.0;                    // penalty on strictly positive period-0 payments
    std::optional<double> spot_price;      // posted period-1 spot price, > cost when present

    /// Throws DomainError unless 0 < alpha < 1, cost > 0, gamma >= 0 and spot_price > cost.
    void validate() const;
};

/// Distribution F of the period-0 signal on [lo, hi].
class SignalDistribution {
public:
    SignalDistribution(double lo, double hi, ScalarFn cdf, ScalarFn pdf, std::vector<double> kinks = {});

    static SignalDistribution uniform(double lo, double hi);

    struct Component {
        double weight;
        double lo;
        double hi;
    };
    /// Finite mixture of uniforms; weights are normalised.
    static SignalDistribution uniform_mixture(std::vector<Component> components);

    [[nodiscard]] double lo() const noexcept { return lo_; }
    [[nodiscard]] double hi() const noexcept { return hi_; }
    [[nodiscard]] double cdf(double theta) const { return cdf_(theta); }
    [[nodiscard]] double pdf(double theta) const { return pdf_(theta); }

    /// Inverse hazard (1 - F) / f. Zero at the top; UndefinedDensityError where f = 0 below it.
    [[nodiscard]] double inverse_hazard(double theta) const;

    /// Points inside (lo, hi) where the density jumps; quadrature splits there.
    [[nodiscard]] std::span<const double> kinks() const noexcept { return kinks_; }

private:
    double lo_;
    double hi_;
    ScalarFn cdf_;
    ScalarFn pdf_;
    std::vector<double> kinks_;
};

/// Shock distribution H of z for the multiplicative family v = theta z.
struct ShockDistribution {
    double lo;
    double hi;
    ScalarFn cdf;
    ScalarFn pdf;

    static ShockDistribution uniform(double lo, double hi);
};

class MultiplicativeFamily;

/// Conditional value distribution G(v | theta).
class ConditionalValueFamily {
public:
    virtual ~ConditionalValueFamily() = default;

    [[nodiscard]] virtual double cdf(double v, double theta) const = 0;
    [[nodiscard]] virtual double pdf(double v, double theta) const = 0;

    /// dG/dtheta. Default is a central difference; families with a closed form override it.
    [[nodiscard]] virtual double theta_partial(double v, double theta) const;

    [[nodiscard]] virtual double lower_support(double theta) const = 0;
    [[nodiscard]] virtual double upper_support(double theta) const = 0;

    /// (dG/dtheta) / g at (theta, v), or nullopt where g vanishes and the family
    /// declares no extension there.
    [[nodiscard]] virtual std::optional<double> score_ratio(double v, double theta) const;

    /// Signal range the family is defined on.
    [[nodiscard]] double theta_lo() const noexcept { return theta_lo_; }
    [[nodiscard]] double theta_hi() const noexcept { return theta_hi_; }

    /// Hull of all type supports.
    [[nodiscard]] double global_lo() const noexcept { return global_lo_; }
    [[nodiscard]] double global_hi() const noexcept { return global_hi_; }

    [[nodiscard]] virtual const MultiplicativeFamily* as_multiplicative() const noexcept { return nullptr; }

protected:
    ConditionalValueFamily(double theta_lo, double theta_hi) : theta_lo_(theta_lo), theta_hi_(theta_hi) {}
    /// Derived constructors call this once supports are callable.
    void set_hull(double lo, double hi) {
        global_lo_ = lo;
        global_hi_ = hi;
    }
    double theta_lo_;
    double theta_hi_;

private:
    double global_lo_ = 0.0;
    double global_hi_ = 0.0;
};

/// v = theta z with z ~ H independent of theta. G(v|theta) = H(v/theta).
/// The score ratio -v/theta extends to the whole rectangle.
class MultiplicativeFamily final : public ConditionalValueFamily {
public:
    MultiplicativeFamily(ShockDistribution shock, double theta_lo, double theta_hi);

    double cdf(double v, double theta) const override;
    double pdf(double v, double theta) const override;
    double theta_partial(double v, double theta) const override;
    double lower_support(double theta) const override { return theta * shock_.lo; }
    double upper_support(double theta) const override { return theta * shock_.hi; }
    std::optional<double> score_ratio(double v, double theta) const override { return -v / theta; }
    const MultiplicativeFamily* as_multiplicative() const noexcept override { return this; }

    [[nodiscard]] const ShockDistribution& shock() const noexcept { return shock_; }

private:
    ShockDistribution shock_;
};

/// Family given by callables; theta_partial falls back to a central difference when absent.
class FunctionalFamily final : public ConditionalValueFamily {
public:
    using Fn2 = std::function<double(double, double)>;
    FunctionalFamily(Fn2 cdf, Fn2 pdf, std::optional<Fn2> theta_partial, ScalarFn lower, ScalarFn upper,
                     double theta_lo, double theta_hi);

    double cdf(double v, double theta) const override { return cdf_(v, theta); }
    double pdf(double v, double theta) const override { return pdf_(v, theta); }
    double theta_partial(double v, double theta) const override;
    double lower_support(double theta) const override { return lower_(theta); }
    double upper_support(double theta) const override { return upper_(theta); }

private:
    Fn2 cdf_;
    Fn2 pdf_;
    std::optional<Fn2> dtheta_;
    ScalarFn lower_;
    ScalarFn upper_;
};

/// Family read from a rectangular table `theta,v,G,g,dG_dtheta`, bilinearly interpolated.
/// Off-support the score ratio is held at its value on the nearest support edge.
class TabulatedFamily final : public ConditionalValueFamily {
public:
    TabulatedFamily(std::vector<double> thetas, std::vector<double> values, std::vector<double> cdf,
                    std::vector<double> pdf, std::vector<double> dtheta);

    static TabulatedFamily load_csv(const std::filesystem::path& path);
    void save_csv(const std::filesystem::path& path) const;

    double cdf(double v, double theta) const override { return interp(cdf_, v, theta, 0.0, 1.0); }
    double pdf(double v, double theta) const override { return interp(pdf_, v, theta, 0.0, 0.0); }
    double theta_partial(double v, double theta) const override { return interp(dtheta_, v, theta, 0.0, 0.0); }
    double lower_support(double theta) const override;
    double upper_support(double theta) const override;
    std::optional<double> score_ratio(double v, double theta) const override;

    [[nodiscard]] double theta_min() const noexcept { return thetas_.front(); }
    [[nodiscard]] double theta_max() const noexcept { return thetas_.back(); }

private:
    double interp(const std::vector<double>& table, double v, double theta, double below, double above) const;
    double row_edge(const std::vector<double>& edges, double theta) const;

    std::vector<double> thetas_;
    std::vector<double> values_;
    std::vector<double> cdf_;    // row-major [theta][v]
    std::vector<double> pdf_;
    std::vector<double> dtheta_;
    std::vector<double> lower_;  // per-row support edges
    std::vector<double> upper_;
};

/// Everything the solver needs about the economy.
struct Model {
    Environment env;
    SignalDistribution signal;
    std::shared_ptr<const ConditionalValueFamily> values;

    [[nodiscard]] const MultiplicativeFamily* multiplicative() const noexcept { return values->as_multiplicative(); }
};

/// theta ~ U[1,2], z ~ U[1/2,1], v = theta z, alpha = 1/2, c = 1.
Model example1_model();

/// Multiplicative model with the given signal and shock.
Model multiplicative_model(Environment env, SignalDistribution signal, ShockDistribution shock);

/// E[fn(v) | theta] over the type's support, split at `breaks` when given.
double expect_given_signal(const Model& model, double theta, const ScalarFn& fn,
                           std::span<const double> breaks = {}, const QuadratureRule& rule = default_rule());

/// E[fn(theta)] under F, split at density kinks and `breaks`. Each piece is integrated on
/// panels graded toward its ends, since interim quantities have power-law behaviour at
/// exclusion boundaries.
double expect_over_signal(const Model& model, const ScalarFn& fn, std::span<const double> breaks = {},
                          const QuadratureRule& rule = panel_rule());

struct Violation {
    std::vector<std::pair<std::string, double>> at;
    double magnitude = 0.0;
};

struct DiagnosticReport {
    std::string name;
    bool passed = true;
    double worst = 0.0;
    std::vector<Violation> violations;

    void record(Violation v);
};

/// G(v|theta) <= G(v|theta') + slack for every theta > theta' on the grids.
DiagnosticReport fosd_check(const ConditionalValueFamily& family, std::span<const double> theta_grid,
                            std::span<const double> v_grid, double slack = 1e-9);

struct SpotResponse {
    double quantity;
    double payoff;
};

/// argmax_q { v q^alpha - p q } and its value.
SpotResponse spot_best_response(double v, double price, double alpha);

} // namespace seqscreen
