#pragma once

#include "seqscreen/model.hpp"
#include "seqscreen/virtual_value.hpp"

#include <functional>
#include <memory>
#include <ostream>
#include <vector>

namespace seqscreen {

/// A direct mechanism: quantity q(theta, v) and total transfer t(theta, v).
class Mechanism {
public:
    explicit Mechanism(std::shared_ptr<const Model> model);
    virtual ~Mechanism() = default;

    [[nodiscard]] virtual double quantity(double theta, double v) const = 0;
    [[nodiscard]] virtual double transfer(double theta, double v) const = 0;

    /// v q^alpha - t.
    [[nodiscard]] virtual double expost_utility(double theta, double v) const;

    /// E_v[u(theta, v) | theta] of a truthful buyer.
    [[nodiscard]] virtual double interim_utility(double theta) const;

    /// E_v[t - c q | theta].
    [[nodiscard]] virtual double interim_profit(double theta) const;

    /// transfer(theta, v) for every v; implementations may share per-signal work.
    [[nodiscard]] virtual std::vector<double> transfers(double theta, std::span<const double> vs) const;

    /// Signals where the mechanism has a kink; signal integrals split there.
    [[nodiscard]] virtual std::vector<double> signal_breaks() const { return {}; }

    [[nodiscard]] const Model& model() const noexcept { return *model_; }
    [[nodiscard]] const std::shared_ptr<const Model>& model_ptr() const noexcept { return model_; }

protected:
    std::shared_ptr<const Model> model_;
};

/// Mechanism from callables. Used for hand-built and perturbed mechanisms.
class FunctionalMechanism final : public Mechanism {
public:
    using Fn2 = std::function<double(double, double)>;
    FunctionalMechanism(std::shared_ptr<const Model> model, Fn2 quantity, Fn2 transfer,
                        std::vector<double> breaks = {});

    double quantity(double theta, double v) const override { return q_(theta, v); }
    double transfer(double theta, double v) const override { return t_(theta, v); }
    std::vector<double> signal_breaks() const override { return breaks_; }

private:
    Fn2 q_;
    Fn2 t_;
    std::vector<double> breaks_;
};

struct MechanismOptions {
    std::size_t theta_points = 101;
    std::size_t v_points = 101;
    Tolerances tol{};
    /// Refuse (AssumptionError) when FOSD or regularity fails on the tabulation grid.
    bool require_assumptions = true;
};

/// Revenue-optimal sequential screening mechanism.
///
/// q*(theta, v) = (alpha/c * max(phi, 0))^(1/(1-alpha)). Ex-post utilities are
/// anchored at the lowest value of the hull, v_lo:
///   u(theta, v) = u(theta, v_lo) + int_{v_lo}^{v} q*(theta, x)^alpha dx,
/// and U(theta) = int_{theta_lo}^{theta} -int q*^alpha dG/dtheta dv dtheta.
/// U and u(., v_lo) are cached on the signal grid; between nodes the remaining
/// piece of the signal integral is evaluated directly.
class OptimalMechanism final : public Mechanism {
public:
    explicit OptimalMechanism(std::shared_ptr<const Model> model, MechanismOptions options = {});

    double quantity(double theta, double v) const override;
    double transfer(double theta, double v) const override;
    double expost_utility(double theta, double v) const override;
    double interim_utility(double theta) const override { return expected_utility(theta); }
    double interim_profit(double theta) const override;
    std::vector<double> transfers(double theta, std::span<const double> vs) const override;
    std::vector<double> signal_breaks() const override { return breaks_; }

    /// q*(theta, v)^alpha, computed without a round trip through q*.
    [[nodiscard]] double quantity_power(double theta, double v) const;

    /// U(theta) from the envelope formula.
    [[nodiscard]] double expected_utility(double theta) const;

    /// dU/dtheta = -int q*^alpha dG/dtheta dv.
    [[nodiscard]] double utility_slope(double theta) const;

    /// u(theta, v_lo).
    [[nodiscard]] double anchor_utility(double theta) const;

    /// v_lo, the common lower value every ex-post utility is integrated from.
    [[nodiscard]] double anchor() const noexcept { return model_->values->global_lo(); }

    /// dt/dq = c v / phi(theta, v). ExcludedPointError when phi <= 0.
    [[nodiscard]] double marginal_price(double theta, double v) const;

    /// E[phi q*^alpha - c q*].
    [[nodiscard]] double virtual_surplus() const;

    [[nodiscard]] const VirtualValueField& field() const noexcept { return field_; }
    [[nodiscard]] const Grid& theta_grid() const noexcept { return theta_grid_; }
    [[nodiscard]] const Grid& v_grid() const noexcept { return v_grid_; }
    [[nodiscard]] const MechanismOptions& options() const noexcept { return options_; }

private:
    double power_of(double phi) const;
    std::vector<double> value_breaks(double theta, double lo, double hi) const;
    double accumulated_power(double theta, double lo, double hi) const;
    double expected_accumulated_power(double theta) const;
    double anchor_or_node(double theta) const;

    VirtualValueField field_;
    MechanismOptions options_;
    Grid theta_grid_;
    Grid v_grid_;
    std::vector<double> breaks_;
    std::vector<double> utility_nodes_;
    std::vector<double> anchor_nodes_;
    // U on theta_grid_ plus cuts, refined geometrically toward the support ends and exclusion boundaries.
    std::vector<double> accum_points_;
    std::vector<double> accum_utility_;
};

/// E_{theta, v}[t - c q].
double seller_profit(const Mechanism& mech);

/// CSV `theta,v,phi,q,t,u` over the mechanism's tabulation grid.
void export_mechanism_csv(const OptimalMechanism& mech, std::ostream& out);

} // namespace seqscreen
