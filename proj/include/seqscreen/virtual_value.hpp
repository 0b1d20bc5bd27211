#pragma once

#include "seqscreen/model.hpp"

#include <memory>

namespace seqscreen {

/// Dynamic virtual value phi(theta, v) = v + [(1-F)/f] * [(dG/dtheta)/g].
///
/// With multiplicative values phi is evaluated as z * phi_F(theta), z = v / theta,
/// which extends it to the whole rectangle of signals and values. For other
/// families it is defined wherever the family's score ratio is.
class VirtualValueField {
public:
    explicit VirtualValueField(std::shared_ptr<const Model> model);

    /// Throws UndefinedDensityError where g = 0 and no extension exists.
    [[nodiscard]] double dynamic(double theta, double v) const;

    /// phi_F(theta) = theta - (1-F)/f.
    [[nodiscard]] double static_value(double theta) const;

    /// dynamic() without the exception.
    [[nodiscard]] std::optional<double> try_dynamic(double theta, double v) const;

    [[nodiscard]] const Model& model() const noexcept { return *model_; }
    [[nodiscard]] const std::shared_ptr<const Model>& model_ptr() const noexcept { return model_; }

private:
    std::shared_ptr<const Model> model_;
};

/// phi weakly increasing in theta and in v wherever it is positive (the region
/// where allocations are made). Points where phi is undefined are skipped.
DiagnosticReport regularity_check(const VirtualValueField& field, std::span<const double> theta_grid,
                                  std::span<const double> v_grid, double slack = 1e-9);

/// Inverse hazard (1-F)/f weakly decreasing on the grid.
DiagnosticReport mhr_check(const SignalDistribution& signal, std::span<const double> theta_grid,
                           double slack = 1e-9);

} // namespace seqscreen
