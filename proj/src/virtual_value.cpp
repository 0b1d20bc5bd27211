#include "seqscreen/virtual_value.hpp"

#include "seqscreen/errors.hpp"

#include <algorithm>
#include <sstream>

namespace seqscreen {

VirtualValueField::VirtualValueField(std::shared_ptr<const Model> model) : model_(std::move(model)) {
    if (!model_ || !model_->values) throw DomainError("virtual value field needs a model");
}

double VirtualValueField::static_value(double theta) const {
    return theta - model_->signal.inverse_hazard(theta);
}

std::optional<double> VirtualValueField::try_dynamic(double theta, double v) const {
    if (theta >= model_->signal.hi()) return v;
    if (model_->multiplicative()) return (v / theta) * static_value(theta);
    const auto ratio = model_->values->score_ratio(v, theta);
    if (!ratio) return std::nullopt;
    return v + model_->signal.inverse_hazard(theta) * *ratio;
}

double VirtualValueField::dynamic(double theta, double v) const {
    if (auto phi = try_dynamic(theta, v)) return *phi;
    std::ostringstream os;
    os << "conditional density vanishes at (theta, v) = (" << theta << ", " << v << ")";
    throw UndefinedDensityError(os.str());
}

DiagnosticReport regularity_check(const VirtualValueField& field, std::span<const double> theta_grid,
                                  std::span<const double> v_grid, double slack) {
    DiagnosticReport report;
    report.name = "regularity";
    const std::size_t nt = theta_grid.size();
    const std::size_t nv = v_grid.size();
    std::vector<std::optional<double>> phi(nt * nv);
    for (std::size_t i = 0; i < nt; ++i)
        for (std::size_t j = 0; j < nv; ++j) phi[i * nv + j] = field.try_dynamic(theta_grid[i], v_grid[j]);

    // Only the positive part drives allocations.
    auto positive = [](double x) { return std::max(x, 0.0); };
    for (std::size_t i = 0; i < nt; ++i) {
        std::optional<std::size_t> prev;
        for (std::size_t j = 0; j < nv; ++j) {
            if (!phi[i * nv + j]) continue;
            if (prev) {
                const double drop = positive(*phi[i * nv + *prev]) - positive(*phi[i * nv + j]);
                if (drop > slack)
                    report.record({{{"theta", theta_grid[i]}, {"v", v_grid[j]}, {"v_lower", v_grid[*prev]}}, drop});
            }
            prev = j;
        }
    }
    for (std::size_t j = 0; j < nv; ++j) {
        std::optional<std::size_t> prev;
        for (std::size_t i = 0; i < nt; ++i) {
            if (!phi[i * nv + j]) continue;
            if (prev) {
                const double drop = positive(*phi[*prev * nv + j]) - positive(*phi[i * nv + j]);
                if (drop > slack)
                    report.record(
                        {{{"v", v_grid[j]}, {"theta", theta_grid[i]}, {"theta_lower", theta_grid[*prev]}}, drop});
            }
            prev = i;
        }
    }
    return report;
}

DiagnosticReport mhr_check(const SignalDistribution& signal, std::span<const double> theta_grid, double slack) {
    DiagnosticReport report;
    report.name = "mhr";
    for (std::size_t i = 1; i < theta_grid.size(); ++i) {
        const double rise = signal.inverse_hazard(theta_grid[i]) - signal.inverse_hazard(theta_grid[i - 1]);
        if (rise > slack) report.record({{{"theta", theta_grid[i]}, {"theta_lower", theta_grid[i - 1]}}, rise});
    }
    return report;
}

} // namespace seqscreen
