#include "seqscreen/model.hpp"

#include "seqscreen/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace seqscreen {

void Environment::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    if (!(cost > 0.0)) throw DomainError("marginal cost must be positive");
    if (!(gamma >= 0.0)) throw DomainError("gamma must be non-negative");
    if (spot_price && !(*spot_price > cost)) throw DomainError("spot price must exceed marginal cost");
}

SignalDistribution::SignalDistribution(double lo, double hi, ScalarFn cdf, ScalarFn pdf, std::vector<double> kinks)
    : lo_(lo), hi_(hi), cdf_(std::move(cdf)), pdf_(std::move(pdf)), kinks_(std::move(kinks)) {
    if (!(lo < hi)) throw DomainError("signal support must satisfy lo < hi");
    std::erase_if(kinks_, [&](double k) { return !(k > lo_ && k < hi_); });
    std::sort(kinks_.begin(), kinks_.end());
    kinks_.erase(std::unique(kinks_.begin(), kinks_.end()), kinks_.end());
}

SignalDistribution SignalDistribution::uniform(double lo, double hi) {
    if (!(lo < hi)) throw DomainError("uniform signal needs lo < hi");
    const double width = hi - lo;
    return SignalDistribution(
        lo, hi, [=](double t) { return std::clamp((t - lo) / width, 0.0, 1.0); },
        [=](double t) { return t >= lo && t <= hi ? 1.0 / width : 0.0; });
}

SignalDistribution SignalDistribution::uniform_mixture(std::vector<Component> components) {
    if (components.empty()) throw DomainError("mixture needs at least one component");
    double total = 0.0;
    double lo = components.front().lo;
    double hi = components.front().hi;
    std::vector<double> kinks;
    for (const auto& c : components) {
        if (!(c.weight > 0.0) || !(c.lo < c.hi)) throw DomainError("invalid mixture component");
        total += c.weight;
        lo = std::min(lo, c.lo);
        hi = std::max(hi, c.hi);
        kinks.push_back(c.lo);
        kinks.push_back(c.hi);
    }
    for (auto& c : components) c.weight /= total;
    auto cdf = [components](double t) {
        double s = 0.0;
        for (const auto& c : components) s += c.weight * std::clamp((t - c.lo) / (c.hi - c.lo), 0.0, 1.0);
        return std::min(s, 1.0);
    };
    // Right-continuous density: at a kink the component starting there counts, the one ending does not.
    auto pdf = [components, hi](double t) {
        double s = 0.0;
        for (const auto& c : components)
            if (t >= c.lo && (t < c.hi || (t == hi && c.hi == hi))) s += c.weight / (c.hi - c.lo);
        return s;
    };
    return SignalDistribution(lo, hi, cdf, pdf, std::move(kinks));
}

double SignalDistribution::inverse_hazard(double theta) const {
    if (theta >= hi_) return 0.0;
    const double f = pdf(theta);
    if (!(f > 0.0)) {
        std::ostringstream os;
        os << "signal density vanishes at theta = " << theta;
        throw UndefinedDensityError(os.str());
    }
    return (1.0 - cdf(theta)) / f;
}

ShockDistribution ShockDistribution::uniform(double lo, double hi) {
    if (!(lo < hi)) throw DomainError("uniform shock needs lo < hi");
    const double width = hi - lo;
    return {lo, hi, [=](double z) { return std::clamp((z - lo) / width, 0.0, 1.0); },
            [=](double z) { return z >= lo && z <= hi ? 1.0 / width : 0.0; }};
}

double ConditionalValueFamily::theta_partial(double v, double theta) const {
    const double h = 1e-5 * std::max(1.0, std::abs(theta));
    const double up = std::min(theta + h, theta_hi_);
    const double down = std::max(theta - h, theta_lo_);
    return (cdf(v, up) - cdf(v, down)) / (up - down);
}

std::optional<double> ConditionalValueFamily::score_ratio(double v, double theta) const {
    const double g = pdf(v, theta);
    if (!(g > 0.0)) return std::nullopt;
    return theta_partial(v, theta) / g;
}

MultiplicativeFamily::MultiplicativeFamily(ShockDistribution shock, double theta_lo, double theta_hi)
    : ConditionalValueFamily(theta_lo, theta_hi), shock_(std::move(shock)) {
    if (!(theta_lo > 0.0)) throw DomainError("multiplicative values need a positive signal support");
    if (!(shock_.lo >= 0.0) || shock_.hi < shock_.lo) throw DomainError("shock support must be non-negative");
    set_hull(theta_lo * shock_.lo, theta_hi * shock_.hi);
}

double MultiplicativeFamily::cdf(double v, double theta) const { return shock_.cdf(v / theta); }

double MultiplicativeFamily::pdf(double v, double theta) const { return shock_.pdf(v / theta) / theta; }

double MultiplicativeFamily::theta_partial(double v, double theta) const {
    return -(v / (theta * theta)) * shock_.pdf(v / theta);
}

FunctionalFamily::FunctionalFamily(Fn2 cdf, Fn2 pdf, std::optional<Fn2> theta_partial, ScalarFn lower,
                                   ScalarFn upper, double theta_lo, double theta_hi)
    : ConditionalValueFamily(theta_lo, theta_hi), cdf_(std::move(cdf)), pdf_(std::move(pdf)),
      dtheta_(std::move(theta_partial)), lower_(std::move(lower)), upper_(std::move(upper)) {
    double lo = lower_(theta_lo);
    double hi = upper_(theta_lo);
    constexpr int samples = 1000;
    for (int i = 1; i <= samples; ++i) {
        const double t = theta_lo + (theta_hi - theta_lo) * i / samples;
        lo = std::min(lo, lower_(t));
        hi = std::max(hi, upper_(t));
    }
    set_hull(lo, hi);
}

double FunctionalFamily::theta_partial(double v, double theta) const {
    if (dtheta_) return (*dtheta_)(v, theta);
    return ConditionalValueFamily::theta_partial(v, theta);
}

// ---------------------------------------------------------------------------
// TabulatedFamily
// ---------------------------------------------------------------------------

TabulatedFamily::TabulatedFamily(std::vector<double> thetas, std::vector<double> values, std::vector<double> cdf,
                                 std::vector<double> pdf, std::vector<double> dtheta)
    : ConditionalValueFamily(thetas.empty() ? 0.0 : thetas.front(), thetas.empty() ? 0.0 : thetas.back()),
      thetas_(std::move(thetas)), values_(std::move(values)), cdf_(std::move(cdf)), pdf_(std::move(pdf)),
      dtheta_(std::move(dtheta)) {
    const std::size_t nt = thetas_.size();
    const std::size_t nv = values_.size();
    if (nt < 2 || nv < 2) throw DomainError("tabulated family needs at least a 2x2 grid");
    if (!std::is_sorted(thetas_.begin(), thetas_.end()) || !std::is_sorted(values_.begin(), values_.end()) ||
        std::adjacent_find(thetas_.begin(), thetas_.end()) != thetas_.end() ||
        std::adjacent_find(values_.begin(), values_.end()) != values_.end())
        throw DomainError("tabulated grids must be strictly increasing");
    if (cdf_.size() != nt * nv || pdf_.size() != nt * nv || dtheta_.size() != nt * nv)
        throw DomainError("tabulated family is not a full rectangle");

    constexpr double eps = 1e-12;
    for (std::size_t i = 0; i < nt; ++i) {
        const double* row = &cdf_[i * nv];
        std::size_t lo = 0;
        while (lo + 1 < nv && row[lo + 1] <= eps) ++lo;
        std::size_t hi = 0;
        while (hi + 1 < nv && row[hi] < 1.0 - eps) ++hi;
        lower_.push_back(values_[lo]);
        upper_.push_back(values_[std::max(hi, lo)]);
    }
    set_hull(*std::min_element(lower_.begin(), lower_.end()), *std::max_element(upper_.begin(), upper_.end()));
}

double TabulatedFamily::interp(const std::vector<double>& table, double v, double theta, double below,
                               double above) const {
    const std::size_t nv = values_.size();
    if (v < values_.front()) return below;
    if (v > values_.back()) return above;
    theta = std::clamp(theta, thetas_.front(), thetas_.back());
    auto locate = [](const std::vector<double>& xs, double x) {
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        std::size_t k = it == xs.begin() ? 0 : static_cast<std::size_t>(it - xs.begin()) - 1;
        return std::min(k, xs.size() - 2);
    };
    const std::size_t i = locate(thetas_, theta);
    const std::size_t j = locate(values_, v);
    const double s = (theta - thetas_[i]) / (thetas_[i + 1] - thetas_[i]);
    const double r = (v - values_[j]) / (values_[j + 1] - values_[j]);
    const double a = table[i * nv + j] * (1 - r) + table[i * nv + j + 1] * r;
    const double b = table[(i + 1) * nv + j] * (1 - r) + table[(i + 1) * nv + j + 1] * r;
    return a * (1 - s) + b * s;
}

double TabulatedFamily::row_edge(const std::vector<double>& edges, double theta) const {
    theta = std::clamp(theta, thetas_.front(), thetas_.back());
    auto it = std::upper_bound(thetas_.begin(), thetas_.end(), theta);
    std::size_t i = it == thetas_.begin() ? 0 : static_cast<std::size_t>(it - thetas_.begin()) - 1;
    i = std::min(i, thetas_.size() - 2);
    const double s = (theta - thetas_[i]) / (thetas_[i + 1] - thetas_[i]);
    return edges[i] * (1 - s) + edges[i + 1] * s;
}

double TabulatedFamily::lower_support(double theta) const { return row_edge(lower_, theta); }

double TabulatedFamily::upper_support(double theta) const { return row_edge(upper_, theta); }

std::optional<double> TabulatedFamily::score_ratio(double v, double theta) const {
    const double clamped = std::clamp(v, lower_support(theta), upper_support(theta));
    return ConditionalValueFamily::score_ratio(clamped, theta);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        cell.erase(0, cell.find_first_not_of(" \t\r"));
        cell.erase(cell.find_last_not_of(" \t\r") + 1);
        out.push_back(cell);
    }
    return out;
}

} // namespace

TabulatedFamily TabulatedFamily::load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open tabulated family file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DomainError("empty tabulated family file");
    const auto header = split_csv(line);
    const std::vector<std::string> expected{"theta", "v", "G", "g", "dG_dtheta"};
    if (header != expected) throw DomainError("tabulated family header must be theta,v,G,g,dG_dtheta");

    struct Row {
        double cdf, pdf, dtheta;
    };
    std::map<std::pair<double, double>, Row> cells;
    std::set<double> thetas;
    std::set<double> values;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cols = split_csv(line);
        if (cols.size() != 5) throw DomainError("malformed row at line " + std::to_string(lineno));
        double x[5];
        for (int k = 0; k < 5; ++k) {
            try {
                std::size_t used = 0;
                x[k] = std::stod(cols[static_cast<std::size_t>(k)], &used);
                if (used != cols[static_cast<std::size_t>(k)].size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw DomainError("non-numeric value at line " + std::to_string(lineno));
            }
        }
        thetas.insert(x[0]);
        values.insert(x[1]);
        cells[{x[0], x[1]}] = Row{x[2], x[3], x[4]};
    }
    std::vector<double> ts(thetas.begin(), thetas.end());
    std::vector<double> vs(values.begin(), values.end());
    if (cells.size() != ts.size() * vs.size()) throw DomainError("tabulated family is not a full rectangle");
    std::vector<double> cdf, pdf, dth;
    for (double t : ts)
        for (double v : vs) {
            const Row& r = cells.at({t, v});
            cdf.push_back(r.cdf);
            pdf.push_back(r.pdf);
            dth.push_back(r.dtheta);
        }
    return TabulatedFamily(std::move(ts), std::move(vs), std::move(cdf), std::move(pdf), std::move(dth));
}

void TabulatedFamily::save_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write tabulated family file: " + path.string());
    out.precision(17);
    out << "theta,v,G,g,dG_dtheta\n";
    const std::size_t nv = values_.size();
    for (std::size_t i = 0; i < thetas_.size(); ++i)
        for (std::size_t j = 0; j < nv; ++j)
            out << thetas_[i] << ',' << values_[j] << ',' << cdf_[i * nv + j] << ',' << pdf_[i * nv + j] << ','
                << dtheta_[i * nv + j] << '\n';
}

// ---------------------------------------------------------------------------

Model example1_model() {
    Environment env;
    env.alpha = 0.5;
    env.cost = 1.0;
    return multiplicative_model(env, SignalDistribution::uniform(1.0, 2.0), ShockDistribution::uniform(0.5, 1.0));
}

Model multiplicative_model(Environment env, SignalDistribution signal, ShockDistribution shock) {
    env.validate();
    auto family = std::make_shared<MultiplicativeFamily>(std::move(shock), signal.lo(), signal.hi());
    return Model{env, std::move(signal), std::move(family)};
}

double expect_given_signal(const Model& model, double theta, const ScalarFn& fn, std::span<const double> breaks,
                           const QuadratureRule& rule) {
    const auto& fam = *model.values;
    const double lo = fam.lower_support(theta);
    const double hi = fam.upper_support(theta);
    if (!(hi > lo)) return fn(lo);
    return integrate_piecewise([&](double v) { return fn(v) * fam.pdf(v, theta); }, lo, hi, breaks, rule);
}

double expect_over_signal(const Model& model, const ScalarFn& fn, std::span<const double> breaks,
                          const QuadratureRule& rule) {
    const auto& F = model.signal;
    std::vector<double> cuts(F.kinks().begin(), F.kinks().end());
    cuts.insert(cuts.end(), breaks.begin(), breaks.end());
    return integrate_piecewise_graded([&](double t) { return fn(t) * F.pdf(t); }, F.lo(), F.hi(), cuts, rule);
}

void DiagnosticReport::record(Violation v) {
    passed = false;
    worst = std::max(worst, v.magnitude);
    constexpr std::size_t kept = 64;
    if (violations.size() < kept) violations.push_back(std::move(v));
}

DiagnosticReport fosd_check(const ConditionalValueFamily& family, std::span<const double> theta_grid,
                            std::span<const double> v_grid, double slack) {
    DiagnosticReport report;
    report.name = "fosd";
    for (double v : v_grid) {
        std::vector<double> row;
        row.reserve(theta_grid.size());
        for (double t : theta_grid) row.push_back(family.cdf(v, t));
        for (std::size_t hi = 0; hi < row.size(); ++hi)
            for (std::size_t lo = 0; lo < hi; ++lo) {
                const double excess = row[hi] - row[lo];
                if (excess > slack)
                    report.record({{{"v", v}, {"theta", theta_grid[hi]}, {"theta_lower", theta_grid[lo]}}, excess});
            }
    }
    return report;
}

SpotResponse spot_best_response(double v, double price, double alpha) {
    if (!(price > 0.0)) throw DomainError("spot price must be positive");
    if (v <= 0.0) return {0.0, 0.0};
    const double q = std::pow(alpha * v / price, 1.0 / (1.0 - alpha));
    return {q, v * std::pow(q, alpha) - price * q};
}

} // namespace seqscreen
