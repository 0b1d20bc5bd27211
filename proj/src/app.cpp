#include "seqscreen/app.hpp"

#include "seqscreen/contracts.hpp"
#include "seqscreen/csv.hpp"
#include "seqscreen/errors.hpp"
#include "seqscreen/frictions.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace seqscreen {

namespace {

MechanismOptions mechanism_options(const RunConfig& cfg) {
    MechanismOptions opts;
    opts.theta_points = cfg.grids.theta_points;
    opts.v_points = cfg.grids.v_points;
    opts.tol = cfg.tol;
    return opts;
}

std::shared_ptr<const OptimalMechanism> solve_mechanism(const RunConfig& cfg) {
    auto model = std::make_shared<const Model>(build_model(cfg));
    return std::make_shared<const OptimalMechanism>(model, mechanism_options(cfg));
}

ContractOptions contract_options(const RunConfig& cfg) { return ContractOptions{cfg.grids.v_points}; }

std::filesystem::path write_file(const std::filesystem::path& dir, const std::string& name,
                                 const std::string& body) {
    std::filesystem::create_directories(dir);
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << body;
    return path;
}

std::string spot_summary(const SpotMarketSolution& sol) {
    nlohmann::ordered_json j = {{"p_spot", sol.spot_price},
                                {"theta_star", sol.theta_star},
                                {"t_c", sol.discount},
                                {"heuristic", sol.heuristic},
                                {"heuristic_gap", sol.heuristic_gap}};
    return j.dump(2) + "\n";
}

/// Nondecreasing audit of a per-type quantity on the grid.
void note_monotone(CheckResult& r, std::span<const double> thetas, const ScalarFn& fn, const char* label) {
    double prev = fn(thetas[0]);
    for (std::size_t i = 1; i < thetas.size(); ++i) {
        const double cur = fn(thetas[i]);
        const double drop = prev - cur;
        if (drop > r.tolerance) r.passed = false;
        if (drop > r.worst_violation) {
            r.worst_violation = drop;
            r.at = {{"theta", thetas[i]}, {label, cur}};
        }
        prev = cur;
    }
}

std::vector<double> parse_values(const std::string& list) {
    std::vector<double> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item.substr(first), &used));
            if (item.find_first_not_of(" \t", first + used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("bad sweep value '" + item + "'");
        }
    }
    return out;
}

} // namespace

void apply(RunConfig& cfg, const Overrides& o) {
    if (o.theta_points) cfg.grids.theta_points = *o.theta_points;
    if (o.v_points) cfg.grids.v_points = *o.v_points;
    if (o.tol_ic) cfg.tol.ic = *o.tol_ic;
    if (o.out) cfg.output_dir = *o.out;
    validate(cfg);
}

std::vector<std::filesystem::path> cmd_solve(const RunConfig& cfg) {
    const auto mech = solve_mechanism(cfg);
    std::vector<std::filesystem::path> written;
    const auto& dir = cfg.output_dir;

    std::optional<SpotMarketSolution> spot;
    if (cfg.env.spot_price) spot = solve_spot_constrained(mech, *cfg.env.spot_price);

    if (cfg.write_csv) {
        std::ostringstream m, t, c;
        export_mechanism_csv(*mech, m);
        export_tariff_csv(build_two_part_tariff(mech, contract_options(cfg)), *mech, t);
        export_committed_csv(build_committed_spend(mech, contract_options(cfg)), *mech, c);
        written.push_back(write_file(dir, "mechanism.csv", m.str()));
        written.push_back(write_file(dir, "tariff.csv", t.str()));
        written.push_back(write_file(dir, "committed.csv", c.str()));
        if (spot) {
            std::ostringstream s;
            export_spot_csv(*spot, mech->theta_grid(), s);
            written.push_back(write_file(dir, "spot.csv", s.str()));
        }
    }
    if (spot && cfg.write_json) written.push_back(write_file(dir, "spot.json", spot_summary(*spot)));
    return written;
}

VerificationReport cmd_verify(const RunConfig& cfg) {
    const auto mech = solve_mechanism(cfg);
    const Model& model = mech->model();
    const auto& fam = *model.values;
    const auto& tol = cfg.tol;
    const auto& thetas = mech->theta_grid();
    VerificationReport report;

    report.checks.push_back(as_check(fosd_check(fam, thetas, mech->v_grid(), tol.monotone), tol.monotone));
    report.checks.push_back(
        as_check(regularity_check(mech->field(), thetas, mech->v_grid(), tol.monotone), tol.monotone));
    if (model.multiplicative()) report.checks.push_back(as_check(mhr_check(model.signal, thetas), tol.monotone));

    const auto oracle_thetas = Grid::uniform(model.signal.lo(), model.signal.hi(), 20);
    const auto oracle_values = Grid::uniform(fam.global_lo(), fam.global_hi(), 20);
    report.checks.push_back(
        check_allocation_oracle(*mech, oracle_thetas, oracle_values, cfg.grids.q_oracle_points));

    const auto matrix = deviation_matrix(*mech, thetas);
    CheckResult diagonal;
    diagonal.name = "envelope_diagonal";
    diagonal.tolerance = tol.ic;
    for (std::size_t i = 0; i < matrix.size(); ++i) {
        const double gap = std::abs(matrix(i, i) - mech->expected_utility(matrix.thetas[i]));
        if (gap > tol.ic) diagonal.passed = false;
        if (gap > diagonal.worst_violation) {
            diagonal.worst_violation = gap;
            diagonal.at = {{"theta", matrix.thetas[i]}};
        }
    }
    report.checks.push_back(diagonal);
    report.checks.push_back(check_ic0(matrix, tol.ic));
    report.checks.push_back(check_single_crossing(matrix, tol.ic));

    CheckResult ic1;
    ic1.name = "ic1";
    ic1.tolerance = tol.ic;
    const auto ic1_thetas = Grid::uniform(thetas.lo(), thetas.hi(), 11);
    for (double theta : ic1_thetas.points()) {
        const double lo = fam.lower_support(theta);
        const double hi = fam.upper_support(theta);
        std::vector<double> vs{lo};
        if (hi > lo) {
            const auto g = Grid::uniform(lo, hi, cfg.grids.v_points);
            vs.assign(g.points().begin(), g.points().end());
        }
        auto r = check_ic1(*mech, theta, vs, tol.ic);
        ic1.passed = ic1.passed && r.passed;
        if (r.worst_violation > ic1.worst_violation) {
            ic1.worst_violation = r.worst_violation;
            ic1.at = r.at;
        }
    }
    report.checks.push_back(ic1);

    report.checks.push_back(check_ir(*mech, [](double) { return 0.0; }, thetas, tol.ic));

    const auto tariff = build_two_part_tariff(mech, contract_options(cfg));
    const auto committed = build_committed_spend(mech, contract_options(cfg));
    report.checks.push_back(check_revenue_equivalence(*mech, tariff, committed, thetas, cfg.grids.v_points,
                                                      {tol.integration, tol.ic}));

    CheckResult mono;
    mono.name = "contract_monotonicity";
    mono.tolerance = tol.monotone;
    note_monotone(mono, thetas, [&](double t) { return tariff.upfront(t); }, "t0");
    note_monotone(mono, thetas, [&](double t) { return committed.budget(t); }, "B");
    report.checks.push_back(mono);

    if (cfg.env.gamma > 0.0) {
        const auto gc = optimal_contract_under_gamma(mech, cfg.env.gamma, thetas, contract_options(cfg));
        CheckResult dom;
        dom.name = "gamma_dominance";
        dom.passed = gc.dominates;
        for (const auto& row : gc.rows) {
            if (std::isnan(row.best_split_payoff)) continue;
            const double excess = row.best_split_payoff - row.committed_payoff;
            if (excess >= dom.worst_violation) {
                dom.worst_violation = std::max(excess, 0.0);
                dom.at = {{"theta", row.theta}};
            }
        }
        report.checks.push_back(dom);
    }

    if (cfg.env.spot_price) {
        const auto sol = solve_spot_constrained(mech, *cfg.env.spot_price);
        auto r = check_ir(*sol.mechanism, [&](double t) { return sol.u_spot(t); }, thetas, tol.ic);
        r.name = "spot_ir";
        report.checks.push_back(r);
    }
    return report;
}

std::string cmd_sweep(const RunConfig& cfg, const std::string& parameter, const std::vector<double>& values) {
    std::ostringstream out;
    if (parameter == "spot_price") {
        csv::Writer w(out, {"p_spot", "theta_star", "t_c", "seller_profit", "heuristic_gap"});
        if (values.empty()) return out.str();
        const auto mech = solve_mechanism(cfg);
        if (!mech->model().multiplicative())
            throw UnsupportedModelError("spot-price sweeps require multiplicative values");
        for (double p : values) {
            if (!(p > cfg.env.cost)) throw ConfigError("spot price must exceed marginal cost");
            const auto sol = solve_spot_constrained(mech, p);
            w.row({csv::number(p), csv::number(sol.theta_star), csv::number(sol.discount),
                   csv::number(seller_profit(*sol.mechanism)), csv::number(sol.heuristic_gap)});
        }
    } else if (parameter == "gamma") {
        csv::Writer w(out, {"gamma", "buyer_gain_vs_tariff", "seller_profit"});
        if (values.empty()) return out.str();
        const auto mech = solve_mechanism(cfg);
        const auto committed = build_committed_spend(mech, contract_options(cfg));
        const auto tariff = build_two_part_tariff(mech, contract_options(cfg));
        const double top = mech->model().signal.hi();
        const double profit = committed_profit(committed, *mech);
        for (double g : values) {
            if (g < 0.0) throw ConfigError("gamma must be non-negative");
            const double gain = interim_payoff_with_gamma(*mech, top, 0.0, g) -
                                interim_payoff_with_gamma(*mech, top, tariff.upfront(top), g);
            w.row({csv::number(g), csv::number(gain), csv::number(profit)});
        }
    } else {
        throw ConfigError("sweep parameter must be 'gamma' or 'spot_price'");
    }
    return out.str();
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Revenue-optimal sequential screening: solve, verify and sweep contracts"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides overrides;
    std::string parameter;
    std::string values;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config path, or the preset name 'example1'")->required();
        sub->add_option("--out", overrides.out, "Output directory");
        sub->add_option("--theta-points", overrides.theta_points, "Signal grid size");
        sub->add_option("--v-points", overrides.v_points, "Value grid size");
        sub->add_option("--tol-ic", overrides.tol_ic, "Incentive-compatibility tolerance");
    };
    auto* solve = app.add_subcommand("solve", "Write mechanism, tariff and committed-spend CSVs");
    auto* figures = app.add_subcommand("figures", "Alias for solve");
    auto* verify = app.add_subcommand("verify", "Run the brute-force checks and write verify.json");
    auto* sweep = app.add_subcommand("sweep", "Sweep gamma or the spot price");
    for (auto* sub : {solve, figures, verify, sweep}) common(sub);
    sweep->add_option("--parameter", parameter, "gamma | spot_price")->required();
    sweep->add_option("--values", values, "Comma-separated values; may be empty")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return exit_config;
    }

    try {
        RunConfig cfg = load_config(config_path);
        apply(cfg, overrides);

        if (solve->parsed() || figures->parsed()) {
            for (const auto& p : cmd_solve(cfg)) out << "wrote " << p.string() << "\n";
            return exit_ok;
        }
        if (verify->parsed()) {
            const auto report = cmd_verify(cfg);
            const auto json = report.to_json();
            if (cfg.write_json) write_file(cfg.output_dir, "verify.json", json);
            out << json;
            return report.passed() ? exit_ok : exit_verification;
        }
        const auto body = cmd_sweep(cfg, parameter, parse_values(values));
        if (cfg.write_csv) write_file(cfg.output_dir, "sweep.csv", body);
        out << body;
        return exit_ok;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const AssumptionError& e) {
        err << e.what() << "\n";
        return exit_assumption;
    } catch (const UnsupportedModelError& e) {
        err << "unsupported model: " << e.what() << "\n";
        return exit_unsupported;
    } catch (const DomainError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_failure;
    }
}

} // namespace seqscreen
