#include "seqscreen/config.hpp"

#include "seqscreen/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace seqscreen {

namespace {

using json = nlohmann::json;

void allow_only(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, _] : obj.items()) {
        const bool known = std::any_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; });
        if (!known) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

double number(const json& obj, const char* key, double fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
    return v.get<double>();
}

std::size_t count(const json& obj, const char* key, std::size_t fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ConfigError(where + "." + key + " must be a non-negative integer");
    return v.get<std::size_t>();
}

std::string text(const json& obj, const char* key, const std::string& fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_string()) throw ConfigError(where + "." + key + " must be a string");
    return v.get<std::string>();
}

SignalConfig parse_signal(const json& j) {
    allow_only(j, {"distribution", "lo", "hi", "components"}, "model.signal");
    SignalConfig s;
    s.distribution = text(j, "distribution", s.distribution, "model.signal");
    if (s.distribution == "uniform") {
        s.lo = number(j, "lo", s.lo, "model.signal");
        s.hi = number(j, "hi", s.hi, "model.signal");
    } else if (s.distribution == "mixture") {
        if (!j.contains("components") || !j.at("components").is_array() || j.at("components").empty())
            throw ConfigError("model.signal.components must be a non-empty array");
        for (const auto& c : j.at("components")) {
            allow_only(c, {"weight", "lo", "hi"}, "model.signal.components[]");
            s.components.push_back({number(c, "weight", 1.0, "component"), number(c, "lo", 0.0, "component"),
                                    number(c, "hi", 1.0, "component")});
        }
    } else {
        throw ConfigError("model.signal.distribution must be 'uniform' or 'mixture'");
    }
    return s;
}

ModelConfig parse_model(const json& j, const std::filesystem::path& base_dir) {
    allow_only(j, {"family", "signal", "shock", "file"}, "model");
    ModelConfig m;
    m.family = text(j, "family", m.family, "model");
    if (m.family != "example1" && m.family != "multiplicative" && m.family != "tabulated")
        throw ConfigError("model.family must be one of example1, multiplicative, tabulated");
    if (m.family == "example1") {
        if (j.contains("signal") || j.contains("shock") || j.contains("file"))
            throw ConfigError("model.family example1 takes no parameters");
        return m;
    }
    if (j.contains("signal")) m.signal = parse_signal(j.at("signal"));
    if (m.family == "multiplicative") {
        if (j.contains("file")) throw ConfigError("model.file is only used by the tabulated family");
        if (j.contains("shock")) {
            const auto& s = j.at("shock");
            allow_only(s, {"distribution", "lo", "hi"}, "model.shock");
            if (text(s, "distribution", "uniform", "model.shock") != "uniform")
                throw ConfigError("model.shock.distribution must be 'uniform'");
            m.shock_lo = number(s, "lo", m.shock_lo, "model.shock");
            m.shock_hi = number(s, "hi", m.shock_hi, "model.shock");
        }
    } else {
        if (j.contains("shock")) throw ConfigError("model.shock is only used by the multiplicative family");
        const auto file = text(j, "file", "", "model");
        if (file.empty()) throw ConfigError("model.file is required for the tabulated family");
        m.file = std::filesystem::path(file);
        if (m.file.is_relative()) m.file = base_dir / m.file;
        if (!std::filesystem::exists(m.file)) throw ConfigError("model.file not found: " + m.file.string());
    }
    return m;
}

} // namespace

RunConfig example1_config() { return RunConfig{}; }

RunConfig parse_config(const std::string& source, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(source);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    allow_only(j, {"model", "environment", "grids", "tolerances", "outputs"}, "config");

    RunConfig cfg;
    if (j.contains("model")) cfg.model = parse_model(j.at("model"), base_dir);

    if (j.contains("environment")) {
        const auto& e = j.at("environment");
        allow_only(e, {"alpha", "cost", "gamma", "spot_price"}, "environment");
        cfg.env.alpha = number(e, "alpha", cfg.env.alpha, "environment");
        cfg.env.cost = number(e, "cost", cfg.env.cost, "environment");
        cfg.env.gamma = number(e, "gamma", cfg.env.gamma, "environment");
        if (e.contains("spot_price") && !e.at("spot_price").is_null())
            cfg.env.spot_price = number(e, "spot_price", 0.0, "environment");
    }
    if (j.contains("grids")) {
        const auto& g = j.at("grids");
        allow_only(g, {"theta_points", "v_points", "q_oracle_points"}, "grids");
        cfg.grids.theta_points = count(g, "theta_points", cfg.grids.theta_points, "grids");
        cfg.grids.v_points = count(g, "v_points", cfg.grids.v_points, "grids");
        cfg.grids.q_oracle_points = count(g, "q_oracle_points", cfg.grids.q_oracle_points, "grids");
    }
    if (j.contains("tolerances")) {
        const auto& t = j.at("tolerances");
        allow_only(t, {"root", "integration", "ic", "monotone"}, "tolerances");
        cfg.tol.root = number(t, "root", cfg.tol.root, "tolerances");
        cfg.tol.integration = number(t, "integration", cfg.tol.integration, "tolerances");
        cfg.tol.ic = number(t, "ic", cfg.tol.ic, "tolerances");
        cfg.tol.monotone = number(t, "monotone", cfg.tol.monotone, "tolerances");
    }
    if (j.contains("outputs")) {
        const auto& o = j.at("outputs");
        allow_only(o, {"directory", "formats"}, "outputs");
        cfg.output_dir = text(o, "directory", cfg.output_dir.string(), "outputs");
        if (o.contains("formats")) {
            if (!o.at("formats").is_array()) throw ConfigError("outputs.formats must be an array");
            cfg.write_csv = cfg.write_json = false;
            for (const auto& f : o.at("formats")) {
                if (f == "csv") cfg.write_csv = true;
                else if (f == "json") cfg.write_json = true;
                else throw ConfigError("outputs.formats entries must be 'csv' or 'json'");
            }
        }
    }
    validate(cfg);
    return cfg;
}

RunConfig load_config(const std::string& path_or_preset) {
    if (path_or_preset == "example1") return example1_config();
    const std::filesystem::path path(path_or_preset);
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path_or_preset);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.parent_path());
}

void validate(const RunConfig& cfg) {
    if (cfg.grids.theta_points < 2 || cfg.grids.v_points < 2 || cfg.grids.q_oracle_points < 2)
        throw ConfigError("grid sizes must be at least 2");
    for (double t : {cfg.tol.root, cfg.tol.integration, cfg.tol.ic, cfg.tol.monotone})
        if (!(t > 0.0)) throw ConfigError("tolerances must be positive");
    try {
        cfg.env.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("environment: ") + e.what());
    }
    const auto& s = cfg.model.signal;
    if (s.distribution == "uniform" && !(s.hi > s.lo)) throw ConfigError("model.signal needs lo < hi");
    if (cfg.model.family == "multiplicative" && !(cfg.model.shock_hi > cfg.model.shock_lo && cfg.model.shock_lo >= 0.0))
        throw ConfigError("model.shock needs 0 <= lo < hi");
}

Model build_model(const RunConfig& cfg) {
    const auto& m = cfg.model;
    if (m.family == "example1") {
        Model model = example1_model();
        model.env = cfg.env;
        return model;
    }
    try {
        auto signal = m.signal.distribution == "mixture" ? SignalDistribution::uniform_mixture(m.signal.components)
                                                         : SignalDistribution::uniform(m.signal.lo, m.signal.hi);
        if (m.family == "multiplicative")
            return multiplicative_model(cfg.env, std::move(signal), ShockDistribution::uniform(m.shock_lo, m.shock_hi));
        auto family = std::make_shared<TabulatedFamily>(TabulatedFamily::load_csv(m.file));
        constexpr double slack = 1e-12;
        if (std::abs(family->theta_lo() - signal.lo()) > slack || std::abs(family->theta_hi() - signal.hi()) > slack)
            throw ConfigError("tabulated family signal range does not match model.signal");
        return Model{cfg.env, std::move(signal), std::move(family)};
    } catch (const DomainError& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
}

} // namespace seqscreen
