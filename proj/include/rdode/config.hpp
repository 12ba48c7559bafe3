#pragma once

// Run configuration: one JSON document per run, schema-validated with unknown
// keys rejected. The CLI command decides which sections are consumed.

#include <set>

#include "rdode/io.hpp"

namespace rdode {

namespace detail {

inline void require_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ValidationError("config: '" + path + "' must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ValidationError("config: unknown key '" + path + "/" + it.key() + "'");
}

inline double num(const json& j, const std::string& path) {
    if (!j.is_number()) throw ValidationError("config: '" + path + "' must be a number");
    return j.get<double>();
}

inline Vec num_or_array(const json& j, const std::string& path) {
    if (j.is_number()) return {j.get<double>()};
    if (j.is_array()) {
        Vec v;
        for (const auto& e : j) v.push_back(num(e, path + "[]"));
        return v;
    }
    throw ValidationError("config: '" + path + "' must be a number or an array of numbers");
}

} // namespace detail

struct NumericsConfig {
    int j_max = 256;
    int N = 1024;          // construction modes
    int M = 1024;          // construction collocation grid
    int grid = 512;        // simulator grid
    double dt = 1e-3;
    double T = 2000.0;
    double steady_window = 50.0;
    double steady_threshold = 1e-9;
    double snapshot_dt = 50.0;
    double tol = 1e-12;
    int max_iter = 500;
    double residual_tol = 1e-8;
};

struct RunConfig {
    std::string command; // optional in the file; the CLI subcommand is authoritative
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    json model;
    NumericsConfig numerics;
    json region;
    json sweep;
    json construct;
    json simulate;
    json raw;
};

inline NumericsConfig parse_numerics(const json& j) {
    NumericsConfig n;
    if (j.is_null()) return n;
    detail::require_keys(j, "numerics",
                         {"j_max", "N", "M", "grid", "dt", "T", "steady_window", "steady_threshold",
                          "snapshot_dt", "tol", "max_iter", "residual_tol"});
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("j_max", n.j_max);
    get("N", n.N);
    get("M", n.M);
    get("grid", n.grid);
    get("dt", n.dt);
    get("T", n.T);
    get("steady_window", n.steady_window);
    get("steady_threshold", n.steady_threshold);
    get("snapshot_dt", n.snapshot_dt);
    get("tol", n.tol);
    get("max_iter", n.max_iter);
    get("residual_tol", n.residual_tol);
    return n;
}

inline RunConfig parse_run_config(const json& j) {
    detail::require_keys(j, "", {"command", "description", "seed", "out", "model", "numerics", "region",
                                 "sweep", "construct", "simulate"});
    RunConfig cfg;
    cfg.raw = j;
    if (j.contains("command")) {
        cfg.command = j.at("command").get<std::string>();
        static const std::set<std::string> commands{"analyze", "region", "sweep", "simulate", "construct",
                                                    "examples"};
        if (!commands.count(cfg.command))
            throw ValidationError("config: unknown command '" + cfg.command + "'");
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
    if (j.contains("model")) cfg.model = j.at("model");
    if (j.contains("numerics")) cfg.numerics = parse_numerics(j.at("numerics"));
    if (j.contains("region")) cfg.region = j.at("region");
    if (j.contains("sweep")) cfg.sweep = j.at("sweep");
    if (j.contains("construct")) cfg.construct = j.at("construct");
    if (j.contains("simulate")) cfg.simulate = j.at("simulate");
    return cfg;
}

inline ReceptorParams receptor_params_from_json(const json& params) {
    detail::require_keys(params, "model/params", {"m1", "m2", "m3", "mu1", "mu2", "mu3"});
    ReceptorParams p;
    p.m1 = detail::num(params.at("m1"), "model/params/m1");
    p.m2 = detail::num(params.at("m2"), "model/params/m2");
    p.m3 = detail::num(params.at("m3"), "model/params/m3");
    p.mu1 = detail::num(params.at("mu1"), "model/params/mu1");
    p.mu2 = detail::num(params.at("mu2"), "model/params/mu2");
    p.mu3 = detail::num(params.at("mu3"), "model/params/mu3");
    return p;
}

// The compile-time model registry: receptor kinetics and explicit linear
// systems. Diffusion overrides allow one config to be re-run across pairs.
inline ModelSpec build_model(const json& m, double dv_override = -1.0, double dw_override = -1.0) {
    if (m.is_null()) throw ValidationError("config: missing 'model' block");
    detail::require_keys(m, "model", {"name", "params", "jacobian", "partition", "D_v", "D_w", "L"});
    std::string name = m.at("name").get<std::string>();
    double L = m.contains("L") ? detail::num(m.at("L"), "model/L") : 1.0;
    Vec dv = m.contains("D_v") ? detail::num_or_array(m.at("D_v"), "model/D_v") : Vec{};
    Vec dw = m.contains("D_w") ? detail::num_or_array(m.at("D_w"), "model/D_w") : Vec{};
    if (dv_override > 0.0) dv = {dv_override};
    if (dw_override > 0.0) dw = {dw_override};

    if (name == "receptor") {
        if (!m.contains("params")) throw ValidationError("config: receptor model needs 'params'");
        ReceptorParams p = receptor_params_from_json(m.at("params"));
        if (dv.size() != 1 || dw.size() != 1)
            throw ValidationError("config: receptor model needs scalar D_v and D_w");
        return make_receptor_model(p, dv[0], dw[0], L);
    }
    if (name == "linear") {
        if (!m.contains("jacobian") || !m.contains("partition"))
            throw ValidationError("config: linear model needs 'jacobian' and 'partition'");
        const json& rows = m.at("jacobian");
        int n = static_cast<int>(rows.size());
        Mat jac(n, n);
        for (int i = 0; i < n; ++i) {
            if (static_cast<int>(rows[i].size()) != n)
                throw ValidationError("config: model/jacobian must be square");
            for (int k = 0; k < n; ++k) jac(i, k) = detail::num(rows[i][k], "model/jacobian");
        }
        const json& part = m.at("partition");
        if (part.size() != 3) throw ValidationError("config: model/partition must have three entries");
        int mn = part[0].get<int>(), ms = part[1].get<int>(), mf = part[2].get<int>();
        return make_linear_model(jac, mn, ms, mf, dv, dw, L);
    }
    throw ValidationError("config: unknown model name '" + name + "' (registry: receptor, linear)");
}

inline int component_index(const json& c) {
    if (c.is_number_integer()) return c.get<int>();
    std::string s = c.get<std::string>();
    if (s == "u") return 0;
    if (s == "v") return 1;
    if (s == "w") return 2;
    throw ValidationError("config: unknown component '" + s + "'");
}

// Initial condition recipe; bases resolve against the model's steady state
// when requested.
inline InitialCondition build_initial_condition(const json& init, const ModelSpec& model) {
    InitialCondition ic;
    if (init.is_null()) throw ValidationError("config: simulate block needs 'init'");
    detail::require_keys(init, "simulate/init", {"base", "perturbations", "force_zero_u", "csv"});

    if (init.contains("csv")) {
        // handled by the caller (field import); base still required for sizes
    }
    const json& base = init.contains("base") ? init.at("base") : json("steady_plus");
    if (base.is_string()) {
        std::string s = base.get<std::string>();
        if (s == "steady_plus") {
            if (model.name != "receptor")
                throw ValidationError("config: base 'steady_plus' is only defined for the receptor model");
            ReceptorParams p{model.params.at("m1"), model.params.at("m2"), model.params.at("m3"),
                             model.params.at("mu1"), model.params.at("mu2"), model.params.at("mu3")};
            SteadyStateTriple ss = steady_states(p);
            if (!ss.has_nontrivial) throw ValidationError("config: no nontrivial steady state for these parameters");
            ic.base = ss.Xplus;
        } else if (s == "zero") {
            ic.base.assign(model.dim(), 0.0);
        } else {
            throw ValidationError("config: unknown init base '" + s + "'");
        }
    } else {
        ic.base = detail::num_or_array(base, "simulate/init/base");
        if (static_cast<int>(ic.base.size()) != model.dim())
            throw ValidationError("config: init base size does not match the model dimension");
    }

    if (init.contains("perturbations")) {
        for (const json& p : init.at("perturbations")) {
            detail::require_keys(p, "simulate/init/perturbations[]",
                                 {"component", "kind", "amplitude", "mode", "relative"});
            Perturbation pt;
            pt.component = component_index(p.at("component"));
            std::string kind = p.at("kind").get<std::string>();
            if (kind == "cosine")
                pt.kind = Perturbation::Kind::CosineMode;
            else if (kind == "x-sin")
                pt.kind = Perturbation::Kind::XSin;
            else if (kind == "noise")
                pt.kind = Perturbation::Kind::UniformNoise;
            else
                throw ValidationError("config: unknown perturbation kind '" + kind + "'");
            pt.amplitude = detail::num(p.at("amplitude"), "perturbation amplitude");
            if (p.contains("mode")) pt.mode = p.at("mode").get<int>();
            if (p.contains("relative") && p.at("relative").get<bool>())
                pt.amplitude *= ic.base.at(pt.component);
            ic.perturbations.push_back(pt);
        }
    }
    if (init.contains("force_zero_u")) {
        for (const json& iv : init.at("force_zero_u"))
            ic.force_zero_u.emplace_back(detail::num(iv[0], "force_zero_u"), detail::num(iv[1], "force_zero_u"));
    }
    return ic;
}

inline Field read_field_csv(const std::filesystem::path& path, double L) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read field csv: " + path.string());
    std::string line;
    std::getline(in, line); // header
    std::vector<Vec> cols;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (cols.empty()) cols.resize(row.size());
        for (size_t c = 0; c < row.size(); ++c) cols[c].push_back(row[c]);
    }
    if (cols.size() < 2) throw ValidationError("field csv must have x plus at least one component column");
    Field f;
    f.L = L;
    f.comps.assign(cols.size() - 1, {});
    for (size_t c = 1; c < cols.size(); ++c) f.comps[c - 1] = cols[c];
    return f;
}

} // namespace rdode
