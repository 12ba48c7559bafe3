// rdode: analysis and simulation of reaction-diffusion systems with
// nondiffusive components. Subcommands mirror the workflow: classify a steady
// state (analyze), map the Turing-unstable diffusion region (region), scan
// kinetic parameter feasibility (sweep), integrate the dynamics (simulate),
// and build discontinuous stationary patterns (construct).

#include <CLI11.hpp>

#include "rdode/config.hpp"

#include <cstdlib>
#include <iostream>

namespace {

using namespace rdode;
namespace fs = std::filesystem;

fs::path resolve_config(const std::string& arg) {
    if (fs::exists(arg)) return arg;
    std::vector<fs::path> candidates;
    if (const char* env = std::getenv("RDODE_PRESET_DIR")) candidates.push_back(fs::path(env));
    candidates.push_back(fs::path(RDODE_SOURCE_DIR) / "presets");
    candidates.push_back("presets");
    for (const fs::path& dir : candidates) {
        fs::path p = dir / (arg + ".json");
        if (fs::exists(p)) return p;
        p = dir / arg;
        if (fs::exists(p)) return p;
    }
    throw ValidationError("config not found: '" + arg + "' (tried as path and as preset name)");
}

RunConfig load_config(const std::string& arg, const std::string& command) {
    fs::path path = resolve_config(arg);
    std::ifstream in(path);
    json j;
    try {
        j = json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config parse error in " + path.string() + ": " + e.what());
    }
    RunConfig cfg = parse_run_config(j);
    if (!cfg.command.empty() && cfg.command != command)
        throw ValidationError("config file declares command '" + cfg.command + "' but '" + command +
                              "' was invoked");
    return cfg;
}

JacobianBlocks analysis_blocks(const ModelSpec& model, Vec* state_out = nullptr) {
    Vec state(model.dim(), 0.0);
    if (model.name == "receptor") {
        ReceptorParams p{model.params.at("m1"), model.params.at("m2"), model.params.at("m3"),
                         model.params.at("mu1"), model.params.at("mu2"), model.params.at("mu3")};
        SteadyStateTriple ss = steady_states(p);
        if (!ss.has_nontrivial)
            throw ValidationError("analyze: receptor parameters admit no nontrivial steady state");
        state = ss.Xplus;
    }
    if (state_out) *state_out = state;
    return jacobian(model, state);
}

int cmd_analyze(const RunConfig& cfg) {
    ModelSpec model = build_model(cfg.model);
    Vec state;
    JacobianBlocks blocks = analysis_blocks(model, &state);
    Vec diffusion = model.diffusion_diagonal();
    StabilityReport rep = classify_ddi(blocks, diffusion, model.domain_length, cfg.numerics.j_max);

    json out = to_json(rep);
    out["model"] = model.name;
    out["linearization_state"] = state;
    out["D_v"] = model.D_v;
    out["D_w"] = model.D_w;

    if (model.name == "receptor") {
        ReceptorParams p{model.params.at("m1"), model.params.at("m2"), model.params.at("m3"),
                         model.params.at("mu1"), model.params.at("mu2"), model.params.at("mu3")};
        SteadyStateTriple ss = steady_states(p);
        out["steady_states"] = {{"X0", ss.X0}, {"Xminus", ss.Xminus}, {"Xplus", ss.Xplus}};
        auto verdicts = stability_verdicts(p);
        json v;
        for (auto& [k, s] : verdicts) v[k] = (s == StateVerdict::Stable ? "stable" : "unstable");
        out["state_verdicts"] = v;
        out["j12_condition"] = j12_condition(p);
    }

    if (blocks.m_n == 1 && blocks.m_s == 1 && blocks.m_f == 1 && rep.s_ode < 0.0) {
        try {
            SmallDvThreshold eps = small_Dv_threshold(blocks, model.D_w[0], model.domain_length,
                                                      cfg.numerics.j_max);
            out["small_Dv_threshold"] = {{"epsilon", eps.epsilon}, {"attaining_j", eps.attaining_j}};
        } catch (const std::exception& e) {
            out["small_Dv_threshold"] = {{"unavailable", e.what()}};
        }
        try {
            LargeDwRequirements req = large_Dw_requirements(blocks, model.D_v[0], 1);
            out["large_Dw_requirements"] =
                {{"L_min", req.L_min}, {"Dw_min", req.Dw_min}, {"L_eval", req.L_eval}, {"j", 1}};
        } catch (const std::exception& e) {
            out["large_Dw_requirements"] = {{"unavailable", e.what()}};
        }
    }

    save_json(out, fs::path(cfg.out_dir) / "analysis.json");
    std::cout << "verdict: " << to_string(rep.verdict) << "\n";
    std::cout << "unstable modes:";
    for (int j : rep.unstable_modes) std::cout << ' ' << j;
    std::cout << "\nwrote " << (fs::path(cfg.out_dir) / "analysis.json").string() << "\n";
    return 0;
}

int cmd_region(const RunConfig& cfg, int jobs) {
    ModelSpec model = build_model(cfg.model);
    JacobianBlocks blocks = analysis_blocks(model);
    const json& r = cfg.region;
    if (r.is_null()) throw ValidationError("config: region command needs a 'region' block");
    detail::require_keys(r, "region", {"dv", "dw", "samples", "log", "include"});
    auto range = [&](const char* key) -> std::pair<double, double> {
        const json& v = r.at(key);
        return {detail::num(v[0], key), detail::num(v[1], key)};
    };
    int samples = r.contains("samples") ? r.at("samples").get<int>() : 200;
    bool logsp = r.contains("log") ? r.at("log").get<bool>() : true;
    auto [dv_lo, dv_hi] = range("dv");
    auto [dw_lo, dw_hi] = range("dw");
    Vec dv = logsp ? logspace(dv_lo, dv_hi, samples) : linspace(dv_lo, dv_hi, samples);
    Vec dw = logsp ? logspace(dw_lo, dw_hi, samples) : linspace(dw_lo, dw_hi, samples);
    if (r.contains("include")) {
        for (const json& pt : r.at("include")) {
            dv.push_back(detail::num(pt[0], "region/include"));
            dw.push_back(detail::num(pt[1], "region/include"));
        }
        std::sort(dv.begin(), dv.end());
        dv.erase(std::unique(dv.begin(), dv.end()), dv.end());
        std::sort(dw.begin(), dw.end());
        dw.erase(std::unique(dw.begin(), dw.end()), dw.end());
    }

    RegionGrid grid = gamma_mask(blocks, dv, dw, model.domain_length, cfg.numerics.j_max, jobs);
    save_region_csv(grid, fs::path(cfg.out_dir) / "region.csv");
    save_region_svg(grid, fs::path(cfg.out_dir) / "region.svg");

    size_t unstable_cells = 0;
    for (const auto& c : grid.cells) unstable_cells += !c.empty();
    std::cout << "grid " << dv.size() << "x" << dw.size() << ", Turing-unstable cells: " << unstable_cells
              << "\nwrote " << (fs::path(cfg.out_dir) / "region.csv").string() << " and region.svg\n";
    return 0;
}

int cmd_sweep(const RunConfig& cfg) {
    ModelSpec model = build_model(cfg.model);
    if (model.name != "receptor") throw ValidationError("sweep: only the receptor model has feasibility regions");
    ReceptorParams base{model.params.at("m1"), model.params.at("m2"), model.params.at("m3"),
                        model.params.at("mu1"), model.params.at("mu2"), model.params.at("mu3")};
    const json& s = cfg.sweep;
    int samples = 61;
    std::pair<double, double> m_range{2.0, 12.0}, mu_range{0.05, 1.0};
    std::vector<std::pair<std::string, std::string>> axes;
    if (!s.is_null()) {
        detail::require_keys(s, "sweep", {"samples", "m_range", "mu_range", "axes"});
        if (s.contains("samples")) samples = s.at("samples").get<int>();
        if (s.contains("m_range"))
            m_range = {detail::num(s.at("m_range")[0], "m_range"), detail::num(s.at("m_range")[1], "m_range")};
        if (s.contains("mu_range"))
            mu_range = {detail::num(s.at("mu_range")[0], "mu_range"), detail::num(s.at("mu_range")[1], "mu_range")};
        if (s.contains("axes"))
            for (const json& a : s.at("axes")) axes.emplace_back(a[0].get<std::string>(), a[1].get<std::string>());
    }
    if (axes.empty())
        for (const char* m : {"m1", "m2", "m3"})
            for (const char* mu : {"mu1", "mu2", "mu3"}) axes.emplace_back(m, mu);

    auto base_value = [&](const std::string& name) {
        ReceptorParams tmp = base;
        return detail::param_by_name(tmp, name);
    };
    auto axis_samples = [&](const std::string& name) {
        bool is_mu = name.rfind("mu", 0) == 0;
        auto [lo, hi] = is_mu ? mu_range : m_range;
        Vec v = linspace(lo, hi, samples);
        v.push_back(base_value(name)); // marker cell must be sampled exactly
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    };

    for (auto& [a1, a2] : axes) {
        ParamMask mask = param_masks(base, a1, axis_samples(a1), a2, axis_samples(a2));
        std::string stem = "sweep_" + a1 + "_" + a2;
        save_mask_csv(mask, fs::path(cfg.out_dir) / (stem + ".csv"));
        save_mask_svg(mask, fs::path(cfg.out_dir) / (stem + ".svg"), base_value(a1), base_value(a2));
        std::cout << "wrote " << stem << ".csv/.svg\n";
    }
    return 0;
}

struct SimRunSpec {
    std::string name = "run";
    json init;
    double dv = -1.0, dw = -1.0;
    double T = -1.0;
    bool save_snapshots = false;
};

int cmd_simulate(const RunConfig& cfg) {
    const json& s = cfg.simulate;
    if (s.is_null()) throw ValidationError("config: simulate command needs a 'simulate' block");
    std::vector<SimRunSpec> runs;
    auto parse_run = [&](const json& r, const std::string& default_name) {
        detail::require_keys(r, "simulate/run", {"name", "init", "D_v", "D_w", "T", "save_snapshots"});
        SimRunSpec spec;
        spec.name = r.contains("name") ? r.at("name").get<std::string>() : default_name;
        if (r.contains("init")) spec.init = r.at("init");
        if (r.contains("D_v")) spec.dv = detail::num(r.at("D_v"), "simulate/D_v");
        if (r.contains("D_w")) spec.dw = detail::num(r.at("D_w"), "simulate/D_w");
        if (r.contains("T")) spec.T = detail::num(r.at("T"), "simulate/T");
        if (r.contains("save_snapshots")) spec.save_snapshots = r.at("save_snapshots").get<bool>();
        runs.push_back(std::move(spec));
    };
    if (s.contains("runs")) {
        int i = 0;
        for (const json& r : s.at("runs")) parse_run(r, "run" + std::to_string(i++));
    } else {
        parse_run(s, "run");
    }

    for (const SimRunSpec& spec : runs) {
        ModelSpec model = build_model(cfg.model, spec.dv, spec.dw);
        SimConfig sim;
        sim.model = model;
        sim.M = cfg.numerics.grid;
        sim.dt = cfg.numerics.dt;
        sim.T = spec.T > 0.0 ? spec.T : cfg.numerics.T;
        sim.steady_window = cfg.numerics.steady_window;
        sim.steady_threshold = cfg.numerics.steady_threshold;
        sim.snapshot_dt = cfg.numerics.snapshot_dt;
        sim.seed = cfg.seed;
        sim.init = build_initial_condition(spec.init, model);

        Trajectory traj;
        if (spec.init.contains("csv")) {
            Field f = read_field_csv(spec.init.at("csv").get<std::string>(), model.domain_length);
            if (f.grid_points() != sim.M)
                throw ValidationError("simulate: imported field grid does not match numerics/grid");
            traj = run_from_field(sim, f);
        } else {
            traj = run(sim);
        }

        fs::path dir = fs::path(cfg.out_dir) / spec.name;
        save_field_csv(traj.final_state, dir / "final.csv");
        save_field_svg(traj.final_state, dir / "final.svg");
        save_json(to_json(traj), dir / "trajectory.json");
        if (spec.save_snapshots)
            for (size_t i = 0; i < traj.snapshots.size(); ++i)
                save_field_csv(traj.snapshots[i], dir / ("snapshot_" + std::to_string(i) + ".csv"));
        auto amps = mode_amplitudes(traj.final_state, model.domain_length);
        std::cout << spec.name << ": t_end=" << traj.final_time << " steady=" << (traj.steady ? "yes" : "no")
                  << " drift=" << traj.drift << " dominant_mode(v)=" << dominant_mode(amps[1]) << "\n";
    }
    return 0;
}

int cmd_construct(const RunConfig& cfg) {
    const json& c = cfg.construct;
    if (c.is_null()) throw ValidationError("config: construct command needs a 'construct' block");
    detail::require_keys(c, "construct", {"omega2", "then_simulate", "max_omega2_fraction"});
    ModelSpec model = build_model(cfg.model);
    if (model.name != "receptor")
        throw ValidationError("construct: branch switching requires the receptor model (two nullcline branches)");
    ReceptorParams p{model.params.at("m1"), model.params.at("m2"), model.params.at("m3"),
                     model.params.at("mu1"), model.params.at("mu2"), model.params.at("mu3")};

    IntervalUnion omega2;
    for (const json& iv : c.at("omega2"))
        omega2.intervals.emplace_back(detail::num(iv[0], "omega2"), detail::num(iv[1], "omega2"));

    FFEProblem prob = FFEProblem::receptor(p, model.D_v[0], model.D_w[0], model.domain_length);
    CosineBasis basis(cfg.numerics.N, cfg.numerics.M, model.domain_length);
    FFEOptions opt;
    opt.tol = cfg.numerics.tol;
    opt.max_iter = cfg.numerics.max_iter;
    if (c.contains("max_omega2_fraction"))
        opt.max_omega2_fraction = detail::num(c.at("max_omega2_fraction"), "max_omega2_fraction");

    FFEPattern pat = solve_ffe(prob, omega2, basis, opt);

    fs::path dir(cfg.out_dir);
    save_pattern_csv(pat, dir / "pattern.csv");
    save_json(to_json(pat), dir / "pattern.json");
    Field pat_field = field_from_pattern(pat, prob, cfg.numerics.grid);
    save_field_svg(pat_field, dir / "pattern.svg");
    std::cout << "pattern: iterations=" << pat.iterations << " r_f=" << pat.r_f << " r_v=" << pat.r_v
              << " r_w=" << pat.r_w << " jump_gap=" << pat.min_jump_gap << "\n";

    if (c.contains("then_simulate") && c.at("then_simulate").get<bool>()) {
        SimConfig sim;
        sim.model = model;
        sim.M = cfg.numerics.grid;
        sim.dt = cfg.numerics.dt;
        sim.T = cfg.numerics.T;
        sim.steady_window = cfg.numerics.steady_window;
        sim.steady_threshold = cfg.numerics.steady_threshold;
        sim.snapshot_dt = cfg.numerics.snapshot_dt;
        sim.seed = cfg.seed;
        sim.init.base = prob.steady;
        Trajectory traj = run_from_field(sim, pat_field);
        save_field_csv(traj.final_state, dir / "simulated.csv");
        save_json(to_json(traj), dir / "simulated_trajectory.json");
        std::cout << "simulated: t_end=" << traj.final_time << " steady=" << (traj.steady ? "yes" : "no")
                  << " drift=" << traj.drift << "\n";
    }
    return 0;
}

int cmd_examples() {
    std::vector<fs::path> dirs;
    if (const char* env = std::getenv("RDODE_PRESET_DIR")) dirs.push_back(fs::path(env));
    dirs.push_back(fs::path(RDODE_SOURCE_DIR) / "presets");
    dirs.push_back("presets");
    for (const fs::path& dir : dirs) {
        if (!fs::is_directory(dir)) continue;
        std::vector<std::string> names;
        for (const auto& e : fs::directory_iterator(dir))
            if (e.path().extension() == ".json") names.push_back(e.path().stem().string());
        std::sort(names.begin(), names.end());
        std::cout << "presets in " << dir.string() << ":\n";
        for (const std::string& n : names) {
            std::ifstream in(dir / (n + ".json"));
            json j = json::parse(in, nullptr, false);
            std::string desc = (!j.is_discarded() && j.contains("description"))
                                   ? j.at("description").get<std::string>()
                                   : "";
            std::cout << "  " << n;
            if (!desc.empty()) std::cout << " - " << desc;
            std::cout << "\n";
        }
        return 0;
    }
    std::cout << "no preset directory found\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"reaction-diffusion systems with nondiffusive components: DDI analysis, "
                 "Turing regions, far-from-equilibrium patterns, 1D simulation"};
    app.require_subcommand(1);

    std::string config_arg, out_dir, seed_str;
    int jobs = 0;
    app.add_option("--config", config_arg, "config file path or preset name");
    app.add_option("--out", out_dir, "output directory (overrides config)");
    app.add_option("--seed", seed_str, "RNG seed (overrides config)");
    app.add_option("--jobs", jobs, "worker threads for grid fan-out (env RDODE_JOBS)");

    for (const char* name : {"analyze", "region", "sweep", "simulate", "construct", "examples"})
        app.add_subcommand(name)->fallthrough();

    CLI11_PARSE(app, argc, argv);
    std::string command = app.get_subcommands().front()->get_name();

    if (jobs <= 0) {
        if (const char* env = std::getenv("RDODE_JOBS")) jobs = std::atoi(env);
        if (jobs <= 0) jobs = 1;
    }

    try {
        if (command == "examples") return cmd_examples();
        if (config_arg.empty()) throw rdode::ValidationError("missing --config <file-or-preset>");
        RunConfig cfg = load_config(config_arg, command);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (!seed_str.empty()) cfg.seed = std::stoull(seed_str);
        if (command == "analyze") return cmd_analyze(cfg);
        if (command == "region") return cmd_region(cfg, jobs);
        if (command == "sweep") return cmd_sweep(cfg);
        if (command == "simulate") return cmd_simulate(cfg);
        if (command == "construct") return cmd_construct(cfg);
    } catch (const rdode::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const rdode::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
