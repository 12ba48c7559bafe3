#pragma once

// Deterministic artifact emission: CSV (17 significant digits, bit-stable
// round trip), JSON reports, and native SVG heatmaps/contours. All files are
// written atomically (temp file + rename) and carry no timestamps.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rdode/ffe.hpp"
#include "rdode/region.hpp"
#include "rdode/simulate.hpp"

namespace rdode {

using json = nlohmann::ordered_json;

// Scientific notation, 17 significant digits: enough to round-trip a double.
inline std::string fmt_num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", x);
    return buf;
}

inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot open for writing: " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

// ---- CSV ----------------------------------------------------------------

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) {
        for (size_t i = 0; i < header.size(); ++i) {
            if (i) out_ << ',';
            out_ << header[i];
        }
        out_ << '\n';
    }

    void row(std::span<const double> values) {
        for (size_t i = 0; i < values.size(); ++i) {
            if (i) out_ << ',';
            out_ << fmt_num(values[i]);
        }
        out_ << '\n';
    }

    // Mixed row: preformatted cells.
    void row_raw(std::span<const std::string> cells) {
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    std::string str() const { return out_.str(); }
    void save(const std::filesystem::path& path) const { write_file_atomic(path, out_.str()); }

private:
    std::ostringstream out_;
};

inline void save_field_csv(const Field& f, const std::filesystem::path& path) {
    std::vector<std::string> header{"x"};
    static const char* names[] = {"u", "v", "w"};
    for (int c = 0; c < f.components(); ++c)
        header.push_back(c < 3 ? names[c] : "c" + std::to_string(c));
    CsvWriter csv(header);
    Vec row(f.components() + 1);
    for (int k = 0; k < f.grid_points(); ++k) {
        row[0] = f.x(k);
        for (int c = 0; c < f.components(); ++c) row[c + 1] = f.comps[c][k];
        csv.row(row);
    }
    csv.save(path);
}

inline void save_pattern_csv(const FFEPattern& pat, const std::filesystem::path& path) {
    CsvWriter csv({"x", "u", "v", "w", "branch"});
    for (int k = 0; k < pat.M; ++k) {
        std::vector<std::string> cells{fmt_num(pat.x[k]), fmt_num(pat.u[k]), fmt_num(pat.vw.values[0][k]),
                                       fmt_num(pat.vw.values[1][k]), pat.branch_label[k] ? "psi" : "phi"};
        csv.row_raw(cells);
    }
    csv.save(path);
}

inline void save_region_csv(const RegionGrid& grid, const std::filesystem::path& path) {
    CsvWriter csv({"D_v", "D_w", "n_unstable", "modes"});
    for (size_t iv = 0; iv < grid.dv_axis.size(); ++iv)
        for (size_t iw = 0; iw < grid.dw_axis.size(); ++iw) {
            const auto& modes = grid.cell(static_cast<int>(iv), static_cast<int>(iw));
            std::string mode_list;
            for (size_t i = 0; i < modes.size(); ++i) {
                if (i) mode_list += ' ';
                mode_list += std::to_string(modes[i]);
            }
            std::vector<std::string> cells{fmt_num(grid.dv_axis[iv]), fmt_num(grid.dw_axis[iw]),
                                           std::to_string(modes.size()), mode_list};
            csv.row_raw(cells);
        }
    csv.save(path);
}

inline void save_mask_csv(const ParamMask& mask, const std::filesystem::path& path) {
    CsvWriter csv({mask.axis1_name, mask.axis2_name, "R1", "R2", "R3", "R4", "feasible"});
    for (size_t i1 = 0; i1 < mask.axis1.size(); ++i1)
        for (size_t i2 = 0; i2 < mask.axis2.size(); ++i2) {
            size_t idx = i1 * mask.axis2.size() + i2;
            std::vector<std::string> cells{fmt_num(mask.axis1[i1]), fmt_num(mask.axis2[i2])};
            for (int r = 0; r < 4; ++r) cells.push_back(mask.regions[idx][r] ? "1" : "0");
            cells.push_back(mask.intersection[idx] ? "1" : "0");
            csv.row_raw(cells);
        }
    csv.save(path);
}

// ---- JSON reports -------------------------------------------------------

inline json to_json(const StabilityReport& rep) {
    json j;
    j["verdict"] = to_string(rep.verdict);
    j["s_ode"] = rep.s_ode;
    j["submatrix_abscissae"] = json::object();
    for (const auto& [name, value] : rep.submatrix_abscissae) j["submatrix_abscissae"][name] = value;
    j["unstable_submatrices"] = rep.unstable_submatrices;
    j["unstable_modes"] = std::vector<int>(rep.unstable_modes.begin(), rep.unstable_modes.end());
    j["marginal_modes"] = std::vector<int>(rep.marginal_modes.begin(), rep.marginal_modes.end());
    j["domain_length"] = rep.L;
    j["j_max"] = rep.j_max;
    if (rep.vl_diagonal) j["volterra_lyapunov_diagonal"] = *rep.vl_diagonal;
    json modes = json::array();
    for (const ModeSpectrum& ms : rep.per_mode) {
        json m;
        m["j"] = ms.mode;
        m["abscissa"] = ms.abscissa;
        json eigs = json::array();
        for (Complex z : ms.eigenvalues) eigs.push_back(json::array({z.real(), z.imag()}));
        m["eigenvalues"] = eigs;
        modes.push_back(std::move(m));
    }
    j["per_mode"] = std::move(modes);
    return j;
}

inline json to_json(const Trajectory& traj) {
    json j;
    j["steady"] = traj.steady;
    j["final_time"] = traj.final_time;
    j["drift"] = traj.drift;
    j["cfl_number"] = traj.cfl_number;
    json hist = json::array();
    for (auto [t, d] : traj.drift_history) hist.push_back(json::array({t, d}));
    j["drift_history"] = std::move(hist);
    if (!traj.invariant_bounds.empty()) j["invariant_bounds"] = traj.invariant_bounds;
    auto amps = mode_amplitudes(traj.final_state, traj.final_state.L);
    json dom = json::array();
    for (const Vec& a : amps) dom.push_back(dominant_mode(a));
    j["dominant_modes"] = std::move(dom);
    j["snapshot_times"] = traj.snapshot_times;
    return j;
}

inline json to_json(const FFEPattern& pat) {
    json j;
    j["iterations"] = pat.iterations;
    j["residuals"] = {{"r_f", pat.r_f}, {"r_v", pat.r_v}, {"r_w", pat.r_w}};
    json intervals = json::array();
    for (auto [a, b] : pat.omega2.intervals) intervals.push_back(json::array({a, b}));
    j["omega2"] = std::move(intervals);
    j["omega2_measure"] = pat.omega2.measure();
    j["modes"] = pat.N;
    j["grid_points"] = pat.M;
    j["domain_length"] = pat.L;
    j["min_jump_gap"] = pat.min_jump_gap;
    j["clamp_active"] = pat.clamp_active;
    j["steady_state"] = pat.steady;
    return j;
}

inline void save_json(const json& j, const std::filesystem::path& path) {
    write_file_atomic(path, j.dump(2) + "\n");
}

// ---- SVG ----------------------------------------------------------------

namespace svg {

inline std::string color_ramp(double t) {
    // Dark blue -> teal -> yellow, clamped.
    t = std::clamp(t, 0.0, 1.0);
    auto lerp = [](double a, double b, double s) { return a + (b - a) * s; };
    double r, g, b;
    if (t < 0.5) {
        double s = t / 0.5;
        r = lerp(38, 33, s), g = lerp(52, 145, s), b = lerp(110, 140, s);
    } else {
        double s = (t - 0.5) / 0.5;
        r = lerp(33, 253, s), g = lerp(145, 231, s), b = lerp(140, 37, s);
    }
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", static_cast<int>(r), static_cast<int>(g), static_cast<int>(b));
    return buf;
}

} // namespace svg

// Heatmap of per-cell unstable-mode count with mode-region contours.
inline void save_region_svg(const RegionGrid& grid, const std::filesystem::path& path) {
    const double W = 720, H = 720, ml = 70, mb = 50, mt = 20, mr = 20;
    double pw = W - ml - mr, ph = H - mt - mb;
    auto xmap = [&](double dv) {
        double lo = std::log(grid.dv_axis.front()), hi = std::log(grid.dv_axis.back());
        return ml + (std::log(dv) - lo) / (hi - lo) * pw;
    };
    auto ymap = [&](double dw) {
        double lo = std::log(grid.dw_axis.front()), hi = std::log(grid.dw_axis.back());
        return mt + ph - (std::log(dw) - lo) / (hi - lo) * ph;
    };

    size_t max_count = 1;
    for (const auto& c : grid.cells) max_count = std::max(max_count, c.size());

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    s << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";

    for (size_t iv = 0; iv + 1 < grid.dv_axis.size(); ++iv)
        for (size_t iw = 0; iw + 1 < grid.dw_axis.size(); ++iw) {
            size_t n = grid.cell(static_cast<int>(iv), static_cast<int>(iw)).size();
            double x0 = xmap(grid.dv_axis[iv]), x1 = xmap(grid.dv_axis[iv + 1]);
            double y1 = ymap(grid.dw_axis[iw]), y0 = ymap(grid.dw_axis[iw + 1]);
            std::string fill = n == 0 ? "#f4f4f4" : svg::color_ramp(0.15 + 0.85 * static_cast<double>(n) / max_count);
            s << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << (x1 - x0) << "\" height=\""
              << (y1 - y0) << "\" fill=\"" << fill << "\"/>\n";
        }

    // Mode-region boundaries with labels at the contour midpoint.
    std::set<int> modes_present;
    for (const auto& c : grid.cells)
        for (int j : c) modes_present.insert(j);
    for (int j : modes_present) {
        auto lines = region_boundary(grid, j);
        for (const auto& line : lines) {
            s << "<path d=\"";
            for (size_t i = 0; i < line.size(); ++i)
                s << (i == 0 ? 'M' : 'L') << xmap(line[i][0]) << ' ' << ymap(line[i][1]) << ' ';
            s << "\" fill=\"none\" stroke=\"black\" stroke-width=\"0.8\"/>\n";
        }
        if (!lines.empty()) {
            const auto& line = lines.front();
            const auto& mid = line[line.size() / 2];
            s << "<text x=\"" << xmap(mid[0]) + 3 << "\" y=\"" << ymap(mid[1]) - 3
              << "\" font-size=\"11\" font-family=\"sans-serif\">" << j << "</text>\n";
        }
    }

    s << "<text x=\"" << ml + pw / 2 << "\" y=\"" << H - 12
      << "\" font-size=\"14\" font-family=\"sans-serif\" text-anchor=\"middle\">D_v</text>\n";
    s << "<text x=\"18\" y=\"" << mt + ph / 2
      << "\" font-size=\"14\" font-family=\"sans-serif\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << mt + ph / 2 << ")\">D_w</text>\n";
    s << "</svg>\n";
    write_file_atomic(path, s.str());
}

// One feasibility panel: region flags as translucent layers, the
// intersection outlined, an optional marker point.
inline void save_mask_svg(const ParamMask& mask, const std::filesystem::path& path,
                          double mark1 = std::nan(""), double mark2 = std::nan("")) {
    const double W = 480, H = 480, ml = 60, mb = 45, mt = 20, mr = 15;
    double pw = W - ml - mr, ph = H - mt - mb;
    auto xmap = [&](double v) {
        return ml + (v - mask.axis1.front()) / (mask.axis1.back() - mask.axis1.front() + 1e-300) * pw;
    };
    auto ymap = [&](double v) {
        return mt + ph - (v - mask.axis2.front()) / (mask.axis2.back() - mask.axis2.front() + 1e-300) * ph;
    };
    static const char* layer_colors[4] = {"#4477aa", "#66ccee", "#228833", "#ccbb44"};

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    s << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    for (size_t i1 = 0; i1 + 1 < mask.axis1.size(); ++i1)
        for (size_t i2 = 0; i2 + 1 < mask.axis2.size(); ++i2) {
            size_t idx = i1 * mask.axis2.size() + i2;
            double x0 = xmap(mask.axis1[i1]), x1 = xmap(mask.axis1[i1 + 1]);
            double y1 = ymap(mask.axis2[i2]), y0 = ymap(mask.axis2[i2 + 1]);
            for (int r = 0; r < 4; ++r)
                if (mask.regions[idx][r])
                    s << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << (x1 - x0) << "\" height=\""
                      << (y1 - y0) << "\" fill=\"" << layer_colors[r] << "\" fill-opacity=\"0.22\"/>\n";
            if (mask.intersection[idx])
                s << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << (x1 - x0) << "\" height=\""
                  << (y1 - y0) << "\" fill=\"none\" stroke=\"black\" stroke-width=\"0.5\"/>\n";
        }
    if (std::isfinite(mark1) && std::isfinite(mark2))
        s << "<circle cx=\"" << xmap(mark1) << "\" cy=\"" << ymap(mark2) << "\" r=\"4\" fill=\"black\"/>\n";
    s << "<text x=\"" << ml + pw / 2 << "\" y=\"" << H - 10
      << "\" font-size=\"13\" font-family=\"sans-serif\" text-anchor=\"middle\">" << mask.axis1_name << "</text>\n";
    s << "<text x=\"16\" y=\"" << mt + ph / 2
      << "\" font-size=\"13\" font-family=\"sans-serif\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << mt + ph / 2 << ")\">" << mask.axis2_name << "</text>\n";
    s << "</svg>\n";
    write_file_atomic(path, s.str());
}

// Line plot of field components over x.
inline void save_field_svg(const Field& f, const std::filesystem::path& path) {
    const double W = 720, H = 360, ml = 55, mb = 40, mt = 15, mr = 15;
    double pw = W - ml - mr, ph = H - mt - mb;
    double lo = 0.0, hi = 0.0;
    for (const Vec& c : f.comps)
        for (double v : c) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (hi <= lo) hi = lo + 1.0;
    auto xmap = [&](double x) { return ml + x / f.L * pw; };
    auto ymap = [&](double v) { return mt + ph - (v - lo) / (hi - lo) * ph; };
    static const char* colors[] = {"#cc3311", "#004488", "#007755"};

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    s << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    for (int c = 0; c < f.components(); ++c) {
        s << "<path d=\"";
        for (int k = 0; k < f.grid_points(); ++k)
            s << (k == 0 ? 'M' : 'L') << xmap(f.x(k)) << ' ' << ymap(f.comps[c][k]) << ' ';
        s << "\" fill=\"none\" stroke=\"" << colors[c % 3] << "\" stroke-width=\"1.2\"/>\n";
    }
    s << "<text x=\"" << ml + pw / 2 << "\" y=\"" << H - 10
      << "\" font-size=\"13\" font-family=\"sans-serif\" text-anchor=\"middle\">x</text>\n";
    s << "</svg>\n";
    write_file_atomic(path, s.str());
}

} // namespace rdode
