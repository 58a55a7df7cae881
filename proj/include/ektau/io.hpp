#pragma once

// Config parsing (JSON), surface specifications, CSV emission and atomic
// file writes for the command line front end.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ektau/expression.hpp"
#include "ektau/families.hpp"

namespace ektau {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double require_number(const json& j, const std::string& key) {
    if (!j.contains(key)) throw ConfigError("missing field \"" + key + "\"");
    if (!j.at(key).is_number())
        throw ConfigError("field \"" + key + "\" must be a number, got " + j.at(key).dump());
    return j.at(key).get<double>();
}

inline double number_or(const json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number())
        throw ConfigError("field \"" + key + "\" must be a number, got " + j.at(key).dump());
    return j.at(key).get<double>();
}

// {"kappa": <real>, "tau": <real>}; sigma is derived and never accepted.
inline SpaceParams space_from_json(const json& j) {
    if (j.contains("sigma"))
        throw ConfigError("\"sigma\" is derived from kappa and tau and cannot be supplied");
    return SpaceParams::make(require_number(j, "kappa"), require_number(j, "tau"));
}

inline json space_to_json(const SpaceParams& sp) {
    return json{{"kappa", sp.kappa}, {"tau", sp.tau}, {"sigma", sp.sigma}};
}

inline json parse_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("malformed JSON in " + path + ": " + e.what());
    }
}

// --- surface specifications ---------------------------------------------------

// {"family": "cylinder"|"fmp"|"horizontal_graph"|"vertical_plane"|"custom_grid", ...}
struct SurfaceSpec {
    std::string family;
    double k_gamma = 0.0;          // cylinder
    double theta = 0.0;            // fmp
    double a = 0.0, b = 0.0;       // vertical plane
    std::string expression;        // horizontal_graph
    std::string csv_path;          // custom_grid
    double s0 = -2, s1 = 2, t0 = -2, t1 = 2;
};

inline SurfaceSpec surface_spec_from_json(const json& j) {
    SurfaceSpec spec;
    if (!j.contains("family") || !j.at("family").is_string())
        throw ConfigError("surface spec needs a string \"family\"");
    spec.family = j.at("family").get<std::string>();
    spec.s0 = number_or(j, "s0", spec.s0);
    spec.s1 = number_or(j, "s1", spec.s1);
    spec.t0 = number_or(j, "t0", spec.t0);
    spec.t1 = number_or(j, "t1", spec.t1);
    if (spec.family == "cylinder") {
        spec.k_gamma = require_number(j, "k_gamma");
    } else if (spec.family == "fmp") {
        spec.theta = require_number(j, "theta");
    } else if (spec.family == "vertical_plane") {
        spec.a = require_number(j, "a");
        spec.b = require_number(j, "b");
    } else if (spec.family == "horizontal_graph") {
        if (!j.contains("u") || !j.at("u").is_string())
            throw ConfigError("horizontal_graph needs a string expression \"u\"");
        spec.expression = j.at("u").get<std::string>();
    } else if (spec.family == "custom_grid") {
        if (!j.contains("csv") || !j.at("csv").is_string())
            throw ConfigError("custom_grid needs a \"csv\" path");
        spec.csv_path = j.at("csv").get<std::string>();
    } else {
        throw ConfigError("unknown surface family \"" + spec.family + "\"");
    }
    return spec;
}

inline Immersion build_surface(const SpaceParams& sp, const SurfaceSpec& spec) {
    if (spec.family == "cylinder") {
        const double ext = std::max({std::abs(spec.s0), std::abs(spec.s1), std::abs(spec.t0),
                                     std::abs(spec.t1), 8.0});
        return cylinder_immersion(sp, spec.k_gamma, ext, ext);
    }
    if (spec.family == "fmp") {
        if (!sp.heisenberg())
            throw ConfigError("fmp surfaces live in Nil_3; use kappa = 0, tau = 0.5");
        return fmp_surface(spec.theta, std::max(std::abs(spec.s0), spec.s1),
                           std::max(std::abs(spec.t0), spec.t1));
    }
    if (spec.family == "vertical_plane") {
        return vertical_plane(spec.a, spec.b,
                              std::max({std::abs(spec.s0), spec.s1, std::abs(spec.t0), spec.t1}));
    }
    if (spec.family == "horizontal_graph") {
        const Expression u = Expression::parse(spec.expression);
        return horizontal_graph_immersion(
            [u](double y, double z) { return expression_jets(u, y, z); }, spec.s0, spec.s1,
            spec.t0, spec.t1);
    }
    throw ConfigError("build_surface: unsupported family \"" + spec.family + "\"");
}

// --- CSV ------------------------------------------------------------------------

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void atomic_write_text(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw ConfigError("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, target);
}

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    std::ostringstream out;
    for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
        out << "\n";
    }
    atomic_write_text(path, out.str());
}

inline void write_json(const std::string& path, const json& j) {
    atomic_write_text(path, j.dump(2) + "\n");
}

inline std::vector<std::vector<double>> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open CSV file " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            try {
                size_t used = 0;
                row.push_back(std::stod(cell, &used));
            } catch (const std::exception&) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (lineno == 1) continue;  // header row
            throw ConfigError("non-numeric CSV data at " + path + ":" + std::to_string(lineno));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// Boundary trace from CSV rows (y, z, value): the returned callback serves
// the nearest sampled point, exact when the trace covers the grid's
// boundary nodes.
inline std::function<double(double, double)> boundary_from_csv(const std::string& path) {
    auto rows = read_csv(path);
    if (rows.empty()) throw ConfigError("empty boundary trace " + path);
    for (const auto& r : rows)
        if (r.size() != 3) throw ConfigError("boundary trace rows must be y,z,value in " + path);
    return [rows = std::move(rows), path](double y, double z) {
        double best = std::numeric_limits<double>::infinity(), value = 0.0;
        for (const auto& r : rows) {
            const double d = (r[0] - y) * (r[0] - y) + (r[1] - z) * (r[1] - z);
            if (d < best) {
                best = d;
                value = r[2];
            }
        }
        if (best > 1e-3)
            log_msg(LogLevel::Info, "boundary trace %s: nearest sample %.3g away from (%g, %g)",
                    path.c_str(), std::sqrt(best), y, z);
        return value;
    };
}

// CSV rows (s, t, x, y, z) on a complete uniform grid, sorted by s then t.
inline GridImmersion grid_immersion_from_csv(const SpaceParams& sp, const std::string& path) {
    const auto rows = read_csv(path);
    if (rows.empty()) throw ConfigError("empty custom grid " + path);
    for (const auto& r : rows)
        if (r.size() != 5)
            throw ConfigError("custom grid rows must be s,t,x,y,z in " + path);
    // infer the t-count from the leading run of equal s values
    int nt = 0;
    while (nt < static_cast<int>(rows.size()) && rows[nt][0] == rows[0][0]) ++nt;
    if (nt < 2 || rows.size() % nt != 0)
        throw ConfigError("custom grid in " + path + " is not a complete s-major grid");
    const int ns = static_cast<int>(rows.size()) / nt;
    GridImmersion gi;
    gi.space = sp;
    gi.s0 = rows.front()[0];
    gi.s1 = rows.back()[0];
    gi.t0 = rows.front()[1];
    gi.t1 = rows[nt - 1][1];
    gi.X.resize(ns, nt);
    gi.Y.resize(ns, nt);
    gi.Z.resize(ns, nt);
    for (int i = 0; i < ns; ++i)
        for (int j = 0; j < nt; ++j) {
            const auto& r = rows[i * nt + j];
            gi.X(i, j) = r[2];
            gi.Y(i, j) = r[3];
            gi.Z(i, j) = r[4];
        }
    return gi;
}

}  // namespace ektau
