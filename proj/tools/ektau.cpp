// Batch front door for the E(kappa,tau) workbench: curvature reports,
// Dirichlet spectra of cylinders, stability sweeps, cutoff/parabolicity
// diagnostics, the horizontal-graph Dirichlet solver, and the full
// verification suite.

#include <cstdio>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "ektau/io.hpp"
#include "ektau/verify.hpp"

using namespace ektau;

namespace {

// "kappa=0,tau=0.5" -> SpaceParams
SpaceParams parse_space_arg(const std::string& arg) {
    std::map<std::string, double> kv;
    std::stringstream ss(arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--space expects kappa=<v>,tau=<v>, got \"" + arg + "\"");
        kv[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    }
    if (!kv.count("kappa") || !kv.count("tau"))
        throw ConfigError("--space needs both kappa and tau");
    return SpaceParams::make(kv["kappa"], kv["tau"]);
}

// "cylinder:k=1", "fmp:theta=0.5", "vertical_plane:a=1,b=0",
// "horizontal_graph:u=<expr>", "custom_grid:csv=<path>"
SurfaceSpec parse_surface_arg(const std::string& arg) {
    SurfaceSpec spec;
    const auto colon = arg.find(':');
    spec.family = arg.substr(0, colon);
    json j{{"family", spec.family}};
    if (colon != std::string::npos) {
        std::stringstream ss(arg.substr(colon + 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos)
                throw ConfigError("surface parameters must be key=value, got \"" + item + "\"");
            const std::string key = item.substr(0, eq), value = item.substr(eq + 1);
            if (key == "u" || key == "csv")
                j[key] = value;
            else if (key == "k")
                j["k_gamma"] = std::stod(value);
            else
                j[key] = std::stod(value);
        }
    }
    return surface_spec_from_json(j);
}

std::pair<double, double> parse_extent(const std::string& arg, const char* what) {
    const auto x = arg.find('x');
    if (x == std::string::npos) {
        const double v = std::stod(arg);
        return {v, v};
    }
    const double a = std::stod(arg.substr(0, x));
    const double b = std::stod(arg.substr(x + 1));
    if (a <= 0 || b <= 0) throw ConfigError(std::string(what) + " must be positive");
    return {a, b};
}

void require_schema(const json& j) {
    if (!j.contains("schema") || !j.at("schema").is_number_integer() ||
        j.at("schema").get<int>() != 1)
        throw ConfigError("config files must declare \"schema\": 1");
}

int run_curvature(const std::string& space_arg, const std::string& surface_arg, int samples,
                  const std::string& out) {
    const SpaceParams sp = parse_space_arg(space_arg);
    const SurfaceSpec spec = parse_surface_arg(surface_arg);
    json report{{"space", space_to_json(sp)}, {"family", spec.family}};
    json rows = json::array();

    if (spec.family == "custom_grid") {
        const GridImmersion gi = grid_immersion_from_csv(sp, spec.csv_path);
        for (int i = 2; i < gi.ns() - 2; i += std::max(1, (gi.ns() - 4) / samples))
            for (int j = 2; j < gi.nt() - 2; j += std::max(1, (gi.nt() - 4) / samples)) {
                const FundamentalForms ff = gi.forms_at(i, j);
                rows.push_back({{"i", i}, {"j", j}, {"H", ff.H}, {"K", ff.K},
                                {"K_ext", ff.K_ext}, {"angle", ff.angle}});
            }
    } else {
        const Immersion imm = build_surface(sp, spec);
        for (int i = 0; i < samples; ++i)
            for (int j = 0; j < samples; ++j) {
                const double s =
                    imm.s0 + (imm.s1 - imm.s0) * (i + 0.5) / samples;
                const double t =
                    imm.t0 + (imm.t1 - imm.t0) * (j + 0.5) / samples;
                const FundamentalForms ff = fundamental_forms(imm, s, t);
                const auto pot = stability_potentials(imm, s, t);
                rows.push_back({{"s", s}, {"t", t}, {"H", ff.H}, {"K", ff.K},
                                {"K_ext", ff.K_ext}, {"angle", ff.angle},
                                {"II", {ff.second(0, 0), ff.second(0, 1), ff.second(1, 1)}},
                                {"q", pot.q}, {"q_tilde", pot.q_tilde}});
            }
    }
    report["samples"] = rows;
    double H = rows.empty() ? 0.0 : rows.front().value("H", 0.0);
    double K = rows.empty() ? 0.0 : rows.front().value("K", 0.0);
    double Ke = rows.empty() ? 0.0 : rows.front().value("K_ext", 0.0);
    std::printf("%s in E(%g, %g): H = %.12g, K = %.3g, K_ext = %.12g  (%zu samples)\n",
                spec.family.c_str(), sp.kappa, sp.tau, H, K, Ke, rows.size());
    if (!out.empty()) {
        write_json(out, report);
        std::printf("report written to %s\n", out.c_str());
    }
    return 0;
}

int run_spectrum(const std::string& space_arg, const std::string& surface_arg,
                 const std::string& domain_arg, const std::string& grid_arg,
                 const std::string& out) {
    const SpaceParams sp = parse_space_arg(space_arg);
    const SurfaceSpec spec = parse_surface_arg(surface_arg);
    const auto [a, b] = parse_extent(domain_arg, "--domain");
    const auto [gs, gt] = parse_extent(grid_arg, "--grid");
    const int ns = static_cast<int>(gs), nt = static_cast<int>(gt);
    Immersion imm = build_surface(sp, spec);
    if (spec.family == "cylinder") {
        const double ext = 1.1 * std::max(a, b) + 1.0;
        imm = cylinder_immersion(sp, spec.k_gamma, ext, ext);
    }
    const auto pb = assemble_spectral_problem(imm, 0, a, 0, b, ns, nt);
    const auto res = first_eigenvalue(pb);
    std::printf("lambda1 = %.10g  (grid %dx%d, %d iterations, residual %.2e)\n", res.lambda1,
                ns, nt, res.iterations, res.residual);
    if (spec.family == "cylinder") {
        const double formula =
            M_PI * M_PI * (1 / (a * a) + 1 / (b * b)) - (spec.k_gamma * spec.k_gamma + sp.kappa);
        std::printf("flat-cylinder formula pi^2(1/a^2+1/b^2) - (k^2 + kappa) = %.10g\n", formula);
    }
    if (!out.empty()) {
        write_json(out, json{{"lambda1", res.lambda1},
                             {"k_gamma", spec.k_gamma},
                             {"kappa", sp.kappa},
                             {"tau", sp.tau},
                             {"domain", {a, b}},
                             {"grid", {ns, nt}},
                             {"residual", res.residual},
                             {"iterations", res.iterations}});
        std::printf("report written to %s\n", out.c_str());
    }
    return 0;
}

int run_stability(const std::string& space_arg, double k_gamma,
                  const std::string& domains_arg, int grid, const std::string& out_csv,
                  const std::string& out_json) {
    const SpaceParams sp = parse_space_arg(space_arg);
    std::vector<std::pair<double, double>> domains;
    std::stringstream ss(domains_arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const double a = std::stod(item);
        domains.emplace_back(a, a);
    }
    if (domains.empty()) throw ConfigError("--domains needs a comma separated size list");
    const auto verdict = cylinder_stability_verdict(sp, k_gamma, domains, grid);
    std::printf("cylinder k = %g in E(%g, %g): %s%s\n", k_gamma, sp.kappa, sp.tau,
                verdict.stable ? "stable" : "unstable",
                verdict.marginal ? " (marginal boundary case kappa = -k^2)" : "");
    for (const auto& row : verdict.rows)
        std::printf("  [0,%g]x[0,%g]  lambda1 = %+.8f\n", row.a, row.b, row.lambda1);
    if (verdict.witness)
        std::printf("  unstable witness: [0,%g]^2 with lambda1 = %.6f\n", verdict.witness->a,
                    verdict.witness->lambda1);
    std::printf("  predicted inf lambda1 = -(k^2 + kappa) = %g\n", verdict.predicted_inf);
    if (!out_csv.empty()) {
        std::vector<std::vector<double>> rows;
        int m = 0;
        for (const auto& r : verdict.rows)
            rows.push_back({static_cast<double>(m++), r.a, r.b, r.lambda1, r.band, r.residual,
                            static_cast<double>(r.iterations)});
        write_csv(out_csv, {"m", "a", "b", "lambda1", "band", "residual", "iterations"}, rows);
        std::printf("sweep table written to %s\n", out_csv.c_str());
    }
    if (!out_json.empty()) {
        write_json(out_json, json{{"kappa", sp.kappa},
                                  {"tau", sp.tau},
                                  {"k_gamma", k_gamma},
                                  {"stable", verdict.stable},
                                  {"marginal", verdict.marginal},
                                  {"predicted_inf", verdict.predicted_inf},
                                  {"witness_a", verdict.witness ? json(verdict.witness->a)
                                                                : json(nullptr)}});
    }
    return 0;
}

int run_parabolicity(const std::string& model_arg, double r0, int levels,
                     const std::string& taper_arg, const std::string& u_expr,
                     const std::string& v_expr, const std::string& out_csv,
                     const std::string& growth_arg, const std::string& growth_out) {
    RotationalMetric M;
    const SurfaceSpec model = [&] {
        SurfaceSpec s;
        const auto colon = model_arg.find(':');
        s.family = model_arg.substr(0, colon);
        if (colon != std::string::npos) {
            const std::string rest = model_arg.substr(colon + 1);
            const auto eq = rest.find('=');
            if (eq != std::string::npos) s.a = std::stod(rest.substr(eq + 1));
        }
        return s;
    }();
    if (model.family == "plane")
        M = flat_plane();
    else if (model.family == "cylinder")
        M = flat_cylinder(model.a > 0 ? model.a : 2 * M_PI);
    else if (model.family == "hyperbolic")
        M = hyperbolic_plane();
    else
        throw ConfigError("--model must be plane, cylinder[:c=..] or hyperbolic");

    Taper taper = Taper::Harmonic;
    if (taper_arg == "linear") taper = Taper::Linear;
    else if (taper_arg == "smoothstep") taper = Taper::Smoothstep;
    else if (taper_arg != "harmonic" && taper_arg != "log")
        throw ConfigError("--taper must be harmonic|log|linear|smoothstep");

    const CutoffFamily fam = log_family(M, r0, levels, taper);
    const Expression ue = Expression::parse(u_expr);
    const Expression ve = Expression::parse(v_expr);
    const SurfaceField u = cartesian_field([&](double x, double y) {
        return ue.evaluate({{"x", x}, {"y", y}});
    });
    const SurfaceField v = cartesian_field([&](double x, double y) {
        return ve.evaluate({{"x", x}, {"y", y}});
    });
    const auto report = vanishing_energy_chain_check(M, u, v, fam);
    std::printf("model %s, %d cutoff levels (%s taper), sup u^2 = %.4g\n", M.name.c_str(),
                levels, taper_name(taper), report.sup_u2);
    std::vector<std::vector<double>> rows;
    for (const auto& row : report.rows) {
        std::printf("  j=%d  E(phi_j) = %.6g  inner %.3e  annulus %.3e  4CE %.3e  %s\n", row.j,
                    row.energy, row.inner_term, row.annulus_term, row.energy_bound,
                    row.chain_ok && row.annulus_bound_ok ? "ok" : "CHAIN BROKEN");
        rows.push_back({static_cast<double>(row.j), row.r_inner, row.r_outer, row.energy,
                        row.inner_term, row.annulus_term, row.cauchy_schwarz,
                        row.energy_bound});
    }
    std::printf("u/v variance %.3e -> %s\n", report.ratio_variance,
                report.quotient_constant ? "consistent with u/v constant"
                                         : "chain does not certify a constant quotient");
    if (!out_csv.empty()) {
        write_csv(out_csv,
                  {"j", "r_j", "R_j", "E_phi", "inner", "annulus", "cauchy_schwarz", "bound_4CE"},
                  rows);
        std::printf("chain table written to %s\n", out_csv.c_str());
    }
    if (!growth_arg.empty()) {
        std::vector<double> radii;
        std::stringstream ss(growth_arg);
        std::string item;
        while (std::getline(ss, item, ',')) radii.push_back(std::stod(item));
        const auto growth = area_growth(M, radii);
        std::vector<std::vector<double>> grows;
        for (size_t i = 0; i < radii.size(); ++i) {
            std::printf("  r = %-8g vol = %-12.6g r^-2 vol = %.6g\n", growth.radii[i],
                        growth.volumes[i], growth.ratios[i]);
            grows.push_back({growth.radii[i], growth.volumes[i], growth.ratios[i]});
        }
        std::printf("growth: %s%s\n", growth.quadratic ? "at most quadratic" : "not quadratic",
                    growth.truncated ? " (window truncated)" : "");
        if (!growth_out.empty()) {
            write_csv(growth_out, {"r", "vol", "ratio"}, grows);
            std::printf("growth table written to %s\n", growth_out.c_str());
        }
    }
    return 0;
}

int run_pde_solve(const std::string& domain_arg, const std::string& grid_arg,
                  const std::string& boundary_expr, const std::string& boundary_csv,
                  const std::string& out_prefix) {
    std::vector<double> box;
    {
        std::stringstream ss(domain_arg);
        std::string item;
        while (std::getline(ss, item, ',')) box.push_back(std::stod(item));
    }
    if (box.size() != 4) throw ConfigError("--domain expects y0,y1,z0,z1");
    const auto [gs, gt] = parse_extent(grid_arg, "--grid");
    std::function<double(double, double)> g;
    if (!boundary_csv.empty()) {
        g = boundary_from_csv(boundary_csv);
    } else {
        const Expression expr = Expression::parse(boundary_expr);
        g = [expr](double y, double z) { return expr(y, z); };
    }
    const auto rep = solve_dirichlet(box[0], box[1], box[2], box[3], static_cast<int>(gs),
                                     static_cast<int>(gt), g);
    const auto res = residual(rep.solution);
    const double min_eta_x = min_killing_component(rep.solution);
    std::printf("converged in %d iterations: residual sup %.3e, l2 %.3e, min |<eta,X>| = %.6g\n",
                rep.iterations, res.sup, res.l2, min_eta_x);
    if (!out_prefix.empty()) {
        std::vector<std::vector<double>> rows;
        for (int i = 0; i < rep.solution.ny; ++i)
            for (int j = 0; j < rep.solution.nz; ++j)
                rows.push_back({rep.solution.y_at(i), rep.solution.z_at(j), rep.solution.u(i, j)});
        write_csv(out_prefix + ".csv", {"y", "z", "u"}, rows);
        write_json(out_prefix + ".json",
                   json{{"residual_sup", res.sup},
                        {"residual_l2", res.l2},
                        {"iterations", rep.iterations},
                        {"min_abs_eta_X", min_eta_x},
                        {"quadratic_tail", rep.quadratic_tail}});
        std::printf("solution written to %s.csv / %s.json\n", out_prefix.c_str(),
                    out_prefix.c_str());
    }
    return 0;
}

int run_verify_all(int jobs, const std::string& out) {
    std::vector<std::function<CriterionResult()>> tasks = {
        verify::cylinder_geometry,    verify::eigenvalue_formula, verify::stability_verdicts,
        verify::pde_exactness,        verify::tangency_determinant,
        verify::potential_identity,   verify::cutoff_machinery,   verify::dirichlet_solver};
    std::vector<CriterionResult> results(tasks.size());
    if (jobs <= 1) {
        for (size_t i = 0; i < tasks.size(); ++i) results[i] = tasks[i]();
    } else {
        std::vector<std::thread> pool;
        std::atomic<size_t> next{0};
        const int n = std::min<int>(jobs, static_cast<int>(tasks.size()));
        for (int w = 0; w < n; ++w)
            pool.emplace_back([&] {
                for (size_t i = next++; i < tasks.size(); i = next++) results[i] = tasks[i]();
            });
        for (auto& t : pool) t.join();
    }
    bool ok = true;
    json jout = json::array();
    for (const auto& r : results) {
        std::printf("%s  [%d] %-34s (%.2f s)  %s\n", r.pass ? "PASS" : "FAIL", r.id,
                    r.name.c_str(), r.seconds, r.details.c_str());
        ok = ok && r.pass;
        jout.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass},
                        {"seconds", r.seconds}, {"details", r.details}});
    }
    std::printf("%s\n", ok ? "all checks passed" : "FAILURES present");
    if (!out.empty()) write_json(out, jout);
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ektau: numerical workbench for CMC surface stability in E(kappa,tau)"};
    app.require_subcommand(1);
    int jobs = 1;

    std::string space_arg = "kappa=0,tau=0.5";
    std::string surface_arg = "cylinder:k=0";
    std::string config_path;

    auto* curvature = app.add_subcommand("curvature", "fundamental forms and curvatures");
    std::string curv_out;
    int curv_samples = 3;
    curvature->add_option("--space", space_arg, "kappa=<v>,tau=<v>");
    curvature->add_option("--surface", surface_arg, "family:key=value,...");
    curvature->add_option("--samples", curv_samples, "sample points per direction");
    curvature->add_option("--out", curv_out, "JSON report path");

    auto* spectrum = app.add_subcommand("spectrum", "first Dirichlet eigenvalue of L");
    std::string spec_domain = "1x1", spec_grid = "200", spec_out;
    spectrum->add_option("--space", space_arg, "kappa=<v>,tau=<v>");
    spectrum->add_option("--surface", surface_arg, "family:key=value,...");
    spectrum->add_option("--domain", spec_domain, "rectangle sizes a[xb]");
    spectrum->add_option("--grid", spec_grid, "interior nodes n[xm]");
    spectrum->add_option("--out", spec_out, "JSON report path");

    auto* stability = app.add_subcommand("stability-sweep", "cylinder stability verdict");
    double stab_k = 0.0;
    std::string stab_domains = "1,2,4,8", stab_csv, stab_json;
    int stab_grid = 96;
    stability->add_option("--space", space_arg, "kappa=<v>,tau=<v>");
    stability->add_option("--k", stab_k, "geodesic curvature of the base curve");
    stability->add_option("--domains", stab_domains, "square sizes, comma separated");
    stability->add_option("--grid", stab_grid, "interior nodes per direction");
    stability->add_option("--out", stab_csv, "CSV sweep table path");
    stability->add_option("--json", stab_json, "JSON verdict path");

    auto* parab = app.add_subcommand("parabolicity", "cutoff energies and the estimate chain");
    std::string parab_model = "plane", parab_taper = "harmonic", parab_csv;
    std::string parab_u = "0.5", parab_v = "1", parab_growth, parab_growth_out;
    double parab_r0 = 1.0;
    int parab_levels = 8;
    parab->add_option("--model", parab_model, "plane | cylinder[:c=..] | hyperbolic");
    parab->add_option("--r0", parab_r0, "base radius of the cutoff schedule");
    parab->add_option("--levels", parab_levels, "number of cutoff levels");
    parab->add_option("--taper", parab_taper, "harmonic|linear|smoothstep");
    parab->add_option("--u", parab_u, "test field u(x,y)");
    parab->add_option("--v", parab_v, "positive field v(x,y)");
    parab->add_option("--out", parab_csv, "CSV chain table path");
    parab->add_option("--growth", parab_growth, "ball radii for the growth report");
    parab->add_option("--growth-out", parab_growth_out, "CSV growth table path");

    auto* pde = app.add_subcommand("pde-solve", "horizontal minimal-graph Dirichlet problem");
    std::string pde_domain = "0,1,0,1", pde_grid = "41", pde_boundary = "y", pde_prefix;
    pde->add_option("--domain", pde_domain, "y0,y1,z0,z1");
    pde->add_option("--grid", pde_grid, "nodes n[xm]");
    auto* pde_bexpr = pde->add_option("--boundary", pde_boundary, "boundary expression g(y,z)");
    std::string pde_boundary_csv;
    pde->add_option("--boundary-csv", pde_boundary_csv, "boundary trace CSV (y,z,value rows)")
        ->excludes(pde_bexpr);
    pde->add_option("--out-prefix", pde_prefix, "write <prefix>.csv and <prefix>.json");

    auto* verify_cmd = app.add_subcommand("verify-all", "run the full verification suite");
    std::string verify_out;
    verify_cmd->add_option("--out", verify_out, "JSON results path");
    verify_cmd->add_option("--jobs", jobs, "worker parallelism bound")->capture_default_str();

    for (auto* sub : {curvature, spectrum, stability, parab, pde, verify_cmd})
        sub->add_option("--config", config_path, "JSON job config (schema 1)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_path.empty()) {
            const json cfg = parse_json_file(config_path);
            require_schema(cfg);
            if (cfg.contains("space"))
                space_arg = "kappa=" + std::to_string(require_number(cfg["space"], "kappa")) +
                            ",tau=" + std::to_string(require_number(cfg["space"], "tau"));
            if (cfg.contains("boundary")) pde_boundary = cfg["boundary"].get<std::string>();
            if (cfg.contains("domain") && cfg["domain"].is_string())
                spec_domain = pde_domain = cfg["domain"].get<std::string>();
            if (cfg.contains("grid")) {
                if (cfg["grid"].is_number_integer()) {
                    stab_grid = cfg["grid"].get<int>();
                    spec_grid = pde_grid = std::to_string(stab_grid);
                } else if (cfg["grid"].is_string()) {
                    spec_grid = pde_grid = cfg["grid"].get<std::string>();
                }
            }
            if (cfg.contains("surface") && cfg["surface"].is_object()) {
                const auto spec = surface_spec_from_json(cfg["surface"]);
                surface_arg = spec.family;  // parsed again below from JSON fields
                if (spec.family == "cylinder")
                    surface_arg += ":k=" + format_double(spec.k_gamma);
                else if (spec.family == "fmp")
                    surface_arg += ":theta=" + format_double(spec.theta);
                else if (spec.family == "vertical_plane")
                    surface_arg +=
                        ":a=" + format_double(spec.a) + ",b=" + format_double(spec.b);
                else if (spec.family == "horizontal_graph")
                    surface_arg += ":u=" + spec.expression;
                else if (spec.family == "custom_grid")
                    surface_arg += ":csv=" + spec.csv_path;
            }
        }
        if (curvature->parsed())
            return run_curvature(space_arg, surface_arg, curv_samples, curv_out);
        if (spectrum->parsed())
            return run_spectrum(space_arg, surface_arg, spec_domain, spec_grid, spec_out);
        if (stability->parsed())
            return run_stability(space_arg, stab_k, stab_domains, stab_grid, stab_csv,
                                 stab_json);
        if (parab->parsed())
            return run_parabolicity(parab_model, parab_r0, parab_levels, parab_taper, parab_u,
                                    parab_v, parab_csv, parab_growth, parab_growth_out);
        if (pde->parsed())
            return run_pde_solve(pde_domain, pde_grid, pde_boundary, pde_boundary_csv, pde_prefix);
        if (verify_cmd->parsed()) return run_verify_all(jobs, verify_out);
    } catch (const SolverError& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
