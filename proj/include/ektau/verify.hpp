#pragma once

// The verification suite behind `verify-all`: every check the workbench is
// expected to reproduce, each with its pinned tolerance, reported one line
// per criterion.

#include <chrono>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ektau/horizontal_graph.hpp"
#include "ektau/parabolicity.hpp"
#include "ektau/spectra.hpp"

namespace ektau {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string details;
    double seconds = 0.0;
};

namespace verify {

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

// 1. Vertical cylinder geometry: II = [[k, tau],[tau, 0]], H = k/2, K = 0,
//    K_ext = -tau^2 across the (kappa, tau, k) grid, within 1e-8 / 1e-6.
inline CriterionResult cylinder_geometry() {
    CriterionResult res{1, "cylinder-geometry", false, "", 0};
    const auto start = std::chrono::steady_clock::now();
    const std::vector<std::pair<double, double>> pts = {
        {0.1, 0.2}, {0.5, -0.3}, {-0.7, 0.9}, {1.2, 0.4}};
    double err_II = 0, err_H = 0, err_K = 0, err_Kext = 0;
    int combos = 0, skipped = 0;
    for (double kappa : {-1.0, 0.0, 1.0})
        for (double tau : {0.0, 0.5, 1.0})
            for (double k : {0.0, 0.5, 1.0}) {
                if (std::abs(kappa - 4 * tau * tau) < 1e-12) {
                    ++skipped;
                    continue;
                }
                ++combos;
                const auto sp = SpaceParams::make(kappa, tau);
                const Immersion cyl = cylinder_immersion(sp, k);
                for (const auto& [s, t] : pts) {
                    const FundamentalForms ff = fundamental_forms(cyl, s, t);
                    err_II = std::max({err_II, std::abs(ff.second(0, 0) - k),
                                       std::abs(ff.second(0, 1) - tau),
                                       std::abs(ff.second(1, 1))});
                    err_H = std::max(err_H, std::abs(ff.H - k / 2));
                    err_K = std::max(err_K, std::abs(ff.K));
                    err_Kext = std::max(err_Kext, std::abs(ff.K_ext + tau * tau));
                }
            }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    res.pass = err_II < 1e-8 && err_H < 1e-8 && err_K < 1e-6 && err_Kext < 1e-8 &&
               res.seconds < 10.0;
    res.details = std::to_string(combos) + " spaces (+" + std::to_string(skipped) +
                  " space forms skipped); max errors II " + fmt(err_II) + ", H " + fmt(err_H) +
                  ", K " + fmt(err_K) + ", K_ext " + fmt(err_Kext);
    return res;
}

// 2. First-eigenvalue formula lambda1 = pi^2(1/a^2 + 1/b^2) - (k^2 + kappa)
//    on three rectangles at 200x200, within 1% for five parameter triples.
inline CriterionResult eigenvalue_formula() {
    CriterionResult res{2, "cylinder-eigenvalue-formula", false, "", 0};
    const auto start = std::chrono::steady_clock::now();
    const std::vector<std::array<double, 3>> triples = {
        {-1.0, 0.0, 0.0}, {-1.0, 0.5, 1.0}, {0.0, 0.5, 1.0}, {1.0, 1.0, 0.5}, {0.0, 1.0, 0.0}};
    const std::vector<std::pair<double, double>> domains = {{1, 1}, {2, 1}, {3, 2}};
    double worst = 0;
    for (const auto& [kappa, tau, k] : triples) {
        const auto sp = SpaceParams::make(kappa, tau);
        const Immersion cyl = cylinder_immersion(sp, k, 4.0, 4.0);
        for (const auto& [a, b] : domains) {
            const auto pb = assemble_spectral_problem(cyl, 0, a, 0, b, 200, 200);
            const auto eig = first_eigenvalue(pb);
            const double target =
                M_PI * M_PI * (1.0 / (a * a) + 1.0 / (b * b)) - (k * k + kappa);
            worst = std::max(worst, std::abs(eig.lambda1 - target) / std::abs(target));
        }
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    res.pass = worst < 0.01 && res.seconds < 60.0;
    res.details = "15 problems at 200x200; worst relative error " + fmt(worst) + " in " +
                  fmt(res.seconds) + " s";
    return res;
}

// 3. Stability verdicts across the three regimes of kappa + k^2.
inline CriterionResult stability_verdicts() {
    CriterionResult res{3, "cylinder-stability-verdicts", false, "", 0};
    const auto start = std::chrono::steady_clock::now();
    bool ok = true;
    std::ostringstream det;

    {  // kappa <= -k^2 strictly: stable with lambda1 >= 1
        const auto v = cylinder_stability_verdict(SpaceParams::make(-1.0, 0.0), 0.0,
                                                  {{1, 1}, {2, 2}, {4, 4}, {8, 8}}, 96);
        bool all_above = v.stable && !v.marginal;
        for (const auto& row : v.rows) all_above = all_above && row.lambda1 >= 1.0 - 0.01;
        ok = ok && all_above;
        det << "stable case min lambda1 " << fmt(v.rows.back().lambda1) << "; ";
    }
    {  // kappa + k^2 > 0: unstable with an explicit witness
        const auto v = cylinder_stability_verdict(SpaceParams::make(0.0, 0.5), 1.0,
                                                  {{2, 2}, {4, 4}, {6, 6}, {8, 8}}, 96);
        const bool witnessed = !v.stable && v.witness && v.witness->lambda1 < -0.1;
        ok = ok && witnessed;
        if (v.witness)
            det << "witness [0," << v.witness->a << "]^2 lambda1 " << fmt(v.witness->lambda1)
                << "; ";
    }
    {  // boundary case kappa = -k^2 = 0: marginal, inf lambda1 -> 0
        const auto v = cylinder_stability_verdict(SpaceParams::make(0.0, 0.5), 0.0,
                                                  {{4, 4}, {8, 8}, {16, 16}, {24, 24}}, 96);
        bool marginal = v.stable && v.marginal && std::abs(v.rows.back().lambda1) < 0.05;
        marginal = marginal && v.rows.back().lambda1 < v.rows.front().lambda1;
        ok = ok && marginal;
        det << "boundary case lambda1(24) = " << fmt(v.rows.back().lambda1);
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    res.pass = ok;
    res.details = det.str();
    return res;
}

// 4. Horizontal graph PDE: affine families are exact (no tolerance) and the
//    M_theta surfaces are minimal to 1e-6 on a 256x256 grid.
inline CriterionResult pde_exactness() {
    CriterionResult res{4, "pde-exactness-and-fmp-minimality", false, "", 0};
    const auto start = std::chrono::steady_clock::now();
    double sup_affine = 0.0;
    for (double a : {-2.0, -0.5, 0.0, 1.0, 3.0})
        for (double b : {-2.0, 0.0, 1.5}) {
            const auto gf = affine_graph(a, b, -2, 2, -2, 2, 33, 33);
            sup_affine = std::max(sup_affine, residual(gf).sup);
        }
    for (double c : {-1.5, 0.5, 2.0})
        for (double d : {-1.0, 0.0, 2.0}) {
            const auto gf = affine_z_graph(c, d, -2, 2, -2, 2, 33, 33);
            sup_affine = std::max(sup_affine, residual(gf).sup);
        }
    double sup_H = 0.0;
    for (double theta : {0.0, 0.5, 1.0}) {
        const Immersion m = fmp_surface(theta);
        const int n = 256;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double x = -2.0 + 4.0 * i / (n - 1.0);
                const double y = -2.0 + 4.0 * j / (n - 1.0);
                sup_H = std::max(sup_H, std::abs(fundamental_forms(m, x, y).H));
            }
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    res.pass = sup_affine == 0.0 && sup_H < 1e-6;
    res.details = "affine residual sup " + fmt(sup_affine) + " (exact); max |H(M_theta)| " +
                  fmt(sup_H) + " at 256x256";
    return res;
}

// 5. Tangency determinant det(T1, T2, X_alpha) = -sin(alpha)(x + sinh(2
//    theta) sqrt(1+y^2)) on a 101x101 grid, within 1e-8.
inline CriterionResult tangency_determinant() {
    CriterionResult res{5, "fmp-tangency-determinant", false, "", 0};
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (double theta : {0.0, 1.0})
        for (double alpha : {M_PI / 4, M_PI / 2}) {
            const double S = std::sinh(2 * theta);
            for (int i = 0; i < 101; ++i)
                for (int j = 0; j < 101; ++j) {
                    const double x = -2.0 + 4.0 * i / 100.0;
                    const double y = -2.0 + 4.0 * j / 100.0;
                    const double det = fmp_tangency_determinant(theta, alpha, x, y);
                    const double ref = -std::sin(alpha) * (x + S * std::sqrt(1 + y * y));
                    worst = std::max(worst, std::abs(det - ref));
                }
        }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    res.pass = worst < 1e-8;
    res.details = "max |det + sin(alpha)(x + sinh(2 theta) sqrt(1+y^2))| = " + fmt(worst);
    return res;
}

// 6. Potential identity -K + q_tilde = |A|^2 + Ric(eta) on cylinders and
//    M_theta samples, within 1e-6.
inline CriterionResult potential_identity() {
    CriterionResult res{6, "stability-potential-identity", false, "", 0};
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (double kappa : {-1.0, 0.0, 1.0})
        for (double tau : {0.0, 0.5, 1.0})
            for (double k : {0.0, 0.5, 1.0}) {
                if (std::abs(kappa - 4 * tau * tau) < 1e-12) continue;
                const Immersion cyl = cylinder_immersion(SpaceParams::make(kappa, tau), k);
                for (double s : {-0.9, 0.3, 1.1})
                    for (double t : {-0.4, 0.8})
                        worst = std::max(worst,
                                         std::abs(stability_potentials(cyl, s, t).identity_residual));
            }
    for (double theta : {0.0, 0.5, 1.0}) {
        const Immersion m = fmp_surface(theta);
        for (int i = 0; i <= 32; ++i)
            for (int j = 0; j <= 32; ++j) {
                const double x = -2.0 + i / 8.0, y = -2.0 + j / 8.0;
                worst = std::max(worst,
                                 std::abs(stability_potentials(m, x, y).identity_residual));
            }
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    res.pass = worst < 1e-6;
    res.details = "max |(-K + q_tilde) - (|A|^2 + Ric(eta))| = " + fmt(worst);
    return res;
}

// 7. Cutoff machinery: log-family energies within 1% of 2 pi / j for j <= 8
//    and the estimate chain with a constant Jacobi pair.
inline CriterionResult cutoff_machinery() {
    CriterionResult res{7, "parabolicity-cutoff-chain", false, "", 0};
    const auto start = std::chrono::steady_clock::now();
    const auto fam = log_family(flat_plane(), 1.0, 8);
    double worst_energy = 0.0;
    for (int j = 1; j <= 8; ++j) {
        const double ratio = cutoff_energy(fam, j - 1) / (2.0 * M_PI / j);
        worst_energy = std::max(worst_energy, std::abs(ratio - 1.0));
    }
    const auto report = vanishing_energy_chain_check(
        flat_plane(), [](double, double) { return 0.5; }, [](double, double) { return 2.0; },
        fam, 32);
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    res.pass = worst_energy < 0.01 && report.all_chain && report.all_annulus_bounds &&
               report.quotient_constant && report.ratio_variance < 1e-12;
    res.details = "worst E(phi_j) deviation " + fmt(worst_energy) + "; chain holds at all j; "
                  "var(u/v) = " + fmt(report.ratio_variance);
    return res;
}

// 8. Dirichlet solver: affine recovery to 1e-10, quadratic tail on a
//    perturbed problem, and min |<eta, X>| > 0.
inline CriterionResult dirichlet_solver() {
    CriterionResult res{8, "horizontal-graph-dirichlet-solver", false, "", 0};
    const auto start = std::chrono::steady_clock::now();

    double affine_err = 0.0;
    {
        const double a = 0.8, b = -0.4;
        GraphFunction u0 = affine_graph(a, b, 0, 1, 0, 1, 33, 33);
        u0.closed_form = nullptr;
        for (int i = 1; i < 32; ++i)
            for (int j = 1; j < 32; ++j)
                u0.u(i, j) += 0.15 * std::sin(2.7 * i) * std::cos(1.3 * j);
        const auto rep =
            solve_dirichlet(0, 1, 0, 1, 33, 33,
                            [&](double y, double) { return a * y + b; }, u0);
        for (int i = 0; i < 33; ++i)
            for (int j = 0; j < 33; ++j)
                affine_err = std::max(affine_err,
                                      std::abs(rep.solution.u(i, j) -
                                               (a * rep.solution.y_at(i) + b)));
    }

    const auto rep = solve_dirichlet(0, 1, 0, 1, 41, 41, [](double y, double z) {
        return y + 0.25 * std::cos(M_PI * y) * std::cos(M_PI * z);
    });
    const double min_eta_x = min_killing_component(rep.solution);

    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    res.pass = affine_err < 1e-10 && rep.final_sup < 1e-8 && rep.quadratic_tail &&
               min_eta_x > 0.0;
    res.details = "affine recovery " + fmt(affine_err) + "; perturbed residual " +
                  fmt(rep.final_sup) + ", quadratic tail " +
                  (rep.quadratic_tail ? "yes" : "no") + ", min |<eta,X>| " + fmt(min_eta_x);
    return res;
}

}  // namespace verify

inline std::vector<CriterionResult> run_verification() {
    return {verify::cylinder_geometry(),      verify::eigenvalue_formula(),
            verify::stability_verdicts(),     verify::pde_exactness(),
            verify::tangency_determinant(),   verify::potential_identity(),
            verify::cutoff_machinery(),       verify::dirichlet_solver()};
}

inline bool all_passed(const std::vector<CriterionResult>& results) {
    for (const auto& r : results)
        if (!r.pass) return false;
    return true;
}

}  // namespace ektau
