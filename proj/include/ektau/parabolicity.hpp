#pragma once

// Cutoff-energy machinery on model surfaces: rotationally symmetric metrics
// dr^2 + f(r)^2 dtheta^2 (flat plane, flat cylinders, user profiles),
// capacity-style taper energies, the estimate chain of the vanishing-energy
// argument, and the quadratic-area-growth diagnostic.

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <string>
#include <vector>

#include "ektau/common.hpp"

namespace ektau {

struct RotationalMetric {
    std::function<double(double)> profile;  // f in dr^2 + f(r)^2 dtheta^2
    std::string name = "custom";
    bool has_pole = false;  // f(0) = 0 and r = 0 is an interior point
};

inline RotationalMetric flat_plane() {
    return {[](double r) { return r; }, "plane", true};
}

inline RotationalMetric flat_cylinder(double circumference) {
    if (circumference <= 0) throw ContractError("flat_cylinder: circumference must be positive");
    const double f = circumference / (2.0 * M_PI);
    return {[f](double) { return f; }, "cylinder", false};
}

inline RotationalMetric hyperbolic_plane() {
    return {[](double r) { return std::sinh(r); }, "hyperbolic", true};
}

enum class Taper { Harmonic, Linear, Smoothstep };

inline const char* taper_name(Taper t) {
    switch (t) {
        case Taper::Harmonic: return "harmonic";
        case Taper::Linear: return "linear";
        default: return "smoothstep";
    }
}

// A sequence of cutoff profiles: phi_j = 1 on r <= r_j, a taper on the
// annulus (r_j, R_j), 0 beyond.  The inner radii must increase so that the
// plateau regions exhaust the computational window.
struct CutoffFamily {
    RotationalMetric surface;
    std::vector<std::pair<double, double>> schedule;  // (r_j, R_j)
    Taper taper = Taper::Harmonic;
    int radial_nodes = 256;  // per annulus

    int levels() const { return static_cast<int>(schedule.size()); }

    void validate() const {
        double prev = 0.0;
        for (const auto& [r, R] : schedule) {
            if (!(r > 0.0) || !(R > r))
                throw ContractError(
                    "cutoff family: each level needs R_j > r_j > 0 (a plateau with no taper "
                    "annulus is not compactly supported)");
            if (r < prev)
                throw ContractError("cutoff family: inner radii must be nondecreasing");
            prev = r;
        }
        if (schedule.empty()) throw ContractError("cutoff family: empty schedule");
    }
};

// The standard vanishing-energy schedule on surfaces with a pole:
// r_j = r0 e^j, R_j = r_j e^j, so a harmonic taper on the flat plane has
// energy 2 pi / j.
inline CutoffFamily log_family(const RotationalMetric& surface, double r0, int count,
                               Taper taper = Taper::Harmonic) {
    CutoffFamily fam;
    fam.surface = surface;
    fam.taper = taper;
    for (int j = 1; j <= count; ++j) {
        const double r = r0 * std::exp(static_cast<double>(j));
        fam.schedule.emplace_back(r, r * std::exp(static_cast<double>(j)));
    }
    fam.validate();
    return fam;
}

namespace detail {

struct TaperData {
    double r0, r1;         // annulus
    double harmonic_norm;  // int_{r0}^{r1} dr / f for the harmonic taper
    // cumulative flux integral A(r) = int_{r0}^{r} ds / f(s) tabulated on the
    // log-spaced edge grid, for O(1) harmonic taper evaluations
    std::vector<double> edges, cumulative;
};

// midpoint nodes on the annulus; log spaced for the harmonic taper (the
// integrand is then near-constant on capacity-type profiles), uniform
// otherwise
inline std::vector<double> annulus_nodes(double r0, double r1, int n, bool log_spaced) {
    std::vector<double> mid(n);
    if (log_spaced) {
        const double u0 = std::log(r0), du = (std::log(r1) - u0) / n;
        for (int i = 0; i < n; ++i) mid[i] = std::exp(u0 + (i + 0.5) * du);
    } else {
        const double dr = (r1 - r0) / n;
        for (int i = 0; i < n; ++i) mid[i] = r0 + (i + 0.5) * dr;
    }
    return mid;
}

inline double annulus_width(double r0, double r1, int n, bool log_spaced, int i) {
    if (!log_spaced) return (r1 - r0) / n;
    const double u0 = std::log(r0), du = (std::log(r1) - u0) / n;
    return std::exp(u0 + (i + 1.0) * du) - std::exp(u0 + i * du);
}

inline TaperData taper_data(const CutoffFamily& fam, int j) {
    if (j < 0 || j >= fam.levels()) throw ContractError("cutoff level out of range");
    TaperData td;
    td.r0 = fam.schedule[j].first;
    td.r1 = fam.schedule[j].second;
    td.harmonic_norm = 0.0;
    if (fam.taper == Taper::Harmonic) {
        const int n = std::max(fam.radial_nodes, 64);
        const double u0 = std::log(td.r0), du = (std::log(td.r1) - u0) / n;
        td.edges.resize(n + 1);
        td.cumulative.resize(n + 1);
        td.edges[0] = td.r0;
        td.cumulative[0] = 0.0;
        for (int i = 0; i < n; ++i) {
            td.edges[i + 1] = std::exp(u0 + (i + 1) * du);
            const double mid = std::exp(u0 + (i + 0.5) * du);
            td.cumulative[i + 1] = td.cumulative[i] + (td.edges[i + 1] - td.edges[i]) /
                                                          fam.surface.profile(mid);
        }
        td.harmonic_norm = td.cumulative.back();
    }
    return td;
}

// phi and phi' on [r0, r1]; phi = 1 below, 0 above.
inline double taper_value(const CutoffFamily& fam, const TaperData& td, double r) {
    if (r <= td.r0) return 1.0;
    if (r >= td.r1) return 0.0;
    switch (fam.taper) {
        case Taper::Linear:
            return (td.r1 - r) / (td.r1 - td.r0);
        case Taper::Smoothstep: {
            const double x = (r - td.r0) / (td.r1 - td.r0);
            return 1.0 - x * x * (3.0 - 2.0 * x);
        }
        case Taper::Harmonic:
        default: {
            // 1 - A(r)/A(r1) with A the tabulated flux integral of 1/f
            const auto it = std::upper_bound(td.edges.begin(), td.edges.end(), r);
            const size_t hi = std::min(td.edges.size() - 1,
                                       static_cast<size_t>(it - td.edges.begin()));
            const size_t lo = hi - 1;
            const double t = (r - td.edges[lo]) / (td.edges[hi] - td.edges[lo]);
            const double A = td.cumulative[lo] + t * (td.cumulative[hi] - td.cumulative[lo]);
            return 1.0 - A / td.harmonic_norm;
        }
    }
}

inline double taper_slope(const CutoffFamily& fam, const TaperData& td, double r) {
    if (r <= td.r0 || r >= td.r1) return 0.0;
    switch (fam.taper) {
        case Taper::Linear:
            return -1.0 / (td.r1 - td.r0);
        case Taper::Smoothstep: {
            const double l = td.r1 - td.r0, x = (r - td.r0) / l;
            return -6.0 * x * (1.0 - x) / l;
        }
        case Taper::Harmonic:
        default:
            return -1.0 / (fam.surface.profile(r) * td.harmonic_norm);
    }
}

}  // namespace detail

// E(phi_j) = int |grad phi_j|^2 dA = 2 pi int phi'^2 f dr, midpoint rule on
// the taper annulus.
inline double cutoff_energy(const CutoffFamily& fam, int j) {
    fam.validate();
    if (fam.radial_nodes < 64)
        throw ResolutionError("cutoff_energy: the annulus needs at least 64 radial nodes");
    const auto td = detail::taper_data(fam, j);
    const bool log_spaced = fam.taper == Taper::Harmonic;
    const int n = fam.radial_nodes;
    const auto mid = detail::annulus_nodes(td.r0, td.r1, n, log_spaced);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double s = detail::taper_slope(fam, td, mid[i]);
        sum += s * s * fam.surface.profile(mid[i]) *
               detail::annulus_width(td.r0, td.r1, n, log_spaced, i);
    }
    return 2.0 * M_PI * sum;
}

// --- the estimate chain --------------------------------------------------------

// Scalar fields on the model surface, as functions of (r, theta).
using SurfaceField = std::function<double(double, double)>;

// Adapter for fields written in the Cartesian coordinates of a pole chart.
inline SurfaceField cartesian_field(const std::function<double(double, double)>& fn) {
    return [fn](double r, double theta) {
        return fn(r * std::cos(theta), r * std::sin(theta));
    };
}

struct ChainRow {
    int j = 0;
    double r_inner = 0, r_outer = 0;
    double energy = 0;          // E(phi_j)
    double inner_term = 0;      // int_{Omega_j} v^2 |grad(u/v)|^2
    double annulus_term = 0;    // int_{supp phi_j - Omega_j} phi_j^2 v^2 |grad(u/v)|^2
    double cauchy_schwarz = 0;  // 2 sqrt(C E) sqrt(annulus_term)
    double energy_bound = 0;    // 4 C E(phi_j)
    bool annulus_bound_ok = false;  // annulus_term <= 4 C E
    bool chain_ok = false;          // inner + annulus <= cauchy_schwarz
};

struct ChainReport {
    std::vector<ChainRow> rows;
    double sup_u2 = 0;          // the constant C, observed sup of u^2
    double ratio_variance = 0;  // area-weighted variance of u/v on the window
    bool all_annulus_bounds = true;
    bool all_chain = true;
    bool quotient_constant = false;  // the conclusion u/v = const is sustained
};

namespace detail {

struct PolarPatch {
    std::vector<double> r, dr;  // midpoint nodes and widths
    int n_theta;
    double dtheta() const { return 2.0 * M_PI / n_theta; }
};

inline PolarPatch polar_patch(double r0, double r1, int n_r, int n_theta, bool log_spaced) {
    PolarPatch p;
    p.n_theta = n_theta;
    p.r = annulus_nodes(r0, r1, n_r, log_spaced);
    p.dr.resize(n_r);
    for (int i = 0; i < n_r; ++i) p.dr[i] = annulus_width(r0, r1, n_r, log_spaced, i);
    return p;
}

// integral of w(r, theta) dA over the patch, midpoint rule
template <typename Fn>
double patch_integral(const RotationalMetric& M, const PolarPatch& p, Fn w) {
    double sum = 0.0;
    for (size_t i = 0; i < p.r.size(); ++i) {
        const double f = M.profile(p.r[i]);
        for (int k = 0; k < p.n_theta; ++k) {
            sum += w(p.r[i], k * p.dtheta()) * f * p.dr[i] * p.dtheta();
        }
    }
    return sum;
}

// |grad(u/v)|^2 at (r, theta) by central differences in both directions
inline double quotient_gradient2(const RotationalMetric& M, const SurfaceField& u,
                                 const SurfaceField& v, double r, double theta, double hr,
                                 double htheta) {
    auto w = [&](double rr, double tt) {
        const double den = v(rr, tt);
        if (!(den > 0.0)) throw ContractError("vanishing_energy_chain_check: v must be positive");
        return u(rr, tt) / den;
    };
    const double wr = (w(r + hr, theta) - w(r - hr, theta)) / (2.0 * hr);
    const double wt = (w(r, theta + htheta) - w(r, theta - htheta)) / (2.0 * htheta);
    const double f = M.profile(r);
    return wr * wr + wt * wt / (f * f);
}

}  // namespace detail

inline ChainReport vanishing_energy_chain_check(const RotationalMetric& M, const SurfaceField& u,
                                        const SurfaceField& v, const CutoffFamily& fam,
                                        int n_theta = 64) {
    fam.validate();
    ChainReport report;
    const double r_outer_max = fam.schedule.back().second;
    const double r_lo = M.has_pole ? 1e-3 * std::min(1.0, fam.schedule.front().first) : 1e-6;

    // observed sup of u^2 and the variance of u/v over the full window
    {
        const auto patch = detail::polar_patch(r_lo, r_outer_max, 512, n_theta, true);
        double area = 0.0, mean = 0.0;
        for (size_t i = 0; i < patch.r.size(); ++i)
            for (int k = 0; k < n_theta; ++k) {
                const double theta = k * patch.dtheta();
                const double uu = u(patch.r[i], theta);
                const double vv = v(patch.r[i], theta);
                if (!(vv > 0.0))
                    throw ContractError("vanishing_energy_chain_check: v must be positive");
                report.sup_u2 = std::max(report.sup_u2, uu * uu);
                const double w = M.profile(patch.r[i]) * patch.dr[i];
                area += w;
                mean += w * uu / vv;
            }
        mean /= area;
        double var = 0.0;
        for (size_t i = 0; i < patch.r.size(); ++i)
            for (int k = 0; k < n_theta; ++k) {
                const double theta = k * patch.dtheta();
                const double q = u(patch.r[i], theta) / v(patch.r[i], theta) - mean;
                var += q * q * M.profile(patch.r[i]) * patch.dr[i];
            }
        report.ratio_variance = var / area;
    }

    const double C = report.sup_u2;
    for (int j = 0; j < fam.levels(); ++j) {
        ChainRow row;
        row.j = j + 1;
        row.r_inner = fam.schedule[j].first;
        row.r_outer = fam.schedule[j].second;
        row.energy = cutoff_energy(fam, j);
        const auto td = detail::taper_data(fam, j);

        const int n_r = std::max(fam.radial_nodes, 128);
        const auto inner = detail::polar_patch(r_lo, row.r_inner, n_r, n_theta, M.has_pole);
        row.inner_term = detail::patch_integral(M, inner, [&](double r, double t) {
            const double hr = 1e-4 * std::max(1.0, r);
            const double g2 = detail::quotient_gradient2(M, u, v, r, t, hr, 1e-4);
            const double vv = v(r, t);
            return vv * vv * g2;
        });
        const auto ann = detail::polar_patch(row.r_inner, row.r_outer, n_r, n_theta, true);
        row.annulus_term = detail::patch_integral(M, ann, [&](double r, double t) {
            const double phi = detail::taper_value(fam, td, r);
            const double hr = 1e-4 * std::max(1.0, r);
            const double g2 = detail::quotient_gradient2(M, u, v, r, t, hr, 1e-4);
            const double vv = v(r, t);
            return phi * phi * vv * vv * g2;
        });
        row.energy_bound = 4.0 * C * row.energy;
        row.cauchy_schwarz = 2.0 * std::sqrt(C * row.energy * row.annulus_term);
        const double tol_d = 1e-9 * (1.0 + row.energy_bound);
        const double tol_c = 1e-9 * (1.0 + row.cauchy_schwarz);
        row.annulus_bound_ok = row.annulus_term <= row.energy_bound + tol_d;
        row.chain_ok = row.inner_term + row.annulus_term <= row.cauchy_schwarz + tol_c;
        report.all_annulus_bounds = report.all_annulus_bounds && row.annulus_bound_ok;
        report.all_chain = report.all_chain && row.chain_ok;
        report.rows.push_back(row);
    }

    // The conclusion of the vanishing-energy argument: the inner integral is
    // dominated by 4 C E(phi_j) at every level, which tends to zero.
    bool dominated = report.all_chain && report.all_annulus_bounds;
    for (const auto& row : report.rows)
        dominated = dominated &&
                    row.inner_term <= row.energy_bound + 1e-9 * (1.0 + row.energy_bound);
    const bool energies_decaying =
        report.rows.size() < 2 || report.rows.back().energy < report.rows.front().energy;
    report.quotient_constant = dominated && energies_decaying;
    return report;
}

// --- area growth -----------------------------------------------------------------

struct GrowthReport {
    std::vector<double> radii;
    std::vector<double> volumes;  // Vol(B(p0, r))
    std::vector<double> ratios;   // r^{-2} Vol
    bool truncated = false;       // some radius exceeded the computational window
    bool quadratic = true;        // bounded-ratio diagnostic
};

// Geodesic-ball volumes by Dijkstra distances on the metric grid (radial,
// angular and diagonal edges) plus cell-area summation.  p0 is the pole for
// pole charts, otherwise a point on the r = 0 boundary circle.
inline GrowthReport area_growth(const RotationalMetric& M, const std::vector<double>& radii,
                                double window = 0.0, int n_r = 400, int n_theta = 256) {
    if (radii.empty()) throw ContractError("area_growth: empty radius list");
    GrowthReport rep;
    rep.radii = radii;
    const double rmax = *std::max_element(radii.begin(), radii.end());
    if (window <= 0.0) window = 1.05 * rmax;
    if (window < rmax) {
        rep.truncated = true;
        log_msg(LogLevel::Info, "area_growth: window %.3g truncates radius %.3g", window, rmax);
    }

    const double dr = window / n_r, dtheta = 2.0 * M_PI / n_theta;
    auto rc = [&](int i) { return (i + 0.5) * dr; };
    const int N = n_r * n_theta + 1;  // + center node
    const int center = n_r * n_theta;
    auto id = [&](int i, int k) { return i * n_theta + ((k % n_theta) + n_theta) % n_theta; };

    std::vector<double> dist(N, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue;
    auto push = [&](int node, double d) {
        if (d < dist[node] - 1e-15) {
            dist[node] = d;
            queue.push({d, node});
        }
    };
    if (M.has_pole) {
        push(center, 0.0);
    } else {
        push(id(0, 0), 0.0);   // boundary base point
        dist[center] = 0.0;    // unused
    }

    while (!queue.empty()) {
        const auto [d, node] = queue.top();
        queue.pop();
        if (d > dist[node] + 1e-15) continue;
        if (node == center) {
            for (int k = 0; k < n_theta; ++k) push(id(0, k), d + rc(0));
            continue;
        }
        const int i = node / n_theta, k = node % n_theta;
        if (M.has_pole && i == 0) push(center, d + rc(0));
        const double f_here = M.profile(rc(i));
        push(id(i, k + 1), d + f_here * dtheta);
        push(id(i, k - 1), d + f_here * dtheta);
        if (i + 1 < n_r) {
            const double f_mid = M.profile(rc(i) + 0.5 * dr);
            const double diag = std::hypot(dr, f_mid * dtheta);
            push(id(i + 1, k), d + dr);
            push(id(i + 1, k + 1), d + diag);
            push(id(i + 1, k - 1), d + diag);
        }
        if (i > 0) {
            const double f_mid = M.profile(rc(i) - 0.5 * dr);
            const double diag = std::hypot(dr, f_mid * dtheta);
            push(id(i - 1, k), d + dr);
            push(id(i - 1, k + 1), d + diag);
            push(id(i - 1, k - 1), d + diag);
        }
    }

    for (const double rho : radii) {
        double vol = 0.0;
        for (int i = 0; i < n_r; ++i) {
            const double cell = M.profile(rc(i)) * dr * dtheta;
            for (int k = 0; k < n_theta; ++k)
                if (dist[id(i, k)] < rho) vol += cell;
        }
        rep.volumes.push_back(vol);
        rep.ratios.push_back(vol / (rho * rho));
    }
    // diagnostic: bounded ratios mean (at most) quadratic growth
    double head = 0.0;
    for (size_t i = 0; i < (rep.ratios.size() + 1) / 2; ++i) head = std::max(head, rep.ratios[i]);
    rep.quadratic = rep.ratios.back() <= 1.25 * head + 1e-12;
    return rep;
}

}  // namespace ektau
