#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ektau/parabolicity.hpp"

using namespace ektau;
using Catch::Approx;

namespace {

// Independent oracle for the Dirichlet integral of the Gaussian test field
// u = sin(x) exp(-x^2 - y^2): plain Cartesian midpoint quadrature of
// |grad u|^2 on a window that captures the decay.
double gaussian_dirichlet_energy() {
    const int n = 1200;
    const double L = 6.0, h = 2 * L / n;
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double x = -L + (i + 0.5) * h, y = -L + (j + 0.5) * h;
            const double e = std::exp(-x * x - y * y);
            const double ux = (std::cos(x) - 2.0 * x * std::sin(x)) * e;
            const double uy = -2.0 * y * std::sin(x) * e;
            sum += (ux * ux + uy * uy) * h * h;
        }
    return sum;
}

}  // namespace

TEST_CASE("cutoff energies", "[parabolicity][energy]") {
    SECTION("log cutoffs on the flat plane have energy 2 pi / j") {
        const auto fam = log_family(flat_plane(), 1.0, 6);
        for (int j = 1; j <= 6; ++j) {
            CHECK(cutoff_energy(fam, j - 1) == Approx(2.0 * M_PI / j).epsilon(0.01));
        }
    }
    SECTION("energy matches the annulus capacity 2 pi / ln(R/r)") {
        CutoffFamily fam;
        fam.surface = flat_plane();
        fam.schedule = {{0.5, 7.0}, {2.0, 11.0}};
        for (int j = 0; j < 2; ++j) {
            const double cap = 2.0 * M_PI / std::log(fam.schedule[j].second /
                                                     fam.schedule[j].first);
            CHECK(cutoff_energy(fam, j) == Approx(cap).epsilon(0.01));
        }
    }
    SECTION("linear taper of length l on a flat cylinder has energy c / l") {
        const double c = 3.0;
        CutoffFamily fam;
        fam.surface = flat_cylinder(c);
        fam.taper = Taper::Linear;
        fam.schedule = {{1.0, 3.5}, {4.0, 9.0}};
        CHECK(cutoff_energy(fam, 0) == Approx(c / 2.5).epsilon(1e-10));
        CHECK(cutoff_energy(fam, 1) == Approx(c / 5.0).epsilon(1e-10));
    }
    SECTION("the harmonic taper minimizes the energy on a fixed annulus") {
        const double capacity = 2.0 * M_PI / std::log(std::exp(1.0));  // annulus [1, e]
        double energies[3];
        int idx = 0;
        for (Taper taper : {Taper::Harmonic, Taper::Linear, Taper::Smoothstep}) {
            CutoffFamily fam;
            fam.surface = flat_plane();
            fam.taper = taper;
            fam.schedule = {{1.0, std::exp(1.0)}};
            energies[idx++] = cutoff_energy(fam, 0);
        }
        CHECK(energies[0] == Approx(capacity).epsilon(0.01));
        CHECK(energies[0] < energies[1]);
        CHECK(energies[0] < energies[2]);
    }
    SECTION("log-family energies scale as 1 / ln(R_j/r_j): fit exponent near -1") {
        const auto fam = log_family(flat_plane(), 1.0, 8);
        // regress log E against log log(R_j / r_j) = log j
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (int j = 1; j <= 8; ++j) {
            const double x = std::log(static_cast<double>(j));
            const double y = std::log(cutoff_energy(fam, j - 1));
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double slope = (8 * sxy - sx * sy) / (8 * sxx - sx * sx);
        CHECK(slope == Approx(-1.0).margin(0.05));
    }
    SECTION("degenerate schedules are rejected") {
        CutoffFamily fam;
        fam.surface = flat_plane();
        fam.schedule = {{2.0, 2.0}};  // plateau with no taper annulus
        CHECK_THROWS_AS(fam.validate(), ContractError);
        fam.schedule = {{2.0, 4.0}};
        fam.radial_nodes = 16;
        CHECK_THROWS_AS(cutoff_energy(fam, 0), ResolutionError);
    }
}

TEST_CASE("estimate chain", "[parabolicity][chain]") {
    SECTION("constant u and positive v give an identically zero chain") {
        const auto fam = log_family(flat_plane(), 1.0, 4);
        const auto report = vanishing_energy_chain_check(
            flat_plane(), [](double, double) { return 0.7; },
            [](double, double) { return 1.0; }, fam, 32);
        for (const auto& row : report.rows) {
            CHECK(row.inner_term == Approx(0.0).margin(1e-12));
            CHECK(row.annulus_term == Approx(0.0).margin(1e-12));
            CHECK(row.annulus_bound_ok);
            CHECK(row.chain_ok);
        }
        CHECK(report.quotient_constant);
        CHECK(report.ratio_variance < 1e-12);
    }
    SECTION("a constant Jacobi pair on the flat cylinder is detected as proportional") {
        CutoffFamily fam;
        fam.surface = flat_cylinder(2.0 * M_PI);
        fam.taper = Taper::Linear;
        for (int j = 1; j <= 5; ++j)
            fam.schedule.emplace_back(std::exp(static_cast<double>(j)),
                                      std::exp(static_cast<double>(2 * j)));
        const auto report = vanishing_energy_chain_check(
            fam.surface, [](double, double) { return 0.3; },
            [](double, double) { return 1.5; }, fam, 32);
        CHECK(report.quotient_constant);
        CHECK(report.ratio_variance < 1e-12);
        CHECK(report.rows.back().energy < report.rows.front().energy);
    }
    SECTION("a decaying non-Jacobi field breaks the chain and is flagged") {
        const auto fam = log_family(flat_plane(), 1.0, 5);
        const SurfaceField u = cartesian_field([](double x, double y) {
            return std::sin(x) * std::exp(-x * x - y * y);
        });
        const auto report = vanishing_energy_chain_check(flat_plane(), u,
                                                 [](double, double) { return 1.0; }, fam, 96);
        // the annulus estimate always holds here (the field dies off long
        // before the tapers), but the full chain cannot: the inner Dirichlet
        // integral stabilizes at ||grad u||^2 > 0 while 4 C E -> 0.
        CHECK(report.all_annulus_bounds);
        CHECK_FALSE(report.all_chain);
        CHECK_FALSE(report.quotient_constant);
        const double dirichlet = gaussian_dirichlet_energy();
        CHECK(report.rows.back().inner_term == Approx(dirichlet).epsilon(0.02));
        CHECK(report.rows.back().inner_term > report.rows.back().energy_bound);
    }
    SECTION("nonpositive v violates the precondition") {
        const auto fam = log_family(flat_plane(), 1.0, 2);
        CHECK_THROWS_AS(
            vanishing_energy_chain_check(flat_plane(), [](double, double) { return 1.0; },
                                 [](double r, double) { return 1.0 - r; }, fam, 16),
            ContractError);
    }
}

TEST_CASE("area growth", "[parabolicity][growth]") {
    SECTION("flat plane: ratio tends to pi") {
        const auto rep = area_growth(flat_plane(), {1.0, 2.0, 4.0, 6.0});
        for (size_t i = 0; i < rep.radii.size(); ++i) {
            CHECK(rep.volumes[i] == Approx(M_PI * rep.radii[i] * rep.radii[i]).epsilon(0.05));
        }
        CHECK(rep.ratios.back() == Approx(M_PI).epsilon(0.05));
        CHECK(rep.quadratic);
        CHECK_FALSE(rep.truncated);
    }
    SECTION("flat cylinder: linear growth, ratio tends to zero") {
        const double c = 2.0;
        const auto rep = area_growth(flat_cylinder(c), {2.0, 8.0, 20.0});
        CHECK(rep.volumes.back() == Approx(c * 20.0).epsilon(0.1));
        CHECK(rep.ratios.back() < 0.25 * rep.ratios.front());
        CHECK(rep.quadratic);
    }
    SECTION("hyperbolic metric: diverging ratio is flagged as not quadratic") {
        const auto rep = area_growth(hyperbolic_plane(), {1.0, 3.0, 6.0, 9.0});
        // oracle: Vol(B(r)) = 2 pi (cosh r - 1)
        CHECK(rep.volumes[1] == Approx(2.0 * M_PI * (std::cosh(3.0) - 1.0)).epsilon(0.05));
        CHECK_FALSE(rep.quadratic);
    }
    SECTION("volumes are nondecreasing in r") {
        const auto rep = area_growth(flat_plane(), {0.5, 1.0, 1.5, 2.0, 3.0});
        for (size_t i = 1; i < rep.volumes.size(); ++i)
            CHECK(rep.volumes[i] >= rep.volumes[i - 1]);
    }
    SECTION("radii beyond the window produce a truncation warning") {
        const auto rep = area_growth(flat_plane(), {1.0, 5.0}, 3.0);
        CHECK(rep.truncated);
    }
}
