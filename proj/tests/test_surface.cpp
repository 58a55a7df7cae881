#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ektau/families.hpp"
#include "ektau/surface.hpp"

using namespace ektau;
using Catch::Approx;
using Eigen::Matrix2d;
using Eigen::Vector3d;

namespace {

// Independent oracle for the Gauss curvature: the Brioschi formula applied
// to the induced metric coefficients E, F, G sampled on a local stencil
// around (s, t).  This route never touches the ambient curvature tensor or
// the second fundamental form.
double brioschi_gauss(const Immersion& imm, double s, double t) {
    const double h = 1e-3;
    auto efg = [&](double a, double b) {
        const auto jets = surface_jets(imm, a, b);
        const Eigen::Matrix3d g = metric_at(imm.space, jets.p);
        return Eigen::Vector3d(jets.Fs.dot(g * jets.Fs), jets.Fs.dot(g * jets.Ft),
                               jets.Ft.dot(g * jets.Ft));
    };
    const Eigen::Vector3d c = efg(s, t);
    const Eigen::Vector3d ds = (efg(s + h, t) - efg(s - h, t)) / (2 * h);
    const Eigen::Vector3d dt = (efg(s, t + h) - efg(s, t - h)) / (2 * h);
    const Eigen::Vector3d dss = (efg(s + h, t) - 2 * c + efg(s - h, t)) / (h * h);
    const Eigen::Vector3d dtt = (efg(s, t + h) - 2 * c + efg(s, t - h)) / (h * h);
    const Eigen::Vector3d dst =
        (efg(s + h, t + h) - efg(s + h, t - h) - efg(s - h, t + h) + efg(s - h, t - h)) /
        (4 * h * h);
    const double E = c(0), F = c(1), G = c(2);
    Eigen::Matrix3d M1, M2;
    M1 << -0.5 * dtt(0) + dst(1) - 0.5 * dss(2), 0.5 * ds(0), ds(1) - 0.5 * dt(0),
        dt(1) - 0.5 * ds(2), E, F,
        0.5 * dt(2), F, G;
    M2 << 0.0, 0.5 * dt(0), 0.5 * ds(2),
        0.5 * dt(0), E, F,
        0.5 * ds(2), F, G;
    const double det = E * G - F * F;
    return (M1.determinant() - M2.determinant()) / (det * det);
}

}  // namespace

TEST_CASE("vertical cylinders reproduce the closed-form geometry", "[surface][cylinder]") {
    struct Case {
        double kappa, tau, k;
    };
    const std::vector<Case> cases = {
        {0.0, 0.5, 1.0},   // Nil_3, circle base
        {0.0, 0.5, 0.0},   // Nil_3 vertical plane
        {-1.0, 0.0, 0.0},  // H^2 x R flat cylinder over a geodesic
        {-1.0, 0.0, 1.0},  // horocylinder (1 + kappa/k^2 = 0 branch)
        {-1.0, 0.5, 0.5},  // PSL(2,R), equidistant branch
        {-1.0, 1.0, 2.0},  // circle branch with kappa < 0
        {1.0, 0.0, 0.0},   // S^2 x R geodesic cylinder
        {1.0, 1.0, 0.5},   // Berger sphere, circle branch
        {0.0, 1.0, -1.0},  // negative curvature input (mirrored base circle)
    };
    const std::vector<std::pair<double, double>> pts = {
        {0.0, 0.0}, {0.4, 0.7}, {-1.1, 0.3}, {2.3, -0.8}, {1.7, 1.9}};

    for (const auto& c : cases) {
        const auto sp = SpaceParams::make(c.kappa, c.tau);
        const Immersion cyl = cylinder_immersion(sp, c.k);
        for (const auto& [s, t] : pts) {
            INFO("kappa=" << c.kappa << " tau=" << c.tau << " k=" << c.k << " s=" << s
                          << " t=" << t);
            const FundamentalForms ff = fundamental_forms(cyl, s, t);
            // induced metric is the identity (arclength x unit fiber)
            CHECK((ff.first - Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-10);
            // II = [[k, tau], [tau, 0]]
            CHECK(ff.second(0, 0) == Approx(c.k).margin(1e-8));
            CHECK(ff.second(0, 1) == Approx(c.tau).margin(1e-8));
            CHECK(ff.second(1, 1) == Approx(0.0).margin(1e-8));
            // curvature triple of the lemma
            CHECK(ff.H == Approx(c.k / 2.0).margin(1e-8));
            CHECK(std::abs(ff.K) < 1e-6);
            CHECK(ff.K_ext == Approx(-c.tau * c.tau).margin(1e-8));
            // the tangent plane is vertical, so Kbar = tau^2
            CHECK(ff.ambient_sectional == Approx(c.tau * c.tau).margin(1e-8));
            // cylinders have eta_3 = 0
            CHECK(std::abs(ff.angle) < 1e-10);
        }
    }
}

TEST_CASE("cylinder over a geodesic in Nil_3 is the plane x = 0", "[surface][cylinder]") {
    const Immersion cyl = cylinder_immersion(SpaceParams::make(0.0, 0.5), 0.0);
    for (double s : {-2.0, 0.0, 1.3})
        for (double t : {-1.0, 0.4}) {
            const AmbientPoint p = cyl.position(s, t);
            CHECK(p.x == 0.0);
            CHECK(p.y == Approx(s));
            CHECK(p.z == Approx(t));
        }
}

TEST_CASE("flat cylinder over a geodesic in H^2 x R is totally geodesic", "[surface][cylinder]") {
    const Immersion cyl = cylinder_immersion(SpaceParams::make(-1.0, 0.0), 0.0);
    const FundamentalForms ff = fundamental_forms(cyl, 0.8, -0.4);
    CHECK(ff.second.cwiseAbs().maxCoeff() < 1e-10);
    CHECK(ff.H == Approx(0.0).margin(1e-12));
    CHECK(std::abs(ff.K) < 1e-10);
}

TEST_CASE("kappa > 0 geodesic cylinders stop at the chart boundary", "[surface][cylinder]") {
    const Immersion cyl = cylinder_immersion(SpaceParams::make(1.0, 0.0), 0.0);
    CHECK_NOTHROW(fundamental_forms(cyl, 3.0, 0.0));
    CHECK_THROWS_AS(cyl.position(3.2, 0.0), DomainError);
}

TEST_CASE("stability potential", "[surface][potential]") {
    SECTION("cylinders: |A|^2 = k^2 + 2 tau^2, Ric(eta) = kappa - 2 tau^2, q = k^2 + kappa") {
        for (const auto& [kappa, tau, k] :
             std::vector<std::array<double, 3>>{{0.0, 0.5, 1.0}, {-1.0, 0.0, 0.5},
                                                {-1.0, 1.0, 1.0}, {1.0, 1.0, 0.5}}) {
            const auto sp = SpaceParams::make(kappa, tau);
            const Immersion cyl = cylinder_immersion(sp, k);
            const FundamentalForms ff = fundamental_forms(cyl, 0.7, 0.2);
            CHECK(ff.shape_norm2 == Approx(k * k + 2 * tau * tau).margin(1e-8));
            CHECK(ff.ricci_normal == Approx(kappa - 2 * tau * tau).margin(1e-8));
            CHECK(potential_q(cyl, 0.7, 0.2) == Approx(k * k + kappa).margin(1e-8));
        }
    }
    SECTION("vertical plane over a geodesic of H^2 x R has q = -1") {
        const Immersion cyl = cylinder_immersion(SpaceParams::make(-1.0, 0.0), 0.0);
        CHECK(potential_q(cyl, 0.3, -0.9) == Approx(-1.0).margin(1e-10));
    }
    SECTION("the -K + q_tilde identity holds on M_theta grids") {
        for (double theta : {0.0, 0.5, 1.0}) {
            const Immersion m = fmp_surface(theta);
            for (double x : {-1.5, 0.0, 1.0})
                for (double y : {-1.2, 0.3, 1.6}) {
                    const auto pot = stability_potentials(m, x, y);
                    CHECK(std::abs(pot.identity_residual) < 1e-6);
                }
        }
    }
}

TEST_CASE("FMP surfaces M_theta", "[surface][fmp]") {
    SECTION("theta = 0 is the graph z = xy/2 with T2 = E2") {
        const Immersion m = fmp_surface(0.0);
        const AmbientPoint p = m.position(1.3, -0.8);
        CHECK(p.z == Approx(1.3 * -0.8 / 2.0));
        Vector3d T1, T2;
        m.derivative1(1.3, -0.8, T1, T2);
        const auto fr = frame_at(m.space, p).columns;
        CHECK((T2 - fr.col(1)).norm() < 1e-14);
        CHECK((T1 - (fr.col(0) + p.y * fr.col(2))).norm() < 1e-14);
    }
    SECTION("minimality: |H| below 1e-6 on sampled grids") {
        for (double theta : {0.0, 0.5, 1.0}) {
            const Immersion m = fmp_surface(theta);
            double hmax = 0.0;
            for (int i = 0; i <= 16; ++i)
                for (int j = 0; j <= 16; ++j) {
                    const double x = -2.0 + 0.25 * i, y = -2.0 + 0.25 * j;
                    hmax = std::max(hmax, std::abs(fundamental_forms(m, x, y).H));
                }
            CHECK(hmax < 1e-6);
        }
    }
    SECTION("tangency determinant matches -sin(alpha) (x + sinh(2 theta) sqrt(1+y^2))") {
        for (double theta : {0.0, 1.0})
            for (double alpha : {M_PI / 4, M_PI / 2, 2.5})
                for (double x : {-1.0, 0.5})
                    for (double y : {-1.5, 0.0, 2.0}) {
                        const double det = fmp_tangency_determinant(theta, alpha, x, y);
                        const double ref = -std::sin(alpha) *
                                           (x + std::sinh(2 * theta) * std::sqrt(1 + y * y));
                        CHECK(det == Approx(ref).margin(1e-8));
                    }
    }
    SECTION("<eta, X_alpha> vanishes exactly on x = -sinh(2 theta) sqrt(1+y^2)") {
        const double theta = 0.7, alpha = 1.1;
        const Immersion m = fmp_surface(theta, 6.0, 3.0);
        const VectorField Xa = nil_horizontal_killing(m.space, alpha);
        for (double y : {-1.0, 0.0, 1.5}) {
            const double xc = -std::sinh(2 * theta) * std::sqrt(1 + y * y);
            CHECK(std::abs(killing_normal_component(m, xc, y, Xa)) < 1e-10);
            CHECK(std::abs(killing_normal_component(m, xc + 0.5, y, Xa)) > 1e-3);
        }
    }
}

TEST_CASE("jacobi candidate functions", "[surface][jacobi]") {
    SECTION("vertical cylinders have zero angle function") {
        const Immersion cyl = cylinder_immersion(SpaceParams::make(-1.0, 0.5), 1.0);
        for (double s : {-1.0, 0.0, 2.0}) {
            CHECK(std::abs(jacobi_candidates(cyl, s, 0.3).angle) < 1e-10);
        }
    }
    SECTION("horizontal slice of H^2 x R has angle +-1 (finite-difference jets)") {
        Immersion slice;
        slice.space = SpaceParams::make(-1.0, 0.0);
        slice.s0 = slice.t0 = -1.0;
        slice.s1 = slice.t1 = 1.0;
        slice.position = [](double s, double t) -> AmbientPoint { return {s, t, 0.0}; };
        for (double s : {-0.5, 0.0, 0.8})
            for (double t : {-0.7, 0.2}) {
                CHECK(std::abs(jacobi_candidates(slice, s, t).angle) == Approx(1.0).margin(1e-9));
            }
    }
    SECTION("<eta, X> never vanishes on horizontal graphs") {
        auto jets = [](double y, double z) {
            // a graph with some wiggle, still single valued along X
            const double u = 0.4 * y + 0.2 * std::sin(y + z);
            const double c = 0.2 * std::cos(y + z);
            return GraphJets{u, 0.4 + c, c, -0.2 * std::sin(y + z), -0.2 * std::sin(y + z),
                             -0.2 * std::sin(y + z)};
        };
        const Immersion graph = horizontal_graph_immersion(jets, -2, 2, -2, 2);
        for (double y = -2.0; y <= 2.0; y += 0.5)
            for (double z = -2.0; z <= 2.0; z += 0.5) {
                const auto jc = jacobi_candidates(graph, y, z);
                REQUIRE(jc.killing_x.has_value());
                CHECK(std::abs(*jc.killing_x) > 1e-3);
            }
    }
}

TEST_CASE("pinch quantity equals the principal-curvature gap", "[surface][shape]") {
    const Immersion m = fmp_surface(0.7);
    for (double x : {-1.1, 0.4})
        for (double y : {-0.3, 1.2}) {
            const FundamentalForms ff = fundamental_forms(m, x, y);
            const Eigen::EigenSolver<Eigen::Matrix2d> es(ff.shape());
            const double k1 = es.eigenvalues()(0).real(), k2 = es.eigenvalues()(1).real();
            CHECK(ff.pinch == Approx(0.25 * (k1 - k2) * (k1 - k2)).margin(1e-10));
            CHECK(ff.shape_norm2 == Approx(k1 * k1 + k2 * k2).margin(1e-10));
            CHECK(ff.pinch >= 0.0);
        }
}

TEST_CASE("Gauss curvature agrees with the intrinsic Brioschi oracle", "[surface][gauss]") {
    const Immersion m = fmp_surface(0.5);
    for (double x : {-0.8, 0.4})
        for (double y : {-0.6, 1.0}) {
            CHECK(fundamental_forms(m, x, y).K == Approx(brioschi_gauss(m, x, y)).margin(1e-4));
        }
    const Immersion cyl = cylinder_immersion(SpaceParams::make(-1.0, 0.5), 0.5);
    CHECK(brioschi_gauss(cyl, 0.4, 0.1) == Approx(0.0).margin(1e-6));
}

TEST_CASE("orientation flip negates H and II, fixes K and K_ext", "[surface][orientation]") {
    const Immersion m = fmp_surface(0.5);
    Immersion swapped = m;
    swapped.position = [&m](double s, double t) { return m.position(t, s); };
    swapped.derivative1 = [&m](double s, double t, Vector3d& Fs, Vector3d& Ft) {
        m.derivative1(t, s, Ft, Fs);
    };
    swapped.derivative2 = [&m](double s, double t, Vector3d& Fss, Vector3d& Fst, Vector3d& Ftt) {
        m.derivative2(t, s, Ftt, Fst, Fss);
    };
    for (double x : {-0.9, 0.3})
        for (double y : {0.2, 1.1}) {
            const FundamentalForms a = fundamental_forms(m, x, y);
            const FundamentalForms b = fundamental_forms(swapped, y, x);
            CHECK(b.H == Approx(-a.H).margin(1e-10));
            CHECK(b.K == Approx(a.K).margin(1e-10));
            CHECK(b.K_ext == Approx(a.K_ext).margin(1e-10));
            CHECK(b.second(0, 0) == Approx(-a.second(1, 1)).margin(1e-10));
            CHECK(b.second(0, 1) == Approx(-a.second(0, 1)).margin(1e-10));
            CHECK((b.normal.components + a.normal.components).norm() < 1e-10);
        }
}

TEST_CASE("rank deficient immersions raise a degeneracy error", "[surface][errors]") {
    Immersion bad;
    bad.space = SpaceParams::make(0.0, 0.5);
    bad.s0 = bad.t0 = -1.0;
    bad.s1 = bad.t1 = 1.0;
    bad.position = [](double s, double) -> AmbientPoint { return {s, s, 0.0}; };
    try {
        fundamental_forms(bad, 0.2, 0.1);
        FAIL("expected a DegeneracyError");
    } catch (const DegeneracyError& e) {
        CHECK(e.sigma1 > 0.0);
        CHECK(e.sigma2 < 1e-8);
    }
}

TEST_CASE("finite-difference jets agree with analytic jets", "[surface][stencil]") {
    const Immersion m = fmp_surface(0.5);
    Immersion fd = m;
    fd.derivative1 = nullptr;
    fd.derivative2 = nullptr;
    for (double x : {-1.0, 0.2})
        for (double y : {0.5, -1.3}) {
            const FundamentalForms a = fundamental_forms(m, x, y);
            const FundamentalForms b = fundamental_forms(fd, x, y);
            CHECK(b.H == Approx(a.H).margin(1e-6));
            CHECK(b.K == Approx(a.K).margin(1e-5));
            CHECK((b.second - a.second).cwiseAbs().maxCoeff() < 1e-5);
        }
}

TEST_CASE("grid-sampled immersions recover curvatures", "[surface][grid]") {
    // sample the FMP surface onto a grid and evaluate through the stencil path
    const Immersion m = fmp_surface(0.5);
    const int n = 41;
    GridImmersion gi;
    gi.space = m.space;
    gi.s0 = -1.0;
    gi.s1 = 1.0;
    gi.t0 = -1.0;
    gi.t1 = 1.0;
    gi.X.resize(n, n);
    gi.Y.resize(n, n);
    gi.Z.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double s = gi.s0 + i * 2.0 / (n - 1), t = gi.t0 + j * 2.0 / (n - 1);
            const AmbientPoint p = m.position(s, t);
            gi.X(i, j) = p.x;
            gi.Y(i, j) = p.y;
            gi.Z(i, j) = p.z;
        }
    for (int i : {3, 20, 37})
        for (int j : {5, 20, 35}) {
            const double s = gi.s0 + i * 2.0 / (n - 1), t = gi.t0 + j * 2.0 / (n - 1);
            const FundamentalForms ref = fundamental_forms(m, s, t);
            const FundamentalForms got = gi.forms_at(i, j);
            CHECK(got.H == Approx(ref.H).margin(2e-5));
            CHECK(got.K_ext == Approx(ref.K_ext).margin(2e-4));
        }
}
