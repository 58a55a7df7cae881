#pragma once

// Built-in surface families: vertical cylinders over constant-curvature
// base curves, the entire minimal vertical graphs M_theta invariant under a
// one-parameter isometry group, and horizontal graphs in Nil_3.

#include <cmath>
#include <functional>

#include "ektau/surface.hpp"

namespace ektau {

namespace detail {

// Base curve of constant geodesic curvature k >= 0 through the chart
// origin, tangent to +y and bending towards +x, parameterized by the
// M^2(kappa) arclength.  In the conformal chart every such curve is a
// Euclidean circle of radius 1/k centered at (1/k, 0) (a line when k = 0);
// the arclength reparameterization has the closed forms below, split by the
// sign of 1 + kappa/k^2 (circle / horocycle / equidistant type).
struct BaseCurveState {
    double x, y;      // position
    double dx, dy;    // d/ds
    double ddx, ddy;  // d^2/ds^2
    double zeta, dzeta, ddzeta;  // vertical compensation of the fiber lift
};

inline BaseCurveState base_curve(const SpaceParams& sp, double k, double s) {
    BaseCurveState st{};
    const double kappa = sp.kappa, tau = sp.tau;
    if (k == 0.0) {
        if (kappa == 0.0) {
            st.x = 0.0;
            st.y = s;
            st.dy = 1.0;
        } else if (kappa > 0.0) {
            const double c = std::sqrt(kappa);
            if (std::abs(s) >= M_PI / c)
                throw DomainError("geodesic arc leaves the kappa > 0 chart (missing fiber)");
            const double u = 0.5 * c * s, sec2 = 1.0 / (std::cos(u) * std::cos(u));
            st.y = (2.0 / c) * std::tan(u);
            st.dy = sec2;
            st.ddy = c * sec2 * std::tan(u);
        } else {
            const double c = std::sqrt(-kappa);
            const double u = 0.5 * c * s, sech2 = 1.0 / (std::cosh(u) * std::cosh(u));
            st.y = (2.0 / c) * std::tanh(u);
            st.dy = sech2;
            st.ddy = -c * sech2 * std::tanh(u);
        }
        return st;  // zeta stays zero on the axis x = 0
    }

    const double rho = 1.0 / k;
    const double m = kappa * rho * rho;
    const double type = 1.0 + m;
    const double eps = 1e-12 * std::max(1.0, std::abs(m));
    double alpha;
    if (type > eps) {
        const double c = std::sqrt(type);
        const double theta = c * s / (2.0 * rho);
        const double n = std::round(theta / M_PI);
        alpha = 2.0 * (n * M_PI + std::atan(std::tan(theta - n * M_PI) / c));
    } else if (type >= -eps) {
        alpha = 2.0 * std::atan(s / (2.0 * rho));
    } else {
        const double w = std::sqrt(-type);
        alpha = 2.0 * std::atan(std::tanh(w * s / (2.0 * rho)) / w);
    }

    const double sa = std::sin(alpha), ca = std::cos(alpha);
    const double sh = std::sin(0.5 * alpha);
    const double dalpha = (1.0 + m * sh * sh) / rho;
    const double ddalpha = 0.5 * m * sa * dalpha / rho;

    st.x = rho * (1.0 - ca);
    st.y = rho * sa;
    st.dx = rho * sa * dalpha;
    st.dy = rho * ca * dalpha;
    st.ddx = rho * (ca * dalpha * dalpha + sa * ddalpha);
    st.ddy = rho * (-sa * dalpha * dalpha + ca * ddalpha);

    // zeta(s) = -2 tau rho \int_0^s sin^2(alpha/2); closed form via the
    // arclength integral itself.
    if (std::abs(m) > 1e-8) {
        st.zeta = (2.0 * tau * rho / m) * (s - rho * alpha);
    } else {
        st.zeta = -tau * rho * s + tau * rho * rho * std::sin(s / rho);
    }
    st.dzeta = -2.0 * tau * rho * sh * sh;
    st.ddzeta = -tau * rho * sa * dalpha;
    return st;
}

}  // namespace detail

// Vertical cylinder pi^{-1}(gamma) over the constant-curvature-k_gamma
// curve through the chart origin, parameterized by (s, t) = (base
// arclength, fiber coordinate).  The s-tangent is the horizontal lift of
// gamma', so the induced metric is the identity and {F_s, F_t} = {gamma',
// E3} is the adapted orthonormal frame.
inline Immersion cylinder_immersion(const SpaceParams& sp, double k_gamma, double s_extent = 8.0,
                                    double t_extent = 8.0) {
    const double k = std::abs(k_gamma);
    const double flip = (k_gamma < 0.0) ? -1.0 : 1.0;
    Immersion imm;
    imm.space = sp;
    imm.family = "cylinder";
    imm.s0 = -s_extent;
    imm.s1 = s_extent;
    imm.t0 = -t_extent;
    imm.t1 = t_extent;
    imm.position = [sp, k, flip](double s, double t) -> AmbientPoint {
        const auto st = detail::base_curve(sp, k, s);
        return {flip * st.x, st.y, t + flip * st.zeta};
    };
    imm.derivative1 = [sp, k, flip](double s, double, Eigen::Vector3d& Fs, Eigen::Vector3d& Ft) {
        const auto st = detail::base_curve(sp, k, s);
        Fs = {flip * st.dx, st.dy, flip * st.dzeta};
        Ft = {0.0, 0.0, 1.0};
    };
    imm.derivative2 = [sp, k, flip](double s, double, Eigen::Vector3d& Fss, Eigen::Vector3d& Fst,
                                    Eigen::Vector3d& Ftt) {
        const auto st = detail::base_curve(sp, k, s);
        Fss = {flip * st.ddx, st.ddy, flip * st.ddzeta};
        Fst.setZero();
        Ftt.setZero();
    };
    return imm;
}

// The entire minimal vertical graph M_theta in Nil_3 = E(0, 1/2):
//   z = xy/2 + (sinh(2 theta)/2) [ y sqrt(1+y^2) + ln(y + sqrt(1+y^2)) ],
// parameterized by the base coordinates (x, y).
inline Immersion fmp_surface(double theta, double x_extent = 2.0, double y_extent = 2.0) {
    const double S = std::sinh(2.0 * theta);
    Immersion imm;
    imm.space = SpaceParams::make(0.0, 0.5);
    imm.family = "fmp";
    imm.s0 = -x_extent;
    imm.s1 = x_extent;
    imm.t0 = -y_extent;
    imm.t1 = y_extent;
    imm.position = [S](double x, double y) -> AmbientPoint {
        const double r = std::sqrt(1.0 + y * y);
        return {x, y, 0.5 * x * y + 0.5 * S * (y * r + std::asinh(y))};
    };
    imm.derivative1 = [S](double x, double y, Eigen::Vector3d& Fx, Eigen::Vector3d& Fy) {
        const double r = std::sqrt(1.0 + y * y);
        Fx = {1.0, 0.0, 0.5 * y};
        Fy = {0.0, 1.0, 0.5 * x + S * r};
    };
    imm.derivative2 = [S](double, double y, Eigen::Vector3d& Fxx, Eigen::Vector3d& Fxy,
                          Eigen::Vector3d& Fyy) {
        const double r = std::sqrt(1.0 + y * y);
        Fxx.setZero();
        Fxy = {0.0, 0.0, 0.5};
        Fyy = {0.0, 0.0, S * y / r};
    };
    return imm;
}

// Tangent fields T1 = E1 + y E3 and T2 = E2 + sinh(2 theta) sqrt(1+y^2) E3
// restrict to M_theta as a global tangent basis; they are exactly the
// coordinate tangents F_x, F_y of fmp_surface.
inline double fmp_tangency_determinant(double theta, double alpha, double x, double y) {
    const Immersion imm = fmp_surface(theta);
    Eigen::Vector3d T1, T2;
    imm.derivative1(x, y, T1, T2);
    const AmbientPoint p = imm.position(x, y);
    const VectorField Xa = nil_horizontal_killing(imm.space, alpha);
    return triple_product(imm.space, p, T1, T2, Xa.value(p));
}

// Jets of a scalar graph function u(y, z): value and derivatives up to
// second order, supplied analytically by the built-in families or by
// stencils for sampled data.
struct GraphJets {
    double u, uy, uz, uyy, uyz, uzz;
};

// Horizontal graph along the Killing field X in Nil_3 = E(0, 1/2):
//   F(y, z) = (u(y,z), y, z + y u(y,z) / 2).
inline Immersion horizontal_graph_immersion(
    const std::function<GraphJets(double, double)>& jets, double y0, double y1, double z0,
    double z1) {
    const SpaceParams nil = SpaceParams::make(0.0, 0.5);
    const double tau = nil.tau;
    Immersion imm;
    imm.space = nil;
    imm.family = "horizontal_graph";
    imm.s0 = y0;
    imm.s1 = y1;
    imm.t0 = z0;
    imm.t1 = z1;
    imm.position = [jets, tau](double y, double z) -> AmbientPoint {
        const GraphJets j = jets(y, z);
        return {j.u, y, z + tau * y * j.u};
    };
    imm.derivative1 = [jets, tau](double y, double z, Eigen::Vector3d& Fy, Eigen::Vector3d& Fz) {
        const GraphJets j = jets(y, z);
        Fy = {j.uy, 1.0, tau * (j.u + y * j.uy)};
        Fz = {j.uz, 0.0, 1.0 + tau * y * j.uz};
    };
    imm.derivative2 = [jets, tau](double y, double z, Eigen::Vector3d& Fyy, Eigen::Vector3d& Fyz,
                                  Eigen::Vector3d& Fzz) {
        const GraphJets j = jets(y, z);
        Fyy = {j.uyy, 0.0, tau * (2.0 * j.uy + y * j.uyy)};
        Fyz = {j.uyz, 0.0, tau * (j.uz + y * j.uyz)};
        Fzz = {j.uzz, 0.0, tau * y * j.uzz};
    };
    return imm;
}

// The vertical plane Pi_{a,b} = {x = a y + b}, as the horizontal graph of
// u(y, z) = a y + b.
inline Immersion vertical_plane(double a, double b, double extent = 4.0) {
    auto jets = [a, b](double y, double) {
        return GraphJets{a * y + b, a, 0.0, 0.0, 0.0, 0.0};
    };
    Immersion imm = horizontal_graph_immersion(jets, -extent, extent, -extent, extent);
    imm.family = "vertical_plane";
    return imm;
}

}  // namespace ektau
