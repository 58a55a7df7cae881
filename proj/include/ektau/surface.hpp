#pragma once

// Immersed parameterized surfaces in E(kappa, tau): fundamental forms,
// curvatures, angle function, Jacobi candidate functions and the stability
// potential q = |A|^2 + Ric(eta).

#include <functional>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "ektau/grid.hpp"
#include "ektau/space.hpp"

namespace ektau {

struct Immersion {
    SpaceParams space;
    double s0 = 0, s1 = 1, t0 = 0, t1 = 1;
    std::function<AmbientPoint(double, double)> position;
    // Optional analytic jets; finite differences are used when absent.
    std::function<void(double, double, Eigen::Vector3d&, Eigen::Vector3d&)> derivative1;
    std::function<void(double, double, Eigen::Vector3d&, Eigen::Vector3d&, Eigen::Vector3d&)>
        derivative2;
    std::string family = "custom";
};

struct SurfaceJets {
    AmbientPoint p;
    Eigen::Vector3d Fs, Ft, Fss, Fst, Ftt;
};

inline SurfaceJets surface_jets(const Immersion& imm, double s, double t) {
    if (!imm.position) throw DomainError("immersion without position callback");
    SurfaceJets jets;
    jets.p = imm.position(s, t);
    if (imm.derivative1) {
        imm.derivative1(s, t, jets.Fs, jets.Ft);
    }
    if (imm.derivative2) {
        imm.derivative2(s, t, jets.Fss, jets.Fst, jets.Ftt);
    }
    if (imm.derivative1 && imm.derivative2) return jets;

    const double h = fd_step(std::max(std::abs(s), std::abs(t)));
    auto at = [&](double a, double b) -> Eigen::Vector3d { return imm.position(a, b).coords(); };
    auto d1s = [&](double a, double b) -> Eigen::Vector3d {
        return ((at(a - 2 * h, b) - at(a + 2 * h, b)) +
                8.0 * (at(a + h, b) - at(a - h, b))) /
               (12.0 * h);
    };
    auto d1t = [&](double a, double b) -> Eigen::Vector3d {
        return ((at(a, b - 2 * h) - at(a, b + 2 * h)) +
                8.0 * (at(a, b + h) - at(a, b - h))) /
               (12.0 * h);
    };
    if (!imm.derivative1) {
        jets.Fs = d1s(s, t);
        jets.Ft = d1t(s, t);
    }
    if (!imm.derivative2) {
        auto d2_line = [&](auto value) -> Eigen::Vector3d {
            return (-value(2.0) + 16.0 * value(1.0) - 30.0 * value(0.0) + 16.0 * value(-1.0) -
                    value(-2.0)) /
                   (12.0 * h * h);
        };
        jets.Fss = d2_line([&](double k) -> Eigen::Vector3d { return at(s + k * h, t); });
        jets.Ftt = d2_line([&](double k) -> Eigen::Vector3d { return at(s, t + k * h); });
        jets.Fst = ((d1s(s, t - 2 * h) - d1s(s, t + 2 * h)) +
                    8.0 * (d1s(s, t + h) - d1s(s, t - h))) /
                   (12.0 * h);
    }
    return jets;
}

struct FundamentalForms {
    Eigen::Matrix2d first;   // I
    Eigen::Matrix2d second;  // II
    TangentVector normal;    // unit, {F_s, F_t, eta} direct
    double H = 0;            // mean curvature w.r.t. eta
    double K = 0;            // Gauss curvature via the Gauss equation
    double K_ext = 0;        // det II / det I
    double angle = 0;        // eta_3 = <eta, E3>
    double ambient_sectional = 0;  // Kbar of the tangent plane
    double ricci_normal = 0;       // Ric(eta)
    double shape_norm2 = 0;        // |A|^2 = k1^2 + k2^2
    double pinch = 0;              // H^2 - det A = ((k1 - k2)/2)^2

    Eigen::Matrix2d shape() const { return first.inverse() * second; }
};

inline FundamentalForms fundamental_forms_from_jets(const SpaceParams& sp,
                                                    const SurfaceJets& jets) {
    const Eigen::Matrix3d g = metric_at(sp, jets.p);
    FundamentalForms ff;
    ff.first(0, 0) = jets.Fs.dot(g * jets.Fs);
    ff.first(0, 1) = ff.first(1, 0) = jets.Fs.dot(g * jets.Ft);
    ff.first(1, 1) = jets.Ft.dot(g * jets.Ft);

    // rank check: metric singular values of dF
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(ff.first);
    const double smin = std::sqrt(std::max(0.0, es.eigenvalues()(0)));
    const double smax = std::sqrt(std::max(0.0, es.eigenvalues()(1)));
    if (!(smin > 1e-10 * std::max(1.0, smax))) {
        throw DegeneracyError("immersion is rank deficient at a parameter point", smax, smin);
    }

    Eigen::Vector3d n = cross(sp, jets.p, jets.Fs, jets.Ft);
    n /= std::sqrt(n.dot(g * n));
    ff.normal = {jets.p, n};

    const CoordinateChristoffels ch = coordinate_christoffels(sp, jets.p);
    auto second_ip = [&](const Eigen::Vector3d& dd, const Eigen::Vector3d& a,
                         const Eigen::Vector3d& b) {
        return (dd + ch.contract(a, b)).dot(g * n);
    };
    ff.second(0, 0) = second_ip(jets.Fss, jets.Fs, jets.Fs);
    ff.second(0, 1) = ff.second(1, 0) = second_ip(jets.Fst, jets.Fs, jets.Ft);
    ff.second(1, 1) = second_ip(jets.Ftt, jets.Ft, jets.Ft);

    const Eigen::Matrix2d A = ff.first.inverse() * ff.second;
    ff.H = 0.5 * A.trace();
    ff.K_ext = ff.second.determinant() / ff.first.determinant();
    ff.ambient_sectional = sectional_curvature(sp, jets.p, jets.Fs, jets.Ft);
    ff.K = ff.ambient_sectional + ff.K_ext;
    ff.angle = n.dot(g * Eigen::Vector3d::UnitZ());
    ff.ricci_normal = ricci(sp, jets.p, n);
    ff.shape_norm2 = (A * A).trace();
    ff.pinch = ff.H * ff.H - A.determinant();
    return ff;
}

inline FundamentalForms fundamental_forms(const Immersion& imm, double s, double t) {
    return fundamental_forms_from_jets(imm.space, surface_jets(imm, s, t));
}

// --- stability potential -----------------------------------------------------

struct StabilityPotentials {
    double q = 0;        // |A|^2 + Ric(eta)
    double q_tilde = 0;  // 3H^2 + kappa - tau^2 + (H^2 - det A)
    double K = 0;
    double identity_residual = 0;  // (-K + q_tilde) - (|A|^2 + Ric(eta))
};

inline StabilityPotentials stability_potentials(const Immersion& imm, double s, double t) {
    const FundamentalForms ff = fundamental_forms(imm, s, t);
    StabilityPotentials out;
    out.q = ff.shape_norm2 + ff.ricci_normal;
    out.q_tilde = 3.0 * ff.H * ff.H + imm.space.kappa - imm.space.tau * imm.space.tau + ff.pinch;
    out.K = ff.K;
    out.identity_residual = (-ff.K + out.q_tilde) - out.q;
    return out;
}

inline double potential_q(const Immersion& imm, double s, double t) {
    return stability_potentials(imm, s, t).q;
}

inline double potential_qtilde(const Immersion& imm, double s, double t) {
    return stability_potentials(imm, s, t).q_tilde;
}

// --- Jacobi candidate functions -----------------------------------------------

// <eta, W> for a named ambient field W; the Jacobi functions of interest are
// W = E3 (angle function) and the horizontal Killing fields of Nil_3.
inline double killing_normal_component(const Immersion& imm, double s, double t,
                                       const VectorField& W) {
    const FundamentalForms ff = fundamental_forms(imm, s, t);
    return inner(imm.space, ff.normal.base, ff.normal.components, W.value(ff.normal.base));
}

struct JacobiCandidates {
    double angle = 0;                 // eta_3
    std::optional<double> killing_x;  // <eta, X>, Nil_3 only
};

inline JacobiCandidates jacobi_candidates(const Immersion& imm, double s, double t) {
    JacobiCandidates jc;
    const FundamentalForms ff = fundamental_forms(imm, s, t);
    jc.angle = ff.angle;
    if (imm.space.heisenberg()) {
        const VectorField X = nil_horizontal_killing(imm.space, 0.0);
        jc.killing_x =
            inner(imm.space, ff.normal.base, ff.normal.components, X.value(ff.normal.base));
    }
    return jc;
}

// --- grid-sampled immersions ----------------------------------------------------

// Surface given by coordinate samples on a uniform parameter grid (for
// example loaded from CSV).  Jets at the nodes come from the fourth order
// node stencils, one-sided along the boundary layers.
struct GridImmersion {
    SpaceParams space;
    double s0 = 0, s1 = 1, t0 = 0, t1 = 1;
    Eigen::ArrayXXd X, Y, Z;  // ns x nt chart coordinates

    int ns() const { return static_cast<int>(X.rows()); }
    int nt() const { return static_cast<int>(X.cols()); }
    double hs() const { return (s1 - s0) / (ns() - 1); }
    double ht() const { return (t1 - t0) / (nt() - 1); }

    SurfaceJets jets_at(int i, int j) const {
        SurfaceJets jets;
        jets.p = {X(i, j), Y(i, j), Z(i, j)};
        const std::array<const Eigen::ArrayXXd*, 3> comps = {&X, &Y, &Z};
        for (int c = 0; c < 3; ++c) {
            const Eigen::ArrayXXd& f = *comps[c];
            auto row = [&](int k) { return f(k, j); };
            auto col = [&](int k) { return f(i, k); };
            jets.Fs(c) = stencil::d1(row, ns(), i, hs());
            jets.Ft(c) = stencil::d1(col, nt(), j, ht());
            jets.Fss(c) = stencil::d2(row, ns(), i, hs());
            jets.Ftt(c) = stencil::d2(col, nt(), j, ht());
        }
        // mixed derivative: t-stencil applied to the s-derivatives
        for (int c = 0; c < 3; ++c) {
            const Eigen::ArrayXXd& f = *comps[c];
            auto ds_at = [&](int k) {
                return stencil::d1([&](int r) { return f(r, k); }, ns(), i, hs());
            };
            jets.Fst(c) = stencil::d1(ds_at, nt(), j, ht());
        }
        return jets;
    }

    FundamentalForms forms_at(int i, int j) const {
        return fundamental_forms_from_jets(space, jets_at(i, j));
    }
};

// Induced-metric samples for a rectangle inside an immersion's domain.
inline MetricGrid induced_metric_grid(const Immersion& imm, const ScalarFieldGrid& layout) {
    MetricGrid m;
    m.sqrtg.resize(layout.ns, layout.nt);
    m.inv_ss.resize(layout.ns, layout.nt);
    m.inv_st.resize(layout.ns, layout.nt);
    m.inv_tt.resize(layout.ns, layout.nt);
    for (int i = 0; i < layout.ns; ++i)
        for (int j = 0; j < layout.nt; ++j) {
            const FundamentalForms ff = fundamental_forms(imm, layout.s_at(i), layout.t_at(j));
            const Eigen::Matrix2d I = ff.first;
            const double det = I.determinant();
            m.sqrtg(i, j) = std::sqrt(det);
            m.inv_ss(i, j) = I(1, 1) / det;
            m.inv_st(i, j) = -I(0, 1) / det;
            m.inv_tt(i, j) = I(0, 0) / det;
        }
    return m;
}

}  // namespace ektau
