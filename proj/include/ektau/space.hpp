#pragma once

// Ambient geometry of the homogeneous spaces E(kappa, tau) with
// 4-dimensional isometry group, in the standard fibered chart
//
//   ds^2 = lambda^2 (dx^2 + dy^2) + (tau lambda (y dx - x dy) + dz)^2,
//   lambda = 1 / (1 + (kappa/4)(x^2 + y^2)),
//
// defined on { 1 + (kappa/4)(x^2+y^2) > 0 }.  For kappa <= 0 the chart is
// global; for kappa > 0 it misses the fiber over the antipode of the
// origin.  The chart frame
//
//   E1 = lambda^{-1} dx - tau y dz,  E2 = lambda^{-1} dy + tau x dz,
//   E3 = dz
//
// is orthonormal everywhere and E3 spans the vertical (fiber) direction.
// For kappa = 0 it coincides with the left invariant frame of Nil_3 and
// carries the constant structure relations [E1,E2] = 2 tau E3,
// [E2,E3] = sigma E1, [E3,E1] = sigma E2; for kappa != 0 those relations
// belong to the adapted (left invariant) framing, not to this chart
// frame, so all covariant derivatives below go through the coordinate
// Christoffel symbols of the metric itself.

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "ektau/common.hpp"

namespace ektau {

struct SpaceParams {
    double kappa = 0.0;
    double tau = 0.5;
    double sigma = 0.0;  // kappa / (2 tau), zero when tau == 0

    static SpaceParams make(double kappa, double tau) {
        const double gap = kappa - 4.0 * tau * tau;
        if (std::abs(gap) <= 1e-12 * std::max({1.0, std::abs(kappa), 4.0 * tau * tau})) {
            throw DomainError("SpaceParams: kappa == 4 tau^2 is a space form, not an E(kappa,tau)");
        }
        SpaceParams sp;
        sp.kappa = kappa;
        sp.tau = tau;
        sp.sigma = (tau == 0.0) ? 0.0 : kappa / (2.0 * tau);
        return sp;
    }

    bool product() const { return tau == 0.0; }       // M^2(kappa) x R
    bool heisenberg() const { return kappa == 0.0; }  // Nil_3 (tau != 0 by the invariant)
};

struct AmbientPoint {
    double x = 0.0, y = 0.0, z = 0.0;
    Eigen::Vector3d coords() const { return {x, y, z}; }
};

struct TangentVector {
    AmbientPoint base;
    Eigen::Vector3d components;  // in the chart basis (dx, dy, dz)
};

// --- chart ----------------------------------------------------------------

inline double chart_denominator(const SpaceParams& sp, double x, double y) {
    return 1.0 + 0.25 * sp.kappa * (x * x + y * y);
}

inline bool in_chart(const SpaceParams& sp, const AmbientPoint& p) {
    return chart_denominator(sp, p.x, p.y) > 0.0;
}

inline void require_in_chart(const SpaceParams& sp, const AmbientPoint& p) {
    if (!in_chart(sp, p)) {
        throw DomainError("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                          ") outside the chart of E(" + std::to_string(sp.kappa) + ", " +
                          std::to_string(sp.tau) + ")");
    }
}

inline double conformal_factor(const SpaceParams& sp, double x, double y) {
    return 1.0 / chart_denominator(sp, x, y);
}

// --- metric and its first derivatives --------------------------------------

inline Eigen::Matrix3d metric_at(const SpaceParams& sp, const AmbientPoint& p) {
    require_in_chart(sp, p);
    const double lam = conformal_factor(sp, p.x, p.y);
    const double mu = sp.tau * lam;
    Eigen::Matrix3d g;
    g(0, 0) = lam * lam + mu * mu * p.y * p.y;
    g(0, 1) = -mu * mu * p.x * p.y;
    g(0, 2) = mu * p.y;
    g(1, 1) = lam * lam + mu * mu * p.x * p.x;
    g(1, 2) = -mu * p.x;
    g(2, 2) = 1.0;
    g(1, 0) = g(0, 1);
    g(2, 0) = g(0, 2);
    g(2, 1) = g(1, 2);
    return g;
}

// d g / d x and d g / d y (the metric is z-invariant).
inline std::array<Eigen::Matrix3d, 2> metric_d1(const SpaceParams& sp, const AmbientPoint& p) {
    require_in_chart(sp, p);
    const double x = p.x, y = p.y;
    const double lam = conformal_factor(sp, x, y);
    const double lam_x = -lam * lam * 0.5 * sp.kappa * x;
    const double lam_y = -lam * lam * 0.5 * sp.kappa * y;
    const double mu = sp.tau * lam;
    const double mu_x = sp.tau * lam_x;
    const double mu_y = sp.tau * lam_y;

    Eigen::Matrix3d gx = Eigen::Matrix3d::Zero();
    gx(0, 0) = 2.0 * lam * lam_x + 2.0 * mu * mu_x * y * y;
    gx(0, 1) = -(2.0 * mu * mu_x * x + mu * mu) * y;
    gx(0, 2) = mu_x * y;
    gx(1, 1) = 2.0 * lam * lam_x + 2.0 * mu * mu_x * x * x + 2.0 * mu * mu * x;
    gx(1, 2) = -(mu_x * x + mu);
    gx(1, 0) = gx(0, 1);
    gx(2, 0) = gx(0, 2);
    gx(2, 1) = gx(1, 2);

    Eigen::Matrix3d gy = Eigen::Matrix3d::Zero();
    gy(0, 0) = 2.0 * lam * lam_y + 2.0 * mu * mu_y * y * y + 2.0 * mu * mu * y;
    gy(0, 1) = -(2.0 * mu * mu_y * y + mu * mu) * x;
    gy(0, 2) = mu_y * y + mu;
    gy(1, 1) = 2.0 * lam * lam_y + 2.0 * mu * mu_y * x * x;
    gy(1, 2) = -mu_y * x;
    gy(1, 0) = gy(0, 1);
    gy(2, 0) = gy(0, 2);
    gy(2, 1) = gy(1, 2);

    return {gx, gy};
}

inline double inner(const SpaceParams& sp, const AmbientPoint& p, const Eigen::Vector3d& u,
                    const Eigen::Vector3d& v) {
    return u.dot(metric_at(sp, p) * v);
}

inline double norm(const SpaceParams& sp, const AmbientPoint& p, const Eigen::Vector3d& u) {
    return std::sqrt(inner(sp, p, u, u));
}

// Metric volume determinant of (u, v, w): sqrt(det g) det[u v w].
// Equals the determinant of components in the orthonormal frame.
inline double triple_product(const SpaceParams& sp, const AmbientPoint& p, const Eigen::Vector3d& u,
                             const Eigen::Vector3d& v, const Eigen::Vector3d& w) {
    const Eigen::Matrix3d g = metric_at(sp, p);
    Eigen::Matrix3d m;
    m.col(0) = u;
    m.col(1) = v;
    m.col(2) = w;
    return std::sqrt(g.determinant()) * m.determinant();
}

// Cross product for the orientation in which (E1, E2, E3) is direct:
// <u x v, w> = triple_product(u, v, w) for all w.
inline Eigen::Vector3d cross(const SpaceParams& sp, const AmbientPoint& p, const Eigen::Vector3d& u,
                             const Eigen::Vector3d& v) {
    const Eigen::Matrix3d g = metric_at(sp, p);
    const double vol = std::sqrt(g.determinant());
    Eigen::Vector3d c;  // covariant components vol * eps_{lij} u^i v^j
    c(0) = vol * (u(1) * v(2) - u(2) * v(1));
    c(1) = vol * (u(2) * v(0) - u(0) * v(2));
    c(2) = vol * (u(0) * v(1) - u(1) * v(0));
    return g.ldlt().solve(c);
}

// --- frame ------------------------------------------------------------------

struct Frame {
    AmbientPoint base;
    Eigen::Matrix3d columns;  // columns are E1, E2, E3 in the chart basis
    TangentVector e(int i) const { return {base, columns.col(i)}; }
};

inline Frame frame_at(const SpaceParams& sp, const AmbientPoint& p) {
    require_in_chart(sp, p);
    const double inv_lam = chart_denominator(sp, p.x, p.y);
    Frame fr;
    fr.base = p;
    fr.columns.setZero();
    fr.columns(0, 0) = inv_lam;
    fr.columns(2, 0) = -sp.tau * p.y;
    fr.columns(1, 1) = inv_lam;
    fr.columns(2, 1) = sp.tau * p.x;
    fr.columns(2, 2) = 1.0;
    return fr;
}

// --- connection --------------------------------------------------------------

// Constant Christoffel table Gamma_{ij}^k = <nabla_{E_i} E_j, E_k> of the
// adapted orthonormal framing (the left invariant frame when tau != 0, the
// frame adapted along a base curve when tau == 0): the only nonzero entries
// are Gamma_{12}^3 = Gamma_{23}^1 = -Gamma_{21}^3 = -Gamma_{13}^2 = tau and
// Gamma_{32}^1 = -Gamma_{31}^2 = tau - sigma.
struct FrameConnection {
    double table[3][3][3] = {};
    double operator()(int i, int j, int k) const { return table[i][j][k]; }
};

inline FrameConnection connection_coefficients(const SpaceParams& sp) {
    FrameConnection c;
    c.table[0][1][2] = sp.tau;
    c.table[1][2][0] = sp.tau;
    c.table[1][0][2] = -sp.tau;
    c.table[0][2][1] = -sp.tau;
    c.table[2][1][0] = sp.tau - sp.sigma;
    c.table[2][0][1] = -(sp.tau - sp.sigma);
    return c;
}

// Coordinate Christoffel symbols Gamma^k_{ij} of the chart metric,
// exact from the analytic metric derivatives.
struct CoordinateChristoffels {
    double table[3][3][3] = {};  // [k][i][j], symmetric in (i,j)
    // (Gamma(v, w))^k = Gamma^k_{ij} v^i w^j
    Eigen::Vector3d contract(const Eigen::Vector3d& v, const Eigen::Vector3d& w) const {
        Eigen::Vector3d out = Eigen::Vector3d::Zero();
        for (int k = 0; k < 3; ++k)
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) out(k) += table[k][i][j] * v(i) * w(j);
        return out;
    }
};

inline CoordinateChristoffels coordinate_christoffels(const SpaceParams& sp,
                                                      const AmbientPoint& p) {
    const Eigen::Matrix3d g = metric_at(sp, p);
    const auto dg = metric_d1(sp, p);
    const Eigen::Matrix3d ginv = g.inverse();
    auto d = [&](int l, int i, int j) -> double {
        if (l == 2) return 0.0;  // metric is z-invariant
        return dg[l](i, j);
    };
    CoordinateChristoffels ch;
    for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j) {
                double sum = 0.0;
                for (int l = 0; l < 3; ++l)
                    sum += ginv(k, l) * (d(i, j, l) + d(j, i, l) - d(l, i, j));
                ch.table[k][i][j] = 0.5 * sum;
                ch.table[k][j][i] = ch.table[k][i][j];
            }
    return ch;
}

// --- curvature ---------------------------------------------------------------

// R(X,Y)Z for E(kappa,tau).  The curvature tensor of these spaces is the
// algebraic combination determined by the two sectional curvatures
// K(horizontal) = kappa - 3 tau^2 and K(vertical plane) = tau^2, with the
// vertical field E3 as the distinguished direction.  Sign convention:
// K(X,Y) = <R(X,Y)Y, X> for orthonormal X, Y.
inline Eigen::Vector3d curvature_op(const SpaceParams& sp, const AmbientPoint& p,
                                    const Eigen::Vector3d& X, const Eigen::Vector3d& Y,
                                    const Eigen::Vector3d& Z) {
    const Eigen::Matrix3d g = metric_at(sp, p);
    const Eigen::Vector3d V = Eigen::Vector3d::UnitZ();  // E3 has chart components (0,0,1)
    const double a = sp.kappa - 3.0 * sp.tau * sp.tau;
    const double b = 4.0 * sp.tau * sp.tau - sp.kappa;
    const double yz = Y.dot(g * Z), xz = X.dot(g * Z);
    const double xv = X.dot(g * V), yv = Y.dot(g * V), zv = Z.dot(g * V);
    return a * (yz * X - xz * Y) +
           b * (yv * zv * X - xv * zv * Y + yz * xv * V - xz * yv * V);
}

inline double sectional_curvature(const SpaceParams& sp, const AmbientPoint& p,
                                  const Eigen::Vector3d& X, const Eigen::Vector3d& Y) {
    const Eigen::Matrix3d g = metric_at(sp, p);
    const double xx = X.dot(g * X), yy = Y.dot(g * Y), xy = X.dot(g * Y);
    const double area2 = xx * yy - xy * xy;
    if (area2 <= 0.0) throw DomainError("sectional_curvature: degenerate plane");
    return X.dot(g * curvature_op(sp, p, X, Y, Y)) / area2;
}

// Ricci quadratic form Ric(V, V); pass a unit vector for Ric of a direction.
inline double ricci(const SpaceParams& sp, const AmbientPoint& p, const Eigen::Vector3d& V) {
    const Eigen::Matrix3d g = metric_at(sp, p);
    const Frame fr = frame_at(sp, p);
    double sum = 0.0;
    for (int i = 0; i < 3; ++i) {
        const Eigen::Vector3d e = fr.columns.col(i);
        sum += e.dot(g * curvature_op(sp, p, e, V, V));
    }
    return sum;
}

// --- vector fields and the covariant derivative ------------------------------

struct VectorField {
    std::function<Eigen::Vector3d(const AmbientPoint&)> value;
    // Optional analytic Jacobian J(i,k) = d W^i / d x^k; finite differences
    // are used when absent.
    std::function<Eigen::Matrix3d(const AmbientPoint&)> jacobian;
};

inline VectorField constant_field(const Eigen::Vector3d& v) {
    return {[v](const AmbientPoint&) { return v; },
            [](const AmbientPoint&) { return Eigen::Matrix3d::Zero().eval(); }};
}

// Fourth order central difference step per the module convention.
inline double fd_step(double scale) {
    static const double base = std::pow(std::numeric_limits<double>::epsilon(), 0.2);
    return base * std::max(1.0, scale);
}

inline Eigen::Matrix3d field_jacobian(const VectorField& W, const AmbientPoint& p) {
    if (W.jacobian) return W.jacobian(p);
    if (!W.value) throw DomainError("vector field without value callback");
    const double h = fd_step(std::max({std::abs(p.x), std::abs(p.y), std::abs(p.z)}));
    Eigen::Matrix3d J;
    for (int k = 0; k < 3; ++k) {
        auto shift = [&](double step) {
            AmbientPoint q = p;
            (k == 0 ? q.x : k == 1 ? q.y : q.z) += step;
            return W.value(q);
        };
        const Eigen::Vector3d d =
            (-shift(2 * h) + 8.0 * shift(h) - 8.0 * shift(-h) + shift(-2 * h)) / (12.0 * h);
        if (!d.allFinite())
            throw DomainError("field_jacobian: non-finite finite-difference derivative");
        J.col(k) = d;
    }
    return J;
}

// nabla_V W at p for the Levi-Civita connection of the chart metric.
inline TangentVector covariant_derivative(const SpaceParams& sp, const VectorField& V,
                                          const VectorField& W, const AmbientPoint& p) {
    require_in_chart(sp, p);
    const Eigen::Vector3d v = V.value(p);
    const Eigen::Vector3d w = W.value(p);
    const Eigen::Matrix3d Jw = field_jacobian(W, p);
    const CoordinateChristoffels ch = coordinate_christoffels(sp, p);
    return {p, Jw * v + ch.contract(v, w)};
}

// --- Killing fields -----------------------------------------------------------

// The vertical field E3 = dz is Killing in every E(kappa, tau).
inline VectorField vertical_field() { return constant_field(Eigen::Vector3d::UnitZ()); }

// Horizontal Killing fields of Nil_3 = E(0, tau).  For alpha = 0 this is
// X = E1 + 2 tau y E3 (chart components (1, 0, tau y)), which for tau = 1/2
// is the field E1 + y E3 generating the translations
// phi_t(x,y,z) = (x + t, y, z + tau t y).
inline VectorField nil_horizontal_killing(const SpaceParams& sp, double alpha = 0.0) {
    if (!sp.heisenberg())
        throw UnsupportedSpaceError("horizontal Killing fields X_alpha require kappa == 0");
    const double tau = sp.tau, c = std::cos(alpha), s = std::sin(alpha);
    VectorField f;
    f.value = [tau, c, s](const AmbientPoint& p) {
        return Eigen::Vector3d(c, s, tau * (c * p.y - s * p.x));
    };
    f.jacobian = [tau, c, s](const AmbientPoint&) {
        Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
        J(2, 0) = -tau * s;
        J(2, 1) = tau * c;
        return J;
    };
    return f;
}

inline AmbientPoint nil_translation_flow(const SpaceParams& sp, const AmbientPoint& p, double t) {
    if (!sp.heisenberg())
        throw UnsupportedSpaceError("the translation flow phi_t requires kappa == 0");
    return {p.x + t, p.y, p.z + sp.tau * t * p.y};
}

struct KillingFields {
    SpaceParams space;
    VectorField vertical;  // always present

    bool has_horizontal() const { return space.heisenberg(); }
    VectorField horizontal(double alpha = 0.0) const {
        return nil_horizontal_killing(space, alpha);
    }
    AmbientPoint flow(const AmbientPoint& p, double t) const {
        return nil_translation_flow(space, p, t);
    }
};

inline KillingFields killing_fields(const SpaceParams& sp) { return {sp, vertical_field()}; }

// Killing equation residual <nabla_V X, W> + <nabla_W X, V> at p; zero for
// an exact Killing field.
inline double killing_residual(const SpaceParams& sp, const VectorField& X, const AmbientPoint& p,
                               const Eigen::Vector3d& v, const Eigen::Vector3d& w) {
    const Eigen::Matrix3d g = metric_at(sp, p);
    const VectorField V = constant_field(v), W = constant_field(w);
    const Eigen::Vector3d dv = covariant_derivative(sp, V, X, p).components;
    const Eigen::Vector3d dw = covariant_derivative(sp, W, X, p).components;
    return dv.dot(g * w) + dw.dot(g * v);
}

}  // namespace ektau
