#pragma once

// Uniform 2D parameter grids and the fourth order difference stencils used
// for sampled data: central in the interior, one-sided on the two node
// layers next to each edge.

#include <functional>
#include <stdexcept>

#include <Eigen/Dense>

#include "ektau/common.hpp"

namespace ektau {

namespace stencil {

// First derivative along a 1D sequence of length n at index i, spacing h.
template <typename Getter>
double d1(Getter f, int n, int i, double h) {
    if (n < 5) throw ResolutionError("fourth order stencils need at least 5 nodes");
    if (i >= 2 && i <= n - 3)
        return (f(i - 2) - 8.0 * f(i - 1) + 8.0 * f(i + 1) - f(i + 2)) / (12.0 * h);
    if (i == 0)
        return (-25.0 * f(0) + 48.0 * f(1) - 36.0 * f(2) + 16.0 * f(3) - 3.0 * f(4)) / (12.0 * h);
    if (i == 1)
        return (-3.0 * f(0) - 10.0 * f(1) + 18.0 * f(2) - 6.0 * f(3) + f(4)) / (12.0 * h);
    if (i == n - 1)
        return (25.0 * f(n - 1) - 48.0 * f(n - 2) + 36.0 * f(n - 3) - 16.0 * f(n - 4) +
                3.0 * f(n - 5)) /
               (12.0 * h);
    // i == n - 2
    return (3.0 * f(n - 1) + 10.0 * f(n - 2) - 18.0 * f(n - 3) + 6.0 * f(n - 4) - f(n - 5)) /
           (12.0 * h);
}

// Second derivative, same layout.  Edge rows use the 6-point one-sided
// fourth order formulas (symmetric under reversal, so they are reused
// mirrored at the far edge).
template <typename Getter>
double d2(Getter f, int n, int i, double h) {
    if (n < 6) throw ResolutionError("fourth order second-derivative stencils need 6 nodes");
    const double h2 = h * h;
    if (i >= 2 && i <= n - 3)
        return (-f(i - 2) + 16.0 * f(i - 1) - 30.0 * f(i) + 16.0 * f(i + 1) - f(i + 2)) /
               (12.0 * h2);
    auto edge0 = [&](auto g) {
        return (45.0 * g(0) - 154.0 * g(1) + 214.0 * g(2) - 156.0 * g(3) + 61.0 * g(4) -
                10.0 * g(5)) /
               (12.0 * h2);
    };
    auto edge1 = [&](auto g) {
        return (10.0 * g(0) - 15.0 * g(1) - 4.0 * g(2) + 14.0 * g(3) - 6.0 * g(4) + g(5)) /
               (12.0 * h2);
    };
    auto fromLeft = [&](int k) { return f(k); };
    auto fromRight = [&](int k) { return f(n - 1 - k); };
    if (i == 0) return edge0(fromLeft);
    if (i == 1) return edge1(fromLeft);
    if (i == n - 1) return edge0(fromRight);
    return edge1(fromRight);  // i == n - 2
}

}  // namespace stencil

// Real values on a uniform node-inclusive grid over [s0,s1] x [t0,t1];
// values(i, j) lives at (s0 + i hs, t0 + j ht).
struct ScalarFieldGrid {
    double s0 = 0, s1 = 1, t0 = 0, t1 = 1;
    int ns = 0, nt = 0;
    Eigen::ArrayXXd values;

    double hs() const { return (s1 - s0) / (ns - 1); }
    double ht() const { return (t1 - t0) / (nt - 1); }
    double s_at(int i) const { return s0 + i * hs(); }
    double t_at(int j) const { return t0 + j * ht(); }

    static ScalarFieldGrid zeros(double s0, double s1, double t0, double t1, int ns, int nt) {
        if (ns < 2 || nt < 2) throw ResolutionError("grid needs at least 2 nodes per direction");
        ScalarFieldGrid g{s0, s1, t0, t1, ns, nt, Eigen::ArrayXXd::Zero(ns, nt)};
        return g;
    }

    static ScalarFieldGrid sample(double s0, double s1, double t0, double t1, int ns, int nt,
                                  const std::function<double(double, double)>& fn) {
        ScalarFieldGrid g = zeros(s0, s1, t0, t1, ns, nt);
        for (int i = 0; i < ns; ++i)
            for (int j = 0; j < nt; ++j) g.values(i, j) = fn(g.s_at(i), g.t_at(j));
        return g;
    }

    ScalarFieldGrid like(Eigen::ArrayXXd v) const {
        ScalarFieldGrid g = *this;
        g.values = std::move(v);
        return g;
    }
};

inline ScalarFieldGrid derivative_s(const ScalarFieldGrid& f) {
    Eigen::ArrayXXd out(f.ns, f.nt);
    for (int j = 0; j < f.nt; ++j)
        for (int i = 0; i < f.ns; ++i)
            out(i, j) = stencil::d1([&](int k) { return f.values(k, j); }, f.ns, i, f.hs());
    return f.like(std::move(out));
}

inline ScalarFieldGrid derivative_t(const ScalarFieldGrid& f) {
    Eigen::ArrayXXd out(f.ns, f.nt);
    for (int i = 0; i < f.ns; ++i)
        for (int j = 0; j < f.nt; ++j)
            out(i, j) = stencil::d1([&](int k) { return f.values(i, k); }, f.nt, j, f.ht());
    return f.like(std::move(out));
}

// Induced-metric data sampled at the nodes of a ScalarFieldGrid layout.
struct MetricGrid {
    Eigen::ArrayXXd sqrtg;                    // sqrt(det I)
    Eigen::ArrayXXd inv_ss, inv_st, inv_tt;   // inverse metric components
};

// Trapezoidal quadrature of f dA with the metric area element.
inline double integrate(const ScalarFieldGrid& f, const MetricGrid& m) {
    double sum = 0.0;
    for (int i = 0; i < f.ns; ++i) {
        const double wi = (i == 0 || i == f.ns - 1) ? 0.5 : 1.0;
        for (int j = 0; j < f.nt; ++j) {
            const double wj = (j == 0 || j == f.nt - 1) ? 0.5 : 1.0;
            sum += wi * wj * f.values(i, j) * m.sqrtg(i, j);
        }
    }
    return sum * f.hs() * f.ht();
}

// |grad f|^2 = g^{ss} f_s^2 + 2 g^{st} f_s f_t + g^{tt} f_t^2 at the nodes.
inline ScalarFieldGrid gradient_norm2(const ScalarFieldGrid& f, const MetricGrid& m) {
    const ScalarFieldGrid fs = derivative_s(f), ft = derivative_t(f);
    Eigen::ArrayXXd out = m.inv_ss * fs.values.square() +
                          2.0 * m.inv_st * fs.values * ft.values +
                          m.inv_tt * ft.values.square();
    return f.like(std::move(out));
}

// Laplace-Beltrami in conservative form, (div(sqrtg g^{..} grad f))/sqrtg,
// with nested fourth order first derivatives.
inline ScalarFieldGrid laplace_beltrami(const ScalarFieldGrid& f, const MetricGrid& m) {
    const ScalarFieldGrid fs = derivative_s(f), ft = derivative_t(f);
    ScalarFieldGrid P = f.like((m.sqrtg * (m.inv_ss * fs.values + m.inv_st * ft.values)).eval());
    ScalarFieldGrid Q = f.like((m.sqrtg * (m.inv_st * fs.values + m.inv_tt * ft.values)).eval());
    Eigen::ArrayXXd out =
        (derivative_s(P).values + derivative_t(Q).values) / m.sqrtg;
    return f.like(std::move(out));
}

}  // namespace ektau
