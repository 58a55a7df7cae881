#pragma once

// The horizontal minimal-graph equation in Nil_3 = E(0, 1/2): residual
// evaluation, a damped-Newton Dirichlet solver for the quasilinear PDE,
// cross-validation against the mean curvature of the graph immersion, and
// the tangency locus of the horizontal Killing fields on the M_theta
// surfaces.

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "ektau/families.hpp"

namespace ektau {

// Left hand side of the minimality equation for a horizontal graph u(y, z):
//   [1 + 2y u_z + (1+y^2) u_z^2] u_yy - 2 u_y [y + (1+y^2) u_z] u_yz
//   + [1 + (1+y^2) u_y^2] u_zz - u_y u_z (1 + y u_z).
inline double graph_pde_lhs(double y, const GraphJets& j) {
    const double w = 1.0 + y * y;
    const double A = 1.0 + 2.0 * y * j.uz + w * j.uz * j.uz;
    const double B = y + w * j.uz;
    const double C = 1.0 + w * j.uy * j.uy;
    return A * j.uyy - 2.0 * j.uy * B * j.uyz + C * j.uzz - j.uy * j.uz * (1.0 + y * j.uz);
}

// Partials of the LHS with respect to (u_y, u_z, u_yy, u_yz, u_zz); feeds
// the analytically assembled Newton Jacobian.
struct PdeLinearization {
    double d_uy, d_uz, d_uyy, d_uyz, d_uzz;
};

inline PdeLinearization graph_pde_linearization(double y, const GraphJets& j) {
    const double w = 1.0 + y * y;
    const double A = 1.0 + 2.0 * y * j.uz + w * j.uz * j.uz;
    const double B = y + w * j.uz;
    PdeLinearization d;
    d.d_uyy = A;
    d.d_uyz = -2.0 * j.uy * B;
    d.d_uzz = 1.0 + w * j.uy * j.uy;
    d.d_uy = 2.0 * w * j.uy * j.uzz - 2.0 * B * j.uyz - j.uz * (1.0 + y * j.uz);
    d.d_uz = (2.0 * y + 2.0 * w * j.uz) * j.uyy - 2.0 * j.uy * w * j.uyz -
             j.uy * (1.0 + 2.0 * y * j.uz);
    return d;
}

// A graph function over a rectangle of the (y, z)-plane: grid samples plus
// an optional closed form with analytic derivatives.  When the closed form
// is present the residual uses exact jets; otherwise second order central
// stencils on the grid.
struct GraphFunction {
    double y0 = 0, y1 = 1, z0 = 0, z1 = 1;
    int ny = 0, nz = 0;
    Eigen::ArrayXXd u;  // ny x nz node values
    std::function<GraphJets(double, double)> closed_form;

    double hy() const { return (y1 - y0) / (ny - 1); }
    double hz() const { return (z1 - z0) / (nz - 1); }
    double y_at(int i) const { return y0 + i * hy(); }
    double z_at(int j) const { return z0 + j * hz(); }
    bool has_closed_form() const { return static_cast<bool>(closed_form); }

    static GraphFunction from_function(double y0, double y1, double z0, double z1, int ny,
                                       int nz, std::function<GraphJets(double, double)> fn) {
        GraphFunction g;
        g.y0 = y0;
        g.y1 = y1;
        g.z0 = z0;
        g.z1 = z1;
        g.ny = ny;
        g.nz = nz;
        g.closed_form = std::move(fn);
        g.u.resize(ny, nz);
        for (int i = 0; i < ny; ++i)
            for (int j = 0; j < nz; ++j) g.u(i, j) = g.closed_form(g.y_at(i), g.z_at(j)).u;
        return g;
    }

    static GraphFunction from_grid(double y0, double y1, double z0, double z1,
                                   Eigen::ArrayXXd values) {
        GraphFunction g;
        g.y0 = y0;
        g.y1 = y1;
        g.z0 = z0;
        g.z1 = z1;
        g.ny = static_cast<int>(values.rows());
        g.nz = static_cast<int>(values.cols());
        g.u = std::move(values);
        return g;
    }

    // jets at an interior node (second order stencils on the sampled grid)
    GraphJets stencil_jets(int i, int j) const {
        if (i < 1 || j < 1 || i > ny - 2 || j > nz - 2)
            throw DomainError("stencil jets need an interior node");
        GraphJets jt;
        jt.u = u(i, j);
        jt.uy = (u(i + 1, j) - u(i - 1, j)) / (2.0 * hy());
        jt.uz = (u(i, j + 1) - u(i, j - 1)) / (2.0 * hz());
        jt.uyy = (u(i + 1, j) - 2.0 * u(i, j) + u(i - 1, j)) / (hy() * hy());
        jt.uzz = (u(i, j + 1) - 2.0 * u(i, j) + u(i, j - 1)) / (hz() * hz());
        jt.uyz = (u(i + 1, j + 1) - u(i + 1, j - 1) - u(i - 1, j + 1) + u(i - 1, j - 1)) /
                 (4.0 * hy() * hz());
        return jt;
    }

    GraphJets jets(int i, int j) const {
        if (closed_form) return closed_form(y_at(i), z_at(j));
        return stencil_jets(i, j);
    }

    // the graph surface F(y,z) = (u, y, z + y u / 2) as an immersion
    Immersion immersion() const {
        if (!closed_form)
            throw DomainError("immersion() needs the closed form; use node paths for grids");
        return horizontal_graph_immersion(closed_form, y0, y1, z0, z1);
    }
};

inline GraphFunction affine_graph(double a, double b, double y0, double y1, double z0, double z1,
                                  int ny, int nz) {
    return GraphFunction::from_function(y0, y1, z0, z1, ny, nz, [a, b](double y, double) {
        return GraphJets{a * y + b, a, 0.0, 0.0, 0.0, 0.0};
    });
}

inline GraphFunction affine_z_graph(double c, double d, double y0, double y1, double z0,
                                    double z1, int ny, int nz) {
    return GraphFunction::from_function(y0, y1, z0, z1, ny, nz, [c, d](double, double z) {
        return GraphJets{c * z + d, 0.0, c, 0.0, 0.0, 0.0};
    });
}

struct PdeResidual {
    Eigen::ArrayXXd pointwise;  // boundary rows zero in grid mode
    double l2 = 0;              // sqrt(sum r^2 hy hz) over evaluated nodes
    double sup = 0;
};

inline PdeResidual residual(const GraphFunction& gf) {
    PdeResidual res;
    res.pointwise = Eigen::ArrayXXd::Zero(gf.ny, gf.nz);
    const bool closed = gf.has_closed_form();
    const int ilo = closed ? 0 : 1, ihi = closed ? gf.ny - 1 : gf.ny - 2;
    const int jlo = closed ? 0 : 1, jhi = closed ? gf.nz - 1 : gf.nz - 2;
    double sum = 0.0;
    for (int i = ilo; i <= ihi; ++i)
        for (int j = jlo; j <= jhi; ++j) {
            const double r = graph_pde_lhs(gf.y_at(i), gf.jets(i, j));
            res.pointwise(i, j) = r;
            res.sup = std::max(res.sup, std::abs(r));
            sum += r * r;
        }
    res.l2 = std::sqrt(sum * gf.hy() * gf.hz());
    return res;
}

// --- Dirichlet solver -------------------------------------------------------------

struct DirichletReport {
    GraphFunction solution;
    int iterations = 0;
    std::vector<double> residual_history;  // 2-norms per accepted iterate
    std::vector<double> step_sizes;        // Armijo damping factors
    double final_sup = 0;
    bool quadratic_tail = false;  // last full-step residual ratio < 0.1
};

// Damped Newton for the discretized graph equation with Dirichlet data g on
// the boundary of [y0,y1] x [z0,z1].  u0, when given, must carry the same
// grid layout and boundary values.
inline DirichletReport solve_dirichlet(double y0, double y1, double z0, double z1, int ny,
                                       int nz,
                                       const std::function<double(double, double)>& g,
                                       const std::optional<GraphFunction>& u0 = std::nullopt) {
    if (ny < 4 || nz < 4) throw ResolutionError("solve_dirichlet: grid too coarse");
    GraphFunction gf;
    gf.y0 = y0;
    gf.y1 = y1;
    gf.z0 = z0;
    gf.z1 = z1;
    gf.ny = ny;
    gf.nz = nz;
    if (u0) {
        if (u0->ny != ny || u0->nz != nz)
            throw ContractError("solve_dirichlet: initial guess has the wrong layout");
        gf.u = u0->u;
    } else {
        gf.u.resize(ny, nz);
        for (int i = 0; i < ny; ++i)
            for (int j = 0; j < nz; ++j) gf.u(i, j) = g(gf.y_at(i), gf.z_at(j));
    }
    // clamp boundary to g
    for (int i = 0; i < ny; ++i) {
        gf.u(i, 0) = g(gf.y_at(i), z0);
        gf.u(i, nz - 1) = g(gf.y_at(i), z1);
    }
    for (int j = 0; j < nz; ++j) {
        gf.u(0, j) = g(y0, gf.z_at(j));
        gf.u(ny - 1, j) = g(y1, gf.z_at(j));
    }

    const int nyi = ny - 2, nzi = nz - 2, N = nyi * nzi;
    const double hy = gf.hy(), hz = gf.hz();
    auto idx = [&](int i, int j) { return (i - 1) * nzi + (j - 1); };

    auto residual_vec = [&](const Eigen::ArrayXXd& u) {
        Eigen::VectorXd F(N);
        GraphFunction tmp = gf;
        tmp.u = u;
        for (int i = 1; i <= nyi; ++i)
            for (int j = 1; j <= nzi; ++j)
                F(idx(i, j)) = graph_pde_lhs(tmp.y_at(i), tmp.stencil_jets(i, j));
        return F;
    };

    DirichletReport rep;
    Eigen::VectorXd F = residual_vec(gf.u);
    rep.residual_history.push_back(F.norm());
    const int max_iterations = 200;
    const double sup_tol = 1e-8;

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    for (int iter = 0; iter < max_iterations; ++iter) {
        if (F.lpNorm<Eigen::Infinity>() < sup_tol) break;
        // assemble the 9-point Jacobian
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(9 * N);
        GraphFunction cur = gf;
        for (int i = 1; i <= nyi; ++i)
            for (int j = 1; j <= nzi; ++j) {
                const GraphJets jt = cur.stencil_jets(i, j);
                const PdeLinearization d = graph_pde_linearization(cur.y_at(i), jt);
                const int n = idx(i, j);
                auto add = [&](int ii, int jj, double w) {
                    if (ii >= 1 && ii <= nyi && jj >= 1 && jj <= nzi)
                        trips.emplace_back(n, idx(ii, jj), w);
                };
                add(i, j, -2.0 * d.d_uyy / (hy * hy) - 2.0 * d.d_uzz / (hz * hz));
                add(i + 1, j, d.d_uy / (2 * hy) + d.d_uyy / (hy * hy));
                add(i - 1, j, -d.d_uy / (2 * hy) + d.d_uyy / (hy * hy));
                add(i, j + 1, d.d_uz / (2 * hz) + d.d_uzz / (hz * hz));
                add(i, j - 1, -d.d_uz / (2 * hz) + d.d_uzz / (hz * hz));
                const double wyz = d.d_uyz / (4 * hy * hz);
                add(i + 1, j + 1, wyz);
                add(i - 1, j - 1, wyz);
                add(i + 1, j - 1, -wyz);
                add(i - 1, j + 1, -wyz);
            }
        Eigen::SparseMatrix<double> J(N, N);
        J.setFromTriplets(trips.begin(), trips.end());
        lu.compute(J);
        if (lu.info() != Eigen::Success)
            throw SolverError("solve_dirichlet: singular Newton Jacobian", rep.residual_history);
        const Eigen::VectorXd step = lu.solve(-F);

        // Armijo backtracking on the residual 2-norm
        const double f0 = F.norm();
        double alpha = 1.0;
        Eigen::ArrayXXd trial;
        Eigen::VectorXd Ftrial;
        while (true) {
            trial = gf.u;
            for (int i = 1; i <= nyi; ++i)
                for (int j = 1; j <= nzi; ++j) trial(i, j) += alpha * step(idx(i, j));
            Ftrial = residual_vec(trial);
            if (Ftrial.norm() <= (1.0 - 1e-4 * alpha) * f0 || alpha <= std::pow(0.5, 10)) break;
            alpha *= 0.5;
        }
        gf.u = trial;
        F = Ftrial;
        rep.step_sizes.push_back(alpha);
        rep.residual_history.push_back(F.norm());
        rep.iterations = iter + 1;
    }
    if (F.lpNorm<Eigen::Infinity>() >= sup_tol)
        throw SolverError("solve_dirichlet: no convergence within 200 iterations",
                          rep.residual_history);
    if (!gf.u.isFinite().all())
        throw DegeneracyError("solve_dirichlet: non-finite solution", 0.0, 0.0);

    rep.final_sup = residual(gf).sup;
    // quadratic tail: the last full Newton step above the roundoff floor
    // contracts the residual by better than a factor 10
    const auto& h = rep.residual_history;
    for (size_t k = 0; k + 1 < h.size(); ++k) {
        if (rep.step_sizes[k] == 1.0 && h[k + 1] > 1e-14 * std::max(1.0, h[0]) &&
            h[k] > h[k + 1]) {
            rep.quadratic_tail = h[k + 1] / h[k] < 0.1;
        }
    }
    rep.solution = std::move(gf);
    return rep;
}

// Minimum |<eta, X>| over the interior nodes of a solved graph; positive
// for every genuine horizontal graph, which is what makes them stable.
inline double min_killing_component(const GraphFunction& gf) {
    const SpaceParams nil = SpaceParams::make(0.0, 0.5);
    const VectorField X = nil_horizontal_killing(nil, 0.0);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 1; i < gf.ny - 1; ++i)
        for (int j = 1; j < gf.nz - 1; ++j) {
            const GraphJets jt = gf.jets(i, j);
            const double y = gf.y_at(i);
            Immersion local = horizontal_graph_immersion(
                [&](double, double) { return jt; }, y - 1, y + 1, gf.z_at(j) - 1, gf.z_at(j) + 1);
            best = std::min(best, std::abs(killing_normal_component(local, y, gf.z_at(j), X)));
        }
    return best;
}

// --- cross validation against the immersion mean curvature -------------------------

struct ConsistencyReport {
    double max_H_on_minimal_set = 0;  // max |H| where the PDE residual is below tol
    double sign_correlation = 0;      // mean of sign(residual * H) elsewhere
    int minimal_nodes = 0;
    int compared_nodes = 0;
    int degenerate_nodes = 0;
};

inline ConsistencyReport consistency_vs_mean_curvature(const GraphFunction& gf,
                                                       double tol = 1e-9) {
    ConsistencyReport rep;
    const PdeResidual res = residual(gf);
    for (int i = 1; i < gf.ny - 1; ++i)
        for (int j = 1; j < gf.nz - 1; ++j) {
            const GraphJets jt = gf.jets(i, j);
            const double y = gf.y_at(i), z = gf.z_at(j);
            try {
                Immersion local = horizontal_graph_immersion(
                    [&](double, double) { return jt; }, y - 1, y + 1, z - 1, z + 1);
                const double H = fundamental_forms(local, y, z).H;
                const double r = res.pointwise(i, j);
                if (std::abs(r) < tol) {
                    rep.max_H_on_minimal_set = std::max(rep.max_H_on_minimal_set, std::abs(H));
                    ++rep.minimal_nodes;
                } else {
                    rep.sign_correlation += (r * H > 0) ? 1.0 : -1.0;
                    ++rep.compared_nodes;
                }
            } catch (const DegeneracyError&) {
                ++rep.degenerate_nodes;
            }
        }
    if (rep.compared_nodes > 0) rep.sign_correlation /= rep.compared_nodes;
    return rep;
}

// --- tangency locus of X_alpha on M_theta -------------------------------------------

struct TangencyCurve {
    double theta = 0, alpha = 0;
    bool tangent_everywhere = false;  // sin(alpha) = 0: X_alpha = cos(alpha) T1 is tangent
    std::vector<AmbientPoint> points;
    double max_abs_on_curve = 0;   // max |<eta, X_alpha>| along the curve
    double min_abs_off_curve = 0;  // min |<eta, X_alpha>| on offset probes
};

inline TangencyCurve fmp_tangency_curve(double theta, double alpha, double y_extent = 3.0,
                                        int samples = 121) {
    TangencyCurve out;
    out.theta = theta;
    out.alpha = alpha;
    if (std::abs(std::sin(alpha)) < 1e-12) {
        out.tangent_everywhere = true;
        return out;
    }
    const double S = std::sinh(2.0 * theta);
    const Immersion m = fmp_surface(theta, std::abs(S) * std::sqrt(1.0 + y_extent * y_extent) +
                                               3.0, y_extent + 1.0);
    const VectorField Xa = nil_horizontal_killing(m.space, alpha);
    out.min_abs_off_curve = std::numeric_limits<double>::infinity();
    for (int k = 0; k < samples; ++k) {
        const double y = -y_extent + 2.0 * y_extent * k / (samples - 1);
        const double x = -S * std::sqrt(1.0 + y * y);
        out.points.push_back(m.position(x, y));
        out.max_abs_on_curve =
            std::max(out.max_abs_on_curve, std::abs(killing_normal_component(m, x, y, Xa)));
        for (double off : {-1.0, 0.5, 1.5}) {
            out.min_abs_off_curve = std::min(
                out.min_abs_off_curve, std::abs(killing_normal_component(m, x + off, y, Xa)));
        }
    }
    return out;
}

}  // namespace ektau
