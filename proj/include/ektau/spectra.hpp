#pragma once

// Discretization of the stability operator L = Delta + q on compact
// parameter rectangles with zero Dirichlet boundary values: quadratic form,
// first eigenvalue by shifted inverse power iteration, cylinder stability
// verdicts and Jacobi-function residuals.

#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "ektau/families.hpp"
#include "ektau/grid.hpp"
#include "ektau/surface.hpp"

namespace ektau {

// Dirichlet problem for L = Delta + q on [s0,s1] x [t0,t1] with ns x nt
// interior nodes.  Metric data lives on the (ns+2) x (nt+2) node-inclusive
// grid so that face averages reach the boundary; q is stored at the
// interior nodes.  The five point conservative stencil drops the g^{st}
// coupling: exact on cylinders (where the induced metric is the identity),
// flagged through max_offdiag for anything else.
struct SpectralProblem {
    SpaceParams space;
    double s0, s1, t0, t1;
    int ns, nt;  // interior nodes per direction
    Eigen::ArrayXXd sqrtg, wss, wtt;  // inclusive grid: sqrt(g), sqrt(g) g^{ss}, sqrt(g) g^{tt}
    Eigen::ArrayXXd q;                // interior grid
    double max_offdiag = 0.0;         // max |g^{st}| / sqrt(g^{ss} g^{tt}) seen

    double hs() const { return (s1 - s0) / (ns + 1); }
    double ht() const { return (t1 - t0) / (nt + 1); }
    double s_at(int i) const { return s0 + (i + 1) * hs(); }  // interior index
    double t_at(int j) const { return t0 + (j + 1) * ht(); }
};

inline SpectralProblem assemble_spectral_problem(const Immersion& imm, double s0, double s1,
                                                 double t0, double t1, int ns, int nt) {
    if (ns < 3 || nt < 3) throw ResolutionError("spectral grid needs at least 3x3 interior nodes");
    SpectralProblem pb;
    pb.space = imm.space;
    pb.s0 = s0;
    pb.s1 = s1;
    pb.t0 = t0;
    pb.t1 = t1;
    pb.ns = ns;
    pb.nt = nt;
    pb.sqrtg.resize(ns + 2, nt + 2);
    pb.wss.resize(ns + 2, nt + 2);
    pb.wtt.resize(ns + 2, nt + 2);
    pb.q.resize(ns, nt);
    const double hs = pb.hs(), ht = pb.ht();
    for (int i = 0; i < ns + 2; ++i)
        for (int j = 0; j < nt + 2; ++j) {
            const double s = s0 + i * hs, t = t0 + j * ht;
            const FundamentalForms ff = fundamental_forms(imm, s, t);
            const Eigen::Matrix2d I = ff.first;
            const double det = I.determinant();
            const double root = std::sqrt(det);
            pb.sqrtg(i, j) = root;
            pb.wss(i, j) = root * I(1, 1) / det;
            pb.wtt(i, j) = root * I(0, 0) / det;
            pb.max_offdiag = std::max(pb.max_offdiag,
                                      std::abs(I(0, 1)) / std::sqrt(I(0, 0) * I(1, 1)));
            if (i >= 1 && i <= ns && j >= 1 && j <= nt) {
                pb.q(i - 1, j - 1) = potential_q(imm, s, t);
            }
        }
    if (pb.max_offdiag > 1e-8) {
        log_msg(LogLevel::Info,
                "spectral assembly: induced metric has off-diagonal part %.2e; "
                "the 5-point stencil ignores it",
                pb.max_offdiag);
    }
    return pb;
}

namespace detail {

// Face-averaged coefficient between inclusive nodes.
inline double face(const Eigen::ArrayXXd& w, int i0, int j0, int i1, int j1) {
    return 0.5 * (w(i0, j0) + w(i1, j1));
}

}  // namespace detail

// Apply L = Delta + q to interior values f (ns x nt), zero boundary.
inline Eigen::ArrayXXd apply_operator(const SpectralProblem& pb, const Eigen::ArrayXXd& f) {
    const double hs2 = pb.hs() * pb.hs(), ht2 = pb.ht() * pb.ht();
    Eigen::ArrayXXd out(pb.ns, pb.nt);
    auto value = [&](int i, int j) -> double {
        if (i < 0 || j < 0 || i >= pb.ns || j >= pb.nt) return 0.0;
        return f(i, j);
    };
    for (int i = 0; i < pb.ns; ++i)
        for (int j = 0; j < pb.nt; ++j) {
            const int I = i + 1, J = j + 1;  // inclusive indices
            const double wE = detail::face(pb.wss, I, J, I + 1, J);
            const double wW = detail::face(pb.wss, I, J, I - 1, J);
            const double wN = detail::face(pb.wtt, I, J, I, J + 1);
            const double wS = detail::face(pb.wtt, I, J, I, J - 1);
            const double fc = f(i, j);
            const double flux =
                (wE * (value(i + 1, j) - fc) - wW * (fc - value(i - 1, j))) / hs2 +
                (wN * (value(i, j + 1) - fc) - wS * (fc - value(i, j - 1))) / ht2;
            out(i, j) = flux / pb.sqrtg(I, J) + pb.q(i, j) * fc;
        }
    return out;
}

// Discrete L^2(Omega) inner product of interior grids.
inline double l2_inner(const SpectralProblem& pb, const Eigen::ArrayXXd& a,
                       const Eigen::ArrayXXd& b) {
    double sum = 0.0;
    for (int i = 0; i < pb.ns; ++i)
        for (int j = 0; j < pb.nt; ++j) sum += a(i, j) * b(i, j) * pb.sqrtg(i + 1, j + 1);
    return sum * pb.hs() * pb.ht();
}

// Quadratic form Q(f,f) = int |grad f|^2 - q f^2 evaluated by the face
// gradient quadrature; by summation by parts this equals -<f, Lf> for the
// operator above, exactly at the stencil level.  f is given on the
// node-inclusive grid and must vanish on the boundary.
inline double quadratic_form(const SpectralProblem& pb, const ScalarFieldGrid& f) {
    if (f.ns != pb.ns + 2 || f.nt != pb.nt + 2)
        throw ContractError("quadratic_form: field grid does not match the problem layout");
    const double hs = pb.hs(), ht = pb.ht();
    double bmax = 0.0;
    for (int i = 0; i < f.ns; ++i)
        bmax = std::max({bmax, std::abs(f.values(i, 0)), std::abs(f.values(i, f.nt - 1))});
    for (int j = 0; j < f.nt; ++j)
        bmax = std::max({bmax, std::abs(f.values(0, j)), std::abs(f.values(f.ns - 1, j))});
    if (bmax > 1e-13 * std::max(1.0, f.values.abs().maxCoeff()))
        throw ContractError("quadratic_form: nonzero boundary data");

    double grad = 0.0;
    for (int i = 0; i + 1 < f.ns; ++i)  // s-faces
        for (int j = 1; j + 1 < f.nt; ++j) {
            const double w = detail::face(pb.wss, i, j, i + 1, j);
            const double d = (f.values(i + 1, j) - f.values(i, j)) / hs;
            grad += w * d * d;
        }
    for (int i = 1; i + 1 < f.ns; ++i)  // t-faces
        for (int j = 0; j + 1 < f.nt; ++j) {
            const double w = detail::face(pb.wtt, i, j, i, j + 1);
            const double d = (f.values(i, j + 1) - f.values(i, j)) / ht;
            grad += w * d * d;
        }
    double pot = 0.0;
    for (int i = 0; i < pb.ns; ++i)
        for (int j = 0; j < pb.nt; ++j) {
            const double v = f.values(i + 1, j + 1);
            pot += pb.q(i, j) * v * v * pb.sqrtg(i + 1, j + 1);
        }
    return (grad - pot) * hs * ht;
}

struct SpectralResult {
    double lambda1 = 0.0;
    ScalarFieldGrid eigenfunction;  // node-inclusive, zero boundary, unit L^2 norm
    int iterations = 0;
    double residual = 0.0;          // ||(L + lambda1) f||_2
    double solver_tolerance = 0.0;
};

// Smallest eigenvalue of -L (Dirichlet) by inverse power iteration with a
// sparse direct factorization, shifted below the spectrum via Gershgorin.
inline SpectralResult first_eigenvalue(const SpectralProblem& pb) {
    if (pb.ns < 16 || pb.nt < 16)
        throw ResolutionError("first_eigenvalue expects a grid of at least 16x16 interior nodes");
    const int N = pb.ns * pb.nt;
    const double hs2 = pb.hs() * pb.hs(), ht2 = pb.ht() * pb.ht();
    auto idx = [&](int i, int j) { return i * pb.nt + j; };

    // Symmetrized matrix A = D^{-1/2} S D^{-1/2} where S f = -sqrt(g) L f
    // and D = diag(sqrt(g)).
    Eigen::VectorXd droot(N);
    for (int i = 0; i < pb.ns; ++i)
        for (int j = 0; j < pb.nt; ++j) droot(idx(i, j)) = std::sqrt(pb.sqrtg(i + 1, j + 1));

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(5 * N);
    for (int i = 0; i < pb.ns; ++i)
        for (int j = 0; j < pb.nt; ++j) {
            const int I = i + 1, J = j + 1, n = idx(i, j);
            const double wE = detail::face(pb.wss, I, J, I + 1, J);
            const double wW = detail::face(pb.wss, I, J, I - 1, J);
            const double wN = detail::face(pb.wtt, I, J, I, J + 1);
            const double wS = detail::face(pb.wtt, I, J, I, J - 1);
            const double diag =
                (wE + wW) / hs2 + (wN + wS) / ht2 - pb.q(i, j) * pb.sqrtg(I, J);
            trips.emplace_back(n, n, diag / (droot(n) * droot(n)));
            if (i + 1 < pb.ns)
                trips.emplace_back(n, idx(i + 1, j),
                                   -wE / hs2 / (droot(n) * droot(idx(i + 1, j))));
            if (i > 0)
                trips.emplace_back(n, idx(i - 1, j),
                                   -wW / hs2 / (droot(n) * droot(idx(i - 1, j))));
            if (j + 1 < pb.nt)
                trips.emplace_back(n, idx(i, j + 1),
                                   -wN / ht2 / (droot(n) * droot(idx(i, j + 1))));
            if (j > 0)
                trips.emplace_back(n, idx(i, j - 1),
                                   -wS / ht2 / (droot(n) * droot(idx(i, j - 1))));
        }
    Eigen::SparseMatrix<double> A(N, N);
    A.setFromTriplets(trips.begin(), trips.end());

    // Gershgorin lower bound, then a shift strictly below the spectrum.
    double gersh = std::numeric_limits<double>::max();
    double opnorm = 0.0;
    for (int n = 0; n < N; ++n) {
        double diag = 0.0, off = 0.0;
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, n); it; ++it) {
            if (it.row() == n)
                diag = it.value();
            else
                off += std::abs(it.value());
        }
        gersh = std::min(gersh, diag - off);
        opnorm = std::max(opnorm, diag + off);
    }
    double shift = gersh - 0.01 * std::max(1.0, std::abs(gersh));

    Eigen::SparseMatrix<double> M = A;
    for (int n = 0; n < N; ++n) M.coeffRef(n, n) -= shift;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    solver.compute(M);
    if (solver.info() != Eigen::Success)
        throw SolverError("first_eigenvalue: factorization failed", {});

    // First-mode-shaped start: positive product sine bump.
    Eigen::VectorXd v(N);
    for (int i = 0; i < pb.ns; ++i)
        for (int j = 0; j < pb.nt; ++j)
            v(idx(i, j)) = std::sin(M_PI * (i + 1) / (pb.ns + 1)) *
                           std::sin(M_PI * (j + 1) / (pb.nt + 1));
    v.normalize();

    const int max_iterations = 500;
    const double rq_tol = 1e-10;
    std::vector<double> history;
    double rho = v.dot(A * v);
    double residual = (A * v - rho * v).norm();
    int iter = 0;
    int settled = 0;
    while (iter < max_iterations) {
        ++iter;
        Eigen::VectorXd w = solver.solve(v);
        w.normalize();
        const double rho_new = w.dot(A * w);
        residual = (A * w - rho_new * w).norm();
        history.push_back(residual);
        const bool small_step = std::abs(rho_new - rho) <= rq_tol * std::max(1.0, std::abs(rho_new));
        rho = rho_new;
        v = w;
        settled = small_step ? settled + 1 : 0;
        if (settled >= 2) break;
        // Re-center the shift once if convergence is slow (tiny spectral gap
        // relative to the Gershgorin distance).
        if (iter == 100 && settled == 0) {
            shift = rho - std::max(0.01 * std::max(1.0, std::abs(rho)), 4.0 * residual);
            M = A;
            for (int n = 0; n < N; ++n) M.coeffRef(n, n) -= shift;
            solver.compute(M);
            if (solver.info() != Eigen::Success)
                throw SolverError("first_eigenvalue: re-shifted factorization failed", history);
        }
    }
    if (settled < 2)
        throw SolverError("first_eigenvalue: no convergence after 500 iterations", history);

    SpectralResult res;
    res.lambda1 = rho;
    res.iterations = iter;
    res.solver_tolerance = 1e-7 * std::max(1.0, opnorm);

    // eigenfunction f = D^{-1/2} v, unit L^2 norm, positive mean
    ScalarFieldGrid f = ScalarFieldGrid::zeros(pb.s0, pb.s1, pb.t0, pb.t1, pb.ns + 2, pb.nt + 2);
    for (int i = 0; i < pb.ns; ++i)
        for (int j = 0; j < pb.nt; ++j) f.values(i + 1, j + 1) = v(idx(i, j)) / droot(idx(i, j));
    double norm2 = 0.0, mean = 0.0;
    for (int i = 0; i < pb.ns; ++i)
        for (int j = 0; j < pb.nt; ++j) {
            const double w = pb.sqrtg(i + 1, j + 1) * pb.hs() * pb.ht();
            norm2 += f.values(i + 1, j + 1) * f.values(i + 1, j + 1) * w;
            mean += f.values(i + 1, j + 1) * w;
        }
    const double scale = (mean < 0 ? -1.0 : 1.0) / std::sqrt(norm2);
    f.values *= scale;
    res.eigenfunction = f;

    // residual in the L scaling: ||(L + lambda) f||
    Eigen::ArrayXXd interior(pb.ns, pb.nt);
    for (int i = 0; i < pb.ns; ++i)
        for (int j = 0; j < pb.nt; ++j) interior(i, j) = f.values(i + 1, j + 1);
    const Eigen::ArrayXXd lf = apply_operator(pb, interior);
    Eigen::ArrayXXd defect = lf + rho * interior;
    res.residual = std::sqrt(l2_inner(pb, defect, defect));
    return res;
}

// --- cylinder stability ------------------------------------------------------

struct StabilitySweepRow {
    double a, b;       // rectangle [0,a] x [0,b]
    double lambda1;
    double band;       // marginality band 1e-3 / max(a,b)^2
    double residual;
    int iterations;
};

struct StabilityVerdict {
    bool stable = true;      // no lambda1 certified below -band
    bool marginal = false;   // boundary case kappa = -k^2 (or lambda1 inside band)
    std::optional<StabilitySweepRow> witness;  // first unstable rectangle
    std::vector<StabilitySweepRow> rows;
    double predicted_inf = 0.0;  // -(k^2 + kappa), the continuum limit
};

inline StabilityVerdict cylinder_stability_verdict(
    const SpaceParams& sp, double k_gamma,
    const std::vector<std::pair<double, double>>& domains, int grid = 96) {
    StabilityVerdict verdict;
    const double excess = sp.kappa + k_gamma * k_gamma;
    verdict.predicted_inf = -excess;
    verdict.marginal = std::abs(excess) <= 1e-9 * std::max({1.0, std::abs(sp.kappa),
                                                            k_gamma * k_gamma});
    double max_extent = 0.0;
    for (const auto& d : domains) max_extent = std::max({max_extent, d.first, d.second});
    const Immersion cyl =
        cylinder_immersion(sp, k_gamma, 1.05 * max_extent + 1.0, 1.05 * max_extent + 1.0);
    for (const auto& [a, b] : domains) {
        const auto pb = assemble_spectral_problem(cyl, 0.0, a, 0.0, b, grid, grid);
        const auto res = first_eigenvalue(pb);
        StabilitySweepRow row{a, b, res.lambda1, 1e-3 / (std::max(a, b) * std::max(a, b)),
                              res.residual, res.iterations};
        verdict.rows.push_back(row);
        if (res.lambda1 < -row.band && !verdict.witness) {
            verdict.stable = false;
            verdict.witness = row;
        }
        if (std::abs(res.lambda1) < row.band) verdict.marginal = true;
    }
    return verdict;
}

// --- Jacobi residuals ----------------------------------------------------------

struct JacobiResidualReport {
    double l2 = 0.0;
    double sup = 0.0;
    ScalarFieldGrid residual;
};

namespace detail {

inline Eigen::ArrayXXd potential_grid(const Immersion& imm, const ScalarFieldGrid& layout) {
    Eigen::ArrayXXd q(layout.ns, layout.nt);
    for (int i = 0; i < layout.ns; ++i)
        for (int j = 0; j < layout.nt; ++j)
            q(i, j) = potential_q(imm, layout.s_at(i), layout.t_at(j));
    return q;
}

inline JacobiResidualReport norms_of(const ScalarFieldGrid& r, const MetricGrid& m) {
    JacobiResidualReport rep;
    rep.residual = r;
    rep.sup = r.values.abs().maxCoeff();
    ScalarFieldGrid sq = r.like(r.values.square().eval());
    rep.l2 = std::sqrt(integrate(sq, m));
    return rep;
}

}  // namespace detail

// || Delta u + q u || on the sampled field, fourth order stencils.
inline JacobiResidualReport jacobi_residual(const Immersion& imm, const ScalarFieldGrid& u) {
    const MetricGrid m = induced_metric_grid(imm, u);
    const Eigen::ArrayXXd q = detail::potential_grid(imm, u);
    const ScalarFieldGrid lap = laplace_beltrami(u, m);
    ScalarFieldGrid r = u.like((lap.values + q * u.values).eval());
    return detail::norms_of(r, m);
}

// Composite identity L(u^2) = 2 |grad u|^2 - q u^2, valid when L u = 0.
inline JacobiResidualReport jacobi_square_identity(const Immersion& imm,
                                                   const ScalarFieldGrid& u) {
    const MetricGrid m = induced_metric_grid(imm, u);
    const Eigen::ArrayXXd q = detail::potential_grid(imm, u);
    const ScalarFieldGrid u2 = u.like(u.values.square().eval());
    const ScalarFieldGrid lap2 = laplace_beltrami(u2, m);
    const ScalarFieldGrid grad2 = gradient_norm2(u, m);
    ScalarFieldGrid r = u.like(
        (lap2.values + q * u2.values - (2.0 * grad2.values - q * u2.values)).eval());
    return detail::norms_of(r, m);
}

}  // namespace ektau
