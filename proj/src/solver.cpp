/*
 * Copyright 2026 The spectragap Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "spectragap/form.hpp"
#include "spectragap/solver.hpp"

#include <algorithm>
#include <cmath>

#include "spectragap/error.hpp"

namespace spectragap {

CgResult cg_solve(const DiscreteForm& A, std::span<const double> b, double tol, std::size_t maxit,
                  std::span<const double> x0) {
    const std::size_t n = A.size();
    require(tol > 0.0, "cg_solve: tolerance must be positive");
    if (b.size() != n) fail(ErrorKind::ShapeMismatch, "cg_solve: right-hand side does not match the form");
    if (!x0.empty() && x0.size() != n) fail(ErrorKind::ShapeMismatch, "cg_solve: initial guess does not match the form");
    if (maxit == 0) maxit = 10 * n;
    const Mask& mask = A.mask();

    CgResult out;
    out.x.assign(n, 0.0);
    Vec r(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (mask[i]) r[i] = b[i];
    const double bnorm = norm2(r);
    if (bnorm == 0.0) return out;

    if (!x0.empty()) {
        for (std::size_t i = 0; i < n; ++i)
            if (mask[i]) out.x[i] = x0[i];
        const Vec ax = A.apply(out.x);
        for (std::size_t i = 0; i < n; ++i) r[i] -= ax[i];
    }

    const Vec d = A.diagonal();
    Vec z(n, 0.0), p(n), ap(n);
    auto precondition = [&] {
        for (std::size_t i = 0; i < n; ++i) z[i] = mask[i] ? r[i] / d[i] : 0.0;
    };
    precondition();
    p = z;
    double rz = dot(r, z);
    double rnorm = norm2(r);
    for (std::size_t it = 0; it < maxit; ++it) {
        if (rnorm <= tol * bnorm) {
            out.iterations = it;
            out.relative_residual = rnorm / bnorm;
            return out;
        }
        A.apply(p, ap);
        const double pap = dot(p, ap);
        if (!(pap > 0.0)) fail(ErrorKind::Indefinite, "cg_solve: operator is not positive definite on the mask");
        const double alpha = rz / pap;
        axpy(alpha, p, out.x);
        axpy(-alpha, ap, r);
        rnorm = norm2(r);
        precondition();
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    if (rnorm <= tol * bnorm) {
        out.iterations = maxit;
        out.relative_residual = rnorm / bnorm;
        return out;
    }
    fail(ErrorKind::NotConverged, "cg_solve: no convergence within " + std::to_string(maxit) +
                                      " iterations (relative residual " + std::to_string(rnorm / bnorm) + ")");
}

double hminus1_norm(const Grid& grid, const GridFunction& f) {
    if (f.grid != grid) fail(ErrorKind::ShapeMismatch, "hminus1_norm: function lives on a different grid");
    for (double v : f.values)
        if (!std::isfinite(v)) fail(ErrorKind::InvalidArgument, "hminus1_norm: f is not finite");
    const DiscreteForm a0 = laplacian_form(grid, Mask::full(grid));
    Vec mf(f.values);
    scale(grid.cell_volume(), mf);
    if (norm_inf(mf) == 0.0) return 0.0;
    try {
        const CgResult z = cg_solve(a0, mf, 1e-10);
        return std::sqrt(std::max(0.0, dot(mf, z.x)));
    } catch (const Error& e) {
        fail(ErrorKind::Internal, std::string("hminus1_norm: Poisson solve failed: ") + e.what());
    }
}

DirichletResult dirichlet_solve(const Grid& grid, const GridFunction& W, const GridFunction& f, const Mask& K) {
    if (W.grid != grid || f.grid != grid) fail(ErrorKind::ShapeMismatch, "dirichlet_solve: inputs on different grids");
    if (K.size() != grid.size()) fail(ErrorKind::ShapeMismatch, "dirichlet_solve: K does not match the grid");
    for (double w : W.values)
        if (!(w >= 0.0) || !std::isfinite(w)) fail(ErrorKind::InvalidArgument, "dirichlet_solve: W must be finite and >= 0");
    const PotentialField pf = PotentialField::from_values(grid, W.values);
    const DiscreteForm form = assemble(grid, pf);
    const double cv = grid.cell_volume();
    Vec mf(f.values);
    scale(cv, mf);

    DirichletResult out;
    CgResult sol;
    try {
        sol = cg_solve(form, mf, 1e-12);
    } catch (const Error& e) {
        fail(ErrorKind::Internal, std::string("dirichlet_solve: ") + e.what());
    }
    out.u = GridFunction(grid, std::move(sol.x));
    out.iterations = sol.iterations;

    double wk = 0.0, lhs = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!K[i]) continue;
        wk += W.values[i] * cv;
        lhs += W.values[i] * std::abs(out.u.values[i]) * cv;
    }
    out.estimate.lhs = lhs;
    out.estimate.hminus1 = hminus1_norm(grid, f);
    out.estimate.rhs = 2.0 * std::sqrt(wk) * out.estimate.hminus1;
    out.estimate.holds = lhs <= out.estimate.rhs * 1.05;
    return out;
}

ObstacleResult obstacle_solve(const DiscreteForm& A, const GridFunction& lower, const ObstacleOptions& opts) {
    const Grid& g = A.grid();
    if (lower.grid != g) fail(ErrorKind::ShapeMismatch, "obstacle_solve: obstacle lives on a different grid");
    require(opts.omega > 0.0 && opts.omega < 2.0, "obstacle_solve: relaxation must lie in (0, 2)");
    const Mask& mask = A.mask();
    const std::size_t n = g.size();

    std::vector<std::uint8_t> constrained(n, 0);
    double scale_ref = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (!mask[i] || lower.values[i] == kNoObstacle) continue;
        if (!std::isfinite(lower.values[i])) fail(ErrorKind::InvalidArgument, "obstacle_solve: obstacle must be finite or -inf");
        constrained[i] = 1;
        any = true;
        scale_ref = std::max(scale_ref, std::abs(lower.values[i]));
    }
    require(any, "obstacle_solve: the constraint set is empty");
    if (scale_ref == 0.0) scale_ref = 1.0;

    const Vec diag = A.diagonal();
    for (std::size_t i = 0; i < n; ++i)
        if (mask[i] && !(diag[i] > 0.0)) fail(ErrorKind::InvalidArgument, "obstacle_solve: form is not positive on its diagonal");

    Vec xi(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (constrained[i]) xi[i] = std::max(0.0, lower.values[i]);

    // Warm start: obstacle values on the constraint set, A-harmonic elsewhere.
    if (opts.warm_start) {
        std::vector<std::uint8_t> free_bits(n, 0);
        bool has_free = false;
        for (std::size_t i = 0; i < n; ++i)
            if (mask[i] && !constrained[i]) free_bits[i] = 1, has_free = true;
        if (has_free) {
            Vec e(n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                if (constrained[i]) e[i] = lower.values[i];
            Vec rhs = A.apply(e);
            scale(-1.0, rhs);
            const DiscreteForm sub = A.restricted(Mask(g, free_bits));
            try {
                const CgResult ext = cg_solve(sub, rhs, 1e-13);
                for (std::size_t i = 0; i < n; ++i)
                    if (free_bits[i]) xi[i] = ext.x[i];
            } catch (const Error&) {
                // fall back to the cold start
            }
        }
        for (std::size_t i = 0; i < n; ++i)
            if (constrained[i]) xi[i] = std::max(xi[i], lower.values[i]);
    }

    std::array<double, 3> off{};
    for (int a = 0; a < g.dim(); ++a) off[a] = g.cell_volume() / (g.h(a) * g.h(a));

    ObstacleResult out;
    out.energy_history.push_back(A.qv(xi));
    auto row_residual = [&](std::size_t i, const std::array<std::int64_t, 3>& mi) {
        double ax = diag[i] * xi[i];
        for (int a = 0; a < g.dim(); ++a) {
            const std::size_t s = g.stride(a);
            if (mi[a] > 0 && mask[i - s]) ax -= off[a] * xi[i - s];
            if (mi[a] + 1 < g.n(a) && mask[i + s]) ax -= off[a] * xi[i + s];
        }
        return ax;
    };

    for (std::size_t sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        double max_update = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!mask[i]) continue;
            const auto mi = g.multi_index(i);
            const double ax = row_residual(i, mi);
            double next = xi[i] - opts.omega * ax / diag[i];
            if (constrained[i]) next = std::max(next, lower.values[i]);
            max_update = std::max(max_update, std::abs(next - xi[i]));
            xi[i] = next;
        }
        out.sweeps = sweep + 1;
        out.energy_history.push_back(A.qv(xi));
        if (max_update < opts.update_tol * scale_ref) break;
        if (sweep + 1 == opts.max_sweeps)
            fail(ErrorKind::NotConverged, "obstacle_solve: sweep budget exhausted");
    }

    double comp = 0.0;
    const Vec axi = A.apply(xi);
    for (std::size_t i = 0; i < n; ++i) {
        if (!mask[i]) continue;
        const double r = axi[i] / diag[i];
        const bool active = constrained[i] && xi[i] <= lower.values[i] + 1e-14 * scale_ref;
        comp = std::max(comp, active ? std::max(0.0, -r) : std::abs(r));
    }
    out.complementarity = comp;
    out.xi = GridFunction(g, std::move(xi));
    return out;
}

}  // namespace spectragap
