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
#include "spectragap/spectral.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>

#include "spectragap/error.hpp"
#include "spectragap/solver.hpp"

namespace spectragap {

namespace {

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

double laplace_mode(double h, std::int64_t n, std::int64_t k) {
    return 2.0 / (h * h) * (1.0 - std::cos(std::numbers::pi * double(k + 1) / double(n + 1)));
}

}  // namespace

struct LaplacePreconditioner::Impl {
    Grid grid;
    std::size_t n = 0;
    double* buf = nullptr;
    fftw_plan plan = nullptr;
    std::vector<double> inv_eig;

    ~Impl() {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        if (plan) fftw_destroy_plan(plan);
        if (buf) fftw_free(buf);
    }
};

LaplacePreconditioner::LaplacePreconditioner(const Grid& grid, double sigma) : impl_(std::make_unique<Impl>()) {
    Impl& m = *impl_;
    m.grid = grid;
    m.n = grid.size();
    const int dim = grid.dim();
    int dims[3];
    fftw_r2r_kind kinds[3];
    double norm = 1.0;
    for (int a = 0; a < dim; ++a) {
        // fftw is row-major with the last index fastest; axis 0 is ours
        dims[dim - 1 - a] = int(grid.n(a));
        kinds[a] = FFTW_RODFT00;
        norm *= 2.0 * double(grid.n(a) + 1);
    }
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        m.buf = fftw_alloc_real(m.n);
        m.plan = fftw_plan_r2r(dim, dims, m.buf, m.buf, kinds, FFTW_ESTIMATE);
    }
    if (!m.plan) fail(ErrorKind::Internal, "LaplacePreconditioner: fftw planning failed");
    m.inv_eig.resize(m.n);
    const double cv = grid.cell_volume();
    for (std::size_t i = 0; i < m.n; ++i) {
        const auto mi = grid.multi_index(i);
        double lam = sigma;
        for (int a = 0; a < dim; ++a) lam += laplace_mode(grid.h(a), grid.n(a), mi[a]);
        m.inv_eig[i] = 1.0 / (lam * cv * norm);
    }
}

LaplacePreconditioner::~LaplacePreconditioner() = default;

void LaplacePreconditioner::apply(std::span<const double> x, std::span<double> y) {
    Impl& m = *impl_;
    std::copy(x.begin(), x.end(), m.buf);
    fftw_execute(m.plan);
    for (std::size_t i = 0; i < m.n; ++i) m.buf[i] *= m.inv_eig[i];
    fftw_execute(m.plan);
    std::copy(m.buf, m.buf + m.n, y.begin());
}

double box_laplacian_eigenvalue(const Grid& grid) {
    double lam = 0.0;
    for (int a = 0; a < grid.dim(); ++a) lam += laplace_mode(grid.h(a), grid.n(a), 0);
    return lam;
}

double rayleigh(const DiscreteForm& form, const MassMatrix& mass, std::span<const double> xi) {
    const double m = mass.norm2(xi);
    if (!(m > 0.0)) fail(ErrorKind::InvalidArgument, "rayleigh: test function has zero mass norm");
    return form.qv(xi) / m;
}

namespace {

// Basis vector of the Rayleigh-Ritz subspace together with its images.
struct Tracked {
    Vec v, av, mv;
};

class Lopcg {
public:
    Lopcg(const DiscreteForm& A, const MassMatrix& M, const EigenOptions& opts)
        : A_(A), M_(M), opts_(opts), n_(A.size()), mask_(A.mask()) {
        if (opts.spectral_preconditioner) fft_ = std::make_unique<LaplacePreconditioner>(A.grid());
        diag_ = A.diagonal();
        // Jacobi fallback needs a positive diagonal
        for (double& d : diag_) d = std::max(d, 1e-300);
        norm_a_ = A.norm_bound();
    }

    SpectralResult run() {
        Tracked x = make(initial());
        normalize(x);
        std::optional<Tracked> p;
        SpectralResult out;
        double lambda = dot(x.v, x.av);
        for (std::size_t it = 1; it <= opts_.max_iterations; ++it) {
            Vec r(n_);
            for (std::size_t i = 0; i < n_; ++i) r[i] = x.av[i] - lambda * x.mv[i];
            masked(r);
            const double rn = norm2(r), an = norm2(x.av);
            out.residual = an > 0.0 ? rn / an : rn;
            const double floor = 1e3 * std::numeric_limits<double>::epsilon() * norm_a_ * norm2(x.v);
            if (rn <= opts_.tol * an || rn <= floor) {
                out.converged = true;
                out.iterations = it - 1;
                break;
            }
            out.iterations = it;

            std::vector<Tracked> basis;
            basis.push_back(x);
            Tracked w = make(precondition(r));
            if (orthogonalize(w, basis)) basis.push_back(std::move(w));
            if (p) {
                Tracked q = *p;
                if (orthogonalize(q, basis)) basis.push_back(std::move(q));
            }
            if (basis.size() == 1) break;

            const int k = int(basis.size());
            Eigen::MatrixXd H(k, k);
            for (int i = 0; i < k; ++i)
                for (int j = 0; j <= i; ++j) H(i, j) = H(j, i) = 0.5 * (dot(basis[i].v, basis[j].av) + dot(basis[j].v, basis[i].av));
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
            const Eigen::VectorXd c = es.eigenvectors().col(0);

            Tracked nx = combine(basis, c, 0);
            Tracked np = combine(basis, c, 1);
            x = std::move(nx);
            p = std::move(np);
            if (it % 50 == 0) x = make(x.v);
            normalize(x);
            lambda = dot(x.v, x.av);
        }
        // Orient the ground state to be mostly positive.
        double s = 0.0;
        for (double v : x.v) s += v;
        if (s < 0.0) scale(-1.0, x.v), scale(-1.0, x.av), scale(-1.0, x.mv);
        out.value = A_.qv(x.v) / M_.norm2(x.v);
        Vec r(n_);
        for (std::size_t i = 0; i < n_; ++i) r[i] = x.av[i] - out.value * x.mv[i];
        masked(r);
        const double an = norm2(x.av);
        out.residual = an > 0.0 ? norm2(r) / an : norm2(r);
        out.vector = GridFunction(A_.grid(), std::move(x.v));
        return out;
    }

private:
    void masked(Vec& v) const {
        for (std::size_t i = 0; i < n_; ++i)
            if (!mask_[i]) v[i] = 0.0;
    }

    Vec initial() {
        Vec ones(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i)
            if (mask_[i]) ones[i] = M_.diag[i];
        Vec x = precondition(ones);
        const double floor = 1e-3 * norm_inf(x);
        for (std::size_t i = 0; i < n_; ++i)
            if (mask_[i]) x[i] = std::abs(x[i]) + floor;
        return x;
    }

    Vec precondition(const Vec& r) {
        Vec z(n_, 0.0);
        if (fft_) {
            fft_->apply(r, z);
            masked(z);
        } else {
            for (std::size_t i = 0; i < n_; ++i)
                if (mask_[i]) z[i] = r[i] / diag_[i];
        }
        return z;
    }

    Tracked make(Vec v) const {
        masked(v);
        Tracked t;
        t.av = A_.apply(v);
        t.mv.assign(n_, 0.0);
        M_.apply(v, t.mv);
        t.v = std::move(v);
        return t;
    }

    void normalize(Tracked& t) const {
        const double m = std::sqrt(dot(t.v, t.mv));
        if (!(m > 0.0)) fail(ErrorKind::InvalidArgument, "principal_eig: mass is not positive on the iterate");
        scale(1.0 / m, t.v), scale(1.0 / m, t.av), scale(1.0 / m, t.mv);
    }

    // Two passes of M-orthogonal Gram-Schmidt; false if t collapses.
    bool orthogonalize(Tracked& t, const std::vector<Tracked>& basis) const {
        const double before = std::sqrt(std::max(0.0, dot(t.v, t.mv)));
        if (!(before > 0.0)) return false;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis) {
                const double c = dot(b.mv, t.v);
                axpy(-c, b.v, t.v), axpy(-c, b.av, t.av), axpy(-c, b.mv, t.mv);
            }
        const double after = std::sqrt(std::max(0.0, dot(t.v, t.mv)));
        if (!(after > 1e-10 * before)) return false;
        scale(1.0 / after, t.v), scale(1.0 / after, t.av), scale(1.0 / after, t.mv);
        return true;
    }

    Tracked combine(const std::vector<Tracked>& basis, const Eigen::VectorXd& c, std::size_t from) const {
        Tracked t{Vec(n_, 0.0), Vec(n_, 0.0), Vec(n_, 0.0)};
        for (std::size_t i = from; i < basis.size(); ++i) {
            axpy(c(Eigen::Index(i)), basis[i].v, t.v);
            axpy(c(Eigen::Index(i)), basis[i].av, t.av);
            axpy(c(Eigen::Index(i)), basis[i].mv, t.mv);
        }
        return t;
    }

    const DiscreteForm& A_;
    const MassMatrix& M_;
    EigenOptions opts_;
    std::size_t n_;
    const Mask& mask_;
    std::unique_ptr<LaplacePreconditioner> fft_;
    Vec diag_;
    double norm_a_ = 0.0;
};

}  // namespace

SpectralResult principal_eig(const DiscreteForm& form, const MassMatrix& mass, const EigenOptions& opts) {
    if (mass.grid != form.grid() || mass.diag.size() != form.size())
        fail(ErrorKind::ShapeMismatch, "principal_eig: mass does not match the form");
    require(opts.tol > 0.0, "principal_eig: tolerance must be positive");
    for (std::size_t i = 0; i < mass.diag.size(); ++i)
        if (form.mask()[i] && !(mass.diag[i] > 0.0))
            fail(ErrorKind::InvalidArgument, "principal_eig: mass must be positive on the form's mask");
    Lopcg solver(form, mass, opts);
    return solver.run();
}

SpectralResult principal_eig(const DiscreteForm& form, const EigenOptions& opts) {
    return principal_eig(form, lumped_mass(form.grid(), form.mask()), opts);
}

GapResult weighted_gap(const DiscreteForm& form, const MassMatrix& weight, const GapOptions& opts) {
    if (weight.grid != form.grid() || weight.diag.size() != form.size())
        fail(ErrorKind::ShapeMismatch, "weighted_gap: weight does not match the form");
    const Mask& mask = form.mask();
    const std::size_t n = form.size();
    double wsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(weight.diag[i] >= 0.0)) fail(ErrorKind::InvalidArgument, "weighted_gap: weight must be nonnegative");
        if (mask[i]) wsum += weight.diag[i];
    }
    if (!(wsum > 0.0)) fail(ErrorKind::InvalidArgument, "weighted_gap: weight vanishes on the form's mask");

    GapResult out;
    Vec x(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (mask[i] && weight.diag[i] > 0.0) x[i] = 1.0;
    Vec mx(n), ax(n);
    double wmax = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (mask[i]) wmax = std::max(wmax, weight.diag[i]);
    const double rounding = 1e3 * std::numeric_limits<double>::epsilon() * form.norm_bound();
    double mu_prev = std::numeric_limits<double>::infinity();
    for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
        weight.apply(x, mx);
        CgResult sol;
        try {
            sol = cg_solve(form, mx, opts.cg_tol, 0, x);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::Indefinite || e.kind() == ErrorKind::NotConverged) {
                out.indefinite = true;
                out.value = 0.0;
                out.iterations = it;
                out.minimizer = GridFunction(form.grid(), x);
                return out;
            }
            throw;
        }
        x = std::move(sol.x);
        const double m = weight.norm2(x);
        if (!(m > 0.0)) fail(ErrorKind::NotConverged, "weighted_gap: power iterate lost its weighted mass");
        scale(1.0 / std::sqrt(m), x);
        form.apply(x, ax);
        const double mu = dot(x, ax);
        weight.apply(x, mx);
        Vec r(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            if (mask[i]) r[i] = ax[i] - mu * mx[i];
        const double an = norm2(ax);
        out.iterations = it;
        out.value = mu;
        const bool settled = std::abs(mu - mu_prev) <= std::max(opts.change_tol * std::abs(mu), rounding / wmax);
        if (settled || norm2(r) <= std::max(opts.residual_tol * an, rounding * norm2(x))) {
            out.converged = true;
            break;
        }
        mu_prev = mu;
    }
    out.minimizer = GridFunction(form.grid(), std::move(x));
    return out;
}

}  // namespace spectragap
