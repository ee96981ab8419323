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
#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "doctest.h"
#include "spectragap/error.hpp"
#include "spectragap/spectral.hpp"

using namespace spectragap;

namespace {
Grid line(std::int64_t n) {
    const Interval e[] = {{0.0, 1.0}};
    const std::int64_t ns[] = {n};
    return build_grid(1, e, ns);
}
Grid square(std::int64_t n) {
    const Interval e[] = {{0.0, 1.0}, {0.0, 1.0}};
    const std::int64_t ns[] = {n, n};
    return build_grid(2, e, ns);
}
double fd_eig(double h) { return 2.0 / (h * h) * (1.0 - std::cos(M_PI * h)); }

// Dense generalized eigenvalues of (A, W) restricted to the support of W (Schur complement).
double dense_gap(const DiscreteForm& f, const MassMatrix& w) {
    const std::size_t n = f.size();
    Eigen::MatrixXd A(n, n);
    std::vector<double> e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        const Vec col = f.apply(e);
        for (std::size_t i = 0; i < n; ++i) A(Eigen::Index(i), Eigen::Index(j)) = col[i];
        e[j] = 0.0;
    }
    Eigen::VectorXd wd(n);
    for (std::size_t i = 0; i < n; ++i) wd(Eigen::Index(i)) = w.diag[i];
    // max of x^T W x / x^T A x = largest eigenvalue of W^{1/2} A^{-1} W^{1/2}
    const Eigen::MatrixXd Ainv = A.inverse();
    Eigen::MatrixXd S = wd.cwiseSqrt().asDiagonal() * Ainv * wd.cwiseSqrt().asDiagonal();
    S = 0.5 * (S + S.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    return 1.0 / es.eigenvalues().maxCoeff();
}
}  // namespace

TEST_CASE("closed-form eigenvalue n=3") {
    const Grid g = line(3);
    const SpectralResult r = principal_eig(laplacian_form(g, Mask::full(g)));
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(32.0 * (1.0 - std::cos(M_PI / 4.0))).epsilon(1e-10));
}

TEST_CASE("1D and 2D Laplacian eigenvalues") {
    const Grid g = line(255);
    const SpectralResult r = principal_eig(laplacian_form(g, Mask::full(g)));
    CHECK(r.value == doctest::Approx(fd_eig(g.h(0))).epsilon(1e-9));
    CHECK(r.residual <= 1e-8);
    const Grid s = square(31);
    const SpectralResult r2 = principal_eig(laplacian_form(s, Mask::full(s)));
    CHECK(r2.value == doctest::Approx(2.0 * fd_eig(s.h(0))).epsilon(1e-9));
    CHECK(box_laplacian_eigenvalue(s) == doctest::Approx(2.0 * fd_eig(s.h(0))));
}

TEST_CASE("constant shift and Jacobi fallback") {
    const Grid g = line(63);
    const DiscreteForm a = laplacian_form(g, Mask::full(g));
    EigenOptions jac;
    jac.spectral_preconditioner = false;
    const SpectralResult r = principal_eig(a.shifted(3.5), jac);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(fd_eig(g.h(0)) + 3.5).epsilon(1e-9));
}

TEST_CASE("ground state has no sign change") {
    const Grid g = line(127);
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 40.0 * std::sin(9.0 * g.coord(0, std::int64_t(i)));
    const SpectralResult r = principal_eig(assemble(g, PotentialField::from_values(g, v)));
    for (double x : r.vector.values) CHECK(x > 0.0);
    double m = 0.0;
    for (double x : r.vector.values) m += x * x * g.h(0);
    CHECK(m == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("weighted gap with the indicator of the interior is lambda_1") {
    const Grid g = line(127);
    const DiscreteForm a = laplacian_form(g, Mask::full(g));
    const GapResult r = weighted_gap(a, weighted_mass(g, Mask::full(g)));
    CHECK(r.value == doctest::Approx(fd_eig(g.h(0))).epsilon(1e-7));
}

TEST_CASE("weighted gap middle third against a dense oracle") {
    const Grid g = line(255);
    Box b;
    b.sides[0] = {1.0 / 3.0, 2.0 / 3.0};
    const MassMatrix w = weighted_mass(g, compact_mask(g, b));
    const DiscreteForm a = laplacian_form(g, Mask::full(g));
    const GapResult r = weighted_gap(a, w);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(dense_gap(a, w)).epsilon(1e-7));
    // scaling the weight by t divides the gap by t
    CHECK(weighted_gap(a, w.scaled(4.0)).value == doctest::Approx(r.value / 4.0).epsilon(1e-7));
}

TEST_CASE("gap at the deflated ground state vanishes") {
    const Grid g = line(127);
    const DiscreteForm a = laplacian_form(g, Mask::full(g)).shifted(-fd_eig(g.h(0)));
    Box b;
    b.sides[0] = {1.0 / 3.0, 2.0 / 3.0};
    const GapResult r = weighted_gap(a, weighted_mass(g, compact_mask(g, b)));
    CHECK(std::abs(r.value) <= 1e-8);
}

TEST_CASE("hardy weight with midpoint quadrature") {
    const Grid g = line(255);
    const GridFunction w = GridFunction::sample(g, [](const Point& x) { return 0.25 / (x[0] * x[0]); });
    const GapResult r = weighted_gap(laplacian_form(g, Mask::full(g)), weighted_mass(g, w));
    CHECK(r.value >= 1.0);
}

TEST_CASE("rayleigh bounds and homogeneity") {
    const Grid g = square(15);
    const DiscreteForm a = laplacian_form(g, Mask::full(g)).shifted(-10.0);
    const MassMatrix m = lumped_mass(g, Mask::full(g));
    const SpectralResult r = principal_eig(a);
    std::mt19937 rng(1);
    std::normal_distribution<double> nd;
    for (int k = 0; k < 20; ++k) {
        std::vector<double> x(g.size());
        for (auto& t : x) t = nd(rng);
        CHECK(rayleigh(a, m, x) >= r.value - 1e-9);
        std::vector<double> y = x;
        for (auto& t : y) t *= 2.0;
        CHECK(rayleigh(a, m, y) == doctest::Approx(rayleigh(a, m, x)));
    }
    CHECK(rayleigh(a, m, r.vector.values) == doctest::Approx(r.value).epsilon(1e-10));
    std::vector<double> zero(g.size(), 0.0);
    CHECK_THROWS_AS(rayleigh(a, m, zero), Error);
}
