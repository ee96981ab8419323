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

#include "doctest.h"
#include "spectragap/criticality.hpp"
#include "spectragap/error.hpp"

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
Box third() {
    Box b;
    b.sides[0] = {1.0 / 3.0, 2.0 / 3.0};
    return b;
}

// Dense oracle: inf x^T A x / sum_K x^2 h for the 1D Dirichlet Laplacian.
double dense_middle_third_gap(std::int64_t n) {
    const Grid g = line(n);
    const Mask K = compact_mask(g, third());
    const double h = g.h(0);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        A(i, i) = 2.0 / h;
        if (i > 0) A(i, i - 1) = A(i - 1, i) = -1.0 / h;
    }
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w(i) = K[std::size_t(i)] ? std::sqrt(h) : 0.0;
    Eigen::MatrixXd S = w.asDiagonal() * A.inverse() * w.asDiagonal();
    S = 0.5 * (S + S.transpose());
    return 1.0 / Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S).eigenvalues().maxCoeff();
}
}  // namespace

TEST_CASE("laplacian on the interval with K the middle third is subcritical") {
    Problem p{ConstantPotential{0.0}};
    ClassifyOptions o;
    o.K = third();
    const CriticalityVerdict v = classify(p, line(127), o);
    CHECK(v.tag == VerdictTag::Subcritical);
    CHECK(v.levels.back().mu == doctest::Approx(dense_middle_third_gap(511)).epsilon(1e-6));
    // continuum: u = cos(6t(x - 1/2)) on K, linear outside, t tan t = 1/2
    double lo = 0.1, hi = 1.5;
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        (mid * std::tan(mid) < 0.5 ? lo : hi) = mid;
    }
    CHECK(v.levels.back().mu == doctest::Approx(36.0 * lo * lo).epsilon(0.01));
}

TEST_CASE("deflated laplacian is critical in 1D and 2D") {
    Problem p{ConstantPotential{0.0}};
    p.shift_mode = ShiftMode::DiscretePrincipal;
    for (const Grid& g : {line(63), square(15)}) {
        const CriticalityVerdict v = classify(p, g);
        CHECK(v.tag == VerdictTag::Critical);
        for (const auto& l : v.levels) CHECK(std::abs(l.mu) <= 1e-8);
        const NullSequenceEvidence ev = null_sequence(p, v);
        REQUIRE(ev.members.size() == 3);
        for (std::size_t k = 0; k < 3; ++k) {
            double l1 = 0.0;
            const Grid& gk = ev.members[k].grid;
            for (std::size_t i = 0; i < gk.size(); ++i)
                if (ev.K[k][i]) l1 += std::abs(ev.members[k].values[i]) * gk.cell_volume();
            CHECK(std::abs(l1 - 1.0) <= 1e-12);
            CHECK(std::abs(ev.qv[k]) <= 1e-8);
        }
    }
}

TEST_CASE("fixed continuum shift is critical by extrapolation") {
    Problem p{ConstantPotential{-M_PI * M_PI}};
    const CriticalityVerdict v = classify(p, line(63));
    CHECK(v.tag == VerdictTag::Critical);
    CHECK(v.by_extrapolation);
    REQUIRE(v.levels.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        const double h = v.levels[k].h;
        CHECK(v.levels[k].mu < 0.0);
        CHECK(v.levels[k].mu == doctest::Approx(-std::pow(M_PI, 4) * h * h / 12.0).epsilon(0.01));
    }
    CHECK(v.levels[0].mu / v.levels[1].mu == doctest::Approx(4.0).epsilon(0.05));
    REQUIRE(v.fitted_rate);
    CHECK(*v.fitted_rate == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("deep constant well is supercritical") {
    Problem p{ConstantPotential{-50.0}};
    const CriticalityVerdict v = classify(p, line(31));
    CHECK(v.tag == VerdictTag::Supercritical);
    REQUIRE(v.witness);
    CHECK(v.witness->qv < 0.0);
}

TEST_CASE("verdict is invariant under weight scaling") {
    Problem p{ConstantPotential{0.0}};
    ClassifyOptions o;
    o.K = third();
    const CriticalityVerdict a = classify(p, line(31), o);
    o.weight = 7.0;
    const CriticalityVerdict b = classify(p, line(31), o);
    CHECK(a.tag == b.tag);
    for (std::size_t k = 0; k < a.levels.size(); ++k)
        CHECK(b.levels[k].mu == doctest::Approx(a.levels[k].mu / 7.0).epsilon(1e-7));

    // levels carrying a witness scale the same way
    Problem s{ConstantPotential{0.0}};
    s.shift = -M_PI * M_PI;
    o.weight = 1.0;
    const CriticalityVerdict c = classify(s, line(15), o);
    o.weight = 50.0;
    const CriticalityVerdict d = classify(s, line(15), o);
    CHECK(c.tag == VerdictTag::Critical);
    CHECK(d.tag == c.tag);
    for (std::size_t k = 0; k < c.levels.size(); ++k) {
        CHECK(c.levels[k].witness);
        CHECK(d.levels[k].mu == doctest::Approx(c.levels[k].mu / 50.0).epsilon(1e-12));
    }
}

TEST_CASE("adding a positive bump keeps a subcritical verdict") {
    Problem p{ConstantPotential{1.0}};
    p.shift_mode = ShiftMode::DiscretePrincipal;
    const CriticalityVerdict v = classify(p, line(31));
    CHECK(v.tag == VerdictTag::Subcritical);
}

TEST_CASE("witness search") {
    const Grid g = line(63);
    CHECK_FALSE(supercritical_witness(laplacian_form(g, Mask::full(g))).has_value());
    const auto w = supercritical_witness(laplacian_form(g, Mask::full(g)).shifted(-20.0));
    REQUIRE(w);
    CHECK(w->qv < 0.0);
}

TEST_CASE("classify needs three levels") {
    ClassifyOptions o;
    o.levels = 2;
    CHECK_THROWS_AS(classify(Problem{ConstantPotential{0.0}}, line(15), o), Error);
}
