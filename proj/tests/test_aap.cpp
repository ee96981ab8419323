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
#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "spectragap/aap.hpp"
#include "spectragap/error.hpp"

using namespace spectragap;

namespace {
Grid line(std::int64_t n) {
    const Interval e[] = {{0.0, 1.0}};
    const std::int64_t ns[] = {n};
    return build_grid(1, e, ns);
}
}  // namespace

TEST_CASE("supersolution for a constant well") {
    const Grid g = line(255);
    const Problem p{ConstantPotential{-5.0}};
    const Supersolution sup = construct_supersolution(p, g);
    const SupersolutionCheck c = check_supersolution(sup);
    CHECK(c.positive);
    CHECK(c.normalized);
    CHECK(c.residual_ok);
    CHECK(sup.residual_min >= -1e-8);
    // the final u is sin(pi x) up to scale
    const double s = sup.u.values[127];
    for (std::size_t i = 0; i < g.size(); i += 16)
        CHECK(sup.u.values[i] / s == doctest::Approx(std::sin(M_PI * g.coord(0, std::int64_t(i)))).epsilon(1e-3));
    CHECK(std::isinf(sup.schedule.back().n));
}

TEST_CASE("truncation lowers the principal eigenvalue") {
    const Grid g = line(127);
    SupersolutionOptions o;
    o.change_tol = 0.0;
    const Problem p{HardyPotential{{0, 0, 0}, 0.2}};
    const Supersolution sup = construct_supersolution(p, g, o);
    for (std::size_t k = 1; k < sup.schedule.size(); ++k)
        if (sup.schedule[k].m == sup.schedule[k - 1].m)
            CHECK(sup.schedule[k].lambda <= sup.schedule[k - 1].lambda + 1e-9);
    CHECK(check_supersolution(sup).all());
}

TEST_CASE("supercritical forms abort the construction") {
    const Grid g = line(63);
    CHECK_THROWS_AS(construct_supersolution(Problem{ConstantPotential{-50.0}}, g), Error);
}

TEST_CASE("verify_aap with h equal to the residual") {
    const Grid g = line(255);
    const Problem p{ConstantPotential{-5.0}};
    const Supersolution sup = construct_supersolution(p, g);
    const AssembledProblem ap = assemble_problem(p, g);
    GridFunction h = sup.residual;
    for (double& v : h.values) v = std::max(v, 0.0);
    Box kb;
    kb.sides[0] = {0.2, 0.8};
    const auto battery = default_battery(g, compact_mask(g, kb));
    const AapReport r = verify_aap(ap.form, sup, h, battery);
    CHECK(r.passed());
    CHECK(r.weighted_gap == doctest::Approx(1.0).epsilon(1e-6));
    const GridFunction zero(g, std::vector<double>(g.size(), 0.0));
    CHECK(verify_aap(ap.form, sup, zero, battery).passed());
    GridFunction too_big = h;
    too_big.values[100] *= 2.0;
    CHECK_THROWS_AS(verify_aap(ap.form, sup, too_big, battery), Error);
}

TEST_CASE("ground state transform equality case") {
    const Grid g = line(127);
    const Supersolution sup = construct_supersolution(Problem{ConstantPotential{0.0}}, g);
    const DiscreteForm a = laplacian_form(g, Mask::full(g));
    GridFunction f = sup.residual;
    for (double& v : f.values) v /= g.cell_volume();
    CHECK(std::abs(ground_state_transform(a, sup.u, f, sup.u)) <= 1e-10 * a.qv(sup.u.values));
}

TEST_CASE("ground state transform residual shrinks under refinement") {
    double prev = 0.0;
    for (std::int64_t n : {127, 255, 511}) {
        const Grid g = line(n);
        const DiscreteForm a = laplacian_form(g, Mask::full(g));
        const GridFunction u = GridFunction::sample(g, [](const Point& x) { return 1.0 + x[0] * (1 - x[0]); });
        Vec au = a.apply(u.values);
        // f = A u / cellvol makes u an exact discrete solution
        GridFunction f(g, au);
        for (double& v : f.values) v /= g.cell_volume();
        const GridFunction xi = GridFunction::sample(g, [](const Point& x) { return std::sin(3 * x[0]) * x[0] * (1 - x[0]); });
        const double r = std::abs(ground_state_transform(a, u, f, xi));
        double plain = a.qv(xi.values);
        for (std::size_t i = 0; i < g.size(); ++i) plain -= f.values[i] / u.values[i] * xi.values[i] * xi.values[i] * g.cell_volume();
        CHECK(plain >= -r);
        if (prev > 0.0) CHECK(r <= 0.5 * prev);
        prev = r;
    }
}

TEST_CASE("picone weight of the pair (1, x)") {
    const Grid g = line(255);
    const GridFunction one = GridFunction::sample(g, [](const Point&) { return 1.0; });
    const GridFunction x = GridFunction::sample(g, [](const Point& p) { return p[0]; });
    const GridFunction w = picone_improve(one, x);
    const double h = g.h(0);
    for (std::size_t i = 1; i < g.size(); ++i) {
        const double xi = g.coord(0, std::int64_t(i));
        const double exact = 0.25 / (xi * xi);
        CHECK(std::abs(w.values[i] - exact) / exact <= 4.0 * h * h / (xi * xi));
    }
    const ImprovementResult r = improvement_check(laplacian_form(g, Mask::full(g)), w);
    CHECK(r.improves);
    CHECK(r.gap >= 0.95);
}

TEST_CASE("picone invariances") {
    const Grid g = line(63);
    const GridFunction a = GridFunction::sample(g, [](const Point& p) { return 1.0 + p[0] * p[0]; });
    const GridFunction b = GridFunction::sample(g, [](const Point& p) { return std::exp(p[0]); });
    GridFunction b3 = b;
    for (double& v : b3.values) v *= 3.0;
    const GridFunction w1 = picone_improve(a, b), w2 = picone_improve(a, b3);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(w1.values[i] == doctest::Approx(w2.values[i]).epsilon(1e-12));
    const GridFunction same = picone_improve(a, a);
    for (double v : same.values) CHECK(v == 0.0);
    CHECK_THROWS_AS(improvement_check(laplacian_form(g, Mask::full(g)), same), Error);
    GridFunction neg = a;
    neg.values[3] = 0.0;
    CHECK_THROWS_AS(picone_improve(neg, b), Error);
}

TEST_CASE("supersolution export writes a sidecar") {
    const Grid g = line(31);
    const Supersolution sup = construct_supersolution(Problem{ConstantPotential{0.0}}, g);
    const auto path = std::filesystem::temp_directory_path() / "spectragap_sup_test.txt";
    export_supersolution(sup, path);
    CHECK(std::filesystem::exists(path.string() + ".meta.json"));
    const GridFunction back = read_grid_text(path);
    CHECK(back.values[5] == doctest::Approx(sup.u.values[5]).epsilon(1e-15));
}
