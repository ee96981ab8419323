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
#include "property_suites.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "spectragap/capacity.hpp"
#include "spectragap/criticality.hpp"
#include "spectragap/solver.hpp"
#include "spectragap/spectral.hpp"

namespace spectragap::props {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
std::int64_t pick(Rng& rng, std::int64_t a, std::int64_t b) { return std::uniform_int_distribution<std::int64_t>(a, b)(rng); }

Grid random_grid(Rng& rng, int max_dim, std::int64_t lo, std::int64_t hi) {
    const int dim = int(pick(rng, 1, max_dim));
    std::vector<Interval> e;
    std::vector<std::int64_t> n;
    const std::int64_t cap = dim == 3 ? std::min<std::int64_t>(hi, 9) : (dim == 2 ? std::min<std::int64_t>(hi, 23) : hi);
    for (int a = 0; a < dim; ++a) {
        const double l = uniform(rng, -1.0, 0.0);
        e.push_back({l, l + uniform(rng, 0.5, 2.0)});
        n.push_back(pick(rng, lo, std::max(lo, cap)));
    }
    return build_grid(dim, e, n);
}

struct IndexBox {
    std::array<std::int64_t, 3> lo{0, 0, 0}, hi{0, 0, 0};
};

IndexBox random_index_box(Rng& rng, const Grid& g) {
    IndexBox b;
    for (int a = 0; a < g.dim(); ++a) {
        std::int64_t i = pick(rng, 0, g.n(a) - 1), j = pick(rng, 0, g.n(a) - 1);
        if (i > j) std::swap(i, j);
        b.lo[std::size_t(a)] = i;
        b.hi[std::size_t(a)] = j;
    }
    return b;
}

Box to_box(const Grid& g, const IndexBox& ib) {
    Box b;
    for (int a = 0; a < g.dim(); ++a)
        b.sides[std::size_t(a)] = {g.coord(a, ib.lo[std::size_t(a)]) - 0.25 * g.h(a),
                                   g.coord(a, ib.hi[std::size_t(a)]) + 0.25 * g.h(a)};
    return b;
}

Box random_box(Rng& rng, const Grid& g) { return to_box(g, random_index_box(rng, g)); }

std::vector<double> random_vector(Rng& rng, std::size_t n, double a, double b) {
    std::vector<double> v(n);
    for (double& x : v) x = uniform(rng, a, b);
    return v;
}

Mask random_mask(Rng& rng, const Grid& g, double keep) {
    std::vector<std::uint8_t> bits(g.size());
    std::bernoulli_distribution coin(keep);
    for (auto& b : bits) b = coin(rng) ? 1 : 0;
    bits[std::size_t(pick(rng, 0, std::int64_t(g.size()) - 1))] = 1;
    return Mask(g, std::move(bits));
}

class Suite {
public:
    explicit Suite(std::string name) : t0_(std::chrono::steady_clock::now()) { r_.name = std::move(name); }
    void record(bool ok, const std::string& detail) {
        ++r_.cases;
        if (!ok) {
            if (r_.failures++ == 0) r_.first_failure = "case " + std::to_string(r_.cases - 1) + ": " + detail;
        }
    }
    SuiteResult finish() {
        r_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
        return r_;
    }

private:
    SuiteResult r_;
    std::chrono::steady_clock::time_point t0_;
};

std::string fmt(const char* what, double a, double b) {
    std::ostringstream os;
    os.precision(17);
    os << what << " " << a << " vs " << b;
    return os.str();
}

}  // namespace

SuiteResult form_symmetry(std::size_t cases, std::uint64_t seed) {
    Suite s("form symmetry");
    Rng rng(seed);
    for (std::size_t c = 0; c < cases; ++c) {
        const Grid g = random_grid(rng, 3, 1, 40);
        const auto pot = random_vector(rng, g.size(), -50.0, 50.0);
        const DiscreteForm f(g, random_mask(rng, g, 0.8), pot);
        const auto x = random_vector(rng, g.size(), -1.0, 1.0), y = random_vector(rng, g.size(), -1.0, 1.0);
        const double xy = f.bilinear(x, y), yx = f.bilinear(y, x);
        const double scale = f.norm_bound() * std::sqrt(dot(x, x) * dot(y, y));
        const double q = f.qv(x), xax = f.bilinear(x, x);
        const bool ok = std::abs(xy - yx) <= 1e-13 * scale && std::abs(q - xax) <= 1e-13 * f.norm_bound() * dot(x, x);
        s.record(ok, fmt("x^T A y, y^T A x", xy, yx));
    }
    return s.finish();
}

SuiteResult potential_monotonicity(std::size_t cases, std::uint64_t seed) {
    Suite s("V-monotonicity of qv");
    Rng rng(seed);
    for (std::size_t c = 0; c < cases; ++c) {
        const Grid g = random_grid(rng, 3, 1, 40);
        const Mask m = random_mask(rng, g, 0.9);
        const auto v1 = random_vector(rng, g.size(), -20.0, 20.0);
        std::vector<double> v2 = v1;
        for (double& v : v2) v += uniform(rng, 0.0, 5.0);
        const PotentialField f1 = PotentialField::from_values(g, v1), f2 = PotentialField::from_values(g, v2);
        const DiscreteForm a1 = assemble(g, f1, m), a2 = assemble(g, f2, m);
        const auto xi = random_vector(rng, g.size(), -1.0, 1.0);
        const double q1 = a1.qv(xi), q2 = a2.qv(xi);
        s.record(q1 <= q2 + 1e-12 * std::abs(q2), fmt("qv(V1), qv(V2)", q1, q2));
    }
    return s.finish();
}

SuiteResult mask_monotonicity(std::size_t cases, std::uint64_t seed) {
    Suite s("mask monotonicity of lambda_1");
    Rng rng(seed);
    for (std::size_t c = 0; c < cases; ++c) {
        const Grid g = random_grid(rng, 2, 4, 31);
        const GridFunction v = GridFunction::sample(g, [&, a = uniform(rng, -10, 10), b = uniform(rng, 0, 6)](const Point& x) {
            return a * std::cos(b * x[0]) + (g.dim() > 1 ? a * std::sin(b * x[1]) : 0.0);
        });
        const PotentialField field = PotentialField::from_values(g, v.values);
        const IndexBox big = random_index_box(rng, g);
        IndexBox small = big;
        for (int a = 0; a < g.dim(); ++a) {
            const std::size_t k = std::size_t(a);
            small.lo[k] = pick(rng, big.lo[k], big.hi[k]);
            small.hi[k] = pick(rng, small.lo[k], big.hi[k]);
        }
        const Mask mb = compact_mask(g, to_box(g, big)), ms = compact_mask(g, to_box(g, small));
        const SpectralResult lb = principal_eig(assemble(g, field, mb)), ls = principal_eig(assemble(g, field, ms));
        const double tol = 1e-7 * (std::abs(lb.value) + std::abs(ls.value) + 1.0);
        s.record(lb.converged && ls.converged && lb.value <= ls.value + tol, fmt("lambda(big), lambda(small)", lb.value, ls.value));
    }
    return s.finish();
}

SuiteResult capacity_monotonicity(std::size_t cases, std::uint64_t seed) {
    Suite s("capacity monotonicity and subadditivity");
    Rng rng(seed);
    for (std::size_t c = 0; c < cases; ++c) {
        const Grid g = random_grid(rng, 2, 4, 40);
        const Mask k1 = compact_mask(g, random_box(rng, g)), k2 = compact_mask(g, random_box(rng, g));
        const Mask u = k1 | k2;
        const double c1 = cap(g, k1).value, c2 = cap(g, k2).value, cu = cap(g, u).value;
        const double tol = 1e-8 * cu;
        const bool mono = c1 <= cu + tol && c2 <= cu + tol;
        const bool sub = cu <= c1 + c2 + tol;
        s.record(mono && sub, fmt("cap(K1 u K2), cap(K1) + cap(K2)", cu, c1 + c2));
    }
    return s.finish();
}

SuiteResult obstacle_complementarity(std::size_t cases, std::uint64_t seed) {
    Suite s("obstacle complementarity");
    Rng rng(seed);
    for (std::size_t c = 0; c < cases; ++c) {
        const Grid g = random_grid(rng, 2, 2, 40);
        const DiscreteForm A(g, Mask::full(g), random_vector(rng, g.size(), 0.0, 5.0 * g.cell_volume()));
        GridFunction lower(g, kNoObstacle);
        std::bernoulli_distribution coin(0.3);
        for (double& l : lower.values)
            if (coin(rng)) l = uniform(rng, -0.5, 1.0);
        lower.values[std::size_t(pick(rng, 0, std::int64_t(g.size()) - 1))] = uniform(rng, 0.1, 1.0);
        ObstacleOptions opts;
        opts.warm_start = c % 2 == 0;
        const ObstacleResult r = obstacle_solve(A, lower, opts);
        bool feasible = true;
        for (std::size_t i = 0; i < g.size(); ++i) feasible = feasible && r.xi.values[i] >= lower.values[i] - 1e-12;
        bool energy = true;
        for (std::size_t k = 1; k < r.energy_history.size(); ++k)
            energy = energy && r.energy_history[k] <= r.energy_history[k - 1] * (1 + 1e-12) + 1e-14;
        s.record(feasible && energy && r.complementarity <= 1e-8,
                 fmt("complementarity, bound", r.complementarity, 1e-8) + (feasible ? "" : " infeasible") +
                     (energy ? "" : " energy increased"));
    }
    return s.finish();
}

SuiteResult weight_scaling(std::size_t cases, std::uint64_t seed) {
    Suite s("verdict weight-scaling invariance");
    Rng rng(seed);
    const Interval e[] = {{0.0, 1.0}};
    for (std::size_t c = 0; c < cases; ++c) {
        const std::int64_t n[] = {pick(rng, 7, 15)};
        const Grid g = build_grid(1, e, n);
        Problem p;
        const int mode = int(pick(rng, 0, 2));
        // random constant well, exact deflation, or the fixed continuum shift -pi^2
        p.potential = ConstantPotential{mode == 0 ? uniform(rng, -12.0, 10.0) : 0.0};
        if (mode == 1) p.shift_mode = ShiftMode::DiscretePrincipal;
        if (mode == 2) p.shift = -M_PI * M_PI;
        ClassifyOptions o;
        o.K = random_box(rng, g);
        const double t = std::exp(uniform(rng, std::log(1e-3), std::log(1e3)));
        const CriticalityVerdict a = classify(p, g, o);
        o.weight = t;
        const CriticalityVerdict b = classify(p, g, o);
        bool ok = a.tag == b.tag && a.levels.size() == b.levels.size();
        for (std::size_t l = 0; ok && l < a.levels.size(); ++l) {
            const double ma = a.levels[l].mu, mb = b.levels[l].mu;
            ok = std::abs(mb * t - ma) <= 1e-6 * std::abs(ma) + 1e-9 * a.levels[l].lambda_scale;
        }
        s.record(ok, std::string(verdict_name(a.tag)) + " vs " + verdict_name(b.tag) + fmt(", t", t, 1.0));
    }
    return s.finish();
}

std::vector<SuiteResult> run_all(std::size_t cases, std::uint64_t seed) {
    return {form_symmetry(cases, seed),          potential_monotonicity(cases, seed + 1),
            mask_monotonicity(cases, seed + 2),  capacity_monotonicity(cases, seed + 3),
            obstacle_complementarity(cases, seed + 4), weight_scaling(cases, seed + 5)};
}

}  // namespace spectragap::props
