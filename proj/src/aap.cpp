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
#include "spectragap/aap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "spectragap/error.hpp"

namespace spectragap {

namespace {

PotentialField truncated(const PotentialField& f, double n) {
    PotentialField out = f;
    if (std::isfinite(n))
        for (double& v : out.vminus) v = std::min(v, n);
    return out;
}

// Box of Omega_1 from its mask: per-axis min/max node coordinates.
void mask_box(const Grid& g, const Mask& m, Point& lo, Point& hi) {
    lo = {1e300, 1e300, 1e300};
    hi = {-1e300, -1e300, -1e300};
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!m[i]) continue;
        const Point x = g.node(i);
        for (int a = 0; a < g.dim(); ++a) lo[a] = std::min(lo[a], x[a]), hi[a] = std::max(hi[a], x[a]);
    }
}

}  // namespace

Supersolution construct_supersolution(const Problem& problem, const Grid& grid, const SupersolutionOptions& opts) {
    require(opts.m_levels >= 2, "construct_supersolution needs at least 2 exhaustion levels");
    for (std::size_t k = 0; k < opts.truncations.size(); ++k) {
        require(opts.truncations[k] > 0.0, "truncation levels must be positive");
        if (k > 0) require(opts.truncations[k] > opts.truncations[k - 1], "truncation schedule must increase");
    }
    AssembledProblem ap = assemble_problem(problem, grid, opts.eig);
    const std::vector<Mask> ex = exhaustion(grid, opts.m_levels);
    const double tol = witness_threshold(ap.form);

    std::vector<Mask> omegas;
    for (const Mask& m : ex) {
        Mask om = m & ap.domain;
        if (ap.field.has_exclusions()) om = om & ~Mask(grid, ap.field.excluded);
        if (!om.is_empty()) omegas.push_back(std::move(om));
    }
    require(!omegas.empty(), "construct_supersolution: exhaustion does not meet the domain");
    const Mask& omega1 = omegas.front();

    Supersolution sup;
    Point lo, hi;
    mask_box(grid, omega1, lo, hi);
    double half = 1e300;
    for (int a = 0; a < grid.dim(); ++a) {
        sup.ball.center[a] = 0.5 * (lo[a] + hi[a]);
        half = std::min(half, 0.5 * (hi[a] - lo[a]));
    }
    sup.ball.radius = 0.5 * half;
    std::vector<std::size_t> b0;
    std::size_t nearest = 0;
    double best = 1e300;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!omega1[i]) continue;
        const Point x = grid.node(i);
        double r2 = 0.0;
        for (int a = 0; a < grid.dim(); ++a) r2 += (x[a] - sup.ball.center[a]) * (x[a] - sup.ball.center[a]);
        if (r2 <= sup.ball.radius * sup.ball.radius) b0.push_back(i);
        if (r2 < best) best = r2, nearest = i;
    }
    if (b0.empty()) b0.push_back(nearest);
    sup.ball.nodes = b0.size();

    auto normalize = [&](Vec& u) {
        double m = 1e300;
        for (std::size_t i : b0) m = std::min(m, u[i]);
        if (!(m > 0.0)) fail(ErrorKind::NotConverged, "construct_supersolution: eigenfunction vanishes on the normalization ball");
        for (double& x : u) x /= m;
    };

    struct Plan {
        int m;
        double n;
        const Mask* mask;
    };
    std::vector<Plan> plan;
    for (std::size_t k = 0; k < omegas.size(); ++k)
        for (double n : opts.truncations) plan.push_back({int(k + 1), n, &omegas[k]});
    const Mask full = ap.domain & (ap.field.has_exclusions() ? ~Mask(grid, ap.field.excluded) : Mask::full(grid));
    plan.push_back({int(omegas.size()), std::numeric_limits<double>::infinity(), &full});

    Vec prev;
    Vec u;
    DiscreteForm last_form;
    for (std::size_t s = 0; s < plan.size(); ++s) {
        const bool final_step = s + 1 == plan.size();
        const PotentialField pf = truncated(ap.field, plan[s].n);
        DiscreteForm f = assemble(grid, pf, *plan[s].mask);
        if (ap.shift != 0.0) f = f.shifted(ap.shift);
        const SpectralResult r = principal_eig(f, opts.eig);
        Supersolution::Step step{plan[s].m, plan[s].n, r.value, r.iterations, r.converged, 0.0};
        if (!r.converged) {
            sup.schedule.push_back(step);
            if (final_step) fail(ErrorKind::NotConverged, "construct_supersolution: eigensolver failed on the final level");
            continue;
        }
        if (r.value < -tol)
            fail(ErrorKind::Indefinite, "construct_supersolution: negative principal eigenvalue " + std::to_string(r.value) +
                                            " at m=" + std::to_string(plan[s].m) +
                                            " contradicts nonnegativity (the form is supercritical)");
        Vec cur = r.vector.values;
        normalize(cur);
        if (!prev.empty()) {
            double d = 0.0, m = 0.0;
            for (std::size_t i = 0; i < cur.size(); ++i)
                if (omega1[i]) d = std::max(d, std::abs(cur[i] - prev[i])), m = std::max(m, std::abs(cur[i]));
            step.change = m > 0.0 ? d / m : 0.0;
        }
        sup.schedule.push_back(step);
        prev = cur;
        if (final_step) {
            u = std::move(cur);
            last_form = std::move(f);
        } else if (!sup.schedule.empty() && sup.schedule.size() >= 2 && step.change > 0.0 && step.change < opts.change_tol) {
            // settled on Omega_1: jump to the untruncated full-domain level
            s = plan.size() - 2;
        }
    }

    // nodes outside the final mask carry zero; positivity is asserted on the mask
    const Mask& mask = last_form.mask();
    for (std::size_t i = 0; i < u.size(); ++i)
        if (!mask[i]) u[i] = 0.0;
    Vec mu = last_form.apply(u);
    double umax = 0.0, dmax = 0.0;
    const Vec d = last_form.diagonal();
    for (std::size_t i = 0; i < u.size(); ++i)
        if (mask[i]) umax = std::max(umax, u[i]), dmax = std::max(dmax, std::abs(d[i]));
    sup.residual_scale = dmax * umax;
    sup.residual_min = 1e300;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (mask[i]) sup.residual_min = std::min(sup.residual_min, mu[i]);
    double bmin = 1e300;
    for (std::size_t i : b0) bmin = std::min(bmin, u[i]);
    sup.ball.min_value = bmin;
    sup.lambda_tol = tol;
    sup.mask = mask;
    sup.u = GridFunction(grid, std::move(u));
    sup.residual = GridFunction(grid, std::move(mu));
    return sup;
}

SupersolutionCheck check_supersolution(const Supersolution& sup, double residual_rel_tol) {
    SupersolutionCheck c;
    c.min_u = 1e300;
    for (std::size_t i = 0; i < sup.u.values.size(); ++i)
        if (sup.mask[i]) c.min_u = std::min(c.min_u, sup.u.values[i]);
    c.positive = c.min_u > 0.0;
    c.normalized = std::abs(sup.ball.min_value - 1.0) <= 1e-12;
    c.residual_ok = sup.residual_min >= -residual_rel_tol * sup.residual_scale;
    return c;
}

void export_supersolution(const Supersolution& sup, const std::filesystem::path& path) {
    write_grid_text(sup.u, path);
    nlohmann::ordered_json meta;
    meta["ball"] = {{"center", std::vector<double>(sup.ball.center.begin(), sup.ball.center.begin() + sup.u.grid.dim())},
                    {"radius", sup.ball.radius},
                    {"nodes", sup.ball.nodes},
                    {"min_u", sup.ball.min_value}};
    meta["residual_min"] = sup.residual_min;
    meta["residual_scale"] = sup.residual_scale;
    nlohmann::ordered_json steps = nlohmann::ordered_json::array();
    for (const auto& s : sup.schedule)
        steps.push_back({{"m", s.m},
                         {"n", std::isfinite(s.n) ? nlohmann::ordered_json(s.n) : nlohmann::ordered_json("inf")},
                         {"lambda", s.lambda},
                         {"converged", s.converged},
                         {"change", s.change}});
    meta["schedule"] = steps;
    std::filesystem::path side = path;
    side += ".meta.json";
    std::ofstream os(side);
    if (!os) fail(ErrorKind::Io, "cannot write " + side.string());
    os << meta.dump(2) << '\n';
}

AapReport verify_aap(const DiscreteForm& form, const Supersolution& sup, const GridFunction& h,
                     std::span<const GridFunction> battery) {
    const Grid& g = form.grid();
    if (h.grid != g || sup.u.grid != g) fail(ErrorKind::ShapeMismatch, "verify_aap: inputs on different grids");
    const Mask& mask = form.mask();
    const double cv = g.cell_volume();
    const double slack = 1e-12 * std::max(1.0, sup.residual_scale);
    std::vector<double> w(g.size(), 0.0);
    bool any = false;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!mask[i]) continue;
        if (!(h.values[i] >= 0.0)) fail(ErrorKind::InvalidArgument, "verify_aap: h must be nonnegative");
        if (h.values[i] > sup.residual.values[i] + slack)
            fail(ErrorKind::InvalidArgument, "verify_aap: h exceeds the residual measure at node " + std::to_string(i));
        if (!(sup.u.values[i] > 0.0)) fail(ErrorKind::InvalidArgument, "verify_aap: supersolution is not positive");
        w[i] = h.values[i] / (sup.u.values[i] * cv);
        any = any || w[i] > 0.0;
    }

    AapReport rep;
    rep.battery_size = battery.size();
    rep.battery_min_margin = std::numeric_limits<double>::infinity();
    for (const GridFunction& xi : battery) {
        const double q = form.qv(xi.values);
        double rhs = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
            if (mask[i]) rhs += w[i] * xi.values[i] * xi.values[i] * cv;
        const double margin = (q - rhs) / std::max({std::abs(q), rhs, 1e-300});
        rep.battery_min_margin = std::min(rep.battery_min_margin, margin);
    }
    rep.battery_ok = battery.empty() || rep.battery_min_margin >= -1e-9;
    if (!any) {
        rep.gap_ok = true;
        return rep;
    }
    const GapResult gap = weighted_gap(form, weighted_mass(g, GridFunction(g, w)));
    rep.weighted_gap = gap.indefinite ? 0.0 : gap.value;
    rep.gap_ok = rep.weighted_gap >= 0.95;
    return rep;
}

double ground_state_transform(const DiscreteForm& form, const GridFunction& u, const GridFunction& f,
                              const GridFunction& xi) {
    const Grid& g = form.grid();
    if (u.grid != g || f.grid != g || xi.grid != g) fail(ErrorKind::ShapeMismatch, "ground_state_transform: grid mismatch");
    const Mask& mask = form.mask();
    const double cv = g.cell_volume();
    for (std::size_t i = 0; i < g.size(); ++i)
        if (mask[i] && !(u.values[i] > 0.0)) fail(ErrorKind::InvalidArgument, "ground_state_transform: u must be positive");

    double potential = 0.0, gauge = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!mask[i]) continue;
        const double ui = u.values[i], xii = xi.values[i], ri = xii / ui;
        potential += f.values[i] / ui * xii * xii * cv;
        const auto mi = g.multi_index(i);
        for (int a = 0; a < g.dim(); ++a) {
            const double h = g.h(a);
            const std::size_t s = g.stride(a);
            const bool has_next = mi[a] + 1 < g.n(a) && mask[i + s];
            const bool has_prev = mi[a] > 0 && mask[i - s];
            if (has_next) {
                const double uj = u.values[i + s], xj = xi.values[i + s];
                const double r = 0.5 * (ri + xj / uj);
                const double d = (xj - xii) / h - r * (uj - ui) / h;
                gauge += d * d * cv;
            } else {
                // face to the Dirichlet boundary: u and xi vanish outside, ratio taken one-sided
                const double d = -xii / h + ri * ui / h;
                gauge += d * d * cv;
            }
            if (!has_prev) {
                const double d = xii / h - ri * ui / h;
                gauge += d * d * cv;
            }
        }
    }
    return form.qv(xi.values) - potential - gauge;
}

GridFunction picone_improve(const GridFunction& u1, const GridFunction& u2) {
    const Grid& g = u1.grid;
    if (u2.grid != g) fail(ErrorKind::ShapeMismatch, "picone_improve: inputs on different grids");
    for (std::size_t i = 0; i < g.size(); ++i)
        if (!(u1.values[i] > 0.0) || !(u2.values[i] > 0.0))
            fail(ErrorKind::InvalidArgument, "picone_improve: inputs must be positive");
    // quotient on the face between i and i + s
    auto face = [&](std::size_t i, std::size_t s, double h) {
        const double a1 = u1.values[i], b1 = u1.values[i + s], a2 = u2.values[i], b2 = u2.values[i + s];
        return (b1 - a1) / (h * 0.5 * (a1 + b1)) - (b2 - a2) / (h * 0.5 * (a2 + b2));
    };
    std::vector<double> w(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto mi = g.multi_index(i);
        double sum = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
            const std::int64_t n = g.n(a);
            if (n < 2) continue;
            const std::size_t s = g.stride(a);
            const double h = g.h(a);
            double q;
            if (mi[a] > 0 && mi[a] + 1 < n) {
                q = 0.5 * (face(i - s, s, h) + face(i, s, h));
            } else if (n < 3) {
                q = mi[a] == 0 ? face(i, s, h) : face(i - s, s, h);
            } else if (mi[a] == 0) {
                q = 1.5 * face(i, s, h) - 0.5 * face(i + s, s, h);
            } else {
                q = 1.5 * face(i - s, s, h) - 0.5 * face(i - 2 * s, s, h);
            }
            sum += q * q;
        }
        w[i] = 0.25 * sum;
    }
    return GridFunction(g, std::move(w));
}

ImprovementResult improvement_check(const DiscreteForm& form, const GridFunction& w) {
    if (w.grid != form.grid()) fail(ErrorKind::ShapeMismatch, "improvement_check: weight on a different grid");
    bool any = false;
    for (std::size_t i = 0; i < w.values.size(); ++i) {
        if (!(w.values[i] >= 0.0)) fail(ErrorKind::InvalidArgument, "improvement_check: weight must be nonnegative");
        any = any || (form.mask()[i] && w.values[i] > 0.0);
    }
    if (!any) fail(ErrorKind::InvalidArgument, "improvement_check: w vanishes identically (vacuous improvement)");
    const GapResult gap = weighted_gap(form, weighted_mass(form.grid(), w));
    ImprovementResult r;
    r.gap = gap.indefinite ? 0.0 : gap.value;
    r.improves = r.gap >= 0.95;
    return r;
}

}  // namespace spectragap
