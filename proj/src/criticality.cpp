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
#include "spectragap/criticality.hpp"

#include <algorithm>
#include <cmath>

#include "spectragap/error.hpp"

namespace spectragap {

Mask domain_mask(const Grid& grid, const DomainShape& shape) {
    if (shape.kind == DomainShape::Kind::Box) return Mask::full(grid);
    require(shape.radius > 0.0, "domain ball radius must be positive");
    const int dim = grid.dim();
    Mask m = Mask::from_predicate(grid, [&](const Point& x) {
        double r2 = 0.0;
        for (int a = 0; a < dim; ++a) r2 += (x[a] - shape.center[a]) * (x[a] - shape.center[a]);
        return r2 < shape.radius * shape.radius;
    });
    require(!m.is_empty(), "domain ball contains no grid node");
    return m;
}

AssembledProblem assemble_problem(const Problem& problem, const Grid& grid, const EigenOptions& eig) {
    AssembledProblem out;
    out.field = eval_catalog(problem.potential, grid, problem.quad);
    out.domain = domain_mask(grid, problem.domain);
    out.shift = problem.shift;
    if (problem.shift_mode == ShiftMode::DiscretePrincipal) {
        const SpectralResult lap = principal_eig(laplacian_form(grid, out.domain), eig);
        if (!lap.converged) fail(ErrorKind::NotConverged, "discrete principal shift: Laplacian eigensolve failed");
        out.shift -= lap.value;
    }
    DiscreteForm f = assemble(grid, out.field, out.domain);
    out.form = out.shift != 0.0 ? f.shifted(out.shift) : std::move(f);
    return out;
}

Box default_K(const Grid& grid) {
    Box b;
    for (int a = 0; a < grid.dim(); ++a) {
        const auto& e = grid.extent(a);
        const double mid = 0.5 * (e.lo + e.hi), q = 0.25 * (e.hi - e.lo);
        b.sides[std::size_t(a)] = {mid - q, mid + q};
    }
    return b;
}

double witness_threshold(const DiscreteForm& form) {
    const Grid& g = form.grid();
    const double h = g.min_h();
    const double cv = g.cell_volume();
    double vmax = 0.0;
    const auto& pd = form.potential_diagonal();
    for (std::size_t i = 0; i < pd.size(); ++i)
        if (form.mask()[i]) vmax = std::max(vmax, std::abs(pd[i]) / cv);
    return 1e-8 * (2.0 * g.dim() / (h * h) + vmax);
}

std::optional<Witness> supercritical_witness(const DiscreteForm& form, const EigenOptions& eig) {
    const SpectralResult r = principal_eig(form, eig);
    if (!r.converged && r.value >= 0.0)
        fail(ErrorKind::NotConverged, "supercritical_witness: eigensolver budget exhausted");
    if (!(r.value < -witness_threshold(form))) return std::nullopt;
    const double q = form.qv(r.vector.values);
    if (!(q < 0.0)) return std::nullopt;
    return Witness{r.vector, q, r.value};
}

const char* verdict_name(VerdictTag t) {
    switch (t) {
        case VerdictTag::Supercritical:
            return "Supercritical";
        case VerdictTag::Subcritical:
            return "Subcritical";
        case VerdictTag::Critical:
            return "Critical";
        case VerdictTag::Inconclusive:
            return "Inconclusive";
    }
    return "Inconclusive";
}

std::optional<double> fit_rate(const std::vector<LevelRecord>& levels) {
    std::vector<double> lx, ly;
    for (const auto& l : levels) {
        if (!(std::abs(l.mu) > 0.0)) return std::nullopt;
        lx.push_back(std::log(l.h));
        ly.push_back(std::log(std::abs(l.mu)));
    }
    if (lx.size() < 2) return std::nullopt;
    const double n = double(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i] / n, my += ly[i] / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
    return sxy / sxx;
}

CriticalityVerdict classify(const Problem& problem, const Grid& base, const ClassifyOptions& opts) {
    require(opts.levels >= 3, "classify needs at least 3 refinement levels");
    require(opts.weight > 0.0, "classify: weight scale must be positive");
    CriticalityVerdict v;
    Grid grid = base;
    for (int level = 0; level < opts.levels; ++level) {
        if (level > 0) grid = refine(grid);
        AssembledProblem ap = assemble_problem(problem, grid, opts.eig);
        LevelRecord rec;
        rec.n = grid.n(0);
        rec.h = grid.min_h();
        rec.shift = ap.shift;
        rec.lambda_scale = box_laplacian_eigenvalue(grid);
        rec.eta = witness_threshold(ap.form);
        rec.K = compact_mask(grid, opts.K ? *opts.K : default_K(grid)) & ap.domain;
        require(!rec.K.is_empty(), "classify: K does not meet the domain");

        const SpectralResult eig = principal_eig(ap.form, opts.eig);
        rec.lambda = eig.value;
        rec.eig_converged = eig.converged;
        rec.eig_iterations = eig.iterations;
        rec.eig_residual = eig.residual;
        if (!eig.converged) {
            v.levels.push_back(std::move(rec));
            v.tag = VerdictTag::Inconclusive;
            v.reason = "eigensolver budget exhausted";
            return v;
        }

        if (eig.value < -rec.eta) {
            const double q = ap.form.qv(eig.vector.values);
            if (q < 0.0) {
                rec.witness = true;
                v.witness = Witness{eig.vector, q, eig.value};
            }
            // lambda is the quotient against unit weight; mu is quoted against w = weight * chi_K
            rec.mu = eig.value / opts.weight;
            rec.minimizer = eig.vector;
            rec.mu_normalized = eig.value;
            const bool definitive = std::abs(eig.value) > opts.critical_band * rec.lambda_scale * rec.h * rec.h;
            v.levels.push_back(std::move(rec));
            if (definitive && v.witness) {
                v.tag = VerdictTag::Supercritical;
                v.reason = "negative principal eigenvalue beyond the discretization band";
                return v;
            }
            continue;
        }

        const MassMatrix w = weighted_mass(grid, rec.K).scaled(opts.weight);
        const GapResult gap = weighted_gap(ap.form, w, opts.gap);
        rec.gap_indefinite = gap.indefinite;
        if (gap.indefinite) {
            rec.mu = eig.value / opts.weight;
            rec.minimizer = eig.vector;
        } else {
            rec.mu = gap.value;
            rec.minimizer = gap.minimizer;
        }
        rec.mu_normalized = rec.mu * opts.weight;
        v.levels.push_back(std::move(rec));
    }

    const std::vector<LevelRecord> tail(v.levels.end() - 3, v.levels.end());
    v.fitted_rate = fit_rate(tail);
    const LevelRecord& fine = v.levels.back();
    const double scale = fine.lambda_scale;

    const bool all_zero = std::all_of(tail.begin(), tail.end(), [&](const LevelRecord& l) {
        return std::abs(l.mu_normalized) <= opts.zero_gap * l.lambda_scale;
    });
    if (all_zero) {
        v.tag = VerdictTag::Critical;
        v.reason = "weighted gap vanishes at every level";
    } else if (v.fitted_rate && *v.fitted_rate >= opts.slope_critical &&
               std::abs(fine.mu_normalized) <= opts.critical_band * scale * fine.h * fine.h) {
        v.tag = VerdictTag::Critical;
        v.by_extrapolation = true;
        v.reason = std::string("gap decays like h^rate; finest-level sign ") + (fine.mu < 0.0 ? "negative" : "nonnegative");
    } else if (std::all_of(v.levels.begin(), v.levels.end(),
                           [&](const LevelRecord& l) { return l.mu_normalized >= opts.gap_threshold * l.lambda_scale; }) &&
               (!v.fitted_rate || *v.fitted_rate <= opts.slope_subcritical)) {
        v.tag = VerdictTag::Subcritical;
        v.reason = "weighted gap bounded away from zero under refinement";
    } else if (fine.witness) {
        v.tag = VerdictTag::Supercritical;
        v.reason = "finest level carries a negative-energy witness";
    } else {
        v.tag = VerdictTag::Inconclusive;
        v.reason = "gap history fits neither the critical nor the subcritical band";
    }
    if (v.tag == VerdictTag::Critical) {
        // the finest minimizer, normalized on K, is the last null-sequence member
        Witness last;
        last.xi = fine.minimizer;
        double l1 = 0.0;
        const double cv = last.xi.grid.cell_volume();
        for (std::size_t i = 0; i < last.xi.values.size(); ++i)
            if (fine.K[i]) l1 += std::abs(last.xi.values[i]) * cv;
        if (l1 > 0.0)
            for (double& x : last.xi.values) x /= l1;
        v.witness = std::move(last);
    } else if (v.tag != VerdictTag::Supercritical) {
        v.witness.reset();
    }
    return v;
}

NullSequenceEvidence null_sequence(const Problem& problem, const CriticalityVerdict& verdict) {
    if (verdict.tag != VerdictTag::Critical)
        fail(ErrorKind::InvalidArgument, "null_sequence: verdict is not Critical");
    NullSequenceEvidence ev;
    for (const auto& l : verdict.levels) {
        const Grid& g = l.minimizer.grid;
        AssembledProblem ap = assemble_problem(problem, g);
        GridFunction xi = l.minimizer;
        double l1 = 0.0;
        const double cv = g.cell_volume();
        for (std::size_t i = 0; i < xi.values.size(); ++i)
            if (l.K[i]) l1 += std::abs(xi.values[i]) * cv;
        require(l1 > 0.0, "null_sequence: minimizer vanishes on K");
        for (double& x : xi.values) x /= l1;
        ev.qv.push_back(ap.form.qv(xi.values));
        ev.members.push_back(std::move(xi));
        ev.K.push_back(l.K);
    }
    return ev;
}

}  // namespace spectragap
