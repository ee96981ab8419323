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

#include <algorithm>
#include <cmath>

#include "spectragap/error.hpp"

namespace spectragap {

namespace {

void check_length(const Grid& g, std::size_t len, const char* what) {
    if (len != g.size())
        fail(ErrorKind::ShapeMismatch, std::string(what) + ": vector length " + std::to_string(len) +
                                           " does not match grid size " + std::to_string(g.size()));
}

// Calls body(line_start, n0) for every axis-0 line [i1, i2] in [first, last).
template <class Body>
void for_lines(const Grid& g, std::size_t first, std::size_t last, Body&& body) {
    const std::size_t n0 = std::size_t(g.n(0));
    for (std::size_t line = first; line < last; ++line) body(line * n0, n0);
}

std::size_t line_count(const Grid& g) { return g.size() / std::size_t(g.n(0)); }

}  // namespace

DiscreteForm::DiscreteForm(const Grid& grid, Mask mask, std::vector<double> potential_diag)
    : grid_(grid), mask_(std::move(mask)), pot_(std::move(potential_diag)) {
    check_length(grid_, mask_.size(), "form mask");
    check_length(grid_, pot_.size(), "form potential");
    require(!mask_.is_empty(), "form mask is empty");
    for (int a = 0; a < grid_.dim(); ++a) inv_h2_[a] = 1.0 / (grid_.h(a) * grid_.h(a));
}

void DiscreteForm::apply(std::span<const double> x, std::span<double> y) const {
    check_length(grid_, x.size(), "form apply");
    check_length(grid_, y.size(), "form apply");
    const double cv = grid_.cell_volume();
    const int dim = grid_.dim();
    const auto& bits = mask_.bits();
    parallel_for(
        line_count(grid_),
        [&](std::size_t lb, std::size_t le) {
            for (std::size_t line = lb; line < le; ++line) {
                const std::size_t n0 = std::size_t(grid_.n(0));
                const std::size_t start = line * n0;
                const auto mi = grid_.multi_index(start);
                for (std::size_t i0 = 0; i0 < n0; ++i0) {
                    const std::size_t i = start + i0;
                    if (!bits[i]) {
                        y[i] = 0.0;
                        continue;
                    }
                    double acc = 0.0;
                    for (int a = 0; a < dim; ++a) {
                        const std::int64_t ia = a == 0 ? std::int64_t(i0) : mi[a];
                        const std::size_t s = grid_.stride(a);
                        double lap = 2.0 * x[i];
                        if (ia > 0 && bits[i - s]) lap -= x[i - s];
                        if (ia + 1 < grid_.n(a) && bits[i + s]) lap -= x[i + s];
                        acc += inv_h2_[a] * lap;
                    }
                    y[i] = cv * acc + pot_[i] * x[i];
                }
            }
        },
        std::max<std::size_t>(1, 4096 / std::size_t(grid_.n(0))));
}

Vec DiscreteForm::apply(std::span<const double> x) const {
    Vec y(x.size());
    apply(x, y);
    return y;
}

double DiscreteForm::stiffness(std::span<const double> x) const {
    check_length(grid_, x.size(), "form stiffness");
    const double cv = grid_.cell_volume();
    const int dim = grid_.dim();
    const auto& bits = mask_.bits();
    double sum = 0.0;
    for_lines(grid_, 0, line_count(grid_), [&](std::size_t start, std::size_t n0) {
        const auto mi = grid_.multi_index(start);
        for (std::size_t i0 = 0; i0 < n0; ++i0) {
            const std::size_t i = start + i0;
            if (!bits[i]) continue;
            for (int a = 0; a < dim; ++a) {
                const std::int64_t ia = a == 0 ? std::int64_t(i0) : mi[a];
                const std::size_t s = grid_.stride(a);
                const bool has_next = ia + 1 < grid_.n(a) && bits[i + s];
                const bool has_prev = ia > 0 && bits[i - s];
                const double d = has_next ? x[i] - x[i + s] : x[i];
                sum += inv_h2_[a] * d * d;
                if (!has_prev) sum += inv_h2_[a] * x[i] * x[i];
            }
        }
    });
    return cv * sum;
}

double DiscreteForm::qv(std::span<const double> x) const {
    double pot = 0.0;
    const auto& bits = mask_.bits();
    for (std::size_t i = 0; i < x.size(); ++i)
        if (bits[i]) pot += pot_[i] * x[i] * x[i];
    return stiffness(x) + pot;
}

double DiscreteForm::bilinear(std::span<const double> x, std::span<const double> y) const {
    check_length(grid_, x.size(), "form bilinear");
    const Vec ay = apply(y);
    const auto& bits = mask_.bits();
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (bits[i]) s += x[i] * ay[i];
    return s;
}

Vec DiscreteForm::diagonal() const {
    Vec d(grid_.size(), 0.0);
    double lap = 0.0;
    for (int a = 0; a < grid_.dim(); ++a) lap += 2.0 * inv_h2_[a];
    lap *= grid_.cell_volume();
    for (std::size_t i = 0; i < d.size(); ++i)
        if (mask_[i]) d[i] = lap + pot_[i];
    return d;
}

double DiscreteForm::norm_bound() const {
    double lap = 0.0;
    for (int a = 0; a < grid_.dim(); ++a) lap += 4.0 * inv_h2_[a];
    lap *= grid_.cell_volume();
    double m = 0.0;
    for (std::size_t i = 0; i < pot_.size(); ++i)
        if (mask_[i]) m = std::max(m, std::abs(pot_[i]));
    return lap + m;
}

DiscreteForm DiscreteForm::shifted(double c) const {
    std::vector<double> p = pot_;
    const double cv = grid_.cell_volume();
    for (double& v : p) v += c * cv;
    return DiscreteForm(grid_, mask_, std::move(p));
}

DiscreteForm DiscreteForm::plus_potential(std::span<const double> extra) const {
    check_length(grid_, extra.size(), "form plus_potential");
    std::vector<double> p = pot_;
    const double cv = grid_.cell_volume();
    for (std::size_t i = 0; i < p.size(); ++i) p[i] += extra[i] * cv;
    return DiscreteForm(grid_, mask_, std::move(p));
}

DiscreteForm DiscreteForm::restricted(const Mask& sub) const {
    check_length(grid_, sub.size(), "form restriction");
    return DiscreteForm(grid_, mask_ & sub, pot_);
}

double MassMatrix::inner(std::span<const double> x, std::span<const double> y) const {
    check_length(grid, x.size(), "mass inner");
    double s = 0.0;
    for (std::size_t i = 0; i < diag.size(); ++i) s += diag[i] * x[i] * y[i];
    return s;
}

void MassMatrix::apply(std::span<const double> x, std::span<double> y) const {
    check_length(grid, x.size(), "mass apply");
    for (std::size_t i = 0; i < diag.size(); ++i) y[i] = diag[i] * x[i];
}

MassMatrix MassMatrix::scaled(double t) const {
    require(t > 0.0, "mass scaling must be positive");
    MassMatrix m = *this;
    for (double& v : m.diag) v *= t;
    return m;
}

DiscreteForm assemble(const Grid& grid, const PotentialField& field, const Mask& mask) {
    if (field.grid != grid) fail(ErrorKind::ShapeMismatch, "assemble: potential lives on a different grid");
    check_length(grid, mask.size(), "assemble mask");
    Mask active = mask;
    if (field.has_exclusions()) active = active & ~Mask(grid, field.excluded);
    require(!active.is_empty(), "assemble: mask is empty");
    std::vector<double> pot(grid.size());
    const double cv = grid.cell_volume();
    for (std::size_t i = 0; i < pot.size(); ++i) pot[i] = field.value(i) * cv;
    return DiscreteForm(grid, std::move(active), std::move(pot));
}

DiscreteForm assemble(const Grid& grid, const PotentialField& field) {
    return assemble(grid, field, Mask::full(grid));
}

DiscreteForm laplacian_form(const Grid& grid, const Mask& mask) {
    return DiscreteForm(grid, mask, std::vector<double>(grid.size(), 0.0));
}

double qv(const DiscreteForm& form, const GridFunction& xi) {
    if (xi.grid != form.grid()) fail(ErrorKind::ShapeMismatch, "qv: function lives on a different grid");
    return form.qv(xi.values);
}

MassMatrix weighted_mass(const Grid& grid, const GridFunction& w) {
    if (w.grid != grid) fail(ErrorKind::ShapeMismatch, "weighted_mass: weight lives on a different grid");
    std::vector<std::uint8_t> support(grid.size());
    std::vector<double> diag(grid.size());
    const double cv = grid.cell_volume();
    for (std::size_t i = 0; i < diag.size(); ++i) {
        const double wi = w.values[i];
        if (!(wi >= 0.0) || !std::isfinite(wi))
            fail(ErrorKind::InvalidArgument, "weighted_mass: weight must be finite and nonnegative");
        diag[i] = wi * cv;
        support[i] = wi > 0.0 ? 1 : 0;
    }
    return MassMatrix{grid, std::move(diag), Mask(grid, std::move(support))};
}

MassMatrix weighted_mass(const Grid& grid, const Mask& indicator) {
    check_length(grid, indicator.size(), "weighted_mass indicator");
    std::vector<double> diag(grid.size(), 0.0);
    const double cv = grid.cell_volume();
    for (std::size_t i = 0; i < diag.size(); ++i)
        if (indicator[i]) diag[i] = cv;
    return MassMatrix{grid, std::move(diag), indicator};
}

MassMatrix lumped_mass(const Grid& grid, const Mask& mask) { return weighted_mass(grid, mask); }

MagneticResidual magnetic_identity_check(const VectorSamples& F, const GridFunction& xi) {
    const Grid& g = xi.grid;
    if (F.grid != g) fail(ErrorKind::ShapeMismatch, "magnetic_identity_check: field and function grids differ");
    for (std::size_t c : F.singular_cells)
        if (xi.values[c] != 0.0)
            fail(ErrorKind::InvalidArgument, "magnetic_identity_check: test function touches a singular cell");

    const PotentialField v0 = divergence_form(F);
    const DiscreteForm form = assemble(g, v0);

    const double cv = g.cell_volume();
    double gauge = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto mi = g.multi_index(i);
        for (int a = 0; a < g.dim(); ++a) {
            const double h = g.h(a);
            const std::size_t s = g.stride(a);
            const double fx_i = F.comp[a][i] * xi.values[i];
            // forward face (to the boundary when i is the last node)
            double xj = 0.0, fx_j = 0.0;
            if (mi[a] + 1 < g.n(a)) {
                xj = xi.values[i + s];
                fx_j = F.comp[a][i + s] * xj;
            }
            const double d = (xj - xi.values[i]) / h - 0.5 * (fx_i + fx_j);
            gauge += d * d * cv;
            if (mi[a] == 0) {
                const double d0 = xi.values[i] / h - 0.5 * fx_i;
                gauge += d0 * d0 * cv;
            }
        }
    }
    MagneticResidual r;
    r.form_value = form.qv(xi.values);
    r.gauge_energy = gauge;
    r.residual = std::abs(r.form_value - r.gauge_energy);
    return r;
}

}  // namespace spectragap
