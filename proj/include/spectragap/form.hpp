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

#pragma once

#include <span>
#include <vector>

#include "spectragap/mesh.hpp"
#include "spectragap/potential.hpp"
#include "spectragap/vec.hpp"

namespace spectragap {

/**
 * @brief Matrix-free quadratic form
 *
 *   qv(xi) = sum_faces ((xi_a - xi_b) / h)^2 * cellvol + sum_i d_i xi_i^2,
 *
 * with d_i = (V+ - V-)_i * cellvol and xi treated as zero off the mask and on
 * the boundary. In 1D the face sum equals the Dirichlet energy of the
 * piecewise-linear interpolant.
 *
 * The matrix A with qv(xi) = xi^T A xi is applied on masked nodes only;
 * rows of inactive nodes are zero.
 */
class DiscreteForm {
public:
    DiscreteForm() = default;
    DiscreteForm(const Grid& grid, Mask mask, std::vector<double> potential_diag);

    const Grid& grid() const noexcept { return grid_; }
    const Mask& mask() const noexcept { return mask_; }
    std::size_t size() const noexcept { return grid_.size(); }
    /// Potential part of the diagonal, already multiplied by the cell volume.
    const std::vector<double>& potential_diagonal() const noexcept { return pot_; }

    void apply(std::span<const double> x, std::span<double> y) const;
    Vec apply(std::span<const double> x) const;

    double qv(std::span<const double> x) const;
    double bilinear(std::span<const double> x, std::span<const double> y) const;
    /// Gradient part of qv only.
    double stiffness(std::span<const double> x) const;

    Vec diagonal() const;
    /// Gershgorin bound on |A|.
    double norm_bound() const;

    /// Same form with V replaced by V + c.
    DiscreteForm shifted(double c) const;
    /// Same form with the potential diagonal increased by extra * cellvol.
    DiscreteForm plus_potential(std::span<const double> extra) const;
    /// Same potential on a smaller domain.
    DiscreteForm restricted(const Mask& sub) const;

private:
    Grid grid_;
    Mask mask_;
    std::vector<double> pot_;
    std::array<double, 3> inv_h2_{};
};

/// Lumped diagonal mass m_i = w_i * cellvol; support = {w > 0}.
struct MassMatrix {
    Grid grid;
    std::vector<double> diag;
    Mask support;

    double inner(std::span<const double> x, std::span<const double> y) const;
    double norm2(std::span<const double> x) const { return inner(x, x); }
    void apply(std::span<const double> x, std::span<double> y) const;
    MassMatrix scaled(double t) const;
};

DiscreteForm assemble(const Grid& grid, const PotentialField& field, const Mask& mask);
DiscreteForm assemble(const Grid& grid, const PotentialField& field);
/// Dirichlet Laplacian form (V = 0) on the mask.
DiscreteForm laplacian_form(const Grid& grid, const Mask& mask);

double qv(const DiscreteForm& form, const GridFunction& xi);

MassMatrix weighted_mass(const Grid& grid, const GridFunction& w);
MassMatrix weighted_mass(const Grid& grid, const Mask& indicator);
/// cellvol on the mask, the default mass of eigenproblems.
MassMatrix lumped_mass(const Grid& grid, const Mask& mask);

struct MagneticResidual {
    double form_value = 0.0;    // qv_{V0}(xi)
    double gauge_energy = 0.0;  // sum_faces |D_h xi - F xi|^2 * vol
    double residual = 0.0;      // |form_value - gauge_energy|
};

/// Discrete defect of qv_{V0}(xi) = int |grad xi - F xi|^2 for V0 = div F + |F|^2.
MagneticResidual magnetic_identity_check(const VectorSamples& F, const GridFunction& xi);

}  // namespace spectragap
