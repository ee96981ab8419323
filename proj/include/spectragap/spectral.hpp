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
#pragma once

#include <cstddef>
#include <memory>

#include "spectragap/form.hpp"

namespace spectragap {

struct SpectralResult {
    double value = 0.0;
    /// Normalized so that v^T M v = 1.
    GridFunction vector;
    /// ||Av - value Mv|| / ||Av||
    double residual = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
};

struct EigenOptions {
    double tol = 1e-8;
    std::size_t max_iterations = 10000;
    /// Precondition with the exact inverse of the box Laplacian (sine transform) instead of Jacobi.
    bool spectral_preconditioner = true;
};

/**
 * @brief Bottom eigenpair of the pencil (A, M) by locally optimal
 * preconditioned conjugate gradients (three-term Rayleigh-Ritz).
 *
 * Converged means the relative residual is below tol, or the absolute
 * residual has reached the rounding floor of A (relevant when the
 * eigenvalue itself is near zero).
 */
SpectralResult principal_eig(const DiscreteForm& form, const MassMatrix& mass, const EigenOptions& opts = {});
/// Lumped mass cellvol on the form's mask.
SpectralResult principal_eig(const DiscreteForm& form, const EigenOptions& opts = {});

struct GapOptions {
    double cg_tol = 1e-12;
    double change_tol = 1e-12;
    double residual_tol = 1e-8;
    std::size_t max_iterations = 10000;
};

struct GapResult {
    double value = 0.0;
    /// Last power iterate, normalized so that x^T M_w x = 1.
    GridFunction minimizer;
    bool indefinite = false;
    bool converged = false;
    std::size_t iterations = 0;
};

/// inf qv(xi) / xi^T M_w xi via power iteration on A^{-1} M_w.
GapResult weighted_gap(const DiscreteForm& form, const MassMatrix& weight, const GapOptions& opts = {});

double rayleigh(const DiscreteForm& form, const MassMatrix& mass, std::span<const double> xi);

/// Closed-form smallest eigenvalue of the Dirichlet Laplacian on the full grid.
double box_laplacian_eigenvalue(const Grid& grid);

/// Exact inverse of the cellvol-scaled box Laplacian (plus sigma * cellvol), applied via DST-I.
class LaplacePreconditioner {
public:
    explicit LaplacePreconditioner(const Grid& grid, double sigma = 0.0);
    ~LaplacePreconditioner();
    LaplacePreconditioner(const LaplacePreconditioner&) = delete;
    LaplacePreconditioner& operator=(const LaplacePreconditioner&) = delete;

    void apply(std::span<const double> x, std::span<double> y);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace spectragap
