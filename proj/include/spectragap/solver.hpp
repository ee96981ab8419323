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

#include <limits>
#include <span>
#include <vector>

#include "spectragap/form.hpp"

namespace spectragap {

struct CgResult {
    Vec x;
    std::size_t iterations = 0;
    /// Final ||b - Ax|| / ||b|| on the mask.
    double relative_residual = 0.0;
};

/**
 * @brief Jacobi-preconditioned conjugate gradients on the form's mask.
 *
 * Entries of b off the mask are ignored and x is zero there. Throws
 * Error(Indefinite) as soon as a search direction has p^T A p <= 0 and
 * Error(NotConverged) once maxit is exhausted. maxit = 0 means 10 * size.
 */
CgResult cg_solve(const DiscreteForm& A, std::span<const double> b, double tol, std::size_t maxit = 0,
                  std::span<const double> x0 = {});

struct EstimateReport {
    double lhs = 0.0;       // sum_K W |u| cellvol
    double rhs = 0.0;       // 2 (sum_K W cellvol)^{1/2} ||f||_{-1}
    double hminus1 = 0.0;
    bool holds = false;     // lhs <= 1.05 rhs
};

struct DirichletResult {
    GridFunction u;
    EstimateReport estimate;
    std::size_t iterations = 0;
};

/// Solves (A0 + diag(W cellvol)) u = M f on the full grid and evaluates the L1 estimate on K.
DirichletResult dirichlet_solve(const Grid& grid, const GridFunction& W, const GridFunction& f, const Mask& K);

/// (f^T M A0^{-1} M f)^{1/2} with A0 the Dirichlet Laplacian form.
double hminus1_norm(const Grid& grid, const GridFunction& f);

struct ObstacleResult {
    GridFunction xi;
    std::size_t sweeps = 0;
    /// max over free nodes of |(A xi)_i| / a_ii and over active nodes of max(0, -(A xi)_i) / a_ii
    double complementarity = 0.0;
    /// qv after the warm start and after every sweep
    std::vector<double> energy_history;
};

struct ObstacleOptions {
    double omega = 1.5;
    double update_tol = 1e-10;
    std::size_t max_sweeps = 200000;
    bool warm_start = true;
};

/// Minimizes xi^T A xi subject to xi >= lower (lower = -inf marks unconstrained nodes) by projected SOR.
ObstacleResult obstacle_solve(const DiscreteForm& A, const GridFunction& lower, const ObstacleOptions& opts = {});

constexpr double kNoObstacle = -std::numeric_limits<double>::infinity();

}  // namespace spectragap
