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

#include <filesystem>
#include <limits>
#include <vector>

#include "spectragap/criticality.hpp"

namespace spectragap {

struct Supersolution {
    GridFunction u;
    /// mu = A_V u per node (cell-volume scaled)
    GridFunction residual;
    Mask mask;

    struct Ball {
        Point center{0.0, 0.0, 0.0};
        double radius = 0.0;
        std::size_t nodes = 0;
        double min_value = 0.0;
    } ball;

    struct Step {
        int m = 0;
        /// truncation level n of V-; +inf means untruncated
        double n = 0.0;
        double lambda = 0.0;
        std::size_t iterations = 0;
        bool converged = false;
        /// max |u - u_prev| / max |u| on Omega_1
        double change = 0.0;
    };
    std::vector<Step> schedule;

    double residual_min = 0.0;
    /// max_i a_ii * max u, the magnitude scale for residual tolerances
    double residual_scale = 0.0;
    double lambda_tol = 0.0;
};

struct SupersolutionOptions {
    int m_levels = 3;
    std::vector<double> truncations{1.0, 10.0, 100.0};
    double change_tol = 1e-4;
    EigenOptions eig;
};

/// Principal eigenfunctions over an exhaustion and a truncation schedule of V-,
/// normalized to min 1 on a fixed ball inside Omega_1. The last step is always
/// the untruncated potential on the full domain.
Supersolution construct_supersolution(const Problem& problem, const Grid& grid, const SupersolutionOptions& opts = {});

struct SupersolutionCheck {
    bool positive = false;
    bool normalized = false;
    bool residual_ok = false;
    double min_u = 0.0;
    bool all() const { return positive && normalized && residual_ok; }
};

SupersolutionCheck check_supersolution(const Supersolution& sup, double residual_rel_tol = 1e-6);

void export_supersolution(const Supersolution& sup, const std::filesystem::path& path);

struct AapReport {
    /// weighted_gap(form, M_w) with w = h / (u cellvol); +inf when h = 0
    double weighted_gap = std::numeric_limits<double>::infinity();
    bool gap_ok = false;
    /// min over the battery of qv(xi) - sum w xi^2 cellvol, relative to qv(xi)
    double battery_min_margin = 0.0;
    bool battery_ok = false;
    std::size_t battery_size = 0;
    bool passed() const { return gap_ok && battery_ok; }
};

/// Checks qv(xi) >= sum (h/u) xi^2 on the battery and weighted_gap(form, M_{h/u}) >= 0.95.
AapReport verify_aap(const DiscreteForm& form, const Supersolution& sup, const GridFunction& h,
                     std::span<const GridFunction> battery);

/// qv(xi) - sum (f/u) xi^2 vol - sum_faces |D xi - (xi/u) D u|^2 vol, with f = (A u) / cellvol.
double ground_state_transform(const DiscreteForm& form, const GridFunction& u, const GridFunction& f,
                              const GridFunction& xi);

/// w = 1/4 |D u1 / u1 - D u2 / u2|^2 from face quotients, averaged to nodes.
GridFunction picone_improve(const GridFunction& u1, const GridFunction& u2);

struct ImprovementResult {
    bool improves = false;
    double gap = 0.0;
};

ImprovementResult improvement_check(const DiscreteForm& form, const GridFunction& w);

}  // namespace spectragap
