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

#include <vector>

#include "spectragap/solver.hpp"

namespace spectragap {

struct CapacityResult {
    double value = 0.0;
    /// Capacitary potential (obstacle minimizer), 0 <= xi <= 1.
    GridFunction potential;
    std::size_t sweeps = 0;
    double complementarity = 0.0;
};

/// Cap(K; domain) = min { qv_0(xi) : xi >= 1 on K, xi = 0 off domain }.
CapacityResult cap(const Grid& grid, const Mask& K, const Mask& domain);
CapacityResult cap(const Grid& grid, const Mask& K);

/// All dyadic sub-boxes of the grid (restricted to domain) with at least `min_nodes` nodes per axis.
std::vector<Mask> dyadic_family(const Grid& grid, const Mask& domain, int min_nodes = 4);

struct MazyaReport {
    enum class Flag { CertifiedNotNonnegative, ConsistentWithNonnegativity, FamilyTooSmall };
    std::vector<double> ratios;
    std::vector<double> capacities;
    double max_ratio = 0.0;
    std::size_t argmax = 0;
    double tol = 0.05;
    Flag flag = Flag::FamilyTooSmall;
};

const char* flag_name(MazyaReport::Flag f);

/// r(K) = sum_K V- cellvol / Cap(K) over the family; requires V+ = 0.
MazyaReport mazya_ratio(const PotentialField& field, const std::vector<Mask>& family, const Mask& domain,
                        double tol = 0.05);

}  // namespace spectragap
