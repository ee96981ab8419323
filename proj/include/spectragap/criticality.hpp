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

#include <optional>
#include <string>
#include <vector>

#include "spectragap/potential.hpp"
#include "spectragap/spectral.hpp"

namespace spectragap {

/// Working domain inside the grid box: the whole box or a ball mask.
struct DomainShape {
    enum class Kind { Box, Ball };
    Kind kind = Kind::Box;
    Point center{0.0, 0.0, 0.0};
    double radius = 1.0;
};

Mask domain_mask(const Grid& grid, const DomainShape& shape);

enum class ShiftMode {
    None,
    /// subtract each level's own discrete Dirichlet eigenvalue of -Delta_h
    DiscretePrincipal,
};

struct Problem {
    PotentialSpec potential;
    DomainShape domain;
    /// constant added to V
    double shift = 0.0;
    ShiftMode shift_mode = ShiftMode::None;
    QuadratureOptions quad;
};

struct AssembledProblem {
    PotentialField field;
    Mask domain;
    DiscreteForm form;
    double shift = 0.0;  // total constant added to V
};

AssembledProblem assemble_problem(const Problem& problem, const Grid& grid, const EigenOptions& eig = {});

/// Centered box with half the side length of the grid box.
Box default_K(const Grid& grid);

/// eta = 1e-8 (2N / h^2 + max|V|)
double witness_threshold(const DiscreteForm& form);

struct Witness {
    GridFunction xi;
    double qv = 0.0;
    double eigenvalue = 0.0;
};

/// Principal eigenvector if lambda < -eta and qv(vector) < 0 on direct re-evaluation.
std::optional<Witness> supercritical_witness(const DiscreteForm& form, const EigenOptions& eig = {});

enum class VerdictTag { Supercritical, Subcritical, Critical, Inconclusive };
const char* verdict_name(VerdictTag t);

struct LevelRecord {
    std::int64_t n = 0;  // nodes along axis 0
    double h = 0.0;
    double lambda = 0.0;
    bool eig_converged = false;
    std::size_t eig_iterations = 0;
    double eig_residual = 0.0;
    /// signed gap mu(h): weighted gap, or lambda / weight when the level carries a witness
    double mu = 0.0;
    /// mu multiplied by max(w), the quantity compared against the thresholds
    double mu_normalized = 0.0;
    double lambda_scale = 0.0;
    double eta = 0.0;
    bool witness = false;
    bool gap_indefinite = false;
    double shift = 0.0;
    GridFunction minimizer;
    Mask K;
};

struct ClassifyOptions {
    int levels = 3;
    double slope_critical = 1.5;
    double slope_subcritical = 0.5;
    double gap_threshold = 1e-3;  // times lambda scale
    double zero_gap = 1e-8;       // times lambda scale
    double critical_band = 10.0;  // |mu(finest)| <= band * lambda scale * h^2
    /// K box; default_K when empty
    std::optional<Box> K;
    /// constant weight on K
    double weight = 1.0;
    EigenOptions eig;
    GapOptions gap;
};

struct CriticalityVerdict {
    VerdictTag tag = VerdictTag::Inconclusive;
    std::optional<Witness> witness;
    std::vector<LevelRecord> levels;
    std::optional<double> fitted_rate;
    bool by_extrapolation = false;
    std::string weight = "indicator_K";
    std::string reason;
};

/// Per-level witness search and weighted gaps on base, refine(base), ... followed by the h-decay fit.
CriticalityVerdict classify(const Problem& problem, const Grid& base, const ClassifyOptions& opts = {});

/// Least-squares slope of log|mu| against log h over the given levels.
std::optional<double> fit_rate(const std::vector<LevelRecord>& levels);

struct NullSequenceEvidence {
    std::vector<GridFunction> members;
    std::vector<double> qv;
    std::vector<Mask> K;
};

/// Minimizers of a Critical verdict rescaled to sum_K |xi| cellvol = 1.
NullSequenceEvidence null_sequence(const Problem& problem, const CriticalityVerdict& verdict);

}  // namespace spectragap
