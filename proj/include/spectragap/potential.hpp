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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "spectragap/mesh.hpp"
#include "spectragap/quadrature.hpp"

namespace spectragap {

/// Sharp Hardy constant ((N-2)/2)^2.
constexpr double hardy_constant(int dim) { return 0.25 * double(dim - 2) * double(dim - 2); }

// ---------------------------------------------------------------------------
// Catalog. Every "pole" variant below is attractive: V = -sum a_i |x - x_i|^{-2}.

struct ConstantPotential {
    double c = 0.0;
};

struct HardyPotential {
    Point center{0.0, 0.0, 0.0};
    double c = 0.25;
};

struct Pole {
    Point center{0.0, 0.0, 0.0};
    double a = 0.0;
};

struct MultipolarPotential {
    std::vector<Pole> poles;
};

/// Infinite pole series, truncated after `truncation` terms.
struct DensePoleSeries {
    std::vector<Point> centers;
    std::vector<double> weights;
    std::size_t truncation = 0;
};

/// sigma_alpha(x) = sqrt(c) x_1 (alpha |x|^{alpha-3} cos|x|^alpha - sin(|x|^alpha) |x|^{-3})
struct SigmaAlphaPotential {
    double c = 0.0;
    double alpha = -0.5;
};

/// Vector field descriptors for divergence-form potentials V0 = div F + |F|^2.
struct ConstantField {
    Point value{0.0, 0.0, 0.0};
};
struct LinearField {
    double scale = 1.0;
    Point center{0.0, 0.0, 0.0};
};
/// Component i is c_i |x - a_i|^{-alpha_i}.
struct PowerPoleField {
    std::array<double, 3> coef{0.0, 0.0, 0.0};
    std::array<Point, 3> centers{};
    std::array<double, 3> exponent{0.0, 0.0, 0.0};
};
using FieldSpec = std::variant<ConstantField, LinearField, PowerPoleField>;

struct DivergenceFormPotential {
    FieldSpec field;
};

/// V = (Delta_h u + f) / u with u and f read from grid-text files.
struct FromGroundPotential {
    std::string u_path;
    std::string f_path;
};

/// V = -(max(|x|^{-gamma} - 1, 0))^{p-2} in three dimensions.
struct OrliczPotential {
    double gamma = 0.45;
    double p = 7.0;
};

/// rho(s) = coef * s^exponent on (0, 1], exponent > -1.
struct PowerDensity {
    double coef = 1.0;
    double exponent = -0.5;
};

/// V = (rho(x_1) + f) / (w(x_1) + k), w(x_1) = int_0^{x_1} int_0^t rho.
struct Bump1dPotential {
    PowerDensity rho;
    double k = 1.0;
    double f = 0.0;
};

using PotentialSpec = std::variant<ConstantPotential, HardyPotential, MultipolarPotential, DensePoleSeries,
                                   SigmaAlphaPotential, DivergenceFormPotential, FromGroundPotential,
                                   OrliczPotential, Bump1dPotential>;

std::string variant_name(const PotentialSpec& spec);

/**
 * @brief Cellwise potential samples split into positive and negative parts.
 *
 * `excluded` marks nodes that downstream form assembly must treat as
 * Dirichlet zeros (for instance the boundary ring of from_ground).
 */
struct PotentialField {
    Grid grid;
    std::vector<double> vplus;
    std::vector<double> vminus;
    std::vector<std::size_t> singular_cells;
    std::vector<std::uint8_t> excluded;
    /// Upper bound on the omitted tail of a truncated pole series (0 otherwise).
    double tail_bound = 0.0;
    /// False if some singular cell average missed its tolerance.
    bool quadrature_converged = true;

    PotentialField() = default;
    explicit PotentialField(const Grid& g);
    static PotentialField from_values(const Grid& g, std::span<const double> v);

    double value(std::size_t i) const { return vplus[i] - vminus[i]; }
    std::vector<double> values() const;
    bool has_exclusions() const;
    double max_abs() const;
};

/// Evaluates a catalog entry on the grid. Cells whose closure contains a pole
/// receive the adaptive cell average, all others the midpoint sample.
PotentialField eval_catalog(const PotentialSpec& spec, const Grid& grid, const QuadratureOptions& quad = {});

/// Pointwise value of a pole-free or pole-type catalog entry (no cell averaging).
double eval_point(const PotentialSpec& spec, int dim, const Point& x);

PotentialField from_ground(const GridFunction& u, const GridFunction& f);

/// Per-axis samples of a vector field at interior nodes.
struct VectorSamples {
    Grid grid;
    std::array<std::vector<double>, 3> comp;
    std::vector<std::size_t> singular_cells;
};

VectorSamples sample_field(const FieldSpec& spec, const Grid& grid);
Point eval_field(const FieldSpec& spec, int dim, const Point& x);

/// V0 = div_h F + |F|^2 with centered differences (one-sided next to the boundary).
PotentialField divergence_form(const VectorSamples& F);

PotentialField orlicz_supercritical(double gamma, double p, const Grid& grid, const QuadratureOptions& quad = {});

// ---------------------------------------------------------------------------
// Balance probing (evidence only: a finite battery can witness violations of
// the strong-balance inequality but never prove it).

struct BalanceReport {
    enum class Verdict { PlausiblyBalanced, ViolationWitness };
    double best_constant_estimate = 0.0;
    std::size_t battery_size = 0;
    std::size_t witness_index = 0;
    Verdict verdict = Verdict::PlausiblyBalanced;
    std::optional<GridFunction> witness;
};

/// Spikes (1 - k|x - x0|)_+ centered at K nodes plus seeded random smooth bumps.
std::vector<GridFunction> default_battery(const Grid& grid, const Mask& K, std::size_t spikes = 24,
                                          std::size_t bumps = 24, std::uint64_t seed = 12345);

BalanceReport balance_probe(const PotentialField& field, const Mask& K, const Mask& U,
                            std::span<const GridFunction> battery, double violation_threshold = 1e-3);

// ---------------------------------------------------------------------------
// Radial-angular divergence study of |sigma_alpha w_beta| near the origin.

struct OscillationReport {
    std::vector<double> eps;
    std::vector<double> integrals;
    std::vector<double> local_slopes;
    double fitted_slope = 0.0;
    bool divergent = false;
};

/// I(eps) = int_{eps<|x|<1} |sigma_alpha (|x|^beta - 1)| dx; slope of log I vs log(1/eps).
OscillationReport oscillation_probe(double c, double alpha, double beta, int dim, std::span<const double> eps,
                                    double slope_tol = 0.02);

}  // namespace spectragap
