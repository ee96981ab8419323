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

#include "spectragap/potential.hpp"

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "spectragap/error.hpp"
#include "spectragap/form.hpp"
#include "spectragap/vec.hpp"

namespace spectragap {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double dist2(const Point& x, const Point& p, int dim) {
    double s = 0.0;
    for (int a = 0; a < dim; ++a) s += (x[a] - p[a]) * (x[a] - p[a]);
    return s;
}

double radius(const Point& x, int dim) { return std::sqrt(dist2(x, Point{0.0, 0.0, 0.0}, dim)); }

bool cell_contains(const Grid& g, std::size_t idx, const Point& p) {
    const Point x = g.node(idx);
    for (int a = 0; a < g.dim(); ++a)
        if (std::abs(x[a] - p[a]) > 0.5 * g.h(a) * (1.0 + 1e-12)) return false;
    return true;
}

// Flat indices of the (at most 2^dim) cells whose closure contains p.
std::vector<std::size_t> cells_containing(const Grid& g, const Point& p) {
    std::array<std::int64_t, 3> lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < g.dim(); ++a) {
        const double t = (p[a] - g.extent(a).lo) / g.h(a) - 1.0;
        lo[a] = std::max<std::int64_t>(0, std::int64_t(std::floor(t)) - 1);
        hi[a] = std::min<std::int64_t>(g.n(a) - 1, std::int64_t(std::ceil(t)) + 1);
        if (lo[a] > hi[a]) return {};
    }
    std::vector<std::size_t> out;
    for (std::int64_t k = lo[2]; k <= hi[2]; ++k)
        for (std::int64_t j = lo[1]; j <= hi[1]; ++j)
            for (std::int64_t i = lo[0]; i <= hi[0]; ++i) {
                const std::size_t idx = g.flat_index({i, j, k});
                if (cell_contains(g, idx, p)) out.push_back(idx);
            }
    return out;
}

// sup of |x - p|^{-2} over nodes whose cell does not contain p.
double max_inv_sq_regular(const Grid& g, const Point& p) {
    std::array<std::int64_t, 3> lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < g.dim(); ++a) {
        const double t = (p[a] - g.extent(a).lo) / g.h(a) - 1.0;
        lo[a] = std::clamp<std::int64_t>(std::int64_t(std::floor(t)) - 2, 0, g.n(a) - 1);
        hi[a] = std::clamp<std::int64_t>(std::int64_t(std::ceil(t)) + 2, 0, g.n(a) - 1);
    }
    double best = 0.0;
    for (std::int64_t k = lo[2]; k <= hi[2]; ++k)
        for (std::int64_t j = lo[1]; j <= hi[1]; ++j)
            for (std::int64_t i = lo[0]; i <= hi[0]; ++i) {
                const std::size_t idx = g.flat_index({i, j, k});
                if (cell_contains(g, idx, p)) continue;
                best = std::max(best, 1.0 / dist2(g.node(idx), p, g.dim()));
            }
    return best;
}

double sigma_alpha_value(const SigmaAlphaPotential& s, int dim, const Point& x) {
    const double r = radius(x, dim);
    const double ra = std::pow(r, s.alpha);
    return std::sqrt(s.c) * x[0] * (s.alpha * std::pow(r, s.alpha - 3.0) * std::cos(ra) - std::sin(ra) / (r * r * r));
}

double orlicz_value(double gamma, double p, int dim, const Point& x) {
    const double r = radius(x, dim);
    const double w = std::pow(r, -gamma) - 1.0;
    return w > 0.0 ? -std::pow(w, p - 2.0) : 0.0;
}

void validate_orlicz(double gamma, double p, int dim) {
    require(dim == 3, "orlicz potential is defined in three dimensions");
    require(p > 6.0 && p < 8.0, "orlicz potential needs p in (2*, 2*+2) = (6, 8)");
    require(gamma < 0.5 && gamma > 3.0 / p,
            "orlicz potential needs 3/p < gamma < 1/2 (so that w lies in H^1_0 but not in L^p)");
}

void validate(const PotentialSpec& spec, int dim) {
    const double hn = hardy_constant(dim);
    std::visit(overloaded{
                   [](const ConstantPotential& p) { require(std::isfinite(p.c), "constant potential must be finite"); },
                   [](const HardyPotential& p) { require(p.c > 0.0, "hardy potential needs c > 0"); },
                   [](const MultipolarPotential& p) {
                       require(!p.poles.empty(), "multipolar potential needs at least one pole");
                       for (const auto& q : p.poles) require(std::isfinite(q.a), "multipolar weights must be finite");
                   },
                   [&](const DensePoleSeries& p) {
                       require(p.centers.size() == p.weights.size(), "dense pole series: centers/weights length mismatch");
                       require(p.truncation <= p.centers.size(), "dense pole series: truncation exceeds series length");
                       double sum = 0.0;
                       for (double a : p.weights) {
                           require(a >= 0.0, "dense pole series weights must be nonnegative");
                           sum += a;
                       }
                       require(sum <= hn * (1.0 + 1e-12), "dense pole series: sum of weights exceeds the Hardy constant");
                   },
                   [&](const SigmaAlphaPotential& p) {
                       require(p.c > 0.0 && p.c <= hn / 4.0 * (1.0 + 1e-12), "sigma_alpha needs 0 < c <= H_N/4");
                       require(p.alpha > 2.0 - dim && p.alpha < 0.0, "sigma_alpha needs 2 - N < alpha < 0");
                   },
                   [](const DivergenceFormPotential&) {},
                   [](const FromGroundPotential& p) {
                       require(!p.u_path.empty() && !p.f_path.empty(), "from_ground needs u and f paths");
                   },
                   [&](const OrliczPotential& p) { validate_orlicz(p.gamma, p.p, dim); },
                   [](const Bump1dPotential& p) {
                       require(p.rho.exponent > -1.0, "bump_1d needs an integrable density (exponent > -1)");
                       require(p.k > 0.0, "bump_1d needs k > 0");
                       require(p.f >= 0.0, "bump_1d needs f >= 0");
                   },
               },
               spec);
}

// Poles (points where V is singular) whose cells need averaging.
std::vector<Point> singular_points(const PotentialSpec& spec) {
    return std::visit(overloaded{
                          [](const HardyPotential& p) { return std::vector<Point>{p.center}; },
                          [](const MultipolarPotential& p) {
                              std::vector<Point> out;
                              for (const auto& q : p.poles)
                                  if (q.a != 0.0) out.push_back(q.center);
                              return out;
                          },
                          [](const DensePoleSeries& p) {
                              std::vector<Point> out;
                              for (std::size_t i = 0; i < p.truncation; ++i)
                                  if (p.weights[i] != 0.0) out.push_back(p.centers[i]);
                              return out;
                          },
                          [](const SigmaAlphaPotential&) { return std::vector<Point>{Point{0.0, 0.0, 0.0}}; },
                          [](const OrliczPotential&) { return std::vector<Point>{Point{0.0, 0.0, 0.0}}; },
                          [](const auto&) { return std::vector<Point>{}; },
                      },
                      spec);
}

double bump_w(const PowerDensity& rho, double x1) {
    if (x1 <= 0.0) return 0.0;
    // Cauchy's formula for repeated integration: w(x) = int_0^x (x - s) rho(s) ds
    boost::math::quadrature::tanh_sinh<double> integrator;
    auto f = [&](double s) { return (x1 - s) * rho.coef * std::pow(s, rho.exponent); };
    return integrator.integrate(f, 0.0, x1);
}

PotentialField split_field(const Grid& g, std::span<const double> v) {
    PotentialField out(g);
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) fail(ErrorKind::InvalidArgument, "potential sample is not finite");
        if (v[i] >= 0.0)
            out.vplus[i] = v[i];
        else
            out.vminus[i] = -v[i];
    }
    return out;
}

// Midpoint samples plus cell averages on cells that contain a singular point.
PotentialField sample_with_poles(const Grid& g, const std::function<double(const Point&)>& f,
                                 std::span<const Point> poles, const QuadratureOptions& quad,
                                 bool reject_singular_low_dim) {
    std::vector<std::uint8_t> singular(g.size(), 0);
    for (const auto& p : poles)
        for (std::size_t idx : cells_containing(g, p)) singular[idx] = 1;

    std::vector<std::size_t> sing_list;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (singular[i]) sing_list.push_back(i);
    if (reject_singular_low_dim && g.dim() <= 2 && !sing_list.empty())
        fail(ErrorKind::InvalidArgument,
             "inverse-square pole inside a grid cell is not locally integrable in dimension " +
                 std::to_string(g.dim()));

    std::vector<double> v(g.size());
    parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i)
            if (!singular[i]) v[i] = f(g.node(i));
    });

    std::vector<std::uint8_t> conv(sing_list.size(), 1);
    parallel_for(
        sing_list.size(),
        [&](std::size_t b, std::size_t e) {
            for (std::size_t k = b; k < e; ++k) {
                const std::size_t idx = sing_list[k];
                std::vector<Point> local;
                for (const auto& p : poles)
                    if (cell_contains(g, idx, p)) local.push_back(p);
                const Point c = g.node(idx);
                const Point half{0.5 * g.h(0), 0.5 * g.h(1), 0.5 * g.h(2)};
                const CellAverage avg = cell_average(f, g.dim(), c, half, local, quad);
                v[idx] = avg.value;
                conv[k] = avg.converged ? 1 : 0;
            }
        },
        1);

    PotentialField out = split_field(g, v);
    out.singular_cells = std::move(sing_list);
    out.quadrature_converged = std::all_of(conv.begin(), conv.end(), [](std::uint8_t c) { return c != 0; });
    return out;
}

}  // namespace

std::string variant_name(const PotentialSpec& spec) {
    static constexpr const char* names[] = {"constant",         "hardy",       "multipolar",
                                            "dense_pole_series", "sigma_alpha", "divergence_form",
                                            "from_ground",       "orlicz",      "bump_1d"};
    return names[spec.index()];
}

PotentialField::PotentialField(const Grid& g)
    : grid(g), vplus(g.size(), 0.0), vminus(g.size(), 0.0), excluded() {}

PotentialField PotentialField::from_values(const Grid& g, std::span<const double> v) {
    if (v.size() != g.size()) fail(ErrorKind::ShapeMismatch, "potential values do not match grid");
    return split_field(g, v);
}

std::vector<double> PotentialField::values() const {
    std::vector<double> v(vplus.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = vplus[i] - vminus[i];
    return v;
}

bool PotentialField::has_exclusions() const {
    return std::any_of(excluded.begin(), excluded.end(), [](std::uint8_t b) { return b != 0; });
}

double PotentialField::max_abs() const {
    double m = 0.0;
    for (std::size_t i = 0; i < vplus.size(); ++i) m = std::max({m, vplus[i], vminus[i]});
    return m;
}

double eval_point(const PotentialSpec& spec, int dim, const Point& x) {
    return std::visit(
        overloaded{
            [](const ConstantPotential& p) { return p.c; },
            [&](const HardyPotential& p) { return -p.c / dist2(x, p.center, dim); },
            [&](const MultipolarPotential& p) {
                double v = 0.0;
                for (const auto& q : p.poles) v -= q.a / dist2(x, q.center, dim);
                return v;
            },
            [&](const DensePoleSeries& p) {
                double v = 0.0;
                for (std::size_t i = 0; i < p.truncation; ++i) v -= p.weights[i] / dist2(x, p.centers[i], dim);
                return v;
            },
            [&](const SigmaAlphaPotential& p) { return sigma_alpha_value(p, dim, x); },
            [&](const OrliczPotential& p) { return orlicz_value(p.gamma, p.p, dim, x); },
            [&](const Bump1dPotential& p) {
                const double rho = p.rho.coef * std::pow(x[0], p.rho.exponent);
                return (rho + p.f) / (bump_w(p.rho, x[0]) + p.k);
            },
            [](const DivergenceFormPotential&) -> double {
                fail(ErrorKind::InvalidArgument, "divergence_form potentials are only defined on a grid");
            },
            [](const FromGroundPotential&) -> double {
                fail(ErrorKind::InvalidArgument, "from_ground potentials are only defined on a grid");
            },
        },
        spec);
}

PotentialField eval_catalog(const PotentialSpec& spec, const Grid& grid, const QuadratureOptions& quad) {
    validate(spec, grid.dim());
    const int dim = grid.dim();

    if (const auto* fg = std::get_if<FromGroundPotential>(&spec)) {
        const GridFunction u = read_grid_text(fg->u_path);
        const GridFunction f = read_grid_text(fg->f_path);
        if (u.grid != grid) fail(ErrorKind::ShapeMismatch, "from_ground: u file does not match the configured grid");
        return from_ground(u, f);
    }
    if (const auto* df = std::get_if<DivergenceFormPotential>(&spec)) return divergence_form(sample_field(df->field, grid));
    if (const auto* orl = std::get_if<OrliczPotential>(&spec)) return orlicz_supercritical(orl->gamma, orl->p, grid, quad);
    if (const auto* bump = std::get_if<Bump1dPotential>(&spec)) {
        require(grid.extent(0).lo >= 0.0 && grid.extent(0).hi <= 1.0, "bump_1d lives on the unit cube (axis 0 in [0, 1])");
        // w depends on x_1 only: integrate once per axis-0 coordinate.
        std::vector<double> wline(std::size_t(grid.n(0)));
        for (std::int64_t i = 0; i < grid.n(0); ++i) wline[std::size_t(i)] = bump_w(bump->rho, grid.coord(0, i));
        std::vector<double> v(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const auto mi = grid.multi_index(i);
            const double x1 = grid.coord(0, mi[0]);
            const double u = wline[std::size_t(mi[0])] + bump->k;
            if (!(u > 0.0)) fail(ErrorKind::InvalidArgument, "bump_1d: w + k must stay positive");
            v[i] = (bump->rho.coef * std::pow(x1, bump->rho.exponent) + bump->f) / u;
        }
        return split_field(grid, v);
    }

    const auto poles = singular_points(spec);
    auto f = [&](const Point& x) { return eval_point(spec, dim, x); };
    PotentialField out = sample_with_poles(grid, f, poles, quad, true);

    if (const auto* dense = std::get_if<DensePoleSeries>(&spec)) {
        // Anderson: a centered cell maximizes the cell average of |x - p|^{-2}.
        double centered = 0.0;
        bool need_centered = false;
        double tail = 0.0;
        for (std::size_t i = dense->truncation; i < dense->centers.size(); ++i) {
            const double a = dense->weights[i];
            if (a == 0.0) continue;
            const Point& p = dense->centers[i];
            double bound = max_inv_sq_regular(grid, p);
            if (!cells_containing(grid, p).empty()) {
                if (!need_centered) {
                    need_centered = true;
                    if (dim <= 2) {
                        centered = std::numeric_limits<double>::infinity();
                    } else {
                        const Point origin{0.0, 0.0, 0.0};
                        const Point half{0.5 * grid.h(0), 0.5 * grid.h(1), 0.5 * grid.h(2)};
                        const std::array<Point, 1> pole{origin};
                        centered = cell_average([&](const Point& x) { return 1.0 / dist2(x, origin, dim); }, dim,
                                                origin, half, pole, quad)
                                       .value *
                                   (1.0 + 10.0 * quad.rel_tol);
                    }
                }
                bound = std::max(bound, centered);
            }
            tail += a * bound;
        }
        out.tail_bound = tail;
    }
    return out;
}

PotentialField from_ground(const GridFunction& u, const GridFunction& f) {
    const Grid& g = u.grid;
    if (f.grid != g) fail(ErrorKind::ShapeMismatch, "from_ground: u and f live on different grids");
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!(u.values[i] > 0.0)) fail(ErrorKind::InvalidArgument, "from_ground: u must be positive at every node");
        if (!(f.values[i] >= 0.0)) fail(ErrorKind::InvalidArgument, "from_ground: f must be nonnegative");
    }
    PotentialField out(g);
    out.excluded.assign(g.size(), 0);
    std::vector<double> v(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto mi = g.multi_index(i);
        bool ring = false;
        double lap = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
            if (mi[a] == 0 || mi[a] + 1 == g.n(a)) {
                ring = true;
                break;
            }
            const std::size_t s = g.stride(a);
            lap += (u.values[i + s] - 2.0 * u.values[i] + u.values[i - s]) / (g.h(a) * g.h(a));
        }
        if (ring) {
            out.excluded[i] = 1;
            continue;
        }
        v[i] = (lap + f.values[i]) / u.values[i];
    }
    PotentialField split = split_field(g, v);
    split.excluded = std::move(out.excluded);
    return split;
}

Point eval_field(const FieldSpec& spec, int dim, const Point& x) {
    return std::visit(overloaded{
                          [](const ConstantField& c) { return c.value; },
                          [&](const LinearField& l) {
                              Point out{0.0, 0.0, 0.0};
                              for (int a = 0; a < dim; ++a) out[a] = l.scale * (x[a] - l.center[a]);
                              return out;
                          },
                          [&](const PowerPoleField& pp) {
                              Point out{0.0, 0.0, 0.0};
                              for (int a = 0; a < dim; ++a) {
                                  if (pp.coef[a] == 0.0) continue;
                                  out[a] = pp.coef[a] * std::pow(dist2(x, pp.centers[a], dim), -0.5 * pp.exponent[a]);
                              }
                              return out;
                          },
                      },
                      spec);
}

VectorSamples sample_field(const FieldSpec& spec, const Grid& grid) {
    VectorSamples out;
    out.grid = grid;
    for (int a = 0; a < 3; ++a) out.comp[a].assign(grid.size(), 0.0);
    std::vector<std::uint8_t> singular(grid.size(), 0);
    if (const auto* pp = std::get_if<PowerPoleField>(&spec)) {
        for (int a = 0; a < grid.dim(); ++a)
            if (pp->coef[a] != 0.0 && pp->exponent[a] > 0.0)
                for (std::size_t idx : cells_containing(grid, pp->centers[a])) singular[idx] = 1;
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Point F = eval_field(spec, grid.dim(), grid.node(i));
        for (int a = 0; a < grid.dim(); ++a) {
            if (!std::isfinite(F[a])) fail(ErrorKind::InvalidArgument, "vector field is not finite at a grid node");
            out.comp[a][i] = F[a];
        }
        if (singular[i]) out.singular_cells.push_back(i);
    }
    return out;
}

PotentialField divergence_form(const VectorSamples& F) {
    const Grid& g = F.grid;
    for (int a = 0; a < g.dim(); ++a)
        if (F.comp[a].size() != g.size()) fail(ErrorKind::ShapeMismatch, "divergence_form: component length mismatch");
    std::vector<double> v(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto mi = g.multi_index(i);
        double div = 0.0, sq = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
            const auto& c = F.comp[a];
            const std::size_t s = g.stride(a);
            const bool has_prev = mi[a] > 0;
            const bool has_next = mi[a] + 1 < g.n(a);
            if (has_prev && has_next)
                div += (c[i + s] - c[i - s]) / (2.0 * g.h(a));
            else if (has_next)
                div += (c[i + s] - c[i]) / g.h(a);
            else if (has_prev)
                div += (c[i] - c[i - s]) / g.h(a);
            sq += c[i] * c[i];
        }
        v[i] = div + sq;
    }
    PotentialField out = split_field(g, v);
    out.singular_cells = F.singular_cells;
    return out;
}

PotentialField orlicz_supercritical(double gamma, double p, const Grid& grid, const QuadratureOptions& quad) {
    validate_orlicz(gamma, p, grid.dim());
    const std::array<Point, 1> poles{Point{0.0, 0.0, 0.0}};
    return sample_with_poles(
        grid, [&](const Point& x) { return orlicz_value(gamma, p, 3, x); }, poles, quad, false);
}

std::vector<GridFunction> default_battery(const Grid& grid, const Mask& K, std::size_t spikes, std::size_t bumps,
                                          std::uint64_t seed) {
    require(K.size() == grid.size() && !K.is_empty(), "battery needs a nonempty K mask on the grid");
    std::vector<std::size_t> knodes;
    for (std::size_t i = 0; i < K.size(); ++i)
        if (K[i]) knodes.push_back(i);

    std::vector<GridFunction> out;
    const double hmin = grid.min_h();
    const int dim = grid.dim();
    static constexpr double kWidths[] = {1.0, 2.0, 4.0, 8.0};
    for (std::size_t s = 0; s < spikes; ++s) {
        const std::size_t center = knodes[(s * knodes.size()) / std::max<std::size_t>(1, spikes)];
        const Point x0 = grid.node(center);
        const double k = 1.0 / (kWidths[s % 4] * hmin);
        out.push_back(GridFunction::sample(grid, [&](const Point& x) {
            return std::max(0.0, 1.0 - k * std::sqrt(dist2(x, x0, dim)));
        }));
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t b = 0; b < bumps; ++b) {
        Point c{0.0, 0.0, 0.0};
        double maxr = 1e300;
        for (int a = 0; a < dim; ++a) {
            const auto& e = grid.extent(a);
            c[a] = e.lo + (0.2 + 0.6 * unit(rng)) * (e.hi - e.lo);
            maxr = std::min(maxr, std::min(c[a] - e.lo, e.hi - c[a]));
        }
        const double r = 2.0 * hmin + unit(rng) * std::max(0.0, maxr - 2.0 * hmin);
        out.push_back(GridFunction::sample(grid, [&](const Point& x) {
            const double t = 1.0 - dist2(x, c, dim) / (r * r);
            return t > 0.0 ? t * t : 0.0;
        }));
    }
    return out;
}

BalanceReport balance_probe(const PotentialField& field, const Mask& K, const Mask& U,
                            std::span<const GridFunction> battery, double violation_threshold) {
    const Grid& g = field.grid;
    require(K.size() == g.size() && U.size() == g.size(), "balance_probe: masks do not match the grid");
    require(K.subset_of(U), "balance_probe: K must lie inside U");
    require(!battery.empty(), "balance_probe: empty battery");
    const DiscreteForm form = assemble(g, field);
    const double cv = g.cell_volume();

    BalanceReport rep;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < battery.size(); ++b) {
        const GridFunction& xi = battery[b];
        if (xi.grid != g) fail(ErrorKind::ShapeMismatch, "balance_probe: battery function on a different grid");
        double den = 0.0, ul1 = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double ax = std::abs(xi.values[i]);
            if (K[i]) den += field.vplus[i] * ax * cv;
            if (U[i]) ul1 += ax * cv;
        }
        if (den <= 0.0) continue;
        ++rep.battery_size;
        const double q = form.qv(xi.values);
        // a negative form value violates every balance constant
        const double ratio = q < 0.0 ? 0.0 : (std::sqrt(q) + ul1) / den;
        if (ratio < best) {
            best = ratio;
            rep.witness_index = b;
        }
    }
    if (rep.battery_size == 0)
        fail(ErrorKind::InvalidArgument, "balance_probe: every battery member has zero V+ mass on K (vacuous)");
    rep.best_constant_estimate = best;
    if (best < violation_threshold) {
        rep.verdict = BalanceReport::Verdict::ViolationWitness;
        rep.witness = battery[rep.witness_index];
    }
    return rep;
}

namespace {

// int over the unit sphere of |omega_1|
double sphere_abs_first(int dim) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * (dim - 1)) / std::tgamma(0.5 * (dim + 1));
}

// Root of tan t = alpha t on (k pi - pi/2, k pi), alpha < 0.
double oscillation_root(double alpha, int k) {
    const double pi = std::numbers::pi;
    double lo = k * pi - 0.5 * pi + 1e-14 * k, hi = k * pi;
    auto g = [&](double t) { return alpha * t * std::cos(t) - std::sin(t); };
    double glo = g(lo);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if ((gm > 0.0) == (glo > 0.0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

OscillationReport oscillation_probe(double c, double alpha, double beta, int dim, std::span<const double> eps,
                                    double slope_tol) {
    require(dim >= 3, "oscillation_probe needs dimension >= 3");
    require(c > 0.0 && c <= hardy_constant(dim) / 4.0 * (1.0 + 1e-12), "oscillation_probe needs 0 < c <= H_N/4");
    require(alpha > 2.0 - dim && alpha < 0.0, "oscillation_probe needs 2 - N < alpha < 0");
    require(beta > 0.5 * (2.0 - dim) && beta < 0.0, "oscillation_probe needs (2 - N)/2 < beta < 0");
    require(eps.size() >= 2, "oscillation_probe needs at least two radii");
    for (std::size_t i = 0; i < eps.size(); ++i) {
        require(eps[i] > 0.0 && eps[i] < 1.0, "oscillation_probe radii must lie in (0, 1)");
        if (i > 0) require(eps[i] < eps[i - 1], "oscillation_probe radii must be strictly decreasing");
    }

    // With t = r^alpha the radial integrand becomes
    //   |alpha t cos t - sin t| (t^{beta/alpha} - 1) t^{(N-3)/alpha} t^{1/alpha - 1} / |alpha|,
    // integrated over t in [1, eps^alpha] between consecutive sign changes.
    const double pref = std::sqrt(c) * sphere_abs_first(dim) / std::abs(alpha);
    const double pw = (dim - 3.0) / alpha + 1.0 / alpha - 1.0;
    auto integrand = [&](double t) {
        const double osc = std::abs(alpha * t * std::cos(t) - std::sin(t));
        return osc * (std::pow(t, beta / alpha) - 1.0) * std::pow(t, pw);
    };
    // 20-point Gauss-Legendre on [a, b]
    static constexpr double gx[] = {0.0765265211334973, 0.2277858511416451, 0.3737060887154195,
                                    0.5108670019508271, 0.6360536807265150, 0.7463319064601508,
                                    0.8391169718222188, 0.9122344282513259, 0.9639719272779138,
                                    0.9931285991850949};
    static constexpr double gw[] = {0.1527533871307258, 0.1491729864726037, 0.1420961093183820,
                                    0.1316886384491766, 0.1181945319615184, 0.1019301198172404,
                                    0.0832767415767048, 0.0626720483341091, 0.0406014298003869,
                                    0.0176140071391521};
    auto gauss = [&](double a, double b) {
        const double m = 0.5 * (a + b), r = 0.5 * (b - a);
        double s = 0.0;
        for (int i = 0; i < 10; ++i) s += gw[i] * (integrand(m - r * gx[i]) + integrand(m + r * gx[i]));
        return s * r;
    };
    // smooth pieces of length at most pi/2
    auto piece = [&](double a, double b) {
        const int parts = std::max(1, int(std::ceil((b - a) / (0.5 * std::numbers::pi))));
        double s = 0.0;
        for (int i = 0; i < parts; ++i) s += gauss(a + (b - a) * i / parts, a + (b - a) * (i + 1) / parts);
        return s;
    };

    OscillationReport rep;
    double t_prev = 1.0;
    double acc = 0.0;
    int k = 1;
    double next_root = oscillation_root(alpha, k);
    for (double e : eps) {
        const double t_end = std::pow(e, alpha);
        while (next_root < t_end) {
            if (next_root > t_prev) {
                acc += piece(t_prev, next_root);
                t_prev = next_root;
            }
            next_root = oscillation_root(alpha, ++k);
        }
        acc += piece(t_prev, t_end);
        t_prev = t_end;
        rep.eps.push_back(e);
        rep.integrals.push_back(pref * acc);
    }

    const std::size_t n = rep.eps.size();
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        lx[i] = std::log(1.0 / rep.eps[i]);
        ly[i] = std::log(rep.integrals[i]);
    }
    for (std::size_t i = 1; i < n; ++i) rep.local_slopes.push_back((ly[i] - ly[i - 1]) / (lx[i] - lx[i - 1]));
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / double(n);
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / double(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    rep.fitted_slope = sxy / sxx;
    // a convergent integral has local slopes decaying to zero
    rep.divergent = rep.local_slopes.back() > slope_tol;
    return rep;
}

}  // namespace spectragap
