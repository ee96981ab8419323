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
#include "spectragap/capacity.hpp"

#include <algorithm>
#include <cmath>

#include "spectragap/error.hpp"

namespace spectragap {

CapacityResult cap(const Grid& grid, const Mask& K, const Mask& domain) {
    if (K.size() != grid.size() || domain.size() != grid.size())
        fail(ErrorKind::ShapeMismatch, "cap: masks do not match the grid");
    const Mask k = K & domain;
    require(!k.is_empty(), "cap: K is empty inside the domain");
    GridFunction lower(grid, std::vector<double>(grid.size(), kNoObstacle));
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (k[i]) lower.values[i] = 1.0;
    const DiscreteForm a0 = laplacian_form(grid, domain);
    ObstacleResult obs = obstacle_solve(a0, lower);
    CapacityResult out;
    out.value = a0.qv(obs.xi.values);
    out.sweeps = obs.sweeps;
    out.complementarity = obs.complementarity;
    out.potential = std::move(obs.xi);
    return out;
}

CapacityResult cap(const Grid& grid, const Mask& K) { return cap(grid, K, Mask::full(grid)); }

std::vector<Mask> dyadic_family(const Grid& grid, const Mask& domain, int min_nodes) {
    require(min_nodes >= 1, "dyadic_family: min_nodes must be positive");
    if (domain.size() != grid.size()) fail(ErrorKind::ShapeMismatch, "dyadic_family: domain does not match the grid");
    std::vector<Mask> out;
    const int dim = grid.dim();
    for (int level = 0;; ++level) {
        const std::int64_t parts = std::int64_t(1) << level;
        bool fits = true;
        for (int a = 0; a < dim; ++a) fits = fits && grid.n(a) / parts >= min_nodes;
        if (!fits) break;
        std::array<std::int64_t, 3> count{1, 1, 1};
        for (int a = 0; a < dim; ++a) count[a] = parts;
        for (std::int64_t c2 = 0; c2 < count[2]; ++c2)
            for (std::int64_t c1 = 0; c1 < count[1]; ++c1)
                for (std::int64_t c0 = 0; c0 < count[0]; ++c0) {
                    const std::array<std::int64_t, 3> cell{c0, c1, c2};
                    std::vector<std::uint8_t> bits(grid.size(), 0);
                    bool any = false;
                    for (std::size_t i = 0; i < grid.size(); ++i) {
                        if (!domain[i]) continue;
                        const auto mi = grid.multi_index(i);
                        bool in = true;
                        for (int a = 0; a < dim && in; ++a) {
                            const std::int64_t lo = cell[a] * grid.n(a) / parts;
                            const std::int64_t hi = (cell[a] + 1) * grid.n(a) / parts;
                            in = mi[a] >= lo && mi[a] < hi;
                        }
                        if (in) bits[i] = 1, any = true;
                    }
                    if (any) out.emplace_back(grid, std::move(bits));
                }
    }
    return out;
}

const char* flag_name(MazyaReport::Flag f) {
    switch (f) {
        case MazyaReport::Flag::CertifiedNotNonnegative:
            return "certified_not_nonnegative";
        case MazyaReport::Flag::ConsistentWithNonnegativity:
            return "consistent_with_nonnegativity";
        case MazyaReport::Flag::FamilyTooSmall:
            return "family_too_small";
    }
    return "unknown";
}

MazyaReport mazya_ratio(const PotentialField& field, const std::vector<Mask>& family, const Mask& domain, double tol) {
    const Grid& g = field.grid;
    require(!family.empty(), "mazya_ratio: empty K family");
    require(tol >= 0.0, "mazya_ratio: tolerance must be nonnegative");
    for (double v : field.vplus)
        if (v != 0.0) fail(ErrorKind::InvalidArgument, "mazya_ratio: the criterion needs V+ = 0");
    const double cv = g.cell_volume();

    MazyaReport rep;
    rep.tol = tol;
    rep.ratios.resize(family.size());
    rep.capacities.resize(family.size());
    parallel_for(
        family.size(),
        [&](std::size_t b, std::size_t e) {
            for (std::size_t k = b; k < e; ++k) {
                const Mask& K = family[k];
                const double c = cap(g, K, domain).value;
                if (!(c > 0.0)) fail(ErrorKind::InvalidArgument, "mazya_ratio: a K with zero capacity");
                double mass = 0.0;
                for (std::size_t i = 0; i < g.size(); ++i)
                    if (K[i] && domain[i]) mass += field.vminus[i] * cv;
                rep.capacities[k] = c;
                rep.ratios[k] = mass / c;
            }
        },
        1);
    const auto it = std::max_element(rep.ratios.begin(), rep.ratios.end());
    rep.max_ratio = *it;
    rep.argmax = std::size_t(it - rep.ratios.begin());
    if (rep.max_ratio > 1.0 + tol)
        rep.flag = MazyaReport::Flag::CertifiedNotNonnegative;
    else if (rep.max_ratio >= 0.25 - tol)
        rep.flag = MazyaReport::Flag::ConsistentWithNonnegativity;
    else
        rep.flag = MazyaReport::Flag::FamilyTooSmall;
    return rep;
}

}  // namespace spectragap
