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

#include "spectragap/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "spectragap/error.hpp"

namespace spectragap {

Grid::Grid(int dim, std::span<const Interval> extents, std::span<const std::int64_t> n) : dim_(dim) {
    require(dim >= 1 && dim <= 3, "grid dimension must be 1, 2 or 3");
    require(extents.size() >= std::size_t(dim) && n.size() >= std::size_t(dim),
            "grid needs one extent and one node count per axis");
    size_ = 1;
    cellvol_ = 1.0;
    for (int a = 0; a < dim; ++a) {
        require(n[a] >= 1, "grid needs at least one interior node per axis");
        require(std::isfinite(extents[a].lo) && std::isfinite(extents[a].hi) && extents[a].hi > extents[a].lo,
                "degenerate grid extent on axis " + std::to_string(a));
        extents_[a] = extents[a];
        n_[a] = n[a];
        h_[a] = (extents[a].hi - extents[a].lo) / double(n[a] + 1);
        strides_[a] = size_;
        size_ *= std::size_t(n[a]);
        cellvol_ *= h_[a];
    }
    for (int a = dim; a < 3; ++a) {
        extents_[a] = {0.0, 0.0};
        n_[a] = 1;
        h_[a] = 1.0;
        strides_[a] = size_;
    }
}

double Grid::min_h() const noexcept {
    double m = h_[0];
    for (int a = 1; a < dim_; ++a) m = std::min(m, h_[a]);
    return m;
}

std::array<std::int64_t, 3> Grid::multi_index(std::size_t idx) const {
    std::array<std::int64_t, 3> m{0, 0, 0};
    for (int a = 0; a < dim_; ++a) {
        m[a] = std::int64_t(idx % std::size_t(n_[a]));
        idx /= std::size_t(n_[a]);
    }
    return m;
}

std::size_t Grid::flat_index(const std::array<std::int64_t, 3>& m) const {
    std::size_t idx = 0;
    for (int a = 0; a < dim_; ++a) idx += std::size_t(m[a]) * strides_[a];
    return idx;
}

Point Grid::node(std::size_t idx) const {
    Point p{0.0, 0.0, 0.0};
    const auto m = multi_index(idx);
    for (int a = 0; a < dim_; ++a) p[a] = coord(a, m[a]);
    return p;
}

bool Grid::operator==(const Grid& o) const {
    if (dim_ != o.dim_) return false;
    for (int a = 0; a < dim_; ++a) {
        if (n_[a] != o.n_[a] || extents_[a].lo != o.extents_[a].lo || extents_[a].hi != o.extents_[a].hi)
            return false;
    }
    return true;
}

Mask::Mask(const Grid& grid, std::vector<std::uint8_t> bits) : bits_(std::move(bits)), cellvol_(grid.cell_volume()) {
    if (bits_.size() != grid.size()) fail(ErrorKind::ShapeMismatch, "mask length does not match grid");
    count_ = std::size_t(std::count_if(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b != 0; }));
    volume_ = double(count_) * cellvol_;
}

Mask Mask::full(const Grid& grid) { return Mask(grid, std::vector<std::uint8_t>(grid.size(), 1)); }
Mask Mask::empty(const Grid& grid) { return Mask(grid, std::vector<std::uint8_t>(grid.size(), 0)); }

Mask Mask::from_predicate(const Grid& grid, const std::function<bool(const Point&)>& pred) {
    std::vector<std::uint8_t> bits(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) bits[i] = pred(grid.node(i)) ? 1 : 0;
    return Mask(grid, std::move(bits));
}

bool Mask::subset_of(const Mask& other) const {
    if (other.size() != size()) return false;
    for (std::size_t i = 0; i < bits_.size(); ++i)
        if (bits_[i] && !other.bits_[i]) return false;
    return true;
}

Mask Mask::operator&(const Mask& other) const {
    if (other.size() != size()) fail(ErrorKind::ShapeMismatch, "masks on different grids");
    Mask out = *this;
    out.count_ = 0;
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        out.bits_[i] = (bits_[i] && other.bits_[i]) ? 1 : 0;
        out.count_ += out.bits_[i];
    }
    out.volume_ = double(out.count_) * cellvol_;
    return out;
}

Mask Mask::operator|(const Mask& other) const {
    if (other.size() != size()) fail(ErrorKind::ShapeMismatch, "masks on different grids");
    Mask out = *this;
    out.count_ = 0;
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        out.bits_[i] = (bits_[i] || other.bits_[i]) ? 1 : 0;
        out.count_ += out.bits_[i];
    }
    out.volume_ = double(out.count_) * cellvol_;
    return out;
}

Mask Mask::operator~() const {
    Mask out = *this;
    for (auto& b : out.bits_) b = b ? 0 : 1;
    out.count_ = bits_.size() - count_;
    out.volume_ = double(out.count_) * cellvol_;
    return out;
}

GridFunction::GridFunction(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size()) fail(ErrorKind::ShapeMismatch, "grid function length does not match grid");
}

GridFunction GridFunction::sample(const Grid& g, const std::function<double(const Point&)>& f) {
    GridFunction out(g);
    for (std::size_t i = 0; i < g.size(); ++i) out.values[i] = f(g.node(i));
    return out;
}

Grid build_grid(int dim, std::span<const Interval> extents, std::span<const std::int64_t> n) {
    return Grid(dim, extents, n);
}

Grid refine(const Grid& grid, std::int64_t node_budget) {
    std::array<Interval, 3> ext{};
    std::array<std::int64_t, 3> n{1, 1, 1};
    std::int64_t total = 1;
    for (int a = 0; a < grid.dim(); ++a) {
        ext[a] = grid.extent(a);
        n[a] = 2 * grid.n(a) + 1;
        total *= n[a];
        if (total > node_budget)
            fail(ErrorKind::InvalidArgument, "refined grid exceeds node budget of " + std::to_string(node_budget));
    }
    return Grid(grid.dim(), ext, n);
}

namespace {
double snap_tol(const Grid& grid, int axis) {
    const auto& e = grid.extent(axis);
    return 1e-12 * std::max({std::abs(e.lo), std::abs(e.hi), e.hi - e.lo});
}
}  // namespace

std::vector<Mask> exhaustion(const Grid& grid, int m) {
    require(m >= 1, "exhaustion needs m >= 1");
    std::vector<Mask> out;
    out.reserve(std::size_t(m));
    for (int k = 1; k <= m; ++k) {
        const double frac = double(m - k) / double(m);
        Box box;
        for (int a = 0; a < grid.dim(); ++a) {
            const auto& e = grid.extent(a);
            const double margin = frac * 0.5 * (e.hi - e.lo);
            box.sides[a] = {e.lo + margin, e.hi - margin};
        }
        Mask mk = Mask::from_predicate(grid, [&](const Point& p) {
            for (int a = 0; a < grid.dim(); ++a) {
                const double t = snap_tol(grid, a);
                if (p[a] < box.sides[a].lo - t || p[a] > box.sides[a].hi + t) return false;
            }
            return true;
        });
        if (mk.is_empty())
            fail(ErrorKind::InvalidArgument,
                 "exhaustion member " + std::to_string(k) + " of " + std::to_string(m) + " captures no nodes");
        out.push_back(std::move(mk));
    }
    return out;
}

Mask compact_mask(const Grid& grid, const Box& box) {
    for (int a = 0; a < grid.dim(); ++a) {
        const auto& e = grid.extent(a);
        const double t = snap_tol(grid, a);
        require(box.sides[a].lo <= box.sides[a].hi, "compact box has inverted side on axis " + std::to_string(a));
        require(box.sides[a].lo >= e.lo - t && box.sides[a].hi <= e.hi + t, "compact box leaves the grid extents");
    }
    Mask mk = Mask::from_predicate(grid, [&](const Point& p) {
        for (int a = 0; a < grid.dim(); ++a) {
            const double t = snap_tol(grid, a);
            if (p[a] < box.sides[a].lo - t || p[a] > box.sides[a].hi + t) return false;
        }
        return true;
    });
    if (mk.is_empty()) fail(ErrorKind::InvalidArgument, "compact box captures no grid nodes");
    return mk;
}

void write_grid_text(const GridFunction& f, std::ostream& os) {
    const Grid& g = f.grid;
    os << g.dim();
    for (int a = 0; a < g.dim(); ++a) os << ' ' << g.n(a);
    os << std::setprecision(17);
    for (int a = 0; a < g.dim(); ++a) os << ' ' << g.extent(a).lo << ' ' << g.extent(a).hi;
    os << '\n';
    for (double v : f.values) os << v << '\n';
}

void write_grid_text(const GridFunction& f, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
    write_grid_text(f, os);
    if (!os) fail(ErrorKind::Io, "write to '" + path.string() + "' failed");
}

GridFunction read_grid_text(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) fail(ErrorKind::Io, "grid-text: missing header line");
    std::istringstream hs(header);
    int dim = 0;
    if (!(hs >> dim) || dim < 1 || dim > 3) fail(ErrorKind::Io, "grid-text: bad dimension in header");
    std::array<std::int64_t, 3> n{1, 1, 1};
    std::array<Interval, 3> ext{};
    for (int a = 0; a < dim; ++a)
        if (!(hs >> n[a])) fail(ErrorKind::Io, "grid-text: bad node count in header");
    for (int a = 0; a < dim; ++a)
        if (!(hs >> ext[a].lo >> ext[a].hi)) fail(ErrorKind::Io, "grid-text: bad extents in header");
    Grid g(dim, ext, n);
    std::vector<double> values;
    values.reserve(g.size());
    double v = 0.0;
    while (values.size() < g.size() && (is >> v)) values.push_back(v);
    if (values.size() != g.size())
        fail(ErrorKind::Io, "grid-text: expected " + std::to_string(g.size()) + " values, got " +
                                std::to_string(values.size()));
    return GridFunction(g, std::move(values));
}

GridFunction read_grid_text(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) fail(ErrorKind::Io, "cannot open '" + path.string() + "'");
    return read_grid_text(is);
}

}  // namespace spectragap
