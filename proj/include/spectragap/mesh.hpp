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
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace spectragap {

using Point = std::array<double, 3>;

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

/**
 * @brief Uniform tensor grid on a box with homogeneous Dirichlet boundary.
 *
 * Only interior nodes are stored; node i on axis a sits at lo_a + (i+1) h_a.
 * Flat indices are row-major with axis 0 fastest.
 */
class Grid {
public:
    static constexpr std::int64_t kDefaultNodeBudget = std::int64_t{1} << 25;

    Grid() = default;
    Grid(int dim, std::span<const Interval> extents, std::span<const std::int64_t> n);

    int dim() const noexcept { return dim_; }
    const Interval& extent(int axis) const { return extents_[axis]; }
    std::int64_t n(int axis) const { return n_[axis]; }
    double h(int axis) const { return h_[axis]; }
    std::size_t size() const noexcept { return size_; }
    double cell_volume() const noexcept { return cellvol_; }
    double min_h() const noexcept;

    double coord(int axis, std::int64_t i) const { return extents_[axis].lo + double(i + 1) * h_[axis]; }
    Point node(std::size_t idx) const;
    std::array<std::int64_t, 3> multi_index(std::size_t idx) const;
    std::size_t flat_index(const std::array<std::int64_t, 3>& m) const;
    /// Stride of a unit step along `axis` in flat indexing.
    std::size_t stride(int axis) const { return strides_[axis]; }

    bool operator==(const Grid& other) const;
    bool operator!=(const Grid& other) const { return !(*this == other); }

private:
    int dim_ = 0;
    std::array<Interval, 3> extents_{};
    std::array<std::int64_t, 3> n_{1, 1, 1};
    std::array<double, 3> h_{1.0, 1.0, 1.0};
    std::array<std::size_t, 3> strides_{1, 1, 1};
    std::size_t size_ = 0;
    double cellvol_ = 0.0;
};

/// Bitset over interior nodes plus its cell-volume measure.
class Mask {
public:
    Mask() = default;
    Mask(const Grid& grid, std::vector<std::uint8_t> bits);

    static Mask full(const Grid& grid);
    static Mask empty(const Grid& grid);
    static Mask from_predicate(const Grid& grid, const std::function<bool(const Point&)>& pred);

    bool operator[](std::size_t i) const { return bits_[i] != 0; }
    std::size_t size() const noexcept { return bits_.size(); }
    std::size_t count() const noexcept { return count_; }
    double volume() const noexcept { return volume_; }
    bool is_empty() const noexcept { return count_ == 0; }
    const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

    bool subset_of(const Mask& other) const;
    Mask operator&(const Mask& other) const;
    Mask operator|(const Mask& other) const;
    Mask operator~() const;

private:
    std::vector<std::uint8_t> bits_;
    std::size_t count_ = 0;
    double volume_ = 0.0;
    double cellvol_ = 0.0;
};

/// Real value per interior node of its owning grid.
struct GridFunction {
    Grid grid;
    std::vector<double> values;

    GridFunction() = default;
    explicit GridFunction(const Grid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
    GridFunction(const Grid& g, std::vector<double> v);

    static GridFunction sample(const Grid& g, const std::function<double(const Point&)>& f);

    std::size_t size() const noexcept { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
};

Grid build_grid(int dim, std::span<const Interval> extents, std::span<const std::int64_t> n);
Grid refine(const Grid& grid, std::int64_t node_budget = Grid::kDefaultNodeBudget);

/// Nested sub-boxes shrinking by a margin of (m-k)/m of the half-width per side.
std::vector<Mask> exhaustion(const Grid& grid, int m);

struct Box {
    std::array<Interval, 3> sides{};
};

/// Nodes whose coordinates lie in the closed box.
Mask compact_mask(const Grid& grid, const Box& box);

// Text exchange format: header `dim n1 [n2 [n3]] a1 b1 [a2 b2 [a3 b3]]`,
// then one value per line in flat order.
void write_grid_text(const GridFunction& f, std::ostream& os);
void write_grid_text(const GridFunction& f, const std::filesystem::path& path);
GridFunction read_grid_text(std::istream& is);
GridFunction read_grid_text(const std::filesystem::path& path);

}  // namespace spectragap
