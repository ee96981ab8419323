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

#include "spectragap/quadrature.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "spectragap/error.hpp"

namespace spectragap {

namespace {

// 4-point Gauss-Legendre on [-1, 1]
constexpr std::array<double, 4> kGaussX{-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                        0.8611363115940526};
constexpr std::array<double, 4> kGaussW{0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                        0.3478548451374538};

struct SubBox {
    Point center;
    Point half;
};

class Integrator {
public:
    Integrator(const std::function<double(const Point&)>& f, int dim, std::span<const Point> poles,
               const QuadratureOptions& opts)
        : f_(f), dim_(dim), poles_(poles), opts_(opts) {}

    // poles within 1e-9 of the root box width count as touching every box they graze
    void set_root(const SubBox& root) {
        for (int a = 0; a < dim_; ++a) snap_[a] = 1e-9 * root.half[a];
    }

    double gauss(const SubBox& b) const {
        double sum = 0.0;
        const int n0 = 4, n1 = dim_ > 1 ? 4 : 1, n2 = dim_ > 2 ? 4 : 1;
        Point x = b.center;
        for (int k = 0; k < n2; ++k) {
            double wk = 1.0;
            if (dim_ > 2) {
                x[2] = b.center[2] + b.half[2] * kGaussX[k];
                wk = kGaussW[k];
            }
            for (int j = 0; j < n1; ++j) {
                double wj = wk;
                if (dim_ > 1) {
                    x[1] = b.center[1] + b.half[1] * kGaussX[j];
                    wj *= kGaussW[j];
                }
                for (int i = 0; i < n0; ++i) {
                    x[0] = b.center[0] + b.half[0] * kGaussX[i];
                    sum += wj * kGaussW[i] * f_(x);
                }
            }
        }
        double jac = 1.0;
        for (int a = 0; a < dim_; ++a) jac *= b.half[a];
        return sum * jac;
    }

    std::vector<SubBox> children(const SubBox& b) const {
        const int count = 1 << dim_;
        std::vector<SubBox> out(std::size_t(count), b);
        for (int c = 0; c < count; ++c) {
            for (int a = 0; a < dim_; ++a) {
                out[c].half[a] = 0.5 * b.half[a];
                out[c].center[a] = b.center[a] + ((c >> a) & 1 ? 0.5 : -0.5) * b.half[a];
            }
        }
        return out;
    }

    bool contains_pole(const SubBox& b) const {
        for (const auto& p : poles_) {
            bool inside = true;
            for (int a = 0; a < dim_ && inside; ++a)
                inside = std::abs(p[a] - b.center[a]) <= b.half[a] + snap_[a];
            if (inside) return true;
        }
        return false;
    }

    double regular(const SubBox& b, int depth, double whole) {
        const auto kids = children(b);
        double split = 0.0;
        std::array<double, 8> parts{};
        for (std::size_t c = 0; c < kids.size(); ++c) {
            parts[c] = gauss(kids[c]);
            split += parts[c];
        }
        const double err = std::abs(split - whole);
        if (err <= opts_.rel_tol * std::abs(split) || err <= abs_floor_ * volume(b)) return split;
        if (depth + 1 >= opts_.max_depth) {
            unresolved_ += err;
            return split;
        }
        double sum = 0.0;
        for (std::size_t c = 0; c < kids.size(); ++c) sum += regular(kids[c], depth + 1, parts[c]);
        return sum;
    }

    // totals[k]: integral over b with pole cells truncated (single Gauss rule) at depth k
    void chain(const SubBox& b, int depth, std::vector<double>& totals) {
        const double here = gauss(b);
        totals[std::size_t(depth)] += here;
        if (depth == opts_.max_depth) return;
        for (const auto& kid : children(b)) {
            if (contains_pole(kid)) {
                chain(kid, depth + 1, totals);
            } else {
                const double v = regular(kid, depth + 1, gauss(kid));
                for (int k = depth + 1; k <= opts_.max_depth; ++k) totals[std::size_t(k)] += v;
            }
        }
    }

    double volume(const SubBox& b) const {
        double v = 1.0;
        for (int a = 0; a < dim_; ++a) v *= 2.0 * b.half[a];
        return v;
    }

    void set_abs_floor(double f) { abs_floor_ = f; }
    bool converged(double total) const { return unresolved_ <= opts_.rel_tol * std::abs(total); }

private:
    const std::function<double(const Point&)>& f_;
    int dim_;
    std::span<const Point> poles_;
    QuadratureOptions opts_;
    double abs_floor_ = 0.0;
    Point snap_{0.0, 0.0, 0.0};
    double unresolved_ = 0.0;
};

// Aitken delta-squared on three consecutive partial sums; falls back to the
// last term when the differences are not geometrically contracting.
double aitken(double t0, double t1, double t2) {
    const double d0 = t1 - t0;
    const double d1 = t2 - t1;
    if (d0 == 0.0 || d1 == 0.0) return t2;
    const double q = d1 / d0;
    if (!(q > 0.0 && q < 0.95)) return t2;
    return t2 + d1 * q / (1.0 - q);
}

}  // namespace

CellAverage cell_average(const std::function<double(const Point&)>& f, int dim, const Point& center,
                         const Point& half, std::span<const Point> poles, const QuadratureOptions& opts) {
    require(dim >= 1 && dim <= 3, "cell_average: dimension must be 1..3");
    require(opts.max_depth >= 3, "cell_average: max_depth must be at least 3");
    Integrator integ(f, dim, poles, opts);
    const SubBox root{center, half};
    integ.set_root(root);
    const double vol = integ.volume(root);
    require(vol > 0.0, "cell_average: degenerate box");

    CellAverage out;
    const double first = integ.gauss(root);
    integ.set_abs_floor(1e-3 * opts.rel_tol * std::abs(first) / vol);
    if (!integ.contains_pole(root)) {
        const double total = integ.regular(root, 0, first);
        out.value = total / vol;
        out.converged = integ.converged(total);
        return out;
    }
    std::vector<double> totals(std::size_t(opts.max_depth) + 1, 0.0);
    integ.chain(root, 0, totals);
    const auto D = std::size_t(opts.max_depth);
    const double best = aitken(totals[D - 2], totals[D - 1], totals[D]);
    const double prev = aitken(totals[D - 3], totals[D - 2], totals[D - 1]);
    out.value = best / vol;
    out.max_depth_used = opts.max_depth;
    out.converged = integ.converged(best) && std::abs(best - prev) <= opts.rel_tol * std::abs(best);
    return out;
}

}  // namespace spectragap
