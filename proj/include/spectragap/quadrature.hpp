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

#include <functional>
#include <span>

#include "spectragap/mesh.hpp"

namespace spectragap {

struct QuadratureOptions {
    int max_depth = 12;
    double rel_tol = 1e-6;
};

struct CellAverage {
    double value = 0.0;
    bool converged = false;  // every regular sub-box met rel_tol before max_depth
    int max_depth_used = 0;
};

/**
 * Average of f over the closed box [center - half, center + half] by adaptive
 * dyadic subdivision with tensor Gauss-Legendre rules.
 *
 * Sub-boxes that contain one of `poles` are always split down to max_depth.
 * The partial sums obtained by truncating the pole chain at the last three
 * depths are Aitken-extrapolated, which removes the geometric truncation
 * error of homogeneous singularities |x - p|^{-s} with s < dim.
 */
CellAverage cell_average(const std::function<double(const Point&)>& f, int dim, const Point& center,
                         const Point& half, std::span<const Point> poles, const QuadratureOptions& opts = {});

}  // namespace spectragap
