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
#include <string>
#include <vector>

#include "json.hpp"
#include "spectragap/aap.hpp"
#include "spectragap/capacity.hpp"
#include "spectragap/criticality.hpp"

namespace spectragap {

using Json = nlohmann::ordered_json;

/// Region descriptor: closed box, closed ball, or the default centered half box.
struct Region {
    enum class Kind { Default, Box, Ball };
    Kind kind = Kind::Default;
    Box box;
    Point center{0.0, 0.0, 0.0};
    double radius = 0.0;
};

Mask region_mask(const Grid& grid, const Region& r);

struct FunctionSource {
    enum class Kind { Power, File, GroundState };
    Kind kind = Kind::Power;
    double coef = 1.0;
    std::array<double, 3> exponent{0.0, 0.0, 0.0};
    std::filesystem::path path;
};

struct ExportConfig {
    std::string format;  // "", "json", "grid-text", "csv-profile"
    std::filesystem::path path;
    int axis = 0;
    std::optional<Point> through;
};

struct RunConfig {
    Grid grid;
    Problem problem;
    EigenOptions eig;
    GapOptions gap;
    ClassifyOptions classify;
    struct {
        Region K;
        bool mazya = false;
        std::string family = "dyadic";
        int min_nodes = 4;
        double tol = 0.05;
    } capacity;
    SupersolutionOptions aap;
    struct {
        FunctionSource u1, u2;
    } improve;
    struct {
        std::string kind = "oscillation";
        double c = 0.0625, alpha = -0.9, beta = -0.2;
        int dim = 3;
        std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
        double slope_tol = 0.02;
        Region K;
        int spikes = 24, bumps = 24;
        std::uint64_t seed = 12345;
        double threshold = 1e-3;
    } probe;
    ExportConfig output;
    /// full config with every default filled in
    Json resolved;
};

/// Parses one potential object (`variant` plus its parameters); `resolved` receives the filled-in copy.
PotentialSpec parse_potential(const Json& src, int dim, const std::filesystem::path& base_dir, Json& resolved);

/// Sets a dotted key; the value is parsed as JSON and kept as a string otherwise.
void apply_override(Json& config, const std::string& assignment);

/// Fills defaults, validates (errors name the offending key path) and parses.
RunConfig parse_config(const Json& user, const std::filesystem::path& base_dir);

struct RunOutcome {
    Json report;
    int exit_code = 0;  // 0 ok, 1 config error, 2 numerical failure
    std::string diagnostic;
};

extern const std::vector<std::string> kCommands;

/// Runs one command on an in-memory config and returns the report.
RunOutcome run_command(const std::string& command, const Json& config, const std::vector<std::string>& overrides,
                       const std::filesystem::path& base_dir);
RunOutcome run_command_file(const std::string& command, const std::filesystem::path& config_path,
                            const std::vector<std::string>& overrides);

/// JSON text with insertion-ordered keys and every float printed with 17 significant digits.
std::string dump_json(const Json& j, int indent = 2);

/// (coordinate, value) rows along one axis line through the node nearest to `through`.
void write_csv_profile(const GridFunction& f, int axis, const Point& through, const std::filesystem::path& path);

}  // namespace spectragap
