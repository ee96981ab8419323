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
#include <cmath>
#include <cstring>
#include <numbers>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "spectragap/spectragap.h"

TEST_CASE("c api grid, field and form handles") {
    const double lo[] = {0.0}, hi[] = {1.0};
    const int64_t n[] = {127};
    sg_grid* g = nullptr;
    REQUIRE(sg_grid_create(1, lo, hi, n, &g) == SG_OK);
    CHECK(sg_grid_node_count(g) == 127);
    CHECK(sg_grid_cell_volume(g) == doctest::Approx(1.0 / 128.0));

    sg_grid* fine = nullptr;
    REQUIRE(sg_grid_refine(g, &fine) == SG_OK);
    CHECK(sg_grid_node_count(fine) == 255);
    sg_grid_destroy(fine);

    sg_field* f = nullptr;
    REQUIRE(sg_field_from_json(g, R"({"variant": "constant", "c": 2.5})", &f) == SG_OK);
    std::vector<double> v(127);
    REQUIRE(sg_field_values(f, v.data(), v.size()) == SG_OK);
    CHECK(v[17] == 2.5);
    CHECK(sg_field_values(f, v.data(), 5) == SG_ERR_SHAPE);

    sg_form* form = nullptr;
    REQUIRE(sg_form_assemble(g, f, &form) == SG_OK);
    double lam = 0.0;
    std::vector<double> vec(127);
    REQUIRE(sg_principal_eig(form, &lam, vec.data(), vec.size()) == SG_OK);
    const double h = 1.0 / 128.0;
    const double exact = 2.0 / (h * h) * (1.0 - std::cos(std::numbers::pi * h)) + 2.5;
    CHECK(lam == doctest::Approx(exact).epsilon(1e-8));
    double q = 0.0;
    REQUIRE(sg_form_qv(form, vec.data(), vec.size(), &q) == SG_OK);
    CHECK(q == doctest::Approx(lam).epsilon(1e-8));

    std::vector<uint8_t> K(127, 0);
    for (int i = 42; i <= 84; ++i) K[std::size_t(i)] = 1;
    double c = 0.0;
    REQUIRE(sg_capacity(g, K.data(), K.size(), &c) == SG_OK);
    // 1 / (x_a) + 1 / (1 - x_b) for the discrete node interval
    CHECK(c == doctest::Approx(1.0 / (43.0 * h) + 1.0 / (43.0 * h)).epsilon(1e-9));

    sg_form_destroy(form);
    sg_field_destroy(f);
    sg_grid_destroy(g);
}

TEST_CASE("c api errors") {
    sg_grid* g = nullptr;
    const double lo[] = {0.0}, hi[] = {1.0};
    const int64_t n[] = {0};
    CHECK(sg_grid_create(1, lo, hi, n, &g) == SG_ERR_INVALID_ARGUMENT);
    CHECK(std::strlen(sg_last_error()) > 0);
    CHECK(sg_grid_create(5, lo, hi, n, &g) == SG_ERR_INVALID_ARGUMENT);
    CHECK(sg_grid_create(1, nullptr, hi, n, &g) == SG_ERR_INVALID_ARGUMENT);

    const int64_t ok[] = {15};
    REQUIRE(sg_grid_create(1, lo, hi, ok, &g) == SG_OK);
    sg_field* f = nullptr;
    CHECK(sg_field_from_json(g, "{not json", &f) == SG_ERR_CONFIG);
    CHECK(sg_field_from_json(g, R"({"variant": "nope"})", &f) == SG_ERR_CONFIG);
    CHECK(std::string(sg_last_error()).find("potential.variant") != std::string::npos);
    CHECK(sg_field_from_json(g, R"({"variant": "orlicz"})", &f) == SG_ERR_INVALID_ARGUMENT);
    sg_grid_destroy(g);
    sg_grid_destroy(nullptr);
    CHECK(std::string(sg_status_name(SG_ERR_INDEFINITE)) == "indefinite");
    CHECK(std::string(sg_version()).size() > 0);
}

TEST_CASE("c api run") {
    char* report = nullptr;
    int code = -1;
    const char* ov[] = {"grid.n=255"};
    REQUIRE(sg_run("eigen", R"({"grid": {"dim": 1, "n": 31}})", nullptr, ov, 1, &report, &code) == SG_OK);
    CHECK(code == 0);
    const auto r = nlohmann::json::parse(report);
    sg_string_free(report);
    CHECK(r["config"]["grid"]["n"][0] == 255);
    CHECK(r["result"]["value"].get<double>() == doctest::Approx(std::numbers::pi * std::numbers::pi).epsilon(1e-3));

    REQUIRE(sg_run_file("eigen", "/nonexistent.json", nullptr, 0, &report, &code) == SG_OK);
    CHECK(code == 1);
    sg_string_free(report);
    CHECK(sg_run("eigen", "[", nullptr, nullptr, 0, &report, &code) == SG_ERR_CONFIG);
    CHECK(sg_run(nullptr, "{}", nullptr, nullptr, 0, &report, &code) == SG_ERR_INVALID_ARGUMENT);
}
