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
#include "doctest.h"
#include "property_suites.hpp"

using namespace spectragap::props;

namespace {
void expect_clean(const SuiteResult& r) {
    INFO(r.name << ": " << r.first_failure);
    CHECK(r.cases >= 100);
    CHECK(r.failures == 0);
}
}  // namespace

TEST_CASE("property: form symmetry") { expect_clean(form_symmetry(100, 101)); }
TEST_CASE("property: V-monotonicity of qv") { expect_clean(potential_monotonicity(100, 202)); }
TEST_CASE("property: mask monotonicity of the principal eigenvalue") { expect_clean(mask_monotonicity(100, 303)); }
TEST_CASE("property: capacity monotonicity and subadditivity") { expect_clean(capacity_monotonicity(100, 404)); }
TEST_CASE("property: obstacle complementarity") { expect_clean(obstacle_complementarity(100, 505)); }
TEST_CASE("property: verdict invariance under weight scaling") { expect_clean(weight_scaling(100, 606)); }
