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
#include "spectragap/spectragap.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "spectragap/capacity.hpp"
#include "spectragap/error.hpp"
#include "spectragap/pipeline.hpp"
#include "spectragap/spectral.hpp"

struct sg_grid {
    spectragap::Grid grid;
};
struct sg_field {
    spectragap::PotentialField field;
};
struct sg_form {
    spectragap::DiscreteForm form;
};

namespace {

using namespace spectragap;

thread_local std::string g_last_error;

sg_status status_of(ErrorKind k) {
    switch (k) {
    case ErrorKind::InvalidArgument:
        return SG_ERR_INVALID_ARGUMENT;
    case ErrorKind::ShapeMismatch:
        return SG_ERR_SHAPE;
    case ErrorKind::NotConverged:
        return SG_ERR_NOT_CONVERGED;
    case ErrorKind::Indefinite:
        return SG_ERR_INDEFINITE;
    case ErrorKind::Io:
        return SG_ERR_IO;
    case ErrorKind::Config:
        return SG_ERR_CONFIG;
    case ErrorKind::Internal:
        break;
    }
    return SG_ERR_INTERNAL;
}

template <class F>
sg_status guarded(F&& body) {
    try {
        g_last_error.clear();
        body();
        return SG_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return status_of(e.kind());
    } catch (const nlohmann::json::exception& e) {
        g_last_error = e.what();
        return SG_ERR_CONFIG;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return SG_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return SG_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown exception";
        return SG_ERR_INTERNAL;
    }
}

void need(const void* p, const char* what) {
    if (!p) fail(ErrorKind::InvalidArgument, std::string(what) + " is NULL");
}

char* copy_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

std::vector<std::string> collect(const char* const* overrides, size_t n) {
    std::vector<std::string> v;
    if (n) need(overrides, "overrides");
    for (size_t i = 0; i < n; ++i) {
        need(overrides[i], "override entry");
        v.emplace_back(overrides[i]);
    }
    return v;
}

sg_status finish_run(const RunOutcome& r, char** report, int* exit_code) {
    return guarded([&] {
        *report = copy_string(dump_json(r.report));
        *exit_code = r.exit_code;
        g_last_error = r.diagnostic;
    });
}

}  // namespace

extern "C" {

const char* sg_version(void) { return SPECTRAGAP_VERSION; }

const char* sg_last_error(void) { return g_last_error.c_str(); }

const char* sg_status_name(sg_status s) {
    switch (s) {
    case SG_OK:
        return "ok";
    case SG_ERR_INVALID_ARGUMENT:
        return "invalid_argument";
    case SG_ERR_SHAPE:
        return "shape_mismatch";
    case SG_ERR_NOT_CONVERGED:
        return "not_converged";
    case SG_ERR_INDEFINITE:
        return "indefinite";
    case SG_ERR_IO:
        return "io";
    case SG_ERR_CONFIG:
        return "config";
    case SG_ERR_INTERNAL:
        return "internal";
    }
    return "unknown";
}

sg_status sg_grid_create(int dim, const double* lo, const double* hi, const int64_t* n, sg_grid** out) {
    return guarded([&] {
        need(lo, "lo");
        need(hi, "hi");
        need(n, "n");
        need(out, "out");
        require(dim >= 1 && dim <= 3, "dim must be 1, 2 or 3");
        std::vector<Interval> ext;
        std::vector<std::int64_t> nn;
        for (int a = 0; a < dim; ++a) {
            ext.push_back({lo[a], hi[a]});
            nn.push_back(n[a]);
        }
        *out = new sg_grid{build_grid(dim, ext, nn)};
    });
}

sg_status sg_grid_refine(const sg_grid* grid, sg_grid** out) {
    return guarded([&] {
        need(grid, "grid");
        need(out, "out");
        *out = new sg_grid{refine(grid->grid)};
    });
}

size_t sg_grid_node_count(const sg_grid* grid) { return grid ? grid->grid.size() : 0; }

double sg_grid_cell_volume(const sg_grid* grid) { return grid ? grid->grid.cell_volume() : 0.0; }

void sg_grid_destroy(sg_grid* grid) { delete grid; }

sg_status sg_field_from_json(const sg_grid* grid, const char* potential_json, sg_field** out) {
    return guarded([&] {
        need(grid, "grid");
        need(potential_json, "potential_json");
        need(out, "out");
        Json resolved;
        const PotentialSpec spec =
            parse_potential(Json::parse(potential_json), grid->grid.dim(), std::filesystem::current_path(), resolved);
        *out = new sg_field{eval_catalog(spec, grid->grid)};
    });
}

sg_status sg_field_values(const sg_field* field, double* out, size_t len) {
    return guarded([&] {
        need(field, "field");
        need(out, "out");
        if (len != field->field.grid.size()) fail(ErrorKind::ShapeMismatch, "sg_field_values: length mismatch");
        for (size_t i = 0; i < len; ++i) out[i] = field->field.value(i);
    });
}

void sg_field_destroy(sg_field* field) { delete field; }

sg_status sg_form_assemble(const sg_grid* grid, const sg_field* field, sg_form** out) {
    return guarded([&] {
        need(grid, "grid");
        need(field, "field");
        need(out, "out");
        *out = new sg_form{assemble(grid->grid, field->field)};
    });
}

sg_status sg_form_qv(const sg_form* form, const double* xi, size_t len, double* out) {
    return guarded([&] {
        need(form, "form");
        need(xi, "xi");
        need(out, "out");
        if (len != form->form.size()) fail(ErrorKind::ShapeMismatch, "sg_form_qv: length mismatch");
        *out = form->form.qv(std::span<const double>(xi, len));
    });
}

void sg_form_destroy(sg_form* form) { delete form; }

sg_status sg_principal_eig(const sg_form* form, double* value, double* vector, size_t len) {
    return guarded([&] {
        need(form, "form");
        need(value, "value");
        if (vector && len != form->form.size())
            fail(ErrorKind::ShapeMismatch, "sg_principal_eig: vector length mismatch");
        const SpectralResult r = principal_eig(form->form);
        if (!r.converged) fail(ErrorKind::NotConverged, "principal eigensolve did not converge");
        *value = r.value;
        if (vector) std::copy(r.vector.values.begin(), r.vector.values.end(), vector);
    });
}

sg_status sg_capacity(const sg_grid* grid, const uint8_t* K, size_t len, double* out) {
    return guarded([&] {
        need(grid, "grid");
        need(K, "K");
        need(out, "out");
        if (len != grid->grid.size()) fail(ErrorKind::ShapeMismatch, "sg_capacity: mask length mismatch");
        std::vector<std::uint8_t> bits(K, K + len);
        for (auto& b : bits) b = b ? 1 : 0;
        *out = cap(grid->grid, Mask(grid->grid, std::move(bits))).value;
    });
}

sg_status sg_run(const char* command, const char* config_json, const char* base_dir, const char* const* overrides,
                 size_t n_overrides, char** report, int* exit_code) {
    RunOutcome r;
    const sg_status s = guarded([&] {
        need(command, "command");
        need(config_json, "config_json");
        need(report, "report");
        need(exit_code, "exit_code");
        const auto ov = collect(overrides, n_overrides);
        Json cfg;
        try {
            cfg = Json::parse(config_json);
        } catch (const Json::parse_error& e) {
            fail(ErrorKind::Config, std::string("invalid JSON: ") + e.what());
        }
        r = run_command(command, cfg, ov, base_dir ? std::filesystem::path(base_dir) : std::filesystem::current_path());
    });
    if (s != SG_OK) return s;
    return finish_run(r, report, exit_code);
}

sg_status sg_run_file(const char* command, const char* config_path, const char* const* overrides, size_t n_overrides,
                      char** report, int* exit_code) {
    RunOutcome r;
    const sg_status s = guarded([&] {
        need(command, "command");
        need(config_path, "config_path");
        need(report, "report");
        need(exit_code, "exit_code");
        r = run_command_file(command, config_path, collect(overrides, n_overrides));
    });
    if (s != SG_OK) return s;
    return finish_run(r, report, exit_code);
}

void sg_string_free(char* s) { std::free(s); }

}  // extern "C"
