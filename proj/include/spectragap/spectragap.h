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
#ifndef SPECTRAGAP_SPECTRAGAP_H
#define SPECTRAGAP_SPECTRAGAP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SG_API __declspec(dllexport)
#else
#define SG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/*
 * Handles are opaque and owned by the caller; every *_create / *_assemble
 * has a matching *_destroy. A failed call returns a nonzero status and
 * leaves a message in sg_last_error() for the calling thread.
 */

typedef struct sg_grid sg_grid;
typedef struct sg_field sg_field;
typedef struct sg_form sg_form;

typedef enum sg_status {
    SG_OK = 0,
    SG_ERR_INVALID_ARGUMENT = 1,
    SG_ERR_SHAPE = 2,
    SG_ERR_NOT_CONVERGED = 3,
    SG_ERR_INDEFINITE = 4,
    SG_ERR_IO = 5,
    SG_ERR_CONFIG = 6,
    SG_ERR_INTERNAL = 7
} sg_status;

SG_API const char* sg_version(void);
SG_API const char* sg_last_error(void);
SG_API const char* sg_status_name(sg_status status);

/* Grid on the box prod [lo[a], hi[a]] with n[a] interior nodes per axis. */
SG_API sg_status sg_grid_create(int dim, const double* lo, const double* hi, const int64_t* n, sg_grid** out);
SG_API sg_status sg_grid_refine(const sg_grid* grid, sg_grid** out);
SG_API size_t sg_grid_node_count(const sg_grid* grid);
SG_API double sg_grid_cell_volume(const sg_grid* grid);
SG_API void sg_grid_destroy(sg_grid* grid);

/* Potential from a JSON object such as {"variant": "hardy", "c": 0.25}. */
SG_API sg_status sg_field_from_json(const sg_grid* grid, const char* potential_json, sg_field** out);
SG_API sg_status sg_field_values(const sg_field* field, double* out, size_t len);
SG_API void sg_field_destroy(sg_field* field);

/* Form of -Delta + V on the whole grid box. */
SG_API sg_status sg_form_assemble(const sg_grid* grid, const sg_field* field, sg_form** out);
SG_API sg_status sg_form_qv(const sg_form* form, const double* xi, size_t len, double* out);
SG_API void sg_form_destroy(sg_form* form);

/* Smallest eigenvalue with lumped mass; vector (may be NULL) receives the M-normalized eigenvector. */
SG_API sg_status sg_principal_eig(const sg_form* form, double* value, double* vector, size_t len);

/* Capacity of the node set {K[i] != 0} relative to the grid box. */
SG_API sg_status sg_capacity(const sg_grid* grid, const uint8_t* K, size_t len, double* out);

/*
 * Runs one CLI command. config_json is the config text, base_dir resolves
 * relative data paths (NULL: current directory). *report receives the JSON
 * report (free with sg_string_free) and *exit_code the CLI exit code
 * (0 ok, 1 config error, 2 numerical failure). Returns SG_OK whenever a
 * report was produced.
 */
SG_API sg_status sg_run(const char* command, const char* config_json, const char* base_dir,
                        const char* const* overrides, size_t n_overrides, char** report, int* exit_code);
SG_API sg_status sg_run_file(const char* command, const char* config_path, const char* const* overrides,
                             size_t n_overrides, char** report, int* exit_code);
SG_API void sg_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
