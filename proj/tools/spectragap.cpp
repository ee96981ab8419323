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
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spectragap/spectragap.h"

int main(int argc, char** argv) {
    CLI::App app{"Spectral gap, criticality and capacity computations for Schroedinger forms"};
    app.set_version_flag("--version", std::string(sg_version()));
    std::string command, config, out;
    std::vector<std::string> sets;
    app.add_option("command", command, "classify | eigen | capacity | aap | improve | probe")
        ->required()
        ->check(CLI::IsMember({"classify", "eigen", "capacity", "aap", "improve", "probe"}));
    app.add_option("--config", config, "JSON config file")->required();
    app.add_option("--set", sets, "override key=value (dotted key, JSON value), repeatable, last wins");
    app.add_option("--out", out, "report path (default: standard output)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    std::vector<const char*> ov;
    for (const auto& s : sets) ov.push_back(s.c_str());
    char* report = nullptr;
    int exit_code = 0;
    const sg_status st = sg_run_file(command.c_str(), config.c_str(), ov.data(), ov.size(), &report, &exit_code);
    if (st != SG_OK) {
        std::cerr << "spectragap: " << sg_status_name(st) << ": " << sg_last_error() << "\n";
        return st == SG_ERR_CONFIG || st == SG_ERR_IO || st == SG_ERR_INVALID_ARGUMENT ? 1 : 2;
    }
    if (exit_code != 0) std::cerr << "spectragap: " << sg_last_error() << "\n";

    if (out.empty()) {
        std::fputs(report, stdout);
    } else {
        std::ofstream os(out, std::ios::binary);
        os << report;
        if (!os) {
            std::cerr << "spectragap: cannot write " << out << "\n";
            sg_string_free(report);
            return 1;
        }
    }
    sg_string_free(report);
    return exit_code;
}
