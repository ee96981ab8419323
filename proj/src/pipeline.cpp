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
#include "spectragap/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "spectragap/error.hpp"

namespace spectragap {

namespace fs = std::filesystem;

const std::vector<std::string> kCommands{"classify", "eigen", "capacity", "aap", "improve", "probe"};

namespace {

// ---------------------------------------------------------------------------
// Config reading. Every reader fills the resolved tree with the value it used.

[[noreturn]] void config_error(const std::string& path, const std::string& msg) {
    fail(ErrorKind::Config, path + ": " + msg);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

const Json& object_or_empty(const Json& parent, const std::string& key, const std::string& path) {
    static const Json empty = Json::object();
    if (!parent.contains(key) || parent.at(key).is_null()) return empty;
    const Json& j = parent.at(key);
    if (!j.is_object()) config_error(join(path, key), "expected an object");
    return j;
}

void check_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) config_error(join(path, it.key()), "unknown key");
    }
}

double as_number(const Json& j, const std::string& path) {
    if (!j.is_number()) config_error(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) config_error(path, "expected a finite number");
    return v;
}

std::int64_t as_integer(const Json& j, const std::string& path) {
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_number_float()) {
        const double v = j.get<double>();
        if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9e15) return std::int64_t(v);
    }
    config_error(path, "expected an integer");
}

double number(const Json& src, Json& out, const std::string& path, const char* key, double def) {
    const double v = src.contains(key) ? as_number(src.at(key), join(path, key)) : def;
    out[key] = v;
    return v;
}

std::int64_t integer(const Json& src, Json& out, const std::string& path, const char* key, std::int64_t def,
                     std::int64_t lo) {
    const std::int64_t v = src.contains(key) ? as_integer(src.at(key), join(path, key)) : def;
    if (v < lo) config_error(join(path, key), "must be at least " + std::to_string(lo));
    out[key] = v;
    return v;
}

bool boolean(const Json& src, Json& out, const std::string& path, const char* key, bool def) {
    bool v = def;
    if (src.contains(key)) {
        if (!src.at(key).is_boolean()) config_error(join(path, key), "expected true or false");
        v = src.at(key).get<bool>();
    }
    out[key] = v;
    return v;
}

std::string choice(const Json& src, Json& out, const std::string& path, const char* key, const std::string& def,
                   std::initializer_list<const char*> options) {
    std::string v = def;
    if (src.contains(key)) {
        if (!src.at(key).is_string()) config_error(join(path, key), "expected a string");
        v = src.at(key).get<std::string>();
    }
    bool ok = false;
    std::string list;
    for (const char* o : options) {
        ok = ok || v == o;
        list += list.empty() ? o : std::string(", ") + o;
    }
    if (!ok) config_error(join(path, key), "'" + v + "' is not one of " + list);
    out[key] = v;
    return v;
}

double positive(double v, const std::string& path) {
    if (!(v > 0.0)) config_error(path, "must be positive");
    return v;
}

Point point(const Json& j, int dim, const std::string& path) {
    if (!j.is_array() || int(j.size()) != dim) config_error(path, "expected an array of " + std::to_string(dim) + " numbers");
    Point p{0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a) p[std::size_t(a)] = as_number(j[std::size_t(a)], path + "[" + std::to_string(a) + "]");
    return p;
}

Json point_json(const Point& p, int dim) {
    Json a = Json::array();
    for (int i = 0; i < dim; ++i) a.push_back(p[std::size_t(i)]);
    return a;
}

Point point_or(const Json& src, Json& out, const std::string& path, const char* key, int dim, const Point& def) {
    const Point p = src.contains(key) ? point(src.at(key), dim, join(path, key)) : def;
    out[key] = point_json(p, dim);
    return p;
}

fs::path data_path(const Json& src, Json& out, const std::string& path, const char* key, const fs::path& base) {
    if (!src.contains(key) || !src.at(key).is_string()) config_error(join(path, key), "expected a file path");
    fs::path p = src.at(key).get<std::string>();
    if (p.is_relative()) p = base / p;
    p = fs::absolute(p).lexically_normal();
    if (!fs::exists(p)) fail(ErrorKind::Io, join(path, key) + ": file not found: " + p.string());
    out[key] = p.string();
    return p;
}

Point grid_center(const Grid& g) {
    Point c{0.0, 0.0, 0.0};
    for (int a = 0; a < g.dim(); ++a) c[std::size_t(a)] = 0.5 * (g.extent(a).lo + g.extent(a).hi);
    return c;
}

// ---------------------------------------------------------------------------

Grid parse_grid(const Json& root, Json& resolved) {
    const std::string path = "grid";
    const Json& src = object_or_empty(root, "grid", "");
    check_keys(src, path, {"dim", "n", "extents"});
    Json out = Json::object();
    const int dim = int(integer(src, out, path, "dim", 1, 1));
    if (dim > 3) config_error(join(path, "dim"), "must be 1, 2 or 3");
    std::vector<std::int64_t> n(std::size_t(dim), 63);
    if (src.contains("n")) {
        const Json& jn = src.at("n");
        if (jn.is_array()) {
            if (int(jn.size()) != dim) config_error(join(path, "n"), "expected " + std::to_string(dim) + " entries");
            for (int a = 0; a < dim; ++a)
                n[std::size_t(a)] = as_integer(jn[std::size_t(a)], join(path, "n") + "[" + std::to_string(a) + "]");
        } else {
            std::fill(n.begin(), n.end(), as_integer(jn, join(path, "n")));
        }
    }
    for (auto v : n)
        if (v < 1) config_error(join(path, "n"), "node counts must be positive");
    out["n"] = n;
    std::vector<Interval> ext(std::size_t(dim), Interval{});
    if (src.contains("extents")) {
        const Json& je = src.at("extents");
        if (!je.is_array() || int(je.size()) != dim)
            config_error(join(path, "extents"), "expected " + std::to_string(dim) + " [lo, hi] pairs");
        for (int a = 0; a < dim; ++a) {
            const std::string p = join(path, "extents") + "[" + std::to_string(a) + "]";
            const Json& pair = je[std::size_t(a)];
            if (!pair.is_array() || pair.size() != 2) config_error(p, "expected [lo, hi]");
            ext[std::size_t(a)] = {as_number(pair[0], p), as_number(pair[1], p)};
            if (!(ext[std::size_t(a)].hi > ext[std::size_t(a)].lo)) config_error(p, "requires lo < hi");
        }
    }
    Json je = Json::array();
    for (const auto& e : ext) je.push_back({e.lo, e.hi});
    out["extents"] = je;
    resolved["grid"] = out;
    try {
        return build_grid(dim, ext, n);
    } catch (const Error& e) {
        config_error(path, e.what());
    }
}

FieldSpec parse_field_spec(const Json& src, int dim, const std::string& path, Json& out) {
    if (!src.is_object()) config_error(path, "expected an object");
    const std::string kind = choice(src, out, path, "kind", "linear", {"constant", "linear", "power_pole"});
    if (kind == "constant") {
        check_keys(src, path, {"kind", "value"});
        return ConstantField{point_or(src, out, path, "value", dim, {0.0, 0.0, 0.0})};
    }
    if (kind == "linear") {
        check_keys(src, path, {"kind", "scale", "center"});
        LinearField f;
        f.scale = number(src, out, path, "scale", 1.0);
        f.center = point_or(src, out, path, "center", dim, {0.0, 0.0, 0.0});
        return f;
    }
    check_keys(src, path, {"kind", "coef", "centers", "exponent"});
    PowerPoleField f;
    const Point coef = point_or(src, out, path, "coef", dim, {0.0, 0.0, 0.0});
    const Point ex = point_or(src, out, path, "exponent", dim, {0.0, 0.0, 0.0});
    for (int a = 0; a < 3; ++a) {
        f.coef[std::size_t(a)] = coef[std::size_t(a)];
        f.exponent[std::size_t(a)] = ex[std::size_t(a)];
    }
    Json centers = Json::array();
    if (src.contains("centers")) {
        const Json& jc = src.at("centers");
        if (!jc.is_array() || int(jc.size()) != dim) config_error(join(path, "centers"), "expected one center per axis");
        for (int a = 0; a < dim; ++a) {
            f.centers[std::size_t(a)] =
                point(jc[std::size_t(a)], dim, join(path, "centers") + "[" + std::to_string(a) + "]");
            centers.push_back(point_json(f.centers[std::size_t(a)], dim));
        }
    } else {
        for (int a = 0; a < dim; ++a) centers.push_back(point_json({0.0, 0.0, 0.0}, dim));
    }
    out["centers"] = centers;
    return f;
}

}  // namespace

PotentialSpec parse_potential(const Json& src, int dim, const fs::path& base_dir, Json& out) {
    const std::string path = "potential";
    if (!src.is_object()) config_error(path, "expected an object");
    out = Json::object();
    const std::string variant =
        choice(src, out, path, "variant", "constant",
               {"constant", "hardy", "multipolar", "dense_pole_series", "sigma_alpha", "divergence_form",
                "from_ground", "orlicz", "bump_1d"});
    if (variant == "constant") {
        check_keys(src, path, {"variant", "c"});
        return ConstantPotential{number(src, out, path, "c", 0.0)};
    }
    if (variant == "hardy") {
        check_keys(src, path, {"variant", "center", "c"});
        HardyPotential p;
        p.center = point_or(src, out, path, "center", dim, {0.0, 0.0, 0.0});
        p.c = number(src, out, path, "c", hardy_constant(dim));
        return p;
    }
    if (variant == "multipolar") {
        check_keys(src, path, {"variant", "poles"});
        MultipolarPotential p;
        Json poles = Json::array();
        if (src.contains("poles")) {
            const Json& jp = src.at("poles");
            if (!jp.is_array()) config_error(join(path, "poles"), "expected an array");
            for (std::size_t i = 0; i < jp.size(); ++i) {
                const std::string pp = join(path, "poles") + "[" + std::to_string(i) + "]";
                if (!jp[i].is_object()) config_error(pp, "expected an object");
                check_keys(jp[i], pp, {"center", "a"});
                Json po = Json::object();
                Pole pole;
                pole.center = point_or(jp[i], po, pp, "center", dim, {0.0, 0.0, 0.0});
                pole.a = number(jp[i], po, pp, "a", 0.0);
                p.poles.push_back(pole);
                poles.push_back(po);
            }
        }
        out["poles"] = poles;
        return p;
    }
    if (variant == "dense_pole_series") {
        check_keys(src, path, {"variant", "centers", "weights", "truncation"});
        DensePoleSeries p;
        Json centers = Json::array(), weights = Json::array();
        if (src.contains("centers")) {
            const Json& jc = src.at("centers");
            if (!jc.is_array()) config_error(join(path, "centers"), "expected an array");
            for (std::size_t i = 0; i < jc.size(); ++i) {
                p.centers.push_back(point(jc[i], dim, join(path, "centers") + "[" + std::to_string(i) + "]"));
                centers.push_back(point_json(p.centers.back(), dim));
            }
        }
        if (src.contains("weights")) {
            const Json& jw = src.at("weights");
            if (!jw.is_array()) config_error(join(path, "weights"), "expected an array");
            for (std::size_t i = 0; i < jw.size(); ++i) {
                p.weights.push_back(as_number(jw[i], join(path, "weights") + "[" + std::to_string(i) + "]"));
                weights.push_back(p.weights.back());
            }
        }
        if (p.weights.size() != p.centers.size())
            config_error(join(path, "weights"), "needs one weight per center");
        out["centers"] = centers;
        out["weights"] = weights;
        p.truncation = std::size_t(integer(src, out, path, "truncation", std::int64_t(p.centers.size()), 0));
        return p;
    }
    if (variant == "sigma_alpha") {
        check_keys(src, path, {"variant", "c", "alpha"});
        SigmaAlphaPotential p;
        p.c = number(src, out, path, "c", 0.0625);
        p.alpha = number(src, out, path, "alpha", -0.5);
        return p;
    }
    if (variant == "divergence_form") {
        check_keys(src, path, {"variant", "field"});
        Json fo = Json::object();
        const Json& jf = src.contains("field") ? src.at("field") : Json::object();
        DivergenceFormPotential p{parse_field_spec(jf, dim, join(path, "field"), fo)};
        out["field"] = fo;
        return p;
    }
    if (variant == "from_ground") {
        check_keys(src, path, {"variant", "u", "f"});
        FromGroundPotential p;
        p.u_path = data_path(src, out, path, "u", base_dir).string();
        p.f_path = data_path(src, out, path, "f", base_dir).string();
        return p;
    }
    if (variant == "orlicz") {
        check_keys(src, path, {"variant", "gamma", "p"});
        OrliczPotential p;
        p.gamma = number(src, out, path, "gamma", 0.45);
        p.p = number(src, out, path, "p", 7.0);
        return p;
    }
    check_keys(src, path, {"variant", "rho", "k", "f"});
    Bump1dPotential p;
    const Json& jr = object_or_empty(src, "rho", path);
    check_keys(jr, join(path, "rho"), {"coef", "exponent"});
    Json ro = Json::object();
    p.rho.coef = number(jr, ro, join(path, "rho"), "coef", 1.0);
    p.rho.exponent = number(jr, ro, join(path, "rho"), "exponent", -0.5);
    out["rho"] = ro;
    p.k = number(src, out, path, "k", 1.0);
    p.f = number(src, out, path, "f", 0.0);
    return p;
}

namespace {

Region parse_region(const Json& parent, Json& out, const std::string& path, const char* key, int dim, bool box_only) {
    Region r;
    if (!parent.contains(key) || parent.at(key).is_null()) {
        out[key] = nullptr;
        return r;
    }
    const std::string p = join(path, key);
    const Json& src = parent.at(key);
    if (!src.is_object()) config_error(p, "expected null or an object");
    Json o = Json::object();
    const std::string kind = box_only ? choice(src, o, p, "kind", "box", {"box"})
                                      : choice(src, o, p, "kind", "box", {"box", "ball"});
    if (kind == "box") {
        check_keys(src, p, {"kind", "sides"});
        r.kind = Region::Kind::Box;
        if (!src.contains("sides") || !src.at("sides").is_array() || int(src.at("sides").size()) != dim)
            config_error(join(p, "sides"), "expected " + std::to_string(dim) + " [lo, hi] pairs");
        Json sides = Json::array();
        for (int a = 0; a < dim; ++a) {
            const std::string sp = join(p, "sides") + "[" + std::to_string(a) + "]";
            const Json& pair = src.at("sides")[std::size_t(a)];
            if (!pair.is_array() || pair.size() != 2) config_error(sp, "expected [lo, hi]");
            Interval iv{as_number(pair[0], sp), as_number(pair[1], sp)};
            if (!(iv.hi >= iv.lo)) config_error(sp, "requires lo <= hi");
            r.box.sides[std::size_t(a)] = iv;
            sides.push_back({iv.lo, iv.hi});
        }
        o["sides"] = sides;
    } else {
        check_keys(src, p, {"kind", "center", "radius"});
        r.kind = Region::Kind::Ball;
        r.center = point_or(src, o, p, "center", dim, {0.0, 0.0, 0.0});
        r.radius = positive(number(src, o, p, "radius", 1.0), join(p, "radius"));
    }
    out[key] = o;
    return r;
}

FunctionSource parse_source(const Json& parent, Json& out, const std::string& path, const char* key, int dim,
                            const fs::path& base, double default_power) {
    const std::string p = join(path, key);
    const Json& src = object_or_empty(parent, key, path);
    Json o = Json::object();
    FunctionSource s;
    const std::string kind = choice(src, o, p, "kind", "power", {"power", "file", "ground_state"});
    if (kind == "power") {
        check_keys(src, p, {"kind", "coef", "exponent"});
        s.kind = FunctionSource::Kind::Power;
        s.coef = number(src, o, p, "coef", 1.0);
        s.exponent = point_or(src, o, p, "exponent", dim, {default_power, 0.0, 0.0});
    } else if (kind == "file") {
        check_keys(src, p, {"kind", "path"});
        s.kind = FunctionSource::Kind::File;
        s.path = data_path(src, o, p, "path", base);
    } else {
        check_keys(src, p, {"kind"});
        s.kind = FunctionSource::Kind::GroundState;
    }
    out[key] = o;
    return s;
}

}  // namespace

void apply_override(Json& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) fail(ErrorKind::Config, "override '" + assignment + "': expected key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    Json value;
    try {
        value = Json::parse(text);
    } catch (const Json::parse_error&) {
        value = text;
    }
    if (!config.is_object()) fail(ErrorKind::Config, "override '" + key + "': config root is not an object");
    Json* node = &config;
    std::size_t start = 0;
    std::string walked;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) fail(ErrorKind::Config, "override '" + key + "': empty key segment");
        walked = join(walked, part);
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        Json& next = (*node)[part];
        if (next.is_null()) next = Json::object();
        if (!next.is_object()) fail(ErrorKind::Config, "override '" + key + "': " + walked + " is not an object");
        node = &next;
        start = dot + 1;
    }
}

RunConfig parse_config(const Json& user, const fs::path& base_dir) {
    if (!user.is_object()) fail(ErrorKind::Config, "config root must be an object");
    check_keys(user, "",
               {"grid", "domain", "potential", "shift", "shift_mode", "quadrature", "eigen", "gap", "classify",
                "capacity", "aap", "improve", "probe", "export"});
    RunConfig cfg;
    Json& res = cfg.resolved;
    res = Json::object();
    cfg.grid = parse_grid(user, res);
    const int dim = cfg.grid.dim();

    {
        const Json& src = object_or_empty(user, "domain", "");
        Json o = Json::object();
        const std::string kind = choice(src, o, "domain", "kind", "box", {"box", "ball"});
        if (kind == "box") {
            check_keys(src, "domain", {"kind"});
        } else {
            check_keys(src, "domain", {"kind", "center", "radius"});
            cfg.problem.domain.kind = DomainShape::Kind::Ball;
            cfg.problem.domain.center = point_or(src, o, "domain", "center", dim, grid_center(cfg.grid));
            cfg.problem.domain.radius = positive(number(src, o, "domain", "radius", 1.0), "domain.radius");
        }
        res["domain"] = o;
    }
    {
        Json o;
        const Json& src = user.contains("potential") ? user.at("potential") : Json::object();
        cfg.problem.potential = parse_potential(src, dim, base_dir, o);
        res["potential"] = o;
    }
    cfg.problem.shift = number(user, res, "", "shift", 0.0);
    cfg.problem.shift_mode = choice(user, res, "", "shift_mode", "none", {"none", "discrete_principal"}) == "none"
                                 ? ShiftMode::None
                                 : ShiftMode::DiscretePrincipal;
    {
        const Json& src = object_or_empty(user, "quadrature", "");
        check_keys(src, "quadrature", {"max_depth", "rel_tol"});
        Json o = Json::object();
        cfg.problem.quad.max_depth = int(integer(src, o, "quadrature", "max_depth", 12, 1));
        cfg.problem.quad.rel_tol = positive(number(src, o, "quadrature", "rel_tol", 1e-6), "quadrature.rel_tol");
        res["quadrature"] = o;
    }
    {
        const Json& src = object_or_empty(user, "eigen", "");
        check_keys(src, "eigen", {"tol", "max_iterations", "preconditioner"});
        Json o = Json::object();
        cfg.eig.tol = positive(number(src, o, "eigen", "tol", 1e-8), "eigen.tol");
        cfg.eig.max_iterations = std::size_t(integer(src, o, "eigen", "max_iterations", 10000, 1));
        cfg.eig.spectral_preconditioner =
            choice(src, o, "eigen", "preconditioner", "spectral", {"spectral", "jacobi"}) == "spectral";
        res["eigen"] = o;
    }
    {
        const Json& src = object_or_empty(user, "gap", "");
        check_keys(src, "gap", {"cg_tol", "change_tol", "residual_tol", "max_iterations"});
        Json o = Json::object();
        cfg.gap.cg_tol = positive(number(src, o, "gap", "cg_tol", 1e-12), "gap.cg_tol");
        cfg.gap.change_tol = positive(number(src, o, "gap", "change_tol", 1e-12), "gap.change_tol");
        cfg.gap.residual_tol = positive(number(src, o, "gap", "residual_tol", 1e-8), "gap.residual_tol");
        cfg.gap.max_iterations = std::size_t(integer(src, o, "gap", "max_iterations", 10000, 1));
        res["gap"] = o;
    }
    {
        const std::string p = "classify";
        const Json& src = object_or_empty(user, p, "");
        check_keys(src, p,
                   {"levels", "slope_critical", "slope_subcritical", "gap_threshold", "zero_gap", "critical_band",
                    "K", "weight"});
        Json o = Json::object();
        auto& c = cfg.classify;
        c.levels = int(integer(src, o, p, "levels", 3, 3));
        c.slope_critical = number(src, o, p, "slope_critical", 1.5);
        c.slope_subcritical = number(src, o, p, "slope_subcritical", 0.5);
        c.gap_threshold = positive(number(src, o, p, "gap_threshold", 1e-3), p + ".gap_threshold");
        c.zero_gap = positive(number(src, o, p, "zero_gap", 1e-8), p + ".zero_gap");
        c.critical_band = positive(number(src, o, p, "critical_band", 10.0), p + ".critical_band");
        const Region K = parse_region(src, o, p, "K", dim, true);
        if (K.kind == Region::Kind::Box) c.K = K.box;
        c.weight = positive(number(src, o, p, "weight", 1.0), p + ".weight");
        c.eig = cfg.eig;
        c.gap = cfg.gap;
        res[p] = o;
    }
    {
        const std::string p = "capacity";
        const Json& src = object_or_empty(user, p, "");
        check_keys(src, p, {"K", "mazya", "family", "min_nodes", "tol"});
        Json o = Json::object();
        cfg.capacity.K = parse_region(src, o, p, "K", dim, false);
        cfg.capacity.mazya = boolean(src, o, p, "mazya", false);
        cfg.capacity.family = choice(src, o, p, "family", "dyadic", {"dyadic", "single"});
        cfg.capacity.min_nodes = int(integer(src, o, p, "min_nodes", 4, 1));
        cfg.capacity.tol = positive(number(src, o, p, "tol", 0.05), p + ".tol");
        res[p] = o;
    }
    {
        const std::string p = "aap";
        const Json& src = object_or_empty(user, p, "");
        check_keys(src, p, {"m_levels", "truncations", "change_tol", "spikes", "bumps", "seed"});
        Json o = Json::object();
        cfg.aap.m_levels = int(integer(src, o, p, "m_levels", 3, 1));
        if (src.contains("truncations")) {
            const Json& jt = src.at("truncations");
            if (!jt.is_array() || jt.empty()) config_error(join(p, "truncations"), "expected a nonempty array");
            cfg.aap.truncations.clear();
            for (std::size_t i = 0; i < jt.size(); ++i)
                cfg.aap.truncations.push_back(positive(
                    as_number(jt[i], join(p, "truncations") + "[" + std::to_string(i) + "]"), join(p, "truncations")));
        }
        o["truncations"] = cfg.aap.truncations;
        cfg.aap.change_tol = positive(number(src, o, p, "change_tol", 1e-4), p + ".change_tol");
        cfg.aap.eig = cfg.eig;
        cfg.probe.spikes = int(integer(src, o, p, "spikes", 24, 0));
        cfg.probe.bumps = int(integer(src, o, p, "bumps", 24, 0));
        cfg.probe.seed = std::uint64_t(integer(src, o, p, "seed", 12345, 0));
        res[p] = o;
    }
    {
        const std::string p = "improve";
        const Json& src = object_or_empty(user, p, "");
        check_keys(src, p, {"u1", "u2"});
        Json o = Json::object();
        cfg.improve.u1 = parse_source(src, o, p, "u1", dim, base_dir, 0.0);
        cfg.improve.u2 = parse_source(src, o, p, "u2", dim, base_dir, 1.0);
        res[p] = o;
    }
    {
        const std::string p = "probe";
        const Json& src = object_or_empty(user, p, "");
        Json o = Json::object();
        auto& pr = cfg.probe;
        pr.kind = choice(src, o, p, "kind", "oscillation", {"oscillation", "balance"});
        if (pr.kind == "oscillation") {
            check_keys(src, p, {"kind", "c", "alpha", "beta", "dim", "eps", "slope_tol"});
            pr.c = positive(number(src, o, p, "c", 0.0625), p + ".c");
            pr.alpha = number(src, o, p, "alpha", -0.9);
            pr.beta = number(src, o, p, "beta", -0.2);
            pr.dim = int(integer(src, o, p, "dim", 3, 1));
            if (src.contains("eps")) {
                const Json& je = src.at("eps");
                if (!je.is_array() || je.size() < 2) config_error(join(p, "eps"), "expected at least two radii");
                pr.eps.clear();
                for (std::size_t i = 0; i < je.size(); ++i)
                    pr.eps.push_back(as_number(je[i], join(p, "eps") + "[" + std::to_string(i) + "]"));
            }
            o["eps"] = pr.eps;
            pr.slope_tol = positive(number(src, o, p, "slope_tol", 0.02), p + ".slope_tol");
        } else {
            check_keys(src, p, {"kind", "K", "spikes", "bumps", "seed", "threshold"});
            pr.K = parse_region(src, o, p, "K", dim, false);
            pr.spikes = int(integer(src, o, p, "spikes", 24, 0));
            pr.bumps = int(integer(src, o, p, "bumps", 24, 0));
            pr.seed = std::uint64_t(integer(src, o, p, "seed", 12345, 0));
            pr.threshold = positive(number(src, o, p, "threshold", 1e-3), p + ".threshold");
        }
        res[p] = o;
    }
    {
        const std::string p = "export";
        const Json& src = object_or_empty(user, p, "");
        check_keys(src, p, {"format", "path", "axis", "through"});
        Json o = Json::object();
        if (src.contains("format") && !src.at("format").is_null()) {
            cfg.output.format = choice(src, o, p, "format", "json", {"json", "grid-text", "csv-profile"});
            if (!src.contains("path") || !src.at("path").is_string())
                config_error(join(p, "path"), "required when export.format is set");
            fs::path out = src.at("path").get<std::string>();
            if (out.is_relative()) out = base_dir / out;
            cfg.output.path = fs::absolute(out).lexically_normal();
            o["path"] = cfg.output.path.string();
        } else {
            o["format"] = nullptr;
            o["path"] = nullptr;
        }
        cfg.output.axis = int(integer(src, o, p, "axis", 0, 0));
        if (cfg.output.axis >= dim) config_error(join(p, "axis"), "must be below grid.dim");
        if (src.contains("through") && !src.at("through").is_null()) {
            cfg.output.through = point(src.at("through"), dim, join(p, "through"));
            o["through"] = point_json(*cfg.output.through, dim);
        } else {
            o["through"] = nullptr;
        }
        res[p] = o;
    }
    return cfg;
}

Mask region_mask(const Grid& grid, const Region& r) {
    switch (r.kind) {
    case Region::Kind::Default:
        return compact_mask(grid, default_K(grid));
    case Region::Kind::Box:
        return compact_mask(grid, r.box);
    case Region::Kind::Ball:
        break;
    }
    const int dim = grid.dim();
    return Mask::from_predicate(grid, [&](const Point& x) {
        double s = 0.0;
        for (int a = 0; a < dim; ++a) s += (x[a] - r.center[a]) * (x[a] - r.center[a]);
        return s <= r.radius * r.radius;
    });
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s = buf;
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

void dump_value(const Json& j, int indent, int level, std::string& out) {
    const std::string pad(std::size_t(indent * (level + 1)), ' ');
    const std::string close(std::size_t(indent * level), ' ');
    const char* nl = indent > 0 ? "\n" : "";
    switch (j.type()) {
    case Json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{";
        out += nl;
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) {
                out += ",";
                out += nl;
            }
            first = false;
            out += pad;
            out += Json(it.key()).dump();
            out += indent > 0 ? ": " : ":";
            dump_value(it.value(), indent, level + 1, out);
        }
        out += nl;
        out += close;
        out += "}";
        return;
    }
    case Json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        const bool flat = std::none_of(j.begin(), j.end(), [](const Json& e) { return e.is_structured(); });
        if (flat) {
            out += "[";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += indent > 0 ? ", " : ",";
                dump_value(j[i], indent, level + 1, out);
            }
            out += "]";
            return;
        }
        out += "[";
        out += nl;
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) {
                out += ",";
                out += nl;
            }
            out += pad;
            dump_value(j[i], indent, level + 1, out);
        }
        out += nl;
        out += close;
        out += "]";
        return;
    }
    case Json::value_t::number_float: {
        const double v = j.get<double>();
        if (std::isnan(v))
            out += "\"nan\"";
        else if (std::isinf(v))
            out += v > 0 ? "\"inf\"" : "\"-inf\"";
        else
            out += format_double(v);
        return;
    }
    default:
        out += j.dump();
    }
}

}  // namespace

std::string dump_json(const Json& j, int indent) {
    std::string out;
    dump_value(j, indent, 0, out);
    out += "\n";
    return out;
}

void write_csv_profile(const GridFunction& f, int axis, const Point& through, const fs::path& path) {
    const Grid& g = f.grid;
    require(axis >= 0 && axis < g.dim(), "csv-profile: axis out of range");
    std::array<std::int64_t, 3> m{0, 0, 0};
    for (int a = 0; a < g.dim(); ++a) {
        const double t = (through[std::size_t(a)] - g.extent(a).lo) / g.h(a) - 1.0;
        m[std::size_t(a)] = std::clamp<std::int64_t>(std::llround(t), 0, g.n(a) - 1);
    }
    std::ofstream os(path);
    if (!os) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    char buf[96];
    for (std::int64_t i = 0; i < g.n(axis); ++i) {
        m[std::size_t(axis)] = i;
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", g.coord(axis, i), f.values[g.flat_index(m)]);
        os << buf;
    }
    if (!os) fail(ErrorKind::Io, "write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Commands

namespace {

Json eig_json(const SpectralResult& r) {
    Json j = Json::object();
    j["value"] = r.value;
    j["residual"] = r.residual;
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    return j;
}

Json field_json(const PotentialField& f) {
    Json j = Json::object();
    j["max_abs"] = f.max_abs();
    j["singular_cells"] = f.singular_cells.size();
    j["quadrature_converged"] = f.quadrature_converged;
    j["tail_bound"] = f.tail_bound;
    return j;
}

PotentialField with_shift(const PotentialField& f, double shift) {
    if (shift == 0.0) return f;
    std::vector<double> v = f.values();
    for (double& x : v) x += shift;
    return PotentialField::from_values(f.grid, v);
}

struct Context {
    explicit Context(const RunConfig& c) : cfg(c) {}
    const RunConfig& cfg;
    Json result = Json::object();
    Json tolerances = Json::object();
    Json history = Json::array();
    std::optional<GridFunction> primary;
    bool numerical_failure = false;
    std::string failure;
};

void tol_common(Context& c) {
    c.tolerances["eigen"] = c.cfg.resolved["eigen"];
    c.tolerances["quadrature"] = c.cfg.resolved["quadrature"];
}

void run_eigen(Context& c) {
    const RunConfig& cfg = c.cfg;
    const AssembledProblem ap = assemble_problem(cfg.problem, cfg.grid, cfg.eig);
    const SpectralResult r = principal_eig(ap.form, cfg.eig);
    c.result = eig_json(r);
    c.result["closed_form_laplacian"] = box_laplacian_eigenvalue(cfg.grid);
    c.result["witness_threshold"] = witness_threshold(ap.form);
    c.result["shift"] = ap.shift;
    c.result["active_nodes"] = ap.form.mask().count();
    c.result["potential"] = field_json(ap.field);
    tol_common(c);
    c.primary = r.vector;
    if (!r.converged) {
        c.numerical_failure = true;
        c.failure = "eigensolver did not reach tolerance within the iteration budget";
    }
}

void run_classify(Context& c) {
    const RunConfig& cfg = c.cfg;
    const CriticalityVerdict v = classify(cfg.problem, cfg.grid, cfg.classify);
    c.result["tag"] = verdict_name(v.tag);
    c.result["reason"] = v.reason;
    c.result["by_extrapolation"] = v.by_extrapolation;
    c.result["fitted_rate"] = v.fitted_rate ? Json(*v.fitted_rate) : Json(nullptr);
    c.result["weight"] = v.weight;
    c.result["gap_notion"] = "feeble_L2";
    c.result["continuum_notion"] = "undetermined unless the potential is tame";
    if (v.witness && v.tag == VerdictTag::Supercritical) {
        Json w = Json::object();
        w["qv"] = v.witness->qv;
        w["eigenvalue"] = v.witness->eigenvalue;
        w["level_n"] = v.witness->xi.grid.n(0);
        c.result["witness"] = w;
        c.primary = v.witness->xi;
    } else {
        c.result["witness"] = nullptr;
    }
    if (v.tag == VerdictTag::Critical) {
        const NullSequenceEvidence ev = null_sequence(cfg.problem, v);
        Json ns = Json::object();
        ns["qv"] = ev.qv;
        std::vector<double> norms;
        for (std::size_t i = 0; i < ev.members.size(); ++i) {
            double s = 0.0;
            const auto& m = ev.members[i];
            for (std::size_t k = 0; k < m.size(); ++k)
                if (ev.K[i][k]) s += std::abs(m.values[k]);
            norms.push_back(s * m.grid.cell_volume());
        }
        ns["normalization"] = norms;
        c.result["null_sequence"] = ns;
    } else {
        c.result["null_sequence"] = nullptr;
    }
    for (const LevelRecord& l : v.levels) {
        Json h = Json::object();
        h["n"] = l.n;
        h["h"] = l.h;
        h["lambda"] = l.lambda;
        h["eig_converged"] = l.eig_converged;
        h["eig_iterations"] = l.eig_iterations;
        h["eig_residual"] = l.eig_residual;
        h["mu"] = l.mu;
        h["mu_normalized"] = l.mu_normalized;
        h["mu_sign"] = l.mu > 0.0 ? 1 : (l.mu < 0.0 ? -1 : 0);
        h["lambda_scale"] = l.lambda_scale;
        h["eta"] = l.eta;
        h["witness"] = l.witness;
        h["gap_indefinite"] = l.gap_indefinite;
        h["shift"] = l.shift;
        h["K_nodes"] = l.K.count();
        c.history.push_back(h);
    }
    if (!c.primary && v.witness) c.primary = v.witness->xi;
    if (!c.primary && !v.levels.empty() && !v.levels.back().minimizer.values.empty())
        c.primary = v.levels.back().minimizer;
    tol_common(c);
    c.tolerances["gap"] = cfg.resolved["gap"];
    c.tolerances["classify"] = cfg.resolved["classify"];
}

void run_capacity(Context& c) {
    const RunConfig& cfg = c.cfg;
    const Mask domain = domain_mask(cfg.grid, cfg.problem.domain);
    const Mask K = region_mask(cfg.grid, cfg.capacity.K);
    require(!K.is_empty(), "capacity.K contains no grid node");
    const CapacityResult r = cap(cfg.grid, K, domain);
    c.result["value"] = r.value;
    c.result["K_nodes"] = K.count();
    c.result["sweeps"] = r.sweeps;
    c.result["complementarity"] = r.complementarity;
    c.primary = r.potential;
    if (cfg.capacity.mazya) {
        const PotentialField field =
            with_shift(eval_catalog(cfg.problem.potential, cfg.grid, cfg.problem.quad), cfg.problem.shift);
        std::vector<Mask> family;
        if (cfg.capacity.family == "dyadic")
            family = dyadic_family(cfg.grid, domain, cfg.capacity.min_nodes);
        else
            family.push_back(K);
        const MazyaReport m = mazya_ratio(field, family, domain, cfg.capacity.tol);
        Json mj = Json::object();
        mj["family"] = cfg.capacity.family;
        mj["family_size"] = family.size();
        mj["max_ratio"] = m.max_ratio;
        mj["argmax"] = m.argmax;
        mj["flag"] = flag_name(m.flag);
        mj["note"] = "the family maximum is a lower bound on the supremum over all compact sets";
        c.result["mazya"] = mj;
        for (std::size_t i = 0; i < m.ratios.size(); ++i) {
            Json h = Json::object();
            h["index"] = i;
            h["nodes"] = family[i].count();
            h["capacity"] = m.capacities[i];
            h["ratio"] = m.ratios[i];
            c.history.push_back(h);
        }
    } else {
        c.result["mazya"] = nullptr;
    }
    c.tolerances["obstacle_update"] = ObstacleOptions{}.update_tol;
    c.tolerances["capacity"] = cfg.resolved["capacity"];
}

void run_aap(Context& c) {
    const RunConfig& cfg = c.cfg;
    const Supersolution sup = construct_supersolution(cfg.problem, cfg.grid, cfg.aap);
    const SupersolutionCheck chk = check_supersolution(sup);
    const AssembledProblem ap = assemble_problem(cfg.problem, cfg.grid, cfg.eig);
    GridFunction h(cfg.grid);
    for (std::size_t i = 0; i < h.size(); ++i) h.values[i] = std::max(sup.residual.values[i], 0.0);
    const auto battery = default_battery(cfg.grid, sup.mask, std::size_t(cfg.probe.spikes),
                                         std::size_t(cfg.probe.bumps), cfg.probe.seed);
    const AapReport rep = verify_aap(ap.form, sup, h, battery);
    Json s = Json::object();
    s["positive"] = chk.positive;
    s["normalized"] = chk.normalized;
    s["residual_ok"] = chk.residual_ok;
    s["min_u"] = chk.min_u;
    s["residual_min"] = sup.residual_min;
    s["residual_scale"] = sup.residual_scale;
    s["lambda_tol"] = sup.lambda_tol;
    Json ball = Json::object();
    ball["center"] = point_json(sup.ball.center, cfg.grid.dim());
    ball["radius"] = sup.ball.radius;
    ball["nodes"] = sup.ball.nodes;
    ball["min_value"] = sup.ball.min_value;
    s["ball"] = ball;
    c.result["supersolution"] = s;
    Json a = Json::object();
    a["weighted_gap"] = rep.weighted_gap;
    a["gap_ok"] = rep.gap_ok;
    a["battery_min_margin"] = rep.battery_min_margin;
    a["battery_ok"] = rep.battery_ok;
    a["battery_size"] = rep.battery_size;
    a["passed"] = rep.passed();
    c.result["aap"] = a;
    c.result["note"] = "discrete residual only; convergence to the continuum Riesz measure is not claimed";
    for (const auto& st : sup.schedule) {
        Json j = Json::object();
        j["m"] = st.m;
        j["n"] = st.n;
        j["lambda"] = st.lambda;
        j["iterations"] = st.iterations;
        j["converged"] = st.converged;
        j["change"] = st.change;
        c.history.push_back(j);
    }
    c.primary = sup.u;
    tol_common(c);
    c.tolerances["aap"] = cfg.resolved["aap"];
    c.tolerances["residual_rel"] = 1e-6;
    c.tolerances["gap_min"] = 0.95;
}

GridFunction load_source(const FunctionSource& s, const RunConfig& cfg, const AssembledProblem& ap) {
    switch (s.kind) {
    case FunctionSource::Kind::File: {
        GridFunction f = read_grid_text(s.path);
        if (f.grid != cfg.grid) fail(ErrorKind::ShapeMismatch, s.path.string() + ": grid differs from the config grid");
        return f;
    }
    case FunctionSource::Kind::GroundState: {
        const SpectralResult r = principal_eig(ap.form, cfg.eig);
        if (!r.converged) fail(ErrorKind::NotConverged, "ground state eigensolve failed");
        return r.vector;
    }
    case FunctionSource::Kind::Power:
        break;
    }
    const int dim = cfg.grid.dim();
    return GridFunction::sample(cfg.grid, [&](const Point& x) {
        double v = s.coef;
        for (int a = 0; a < dim; ++a)
            if (s.exponent[std::size_t(a)] != 0.0) v *= std::pow(x[a], s.exponent[std::size_t(a)]);
        return v;
    });
}

void run_improve(Context& c) {
    const RunConfig& cfg = c.cfg;
    const AssembledProblem ap = assemble_problem(cfg.problem, cfg.grid, cfg.eig);
    const GridFunction u1 = load_source(cfg.improve.u1, cfg, ap);
    const GridFunction u2 = load_source(cfg.improve.u2, cfg, ap);
    const GridFunction w = picone_improve(u1, u2);
    const ImprovementResult r = improvement_check(ap.form, w);
    double wmax = 0.0, wint = 0.0;
    for (double v : w.values) {
        wmax = std::max(wmax, v);
        wint += v;
    }
    c.result["improves"] = r.improves;
    c.result["gap"] = r.gap;
    c.result["w_max"] = wmax;
    c.result["w_integral"] = wint * cfg.grid.cell_volume();
    c.primary = w;
    tol_common(c);
    c.tolerances["gap"] = cfg.resolved["gap"];
    c.tolerances["gap_min"] = 0.95;
}

void run_probe(Context& c) {
    const RunConfig& cfg = c.cfg;
    const auto& p = cfg.probe;
    if (p.kind == "oscillation") {
        const OscillationReport r = oscillation_probe(p.c, p.alpha, p.beta, p.dim, p.eps, p.slope_tol);
        c.result["kind"] = "oscillation";
        c.result["fitted_slope"] = r.fitted_slope;
        c.result["divergent"] = r.divergent;
        for (std::size_t i = 0; i < r.eps.size(); ++i) {
            Json h = Json::object();
            h["eps"] = r.eps[i];
            h["integral"] = r.integrals[i];
            h["local_slope"] = i == 0 ? Json(nullptr) : Json(r.local_slopes[i - 1]);
            c.history.push_back(h);
        }
        c.tolerances["slope_tol"] = p.slope_tol;
        return;
    }
    const PotentialField field =
        with_shift(eval_catalog(cfg.problem.potential, cfg.grid, cfg.problem.quad), cfg.problem.shift);
    const Mask U = domain_mask(cfg.grid, cfg.problem.domain);
    const Mask K = region_mask(cfg.grid, p.K) & U;
    const auto battery = default_battery(cfg.grid, K, std::size_t(p.spikes), std::size_t(p.bumps), p.seed);
    const BalanceReport r = balance_probe(field, K, U, battery, p.threshold);
    c.result["kind"] = "balance";
    c.result["verdict"] =
        r.verdict == BalanceReport::Verdict::ViolationWitness ? "violation_witness" : "plausibly_balanced";
    c.result["best_constant_estimate"] = r.best_constant_estimate;
    c.result["battery_size"] = r.battery_size;
    c.result["witness_index"] = r.witness_index;
    c.result["note"] = "a finite battery can witness violations but never prove balance";
    if (r.witness) c.primary = *r.witness;
    c.tolerances["threshold"] = p.threshold;
    c.tolerances["quadrature"] = cfg.resolved["quadrature"];
}

int exit_code_for(ErrorKind k) {
    switch (k) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::ShapeMismatch:
    case ErrorKind::Io:
    case ErrorKind::Config:
        return 1;
    case ErrorKind::NotConverged:
    case ErrorKind::Indefinite:
    case ErrorKind::Internal:
        break;
    }
    return 2;
}

const char* status_for(int code) { return code == 0 ? "ok" : (code == 1 ? "config_error" : "numerical_failure"); }

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    os << text;
    if (!os) fail(ErrorKind::Io, "write failed: " + path.string());
}

Json base_report(const std::string& command) {
    Json rep = Json::object();
    rep["schema_version"] = 1;
    rep["tool"] = {{"name", "spectragap"}, {"version", SPECTRAGAP_VERSION}};
    rep["command"] = command;
    rep["status"] = "ok";
    rep["error"] = nullptr;
    rep["config"] = nullptr;
    rep["result"] = nullptr;
    rep["tolerances"] = nullptr;
    rep["history"] = Json::array();
    rep["export"] = nullptr;
    rep["environment"] = {{"threads", thread_count()}};
    return rep;
}

RunOutcome failed_run(const std::string& command, int code, const std::string& msg) {
    RunOutcome out;
    out.report = base_report(command);
    out.exit_code = code;
    out.diagnostic = msg;
    out.report["status"] = status_for(code);
    out.report["error"] = msg;
    out.report["wall_clock_seconds"] = 0.0;
    return out;
}

}  // namespace

RunOutcome run_command(const std::string& command, const Json& config, const std::vector<std::string>& overrides,
                       const fs::path& base_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    RunOutcome out;
    out.report = base_report(command);
    Json& rep = out.report;
    try {
        if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end())
            fail(ErrorKind::Config, "unknown command '" + command + "'");
        Json user = config;
        for (const auto& o : overrides) apply_override(user, o);
        const RunConfig cfg = parse_config(user, base_dir);
        rep["config"] = cfg.resolved;
        Context ctx(cfg);
        if (command == "eigen")
            run_eigen(ctx);
        else if (command == "classify")
            run_classify(ctx);
        else if (command == "capacity")
            run_capacity(ctx);
        else if (command == "aap")
            run_aap(ctx);
        else if (command == "improve")
            run_improve(ctx);
        else
            run_probe(ctx);
        rep["result"] = ctx.result;
        rep["tolerances"] = ctx.tolerances;
        rep["history"] = ctx.history;
        if (ctx.numerical_failure) {
            out.exit_code = 2;
            out.diagnostic = ctx.failure;
        }
        if (!cfg.output.format.empty()) {
            if (cfg.output.format == "grid-text" || cfg.output.format == "csv-profile") {
                if (!ctx.primary) fail(ErrorKind::Config, "export: command '" + command + "' produces no grid function");
                if (cfg.output.format == "grid-text")
                    write_grid_text(*ctx.primary, cfg.output.path);
                else
                    write_csv_profile(*ctx.primary, cfg.output.axis,
                                      cfg.output.through.value_or(grid_center(cfg.grid)), cfg.output.path);
            }
            rep["export"] = {{"format", cfg.output.format}, {"path", cfg.output.path.string()}};
        }
    } catch (const Error& e) {
        out.exit_code = exit_code_for(e.kind());
        out.diagnostic = e.what();
    } catch (const Json::exception& e) {
        out.exit_code = 1;
        out.diagnostic = std::string("config: ") + e.what();
    } catch (const std::exception& e) {
        out.exit_code = 2;
        out.diagnostic = e.what();
    }
    rep["status"] = status_for(out.exit_code);
    if (out.exit_code != 0) rep["error"] = out.diagnostic;
    rep["wall_clock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (out.exit_code == 0 && rep["export"].is_object() && rep["export"]["format"] == "json") {
        try {
            write_text(rep["export"]["path"].get<std::string>(), dump_json(rep));
        } catch (const Error& e) {
            out.exit_code = 1;
            out.diagnostic = e.what();
            rep["status"] = status_for(1);
            rep["error"] = out.diagnostic;
        }
    }
    return out;
}

RunOutcome run_command_file(const std::string& command, const fs::path& config_path,
                            const std::vector<std::string>& overrides) {
    std::ifstream is(config_path);
    if (!is) return failed_run(command, 1, "cannot read config file " + config_path.string());
    Json cfg;
    try {
        cfg = Json::parse(is);
    } catch (const Json::parse_error& e) {
        return failed_run(command, 1, config_path.string() + ": invalid JSON: " + e.what());
    }
    return run_command(command, cfg, overrides, fs::absolute(config_path).parent_path());
}

}  // namespace spectragap
