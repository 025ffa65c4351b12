#include "crossdiff/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace crossdiff {

using nlohmann::json;

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& path, std::vector<std::string>& errs) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known) errs.push_back(path + "." + it.key() + ": unknown key");
    }
}

bool get_number(const json& obj, const char* key, const std::string& path, double& out,
                std::vector<std::string>& errs) {
    if (!obj.contains(key)) return false;
    if (!obj[key].is_number()) {
        errs.push_back(path + "." + key + ": expected a number");
        return false;
    }
    out = obj[key].get<double>();
    return true;
}

bool get_int(const json& obj, const char* key, const std::string& path, int& out,
             std::vector<std::string>& errs) {
    if (!obj.contains(key)) return false;
    if (!obj[key].is_number_integer()) {
        errs.push_back(path + "." + key + ": expected an integer");
        return false;
    }
    out = obj[key].get<int>();
    return true;
}

bool get_bool(const json& obj, const char* key, const std::string& path, bool& out,
              std::vector<std::string>& errs) {
    if (!obj.contains(key)) return false;
    if (!obj[key].is_boolean()) {
        errs.push_back(path + "." + key + ": expected a boolean");
        return false;
    }
    out = obj[key].get<bool>();
    return true;
}

template <typename T>
bool get_array(const json& obj, const char* key, const std::string& path, std::vector<T>& out,
               std::vector<std::string>& errs) {
    if (!obj.contains(key)) return false;
    if (!obj[key].is_array()) {
        errs.push_back(path + "." + key + ": expected an array");
        return false;
    }
    out.clear();
    for (const auto& v : obj[key]) {
        if (!v.is_number()) {
            errs.push_back(path + "." + key + ": expected numeric entries");
            return false;
        }
        out.push_back(v.get<T>());
    }
    return true;
}

RateFunction parse_rate(const json& j, const std::string& path, double w_p,
                        std::vector<std::string>& errs) {
    if (!j.is_object()) {
        errs.push_back(path + ": expected an object with a 'type'");
        return RateFunction::zero();
    }
    check_keys(j, {"type", "value", "alpha", "w", "values"}, path, errs);
    const std::string type = j.value("type", std::string{});
    if (type == "zero") return RateFunction::zero();
    if (type == "constant") {
        double v = 0.0;
        if (!get_number(j, "value", path, v, errs))
            errs.push_back(path + ".value: required for constant rates");
        return RateFunction::constant(v);
    }
    if (type == "affine") {
        double a = 0.0;
        if (!get_number(j, "alpha", path, a, errs))
            errs.push_back(path + ".alpha: required for affine rates");
        if (!(w_p > 0.0)) return RateFunction::zero();   // model.w_p error reported elsewhere
        return RateFunction::affine(a, w_p);
    }
    if (type == "piecewise-linear") {
        std::vector<double> w, v;
        const bool okw = get_array(j, "w", path, w, errs);
        const bool okv = get_array(j, "values", path, v, errs);
        if (!okw || !okv || w.size() != v.size() || w.size() < 2) {
            errs.push_back(path + ": piecewise-linear needs matching 'w' and 'values' arrays "
                                  "with at least two knots");
            return RateFunction::zero();
        }
        for (std::size_t k = 1; k < w.size(); ++k)
            if (!(w[k] > w[k - 1])) {
                errs.push_back(path + ".w: knots must be strictly increasing");
                return RateFunction::zero();
            }
        return RateFunction::piecewise_linear(std::move(w), std::move(v));
    }
    errs.push_back(path + ".type: must be one of zero|constant|affine|piecewise-linear");
    return RateFunction::zero();
}

json rate_json(const RateFunction& r) {
    json j;
    switch (r.kind()) {
        case RateFunction::Kind::Zero:
            j["type"] = "zero";
            break;
        case RateFunction::Kind::Constant:
            j["type"] = "constant";
            j["value"] = r.constant_value();
            break;
        case RateFunction::Kind::Affine:
            j["type"] = "affine";
            j["alpha"] = r.affine_alpha();
            break;
        case RateFunction::Kind::PiecewiseLinear:
            j["type"] = "piecewise-linear";
            j["w"] = r.knots();
            j["values"] = r.values();
            break;
    }
    return j;
}

BumpSpec parse_bump(const json& j, const std::string& path, std::vector<std::string>& errs) {
    BumpSpec b;
    if (!j.is_object()) {
        errs.push_back(path + ": expected an object");
        return b;
    }
    check_keys(j, {"amplitude", "radius", "center"}, path, errs);
    get_number(j, "amplitude", path, b.amplitude, errs);
    get_number(j, "radius", path, b.radius, errs);
    std::vector<double> c;
    if (get_array(j, "center", path, c, errs)) {
        if (c.size() >= 1) b.center[0] = c[0];
        if (c.size() >= 2) b.center[1] = c[1];
        if (c.size() > 2) errs.push_back(path + ".center: at most two coordinates");
    }
    if (b.amplitude < 0.0) errs.push_back(path + ".amplitude: must be nonnegative");
    if (b.amplitude > 0.0 && !(b.radius > 0.0))
        errs.push_back(path + ".radius: must be positive");
    return b;
}

json bump_json(const BumpSpec& b, int dim) {
    json j;
    j["amplitude"] = b.amplitude;
    j["radius"] = b.radius;
    j["center"] = dim == 2 ? json::array({b.center[0], b.center[1]})
                           : json::array({b.center[0]});
    return j;
}

}  // namespace

std::string study_kind_name(StudyKind k) {
    switch (k) {
        case StudyKind::None: return "none";
        case StudyKind::Pme: return "pme";
        case StudyKind::Epsilon: return "epsilon";
        case StudyKind::Segregation: return "segregation";
        case StudyKind::Asymmetric: return "asymmetric";
    }
    return "none";
}

std::optional<StudyKind> study_kind_from_name(const std::string& name) {
    if (name == "none") return StudyKind::None;
    if (name == "pme") return StudyKind::Pme;
    if (name == "epsilon") return StudyKind::Epsilon;
    if (name == "segregation") return StudyKind::Segregation;
    if (name == "asymmetric") return StudyKind::Asymmetric;
    return std::nullopt;
}

Grid build_grid(const GridSpec& spec) {
    return make_grid(spec.dim, spec.cells, spec.lengths, spec.origin);
}

State build_initial_state(const RunConfig& cfg, const Grid& grid) {
    State s(grid);
    const InitialSpec& in = cfg.initial;
    switch (in.profile) {
        case ProfileKind::Constant:
            for (int k = 0; k < grid.cells(); ++k) {
                s.u1[k] = in.u1_value;
                s.u2[k] = in.u2_value;
            }
            break;
        case ProfileKind::Bump:
            for (int k = 0; k < grid.cells(); ++k) {
                const double b = bump_value(in.bump, grid.center(k), grid.dim);
                s.u1[k] = in.eta * b;
                s.u2[k] = (1.0 - in.eta) * b;
            }
            break;
        case ProfileKind::TwoBumps:
            for (int k = 0; k < grid.cells(); ++k) {
                s.u1[k] = bump_value(in.bump1, grid.center(k), grid.dim);
                s.u2[k] = bump_value(in.bump2, grid.center(k), grid.dim);
            }
            break;
        case ProfileKind::BarenblattSplit: {
            const BarenblattParams bp =
                make_barenblatt(cfg.params.gamma, cfg.params.mu, in.mass, in.t0, grid.dim);
            for (int k = 0; k < grid.cells(); ++k) {
                const double w0 = barenblatt(grid.center(k), 0.0, bp);
                s.u1[k] = in.eta * w0;
                s.u2[k] = (1.0 - in.eta) * w0;
            }
            break;
        }
    }
    sync_w(s);
    return s;
}

ParseResult parse_config_text(const std::string& text) {
    ParseResult out;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        out.errors.push_back(std::string("config: JSON parse error: ") + e.what());
        return out;
    }
    if (!root.is_object()) {
        out.errors.push_back("config: top level must be an object");
        return out;
    }

    std::vector<std::string>& errs = out.errors;
    RunConfig cfg;

    check_keys(root, {"grid", "params", "model", "initial", "time", "output", "study", "checks"},
               "config", errs);

    // --- grid ---
    if (root.contains("grid")) {
        const json& g = root["grid"];
        if (!g.is_object()) {
            errs.push_back("grid: expected an object");
        } else {
            check_keys(g, {"dim", "cells", "lengths", "origin"}, "grid", errs);
            get_int(g, "dim", "grid", cfg.grid.dim, errs);
            get_array(g, "cells", "grid", cfg.grid.cells, errs);
            get_array(g, "lengths", "grid", cfg.grid.lengths, errs);
            get_array(g, "origin", "grid", cfg.grid.origin, errs);
        }
    }
    if (cfg.grid.dim != 1 && cfg.grid.dim != 2) errs.push_back("grid.dim: must be 1 or 2");
    if (cfg.grid.cells.size() != static_cast<std::size_t>(cfg.grid.dim))
        errs.push_back("grid.cells: need one entry per dimension");
    if (cfg.grid.lengths.size() != static_cast<std::size_t>(cfg.grid.dim))
        errs.push_back("grid.lengths: need one entry per dimension");
    if (!cfg.grid.origin.empty() &&
        cfg.grid.origin.size() != static_cast<std::size_t>(cfg.grid.dim))
        errs.push_back("grid.origin: need one entry per dimension");
    for (int c : cfg.grid.cells)
        if (c < 2) errs.push_back("grid.cells: need at least 2 cells per axis");
    for (double l : cfg.grid.lengths)
        if (!(l > 0.0)) errs.push_back("grid.lengths: must be positive");

    // --- params (H2) ---
    if (root.contains("params")) {
        const json& p = root["params"];
        if (!p.is_object()) {
            errs.push_back("params: expected an object");
        } else {
            check_keys(p,
                       {"mu", "nu", "gamma", "epsilon", "picard_tol", "linear_tol", "max_picard",
                        "lift_initial"},
                       "params", errs);
            get_number(p, "mu", "params", cfg.params.mu, errs);
            get_number(p, "nu", "params", cfg.params.nu, errs);
            get_number(p, "gamma", "params", cfg.params.gamma, errs);
            get_number(p, "epsilon", "params", cfg.params.epsilon, errs);
            get_number(p, "picard_tol", "params", cfg.params.picard_tol, errs);
            get_number(p, "linear_tol", "params", cfg.params.linear_tol, errs);
            get_int(p, "max_picard", "params", cfg.params.max_picard, errs);
            get_bool(p, "lift_initial", "params", cfg.params.lift_initial, errs);
        }
    }
    for (const std::string& e : validate_params(cfg.params)) errs.push_back("params: " + e);

    // --- model ---
    if (root.contains("model")) {
        const json& m = root["model"];
        if (!m.is_object()) {
            errs.push_back("model: expected an object");
        } else {
            check_keys(m, {"w_p", "F1", "F2", "G1", "G2"}, "model", errs);
            get_number(m, "w_p", "model", cfg.model.w_p, errs);
            if (!(cfg.model.w_p > 0.0)) errs.push_back("model.w_p: must be positive");
            const double w_p = cfg.model.w_p > 0.0 ? cfg.model.w_p : 1.0;
            if (m.contains("F1")) cfg.model.F1 = parse_rate(m["F1"], "model.F1", w_p, errs);
            if (m.contains("F2")) cfg.model.F2 = parse_rate(m["F2"], "model.F2", w_p, errs);
            if (m.contains("G1")) cfg.model.G1 = parse_rate(m["G1"], "model.G1", w_p, errs);
            if (m.contains("G2")) cfg.model.G2 = parse_rate(m["G2"], "model.G2", w_p, errs);
        }
    }

    // --- initial ---
    if (root.contains("initial")) {
        const json& in = root["initial"];
        if (!in.is_object()) {
            errs.push_back("initial: expected an object");
        } else {
            const std::string profile = in.value("profile", std::string("constant"));
            if (profile == "constant") {
                check_keys(in, {"profile", "u1", "u2"}, "initial", errs);
                cfg.initial.profile = ProfileKind::Constant;
                get_number(in, "u1", "initial", cfg.initial.u1_value, errs);
                get_number(in, "u2", "initial", cfg.initial.u2_value, errs);
                if (cfg.initial.u1_value < 0.0 || cfg.initial.u2_value < 0.0)
                    errs.push_back("initial: (H3) violated, species values must be nonnegative");
            } else if (profile == "bump") {
                check_keys(in, {"profile", "amplitude", "radius", "center", "eta"}, "initial",
                           errs);
                cfg.initial.profile = ProfileKind::Bump;
                json b = in;
                b.erase("profile");
                if (b.contains("eta")) b.erase("eta");
                cfg.initial.bump = parse_bump(b, "initial", errs);
                get_number(in, "eta", "initial", cfg.initial.eta, errs);
                if (!(cfg.initial.eta >= 0.0 && cfg.initial.eta <= 1.0))
                    errs.push_back("initial.eta: must lie in [0, 1]");
            } else if (profile == "two-bumps") {
                check_keys(in, {"profile", "bump1", "bump2"}, "initial", errs);
                cfg.initial.profile = ProfileKind::TwoBumps;
                if (in.contains("bump1"))
                    cfg.initial.bump1 = parse_bump(in["bump1"], "initial.bump1", errs);
                if (in.contains("bump2"))
                    cfg.initial.bump2 = parse_bump(in["bump2"], "initial.bump2", errs);
            } else if (profile == "barenblatt-split") {
                check_keys(in, {"profile", "mass", "t0", "eta"}, "initial", errs);
                cfg.initial.profile = ProfileKind::BarenblattSplit;
                get_number(in, "mass", "initial", cfg.initial.mass, errs);
                get_number(in, "t0", "initial", cfg.initial.t0, errs);
                get_number(in, "eta", "initial", cfg.initial.eta, errs);
                if (!(cfg.initial.mass > 0.0)) errs.push_back("initial.mass: must be positive");
                if (!(cfg.initial.t0 > 0.0)) errs.push_back("initial.t0: must be positive");
                if (!(cfg.initial.eta >= 0.0 && cfg.initial.eta <= 1.0))
                    errs.push_back("initial.eta: must lie in [0, 1]");
            } else {
                errs.push_back(
                    "initial.profile: must be one of constant|bump|two-bumps|barenblatt-split");
            }
        }
    }

    // --- time ---
    if (root.contains("time")) {
        const json& t = root["time"];
        if (!t.is_object()) {
            errs.push_back("time: expected an object");
        } else {
            check_keys(t, {"t_end", "dt", "max_halvings"}, "time", errs);
            get_number(t, "t_end", "time", cfg.t_end, errs);
            get_number(t, "dt", "time", cfg.dt_policy.dt, errs);
            get_int(t, "max_halvings", "time", cfg.dt_policy.max_halvings, errs);
        }
    }
    if (!(cfg.t_end >= 0.0)) errs.push_back("time.t_end: must be nonnegative");
    if (!(cfg.dt_policy.dt > 0.0)) errs.push_back("time.dt: must be positive");
    if (cfg.dt_policy.max_halvings < 0) errs.push_back("time.max_halvings: must be >= 0");

    // --- output ---
    if (root.contains("output")) {
        const json& o = root["output"];
        if (!o.is_object()) {
            errs.push_back("output: expected an object");
        } else {
            check_keys(o, {"dir", "snapshots", "snapshot_every_steps"}, "output", errs);
            if (o.contains("dir")) {
                if (!o["dir"].is_string())
                    errs.push_back("output.dir: expected a string");
                else
                    cfg.output.dir = o["dir"].get<std::string>();
            }
            get_int(o, "snapshots", "output", cfg.output.snapshots, errs);
            get_int(o, "snapshot_every_steps", "output", cfg.output.snapshot_every_steps,
                    errs);
            if (cfg.output.snapshots < 1) errs.push_back("output.snapshots: must be >= 1");
            if (cfg.output.snapshot_every_steps < 0)
                errs.push_back("output.snapshot_every_steps: must be >= 0");
        }
    }

    // --- study ---
    if (root.contains("study")) {
        const json& s = root["study"];
        std::string kind_name;
        if (s.is_string()) {
            kind_name = s.get<std::string>();
        } else if (s.is_object()) {
            check_keys(s, {"kind", "pme_grids", "eps_levels", "overlap_threshold"}, "study",
                       errs);
            kind_name = s.value("kind", std::string("none"));
            get_array(s, "pme_grids", "study", cfg.study.pme_grids, errs);
            get_array(s, "eps_levels", "study", cfg.study.eps_levels, errs);
            get_number(s, "overlap_threshold", "study", cfg.study.overlap_threshold, errs);
        } else {
            errs.push_back("study: expected a string or an object");
        }
        if (!kind_name.empty()) {
            const auto kind = study_kind_from_name(kind_name);
            if (!kind)
                errs.push_back(
                    "study.kind: must be one of none|pme|epsilon|segregation|asymmetric");
            else
                cfg.study.kind = *kind;
        }
    }

    // --- checks ---
    if (root.contains("checks")) {
        const json& c = root["checks"];
        if (!c.is_object()) {
            errs.push_back("checks: expected an object");
        } else {
            check_keys(c,
                       {"max_principle_tol", "nonnegativity_tol", "identity_tol",
                        "gronwall_slack"},
                       "checks", errs);
            get_number(c, "max_principle_tol", "checks", cfg.checks.max_principle_tol, errs);
            get_number(c, "nonnegativity_tol", "checks", cfg.checks.nonnegativity_tol, errs);
            get_number(c, "identity_tol", "checks", cfg.checks.identity_tol, errs);
            get_number(c, "gronwall_slack", "checks", cfg.checks.gronwall_slack, errs);
        }
    }

    // (H3) on the actually built initial data, when the config is otherwise sane
    if (errs.empty()) {
        const Grid grid = build_grid(cfg.grid);
        const State init = build_initial_state(cfg, grid);
        const double w0max = field_max(init.w);
        if (w0max > cfg.model.w_p * (1.0 + 1e-12))
            errs.push_back("initial: (H3) violated, initial w exceeds w_p (max w0 = " +
                           std::to_string(w0max) + ")");
        else if (cfg.params.lift_initial &&
                 w0max + cfg.params.epsilon > cfg.model.w_p * (1.0 + 1e-12))
            errs.push_back("initial: lift_initial needs headroom max(w0) + epsilon <= w_p");
    }

    if (errs.empty()) out.config = std::move(cfg);
    return out;
}

ParseResult parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        ParseResult out;
        out.errors.push_back("config: cannot open '" + path + "'");
        return out;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string effective_config_json(const RunConfig& cfg) {
    json j;
    j["grid"]["dim"] = cfg.grid.dim;
    j["grid"]["cells"] = cfg.grid.cells;
    j["grid"]["lengths"] = cfg.grid.lengths;
    std::vector<double> origin = cfg.grid.origin;
    if (origin.empty()) origin.assign(static_cast<std::size_t>(cfg.grid.dim), 0.0);
    j["grid"]["origin"] = origin;

    j["params"]["mu"] = cfg.params.mu;
    j["params"]["nu"] = cfg.params.nu;
    j["params"]["gamma"] = cfg.params.gamma;
    j["params"]["epsilon"] = cfg.params.epsilon;
    j["params"]["picard_tol"] = cfg.params.picard_tol;
    j["params"]["linear_tol"] = cfg.params.linear_tol;
    j["params"]["max_picard"] = cfg.params.max_picard;
    j["params"]["lift_initial"] = cfg.params.lift_initial;

    j["model"]["w_p"] = cfg.model.w_p;
    j["model"]["F1"] = rate_json(cfg.model.F1);
    j["model"]["F2"] = rate_json(cfg.model.F2);
    j["model"]["G1"] = rate_json(cfg.model.G1);
    j["model"]["G2"] = rate_json(cfg.model.G2);

    switch (cfg.initial.profile) {
        case ProfileKind::Constant:
            j["initial"]["profile"] = "constant";
            j["initial"]["u1"] = cfg.initial.u1_value;
            j["initial"]["u2"] = cfg.initial.u2_value;
            break;
        case ProfileKind::Bump: {
            j["initial"] = bump_json(cfg.initial.bump, cfg.grid.dim);
            j["initial"]["profile"] = "bump";
            j["initial"]["eta"] = cfg.initial.eta;
            break;
        }
        case ProfileKind::TwoBumps:
            j["initial"]["profile"] = "two-bumps";
            j["initial"]["bump1"] = bump_json(cfg.initial.bump1, cfg.grid.dim);
            j["initial"]["bump2"] = bump_json(cfg.initial.bump2, cfg.grid.dim);
            break;
        case ProfileKind::BarenblattSplit:
            j["initial"]["profile"] = "barenblatt-split";
            j["initial"]["mass"] = cfg.initial.mass;
            j["initial"]["t0"] = cfg.initial.t0;
            j["initial"]["eta"] = cfg.initial.eta;
            break;
    }

    j["time"]["t_end"] = cfg.t_end;
    j["time"]["dt"] = cfg.dt_policy.dt;
    j["time"]["max_halvings"] = cfg.dt_policy.max_halvings;

    j["output"]["dir"] = cfg.output.dir;
    j["output"]["snapshots"] = cfg.output.snapshots;
    j["output"]["snapshot_every_steps"] = cfg.output.snapshot_every_steps;

    j["study"]["kind"] = study_kind_name(cfg.study.kind);
    j["study"]["pme_grids"] = cfg.study.pme_grids;
    j["study"]["eps_levels"] = cfg.study.eps_levels;
    j["study"]["overlap_threshold"] = cfg.study.overlap_threshold;

    j["checks"]["max_principle_tol"] = cfg.checks.max_principle_tol;
    j["checks"]["nonnegativity_tol"] = cfg.checks.nonnegativity_tol;
    j["checks"]["identity_tol"] = cfg.checks.identity_tol;
    j["checks"]["gronwall_slack"] = cfg.checks.gronwall_slack;

    return j.dump(2) + "\n";
}

}  // namespace crossdiff
