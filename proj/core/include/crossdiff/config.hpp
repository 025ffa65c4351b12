#pragma once

#include <optional>
#include <string>
#include <vector>

#include "crossdiff/experiments.hpp"
#include "crossdiff/grid.hpp"
#include "crossdiff/model.hpp"
#include "crossdiff/scheme.hpp"

namespace crossdiff {

struct GridSpec {
    int dim = 1;
    std::vector<int> cells = {64};
    std::vector<double> lengths = {1.0};
    std::vector<double> origin;   // defaults to zeros
};

enum class ProfileKind { Constant, Bump, TwoBumps, BarenblattSplit };

struct InitialSpec {
    ProfileKind profile = ProfileKind::Constant;
    // constant
    double u1_value = 0.25;
    double u2_value = 0.25;
    // bump (single bump split eta / 1-eta between the species)
    BumpSpec bump;
    double eta = 1.0;
    // two-bumps (bump1 -> u1, bump2 -> u2)
    BumpSpec bump1, bump2;
    // barenblatt-split
    double mass = 1.0;
    double t0 = 1.0;
};

enum class StudyKind { None, Pme, Epsilon, Segregation, Asymmetric };

struct StudySpec {
    StudyKind kind = StudyKind::None;
    std::vector<int> pme_grids = {128, 256, 512};
    std::vector<double> eps_levels = {1e-1, 1e-2, 1e-3, 1e-4};
    double overlap_threshold = 1e-6;
};

struct OutputSpec {
    std::string dir = "out";
    int snapshots = 20;            // evenly spaced in simulated time
    int snapshot_every_steps = 0;  // > 0: snapshot by step count instead
};

/// Runtime invariant tolerances monitored by the driver.
struct CheckSpec {
    double max_principle_tol = 1e-8;    // max(w) <= w_p + tol
    double nonnegativity_tol = 1e-10;   // min(u_i) >= -tol before clipping
    double identity_tol = 1e-10;        // max|w - u1 - u2| <= tol
    double gronwall_slack = 1e-6;       // l2_w(t) <= l2_w(0) e^{2 M0 t} + slack
};

struct RunConfig {
    GridSpec grid;
    Params params;
    GrowthModel model;
    InitialSpec initial;
    double t_end = 1.0;
    DtPolicy dt_policy;
    OutputSpec output;
    StudySpec study;
    CheckSpec checks;
};

struct ParseResult {
    std::optional<RunConfig> config;
    std::vector<std::string> errors;   // all of them, key-path prefixed

    bool ok() const { return config.has_value() && errors.empty(); }
};

/// JSON config file; documented key schema, unknown keys rejected with their
/// path. (H2) ranges and the statically checkable parts of (H3) are validated
/// here; the built initial field is re-checked by run().
ParseResult parse_config_file(const std::string& path);
ParseResult parse_config_text(const std::string& text);

Grid build_grid(const GridSpec& spec);
State build_initial_state(const RunConfig& cfg, const Grid& grid);

/// The config with all defaults expanded, serialized as canonical JSON
/// (sorted keys, round-trip exact floats). Written back into every run dir.
std::string effective_config_json(const RunConfig& cfg);

std::string study_kind_name(StudyKind k);
std::optional<StudyKind> study_kind_from_name(const std::string& name);

}  // namespace crossdiff
