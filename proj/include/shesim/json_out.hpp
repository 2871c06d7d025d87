#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "shesim/config.hpp"
#include "shesim/convergence.hpp"
#include "shesim/stability.hpp"
#include "shesim/version.hpp"

// JSON report serialization. Non-finite scalars become null alongside an
// explicit flag, since JSON has no infinity.

namespace shesim::jsonio {

using nlohmann::json;

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(); }

inline json to_json(const StabilityReport& r) {
    json j;
    j["type"] = "stability_report";
    j["n"] = r.n;
    j["m"] = r.m;
    j["tau"] = r.tau;
    j["lambda1"] = r.lambda1;
    j["kappa"] = finite_or_null(r.kappa);
    j["kappa_finite"] = std::isfinite(r.kappa);
    j["kappa_is_grid_estimate"] = r.kappa_is_grid_estimate;
    j["kappa_tilde2"] = r.kappa_tilde2;
    j["rho_at_m"] = r.rho_at_m;
    j["sum_weights"] = finite_or_null(r.sum_weights);
    j["alpha_jitter"] = r.alpha_jitter;
    j["exact_condition"] = {{"margin", finite_or_null(r.exact.margin)},
                            {"stable", r.exact.stable},
                            {"applicable", r.exact.applicable}};
    j["spectral_condition"] = {{"margin", finite_or_null(r.spectral.margin)},
                               {"stable", r.spectral.stable},
                               {"applicable", r.spectral.applicable}};
    j["implicit_ratio"] = r.implicit_ratio_valid ? json(r.implicit_ratio) : json();
    j["implicit_stable"] = r.implicit_stable;
    j["explicit_lhs"] = r.explicit_lhs;
    j["explicit_stable"] = r.explicit_stable;
    return j;
}

inline json to_json(const ConvergenceReport& r) {
    json j;
    j["type"] = "convergence_summary";
    j["n_ref"] = r.n_ref;
    j["m_ref"] = r.m_ref;
    j["tau"] = r.tau;
    j["horizon"] = r.horizon;
    j["paths"] = r.paths;
    j["beta0"] = r.beta0;
    j["beta1"] = r.beta1;
    j["levels"] = json::array();
    for (const LevelRecord& rec : r.levels)
        j["levels"].push_back({{"n", rec.n},
                               {"m", rec.m},
                               {"lambda_n", rec.lambda_n},
                               {"rho_m", rec.rho_m},
                               {"error", rec.error},
                               {"ci", rec.ci_halfwidth}});
    j["slope_n"] = r.has_slope_n
                       ? json{{"value", r.slope_n}, {"stderr", r.slope_n_stderr},
                              {"floor", r.floor_n}, {"trusted", r.fit_trusted_n}}
                       : json();
    j["slope_m"] = r.has_slope_m
                       ? json{{"value", r.slope_m}, {"stderr", r.slope_m_stderr},
                              {"floor", r.floor_m}, {"trusted", r.fit_trusted_m}}
                       : json();
    return j;
}

// Typed snapshot of every resolved parameter; with the seed and version it
// reproduces the run bit-exactly.
inline json config_snapshot(const KeyValueFile& cfg) {
    json j = json::object();
    for (const auto& [section, entries] : cfg.sections()) {
        json s = json::object();
        for (const auto& [key, value] : entries) s[key] = value;
        j[section] = s;
    }
    return j;
}

inline json manifest(const std::string& command, const KeyValueFile& cfg,
                     std::uint64_t seed, int threads,
                     const std::vector<std::string>& outputs) {
    json j;
    j["type"] = "run_manifest";
    j["version"] = kVersion;
    j["command"] = command;
    j["seed"] = seed;
    j["threads"] = threads;
    j["config"] = config_snapshot(cfg);
    j["outputs"] = outputs;
    return j;
}

inline void write(const std::filesystem::path& path, const json& j) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace shesim::jsonio
