#pragma once

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "shesim/basis.hpp"
#include "shesim/convergence.hpp"
#include "shesim/covariance.hpp"
#include "shesim/integrators.hpp"
#include "shesim/montecarlo.hpp"
#include "shesim/stability.hpp"

// CSV artifact writers. Headers are part of the documented schema; values
// are written at full round-trip precision.

namespace shesim::csv {

inline std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out.precision(17);
    return out;
}

inline void write_curve(const std::filesystem::path& path, const MeanSquareCurve& curve) {
    std::ofstream out = open_out(path);
    out << "t,mean_sq,ci_low,ci_high,diverged\n";
    for (std::size_t i = 0; i < curve.t.size(); ++i)
        out << curve.t[i] << ',' << curve.mean_sq[i] << ','
            << curve.mean_sq[i] - curve.ci_halfwidth[i] << ','
            << curve.mean_sq[i] + curve.ci_halfwidth[i] << ',' << curve.diverged_count << '\n';
}

inline void write_trajectory(const std::filesystem::path& path, const Trajectory& traj) {
    std::ofstream out = open_out(path);
    const bool states = !traj.states.empty();
    out << "t,norm_sq";
    if (states)
        for (int k = 1; k <= traj.states.front().size(); ++k) out << ",u_" << k;
    out << '\n';
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        out << traj.times[i] << ',' << traj.norm_sq[i];
        if (states)
            for (int k = 0; k < traj.states[i].size(); ++k) out << ',' << traj.states[i](k);
        out << '\n';
    }
}

inline void write_region(const std::filesystem::path& path, const RegionGrid& grid) {
    std::ofstream out = open_out(path);
    out << "beta1,beta0,analytic_stable,numeric_stable,metric\n";
    for (std::size_t i0 = 0; i0 < grid.beta0s.size(); ++i0)
        for (std::size_t i1 = 0; i1 < grid.beta1s.size(); ++i1) {
            const std::size_t c = grid.idx(static_cast<int>(i0), static_cast<int>(i1));
            out << grid.beta1s[i1] << ',' << grid.beta0s[i0] << ','
                << static_cast<int>(grid.analytic_stable[c]) << ','
                << static_cast<int>(grid.numeric_stable[c]) << ',' << grid.metric[c] << '\n';
        }
}

inline void write_convergence(const std::filesystem::path& path, const ConvergenceReport& rep) {
    std::ofstream out = open_out(path);
    out << "N,M,lambda_N,rho_M,error,ci\n";
    for (const LevelRecord& rec : rep.levels)
        out << rec.n << ',' << rec.m << ',' << rec.lambda_n << ',' << rec.rho_m << ','
            << rec.error << ',' << rec.ci_halfwidth << '\n';
}

inline void write_tensor(const std::filesystem::path& path, const TripleProductTensor& tensor) {
    std::ofstream out = open_out(path);
    out << "j,k,i,value\n";
    tensor.for_each_nonzero(
        [&](int j, int k, int i, double v) { out << j << ',' << k << ',' << i << ',' << v << '\n'; });
}

// Upper triangle of the nonzero entries; symmetric partners are implied.
inline void write_alpha(const std::filesystem::path& path, const AlphaMatrix& alpha) {
    std::ofstream out = open_out(path);
    out << "i,j,value\n";
    for (int i = 0; i < alpha.dim(); ++i)
        for (int j = i; j < alpha.dim(); ++j)
            if (alpha.alpha(i, j) != 0.0)
                out << i + 1 << ',' << j + 1 << ',' << alpha.alpha(i, j) << '\n';
}

}  // namespace shesim::csv
