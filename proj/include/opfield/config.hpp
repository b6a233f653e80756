#pragma once

// Run configuration: grid parameters, tolerances, seed.  Every key has a
// default so the verifier runs with no config file; the file format is flat
// key=value lines with '#' comments.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "opfield/cartesian.hpp"
#include "opfield/polar.hpp"

namespace opfield {

struct RunConfig {
    // polar grid
    int n = 2;
    int S = 64;
    int M = 64;
    double s_min = -2.0;
    double s_max = 2.0;
    // Cartesian grids
    int N = 64;
    double L1 = 8.0; // half-width of the 1D box
    double L2 = 3.0; // half-width of the 2D box covering the annulus
    // tolerances
    double tol_exact = 1e-12;   // exact algebra
    double tol_grid = 1e-10;    // exact-on-grid identities
    double tol_norm = 1e-8;     // grid identities with rounding accumulation
    double tol_stencil = 1e-6;  // stencil-limited identities
    double tol_weak = 1e-5;     // finite-difference-in-t comparisons
    double tol_cross = 1e-3;    // cross-backend / resampling comparisons
    std::uint64_t seed = 20240915;

    PolarGrid polar_grid() const {
        PolarGrid g;
        g.n = n;
        g.S = S;
        g.M = M;
        g.s_min = s_min;
        g.s_max = s_max;
        return g;
    }
    CartesianGrid cartesian_grid_1d() const {
        CartesianGrid g;
        g.n = 1;
        g.N = N;
        g.L = L1;
        return g;
    }
    CartesianGrid cartesian_grid_2d() const {
        CartesianGrid g;
        g.n = 2;
        g.N = N;
        g.L = L2;
        return g;
    }

    void set(const std::string& key, const std::string& value) {
        auto d = [&] { return std::stod(value); };
        auto i = [&] { return std::stoi(value); };
        if (key == "n") n = i();
        else if (key == "S") S = i();
        else if (key == "M") M = i();
        else if (key == "s_min") s_min = d();
        else if (key == "s_max") s_max = d();
        else if (key == "N") N = i();
        else if (key == "L1") L1 = d();
        else if (key == "L2") L2 = d();
        else if (key == "tol_exact") tol_exact = d();
        else if (key == "tol_grid") tol_grid = d();
        else if (key == "tol_norm") tol_norm = d();
        else if (key == "tol_stencil") tol_stencil = d();
        else if (key == "tol_weak") tol_weak = d();
        else if (key == "tol_cross") tol_cross = d();
        else if (key == "seed") seed = std::stoull(value);
        else throw std::invalid_argument("unknown config key: " + key);
    }

    void validate() const {
        if (S <= 0 || M <= 0 || N <= 0 || n < 1)
            throw std::invalid_argument("config: sizes must be positive");
        if (!(s_min < s_max))
            throw std::invalid_argument("config: need s_min < s_max");
        for (double t : {tol_exact, tol_grid, tol_norm, tol_stencil, tol_weak,
                         tol_cross})
            if (t <= 0.0)
                throw std::invalid_argument("config: tolerances must be positive");
    }
};

inline RunConfig load_config(std::istream& is) {
    RunConfig cfg;
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string()
                                          : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!key.empty()) cfg.set(key, value);
    }
    cfg.validate();
    return cfg;
}

inline RunConfig load_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read config " + path);
    return load_config(is);
}

// Parse "--grid S=64,M=64,N=48" style overrides.
inline void apply_grid_overrides(RunConfig& cfg, const std::string& spec) {
    std::istringstream is(spec);
    std::string item;
    while (std::getline(is, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("bad grid override: " + item);
        cfg.set(item.substr(0, eq), item.substr(eq + 1));
    }
    cfg.validate();
}

} // namespace opfield
