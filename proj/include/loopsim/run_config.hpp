// Copyright 2026 The loopsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once
#ifndef LOOPSIM_RUN_CONFIG_HPP
#define LOOPSIM_RUN_CONFIG_HPP

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "loopsim/estimators.hpp"
#include "loopsim/geometry.hpp"
#include "loopsim/loops.hpp"
#include "loopsim/sampler.hpp"

namespace loopsim {

/// Every parameter of a run. The JSON form is written as the output header
/// and can be fed back with --config to repeat the run exactly.
struct RunConfig {
    std::string command;

    // geometry and model
    int d = 1;
    std::vector<int> k{1};
    double beta = 1.0;
    int n = 2;
    double u = 0.25;

    // sampler
    std::uint64_t sweeps = 10000;
    std::uint64_t burnin = 1000;
    std::uint64_t thin = 1;
    std::uint64_t sweep_length = 0;
    std::string init = "auto";
    std::uint64_t seed = 1;
    std::size_t replicas = 1;

    // cubes
    double R0 = 1.0;

    // connection estimates
    std::vector<std::string> displacements;  // "x1,...,xd:t"
    int time_origins = 1;
    int reach = 0;       // decay-scan: spatial reach, 0 = half the side
    int time_steps = 4;  // decay-scan: points on the time ray up to beta/2
    std::string fit_mode = "joint";

    // single-configuration commands
    std::string input;   // serialized configuration, "-" for stdin
    std::string pairing = "dimer";
    std::string top_pairing;  // empty: same as `pairing`
    std::string source;  // "x1,...,xd:t"
    std::string target;

    // outputs
    std::string out;     // main output; empty = stdout
    std::string csv;
    std::string dat;

    SamplerParams sampler() const {
        SamplerParams p;
        p.n = n;
        p.u = u;
        p.sweeps = sweeps;
        p.burnin = burnin;
        p.thin = thin;
        p.seed = seed;
        p.sweep_length = sweep_length;
        p.init = init;
        return p;
    }

    GeometryPtr geometry() const { return build_geometry(d, k, beta); }
};

inline void to_json(nlohmann::json& j, const RunConfig& c) {
    j = nlohmann::json{{"command", c.command},
                       {"d", c.d},
                       {"k", c.k},
                       {"beta", c.beta},
                       {"n", c.n},
                       {"u", c.u},
                       {"sweeps", c.sweeps},
                       {"burnin", c.burnin},
                       {"thin", c.thin},
                       {"sweep_length", c.sweep_length},
                       {"init", c.init},
                       {"seed", c.seed},
                       {"replicas", c.replicas},
                       {"R0", c.R0},
                       {"displacements", c.displacements},
                       {"time_origins", c.time_origins},
                       {"reach", c.reach},
                       {"time_steps", c.time_steps},
                       {"fit_mode", c.fit_mode},
                       {"input", c.input},
                       {"pairing", c.pairing},
                       {"top_pairing", c.top_pairing},
                       {"source", c.source},
                       {"target", c.target},
                       {"out", c.out},
                       {"csv", c.csv},
                       {"dat", c.dat}};
}

/// Missing keys keep their current values; unknown keys are an error.
inline void from_json(const nlohmann::json& j, RunConfig& c) {
    nlohmann::json known;
    to_json(known, c);
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.contains(it.key())) {
            throw std::invalid_argument("unknown config key '" + it.key() + "'");
        }
    }
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) {
            j.at(key).get_to(field);
        }
    };
    get("command", c.command);
    get("d", c.d);
    get("k", c.k);
    get("beta", c.beta);
    get("n", c.n);
    get("u", c.u);
    get("sweeps", c.sweeps);
    get("burnin", c.burnin);
    get("thin", c.thin);
    get("sweep_length", c.sweep_length);
    get("init", c.init);
    get("seed", c.seed);
    get("replicas", c.replicas);
    get("R0", c.R0);
    get("displacements", c.displacements);
    get("time_origins", c.time_origins);
    get("reach", c.reach);
    get("time_steps", c.time_steps);
    get("fit_mode", c.fit_mode);
    get("input", c.input);
    get("pairing", c.pairing);
    get("top_pairing", c.top_pairing);
    get("source", c.source);
    get("target", c.target);
    get("out", c.out);
    get("csv", c.csv);
    get("dat", c.dat);
}

/// Accepts either a bare config object or a previous run's header line
/// ({"header": {"config": {...}, ...}}).
inline nlohmann::json config_object(const nlohmann::json& j) {
    if (j.contains("header")) {
        return j.at("header").at("config");
    }
    if (j.contains("config")) {
        return j.at("config");
    }
    return j;
}

/// Throws std::invalid_argument on inconsistent parameters and returns the
/// warnings worth printing.
inline std::vector<std::string> validate(RunConfig& c) {
    std::vector<std::string> warn;
    if (c.d < 1) {
        throw std::invalid_argument("d must be at least 1");
    }
    if (c.k.size() == 1 && c.d > 1) {
        c.k.assign(static_cast<std::size_t>(c.d), c.k.front());
    }
    if (static_cast<int>(c.k.size()) != c.d) {
        throw std::invalid_argument("k needs 1 or d entries");
    }
    for (int kr : c.k) {
        if (kr < 1) {
            throw std::invalid_argument("every k entry must be at least 1");
        }
    }
    if (!(c.beta > 0.0)) {
        throw std::invalid_argument("beta must be positive");
    }
    if (c.n < 1) {
        throw std::invalid_argument("n must be at least 1");
    }
    if (!(c.u >= 0.0 && c.u <= 1.0)) {
        throw std::invalid_argument("u must lie in [0, 1]");
    }
    if (c.u > 0.5) {
        warn.push_back("u > 1/2: outside the range where the measure is reflection positive; the decay and chessboard "
                       "results do not apply");
    }
    if (c.thin == 0) {
        throw std::invalid_argument("thin must be positive");
    }
    if (c.replicas == 0) {
        throw std::invalid_argument("replicas must be positive");
    }
    if (c.time_origins < 1) {
        throw std::invalid_argument("time-origins must be positive");
    }
    if (c.fit_mode != "joint" && c.fit_mode != "spatial" && c.fit_mode != "temporal") {
        throw std::invalid_argument("fit mode must be joint, spatial or temporal");
    }
    validate(c.sampler());
    return warn;
}

/// "x1,...,xd:t"; the time part is optional and defaults to 0.
inline std::pair<std::vector<int>, double> parse_space_time(const std::string& s, int d) {
    std::string space = s, time;
    if (auto colon = s.find(':'); colon != std::string::npos) {
        space = s.substr(0, colon);
        time = s.substr(colon + 1);
    }
    std::vector<int> x;
    std::stringstream ss(space);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            x.push_back(std::stoi(tok, &used));
            if (used != tok.size()) {
                throw std::invalid_argument(tok);
            }
        } catch (const std::exception&) {
            throw std::invalid_argument("bad coordinate '" + tok + "' in '" + s + "'");
        }
    }
    if (static_cast<int>(x.size()) != d) {
        throw std::invalid_argument("'" + s + "' needs " + std::to_string(d) + " coordinates");
    }
    double t = 0.0;
    if (!time.empty()) {
        try {
            std::size_t used = 0;
            t = std::stod(time, &used);
            if (used != time.size()) {
                throw std::invalid_argument(time);
            }
        } catch (const std::exception&) {
            throw std::invalid_argument("bad time '" + time + "' in '" + s + "'");
        }
    }
    return {x, t};
}

inline Displacement parse_displacement(const std::string& s, int d) {
    auto [x, t] = parse_space_time(s, d);
    return Displacement{x, t};
}

inline SpaceTimePoint parse_point(const std::string& s, const TorusGeometry& g) {
    auto [x, t] = parse_space_time(s, g.dim());
    if (!(t >= 0.0 && t < g.beta())) {
        throw std::invalid_argument("time in '" + s + "' must lie in [0, beta)");
    }
    return SpaceTimePoint{g.vertex(x), t};
}

/// "dimer", "dimer:<axis>" or "random" (seeded).
template <class Rng>
Pairing parse_pairing(const std::string& s, const TorusGeometry& g, Rng& rng) {
    if (s == "random") {
        return random_pairing(g.num_vertices(), rng);
    }
    if (s == "dimer") {
        return dimer_pairing(g, 0);
    }
    if (s.rfind("dimer:", 0) == 0) {
        int axis = std::stoi(s.substr(6));
        if (axis < 0 || axis >= g.dim()) {
            throw std::invalid_argument("dimer axis out of range in '" + s + "'");
        }
        return dimer_pairing(g, axis);
    }
    throw std::invalid_argument("unknown pairing '" + s + "' (use dimer, dimer:<axis> or random)");
}

inline FitMode parse_fit_mode(const std::string& s) {
    if (s == "spatial") {
        return FitMode::Spatial;
    }
    if (s == "temporal") {
        return FitMode::Temporal;
    }
    return FitMode::Joint;
}

}  // namespace loopsim

#endif  // LOOPSIM_RUN_CONFIG_HPP
