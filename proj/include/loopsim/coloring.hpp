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
#ifndef LOOPSIM_COLORING_HPP
#define LOOPSIM_COLORING_HPP

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "loopsim/configuration.hpp"

namespace loopsim {

struct ColoringLimits {
    std::size_t max_intervals = 40;
    std::uint64_t max_nodes = 200'000'000;
};

/// Number of ways to give each maximal interval one of n colours so that,
/// at every link, the colours (below x, below y, above x, above y) form an
/// allowed pattern: (a, b, b, a) for a cross, (a, a, b, b) for a double bar.
///
/// Exhaustive backtracking over interval colours. It builds its own
/// interval table and never consults the loop decomposition, so it serves
/// as an independent check of the loop count.
inline std::uint64_t count_colorings(const LinkConfiguration& cfg, int n, const ColoringLimits& lim = {}) {
    if (n < 1) {
        throw std::invalid_argument("need at least one colour");
    }
    const TorusGeometry& g = cfg.geometry();
    const std::size_t V = g.num_vertices();

    std::vector<std::size_t> offset(V + 1, 0);
    for (VertexId v = 0; v < V; ++v) {
        offset[v + 1] = offset[v] + std::max<std::size_t>(cfg.incidences(v).size(), 1);
    }
    const std::size_t N = offset[V];
    if (N > lim.max_intervals) {
        throw std::length_error("colouring oracle limited to " + std::to_string(lim.max_intervals) + " intervals, got " +
                                std::to_string(N));
    }

    auto position = [&](VertexId v, const LinkKey& k) {
        auto inc = cfg.incidences(v);
        for (std::size_t i = 0; i < inc.size(); ++i) {
            if (inc[i].key() == k) {
                return i;
            }
        }
        throw std::logic_error("incidence missing");
    };

    // Each link contributes two equalities between interval slots, read
    // off its pattern set.
    std::vector<std::array<std::size_t, 2>> equal;
    for (const Link& l : cfg.links()) {
        const Edge& e = g.edge(l.edge);
        std::array<std::size_t, 4> slot{};  // below x, below y, above x, above y
        std::size_t col = 0;
        for (VertexId v : {e.lo, e.hi}) {
            std::size_t m = cfg.incidences(v).size();
            std::size_t i = position(v, key_of(l));
            slot[col] = offset[v] + i;
            slot[col + 2] = offset[v] + (i + 1) % m;
            ++col;
        }
        if (l.kind == LinkKind::Cross) {
            equal.push_back({slot[0], slot[3]});
            equal.push_back({slot[1], slot[2]});
        } else {
            equal.push_back({slot[0], slot[1]});
            equal.push_back({slot[2], slot[3]});
        }
    }

    // Breadth-first order over the constraint graph keeps related
    // intervals close, so violations are caught early.
    std::vector<std::vector<std::size_t>> adj(N);
    for (const auto& eq : equal) {
        adj[eq[0]].push_back(eq[1]);
        adj[eq[1]].push_back(eq[0]);
    }
    std::vector<std::size_t> order;
    std::vector<std::size_t> rank(N, N);
    for (std::size_t s = 0; s < N; ++s) {
        if (rank[s] != N) {
            continue;
        }
        std::queue<std::size_t> q;
        q.push(s);
        rank[s] = order.size();
        order.push_back(s);
        while (!q.empty()) {
            std::size_t a = q.front();
            q.pop();
            for (std::size_t b : adj[a]) {
                if (rank[b] == N) {
                    rank[b] = order.size();
                    order.push_back(b);
                    q.push(b);
                }
            }
        }
    }
    // Constraints to test once position p has been coloured.
    std::vector<std::vector<std::array<std::size_t, 2>>> checks(N);
    for (const auto& eq : equal) {
        checks[std::max(rank[eq[0]], rank[eq[1]])].push_back(eq);
    }

    std::vector<int> colour(N, -1);
    std::uint64_t total = 0;
    std::uint64_t nodes = 0;
    auto rec = [&](auto&& self, std::size_t p) -> void {
        if (p == N) {
            ++total;
            return;
        }
        for (int c = 0; c < n; ++c) {
            if (++nodes > lim.max_nodes) {
                throw std::length_error("colouring oracle node budget exhausted");
            }
            colour[order[p]] = c;
            bool ok = true;
            for (const auto& eq : checks[p]) {
                if (colour[eq[0]] != colour[eq[1]]) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                self(self, p + 1);
            }
        }
        colour[order[p]] = -1;
    };
    rec(rec, 0);
    return total;
}

}  // namespace loopsim

#endif  // LOOPSIM_COLORING_HPP
