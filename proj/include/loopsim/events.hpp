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
#ifndef LOOPSIM_EVENTS_HPP
#define LOOPSIM_EVENTS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "loopsim/configuration.hpp"
#include "loopsim/cubes.hpp"
#include "loopsim/loops.hpp"

namespace loopsim {

// ---- bad events -----------------------------------------------------------

struct BadEventReport {
    Block block;
    std::size_t cube = 0;
    int translate = 0;
    bool crowded = false;
    bool empty = false;
    bool transposition = false;
    /// Witnesses, set when the matching flag is.
    std::optional<std::pair<EdgeId, EdgeId>> crowded_pair;
    std::optional<SmallCube> empty_cube;
    std::optional<Link> interior_cross;

    bool bad() const { return crowded || empty || transposition; }
};

/// Links whose point lies in the closed block. Such a link always sits on
/// an edge with an endpoint in the block, so only those incidences are read.
inline std::vector<Link> links_in_block(const LinkConfiguration& cfg, const CubeComplex& cx, const Block& blk) {
    const TorusGeometry& g = cfg.geometry();
    std::vector<Link> out;
    for (const SmallCube& s : cx.small_cubes_of(blk)) {
        if (s.window != blk.window) {
            continue;  // one pass per vertex
        }
        for (const Incidence& inc : cfg.incidences(s.vertex)) {
            const Edge& ed = g.edge(inc.edge);
            VertexId other = ed.other(s.vertex);
            // An interior edge is seen from both ends; keep it once.
            if (cx.block_has_vertex(blk, other) && other < s.vertex) {
                continue;
            }
            if (cx.block_has_link(blk, inc.edge, inc.time)) {
                out.push_back(Link{inc.edge, inc.time, inc.kind});
            }
        }
    }
    return out;
}

inline bool small_cube_empty(const LinkConfiguration& cfg, const CubeComplex& cx, const SmallCube& s) {
    for (const Incidence& inc : cfg.incidences(s.vertex)) {
        if (cx.small_has_link(s, inc.edge, inc.time)) {
            return false;
        }
    }
    return true;
}

/// Two distinct edges at the vertex of `s` carry a link in the closed union
/// of `count` vertically stacked small cubes starting at `s`.
inline bool vertical_union_crowded(const LinkConfiguration& cfg, const CubeComplex& cx, const SmallCube& s,
                                   int count = 1) {
    std::optional<EdgeId> first;
    for (const Incidence& inc : cfg.incidences(s.vertex)) {
        if (!cx.time_in_windows(inc.time, s.window, count)) {
            continue;
        }
        if (!first) {
            first = inc.edge;
        } else if (*first != inc.edge) {
            return true;
        }
    }
    return false;
}

inline bool small_cube_crowded(const LinkConfiguration& cfg, const CubeComplex& cx, const SmallCube& s) {
    return vertical_union_crowded(cfg, cx, s, 1);
}

/// C: two adjacent edges each with a link in the block. E: a constituent
/// small cube without links. T: a cross on an edge with both endpoints in
/// the block.
inline BadEventReport detect_bad_events(const LinkConfiguration& cfg, const CubeComplex& cx, const Block& blk) {
    const TorusGeometry& g = cfg.geometry();
    BadEventReport r;
    r.block = blk;
    r.translate = cx.translate_of(blk);
    r.cube = cx.cube_index_of(blk);
    std::vector<Link> inside = links_in_block(cfg, cx, blk);
    std::vector<EdgeId> edges;
    for (const Link& l : inside) {
        edges.push_back(l.edge);
        if (l.kind == LinkKind::Cross && !r.transposition && cx.block_edge_interior(blk, l.edge)) {
            r.transposition = true;
            r.interior_cross = l;
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    for (std::size_t i = 0; i < edges.size() && !r.crowded; ++i) {
        for (std::size_t j = i + 1; j < edges.size(); ++j) {
            if (g.adjacent_edges(edges[i], edges[j])) {
                r.crowded = true;
                r.crowded_pair = std::make_pair(edges[i], edges[j]);
                break;
            }
        }
    }
    for (const SmallCube& s : cx.small_cubes_of(blk)) {
        if (small_cube_empty(cfg, cx, s)) {
            r.empty = true;
            r.empty_cube = s;
            break;
        }
    }
    return r;
}

inline BadEventReport detect_bad_events(const LinkConfiguration& cfg, const CubeComplex& cx, std::size_t q,
                                        int translate = 0) {
    return detect_bad_events(cfg, cx, cx.block(q, translate));
}

/// theta_q applied to every link (or its inverse).
inline LinkConfiguration reflect_configuration(const CubeComplex& cx, std::size_t q, const LinkConfiguration& cfg,
                                               bool inverse = false) {
    LinkConfiguration out(cfg.geometry_ptr());
    for (const Link& l : cfg.links()) {
        out.insert(Link{cx.reflect_edge(q, l.edge, inverse), cx.reflect_time(q, l.time, inverse), l.kind});
    }
    return out;
}

/// Adjacent edge pairs in one big cube: choose one of the 2^d vertices,
/// then two of its 2d edges.
inline long crowded_pairs_per_cube(int d) { return (1L << d) * (2L * d) * (2L * d - 1) / 2; }

/// Per-translate frequencies of the bad events over all big cubes.
struct EventScan {
    std::size_t cubes = 0;
    std::size_t crowded = 0;
    std::size_t empty = 0;
    std::size_t transposition = 0;
    std::size_t bad = 0;
};

inline EventScan scan_events(const LinkConfiguration& cfg, const CubeComplex& cx, int translate = 0) {
    EventScan s;
    for (std::size_t q = 0; q < cx.num_big_cubes(); ++q) {
        BadEventReport r = detect_bad_events(cfg, cx, q, translate);
        ++s.cubes;
        s.crowded += r.crowded;
        s.empty += r.empty;
        s.transposition += r.transposition;
        s.bad += r.bad();
    }
    return s;
}

// ---- switches and non-closing links ---------------------------------------

struct Switch {
    Link lower;
    Link upper;
};

/// All pairs (z1, z2): z2 is the first link above z1 on an edge incident
/// or equal to e1, and it sits on an edge other than e1. Time runs from 0
/// to beta without wrapping.
inline std::vector<Switch> detect_switches(const LinkConfiguration& cfg) {
    const TorusGeometry& g = cfg.geometry();
    std::vector<Switch> out;
    for (const Link& z1 : cfg.links()) {
        const Edge& ed = g.edge(z1.edge);
        const LinkKey k = key_of(z1);
        std::optional<Incidence> next;
        for (VertexId v : {ed.lo, ed.hi}) {
            auto inc = cfg.incidences(v);
            auto it = std::upper_bound(inc.begin(), inc.end(), k,
                                       [](const LinkKey& key, const Incidence& a) { return key < a.key(); });
            if (it != inc.end() && (!next || it->key() < next->key())) {
                next = *it;
            }
        }
        if (next && next->edge != z1.edge) {
            out.push_back(Switch{z1, Link{next->edge, next->time, next->kind}});
        }
    }
    std::sort(out.begin(), out.end(), [](const Switch& a, const Switch& b) { return key_of(a.lower) < key_of(b.lower); });
    return out;
}

/// Largest number of detected switches that share one upper link.
inline std::size_t max_switches_per_upper(const std::vector<Switch>& sw) {
    std::vector<LinkKey> uppers;
    for (const Switch& s : sw) {
        uppers.push_back(key_of(s.upper));
    }
    std::sort(uppers.begin(), uppers.end());
    std::size_t best = 0;
    for (std::size_t i = 0; i < uppers.size();) {
        std::size_t j = i;
        while (j < uppers.size() && uppers[j] == uppers[i]) {
            ++j;
        }
        best = std::max(best, j - i);
        i = j;
    }
    return best;
}

/// Links that do not close a loop in the sweep from time 0: |omega| - L.
inline std::size_t count_nonclosing(const LinkConfiguration& cfg, const Pairing& xi0) {
    return cfg.size() - count_closing_links(cfg, xi0);
}

/// Checks of the switch facts against the closing sweep.
struct SwitchAudit {
    std::size_t switches = 0;
    /// The upper link closes a loop.
    std::size_t upper_closing = 0;
    /// Of those, how many have a cross as the lower link.
    std::size_t upper_closing_cross_lower = 0;
    /// Both links close a loop.
    std::size_t both_closing = 0;
    /// Two double bars whose upper link closes a loop.
    std::size_t double_bar_upper_closing = 0;
    /// Links strictly between z1 and z2 on edges incident or equal to e1.
    std::size_t order_violations = 0;
    std::size_t max_shared_upper = 0;
};

inline SwitchAudit audit_switches(const LinkConfiguration& cfg, const Pairing& xi0) {
    const TorusGeometry& g = cfg.geometry();
    ClosingSweep sweep = sweep_closing_links(cfg, xi0);
    auto closes = [&](const Link& l) {
        auto it = std::lower_bound(sweep.links.begin(), sweep.links.end(), key_of(l),
                                   [](const Link& a, const LinkKey& k) { return key_of(a) < k; });
        return sweep.closes[static_cast<std::size_t>(it - sweep.links.begin())] != 0;
    };
    std::vector<Switch> sw = detect_switches(cfg);
    SwitchAudit a;
    a.switches = sw.size();
    a.max_shared_upper = max_switches_per_upper(sw);
    for (const Switch& s : sw) {
        bool up = closes(s.upper);
        bool lo = closes(s.lower);
        if (up) {
            ++a.upper_closing;
            if (s.lower.kind == LinkKind::Cross) {
                ++a.upper_closing_cross_lower;
            }
            if (s.lower.kind == LinkKind::DoubleBar && s.upper.kind == LinkKind::DoubleBar) {
                ++a.double_bar_upper_closing;
            }
        }
        if (up && lo) {
            ++a.both_closing;
        }
        if (!(key_of(s.lower) < key_of(s.upper)) || !g.adjacent_edges(s.lower.edge, s.upper.edge)) {
            ++a.order_violations;
        }
        for (const Link& l : cfg.links()) {
            bool near = l.edge == s.lower.edge || g.adjacent_edges(l.edge, s.lower.edge);
            if (near && key_of(s.lower) < key_of(l) && key_of(l) < key_of(s.upper)) {
                ++a.order_violations;
            }
        }
    }
    return a;
}

// ---- distributed crowded events --------------------------------------------

enum class PlacementCase { BothBoundary, OneBoundary, BothInterior };

inline char placement_letter(PlacementCase c) {
    return c == PlacementCase::BothBoundary ? 'a' : (c == PlacementCase::OneBoundary ? 'b' : 'c');
}

/// Which of e, e' (in the reference big cube) are boundary edges.
inline PlacementCase placement_case(const CubeComplex& cx, EdgeId e, EdgeId f) {
    Block ref = cx.block(0, 0);
    int boundary = !cx.block_edge_interior(ref, e) + !cx.block_edge_interior(ref, f);
    return boundary == 2 ? PlacementCase::BothBoundary
                         : (boundary == 1 ? PlacementCase::OneBoundary : PlacementCase::BothInterior);
}

/// Adjacent edge pairs of the reference big cube, each listed once.
inline std::vector<std::pair<EdgeId, EdgeId>> adjacent_pairs_in_reference(const CubeComplex& cx) {
    const TorusGeometry& g = cx.geometry();
    Block ref = cx.block(0, 0);
    std::vector<EdgeId> edges;
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
        if (cx.block_has_edge(ref, e)) {
            edges.push_back(e);
        }
    }
    std::vector<std::pair<EdgeId, EdgeId>> out;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        for (std::size_t j = i + 1; j < edges.size(); ++j) {
            if (g.adjacent_edges(edges[i], edges[j])) {
                out.emplace_back(edges[i], edges[j]);
            }
        }
    }
    return out;
}

/// A configuration in D C_{e,e'}: one link on e at time te and one on f at
/// time tf (both in the reference slab), mapped by every theta_q. Copies
/// landing on the same point are merged.
inline LinkConfiguration build_distributed_crowded(const CubeComplex& cx, EdgeId e, double te, LinkKind ke,
                                                   EdgeId f, double tf, LinkKind kf) {
    Block ref = cx.block(0, 0);
    if (!cx.block_has_link(ref, e, te) || !cx.block_has_link(ref, f, tf)) {
        throw std::invalid_argument("seed links must lie in the reference big cube");
    }
    if (!cx.geometry().adjacent_edges(e, f)) {
        throw std::invalid_argument("seed edges must be adjacent");
    }
    LinkConfiguration out(cx.geometry_ptr());
    for (std::size_t q = 0; q < cx.num_big_cubes(); ++q) {
        for (const Link& l : {Link{e, te, ke}, Link{f, tf, kf}}) {
            Link img{cx.reflect_edge(q, l.edge), cx.reflect_time(q, l.time), l.kind};
            if (!out.contains(img.edge, img.time)) {
                out.insert(img);
            }
        }
    }
    return out;
}

/// Number of connected components of the union of all reflected copies of
/// e and f (spatial reflections only).
inline std::size_t distributed_components(const CubeComplex& cx, EdgeId e, EdgeId f) {
    const TorusGeometry& g = cx.geometry();
    std::vector<char> used(g.num_edges(), 0);
    for (std::size_t box = 0; box < cx.num_boxes(); ++box) {
        std::size_t q = box * static_cast<std::size_t>(cx.slabs());
        used[cx.reflect_edge(q, e)] = 1;
        used[cx.reflect_edge(q, f)] = 1;
    }
    DisjointSets ds(g.num_edges());
    for (EdgeId a = 0; a < g.num_edges(); ++a) {
        for (EdgeId b = a + 1; b < g.num_edges(); ++b) {
            if (used[a] && used[b] && g.adjacent_edges(a, b)) {
                ds.unite(a, b);
            }
        }
    }
    std::size_t count = 0;
    for (EdgeId a = 0; a < g.num_edges(); ++a) {
        count += used[a] && ds.find(a) == a;
    }
    return count;
}

// ---- closed-form constants ------------------------------------------------

/// 1/phi = 2(d+1)^2 + 1.
inline long phi_denominator(int d) {
    if (d < 1) {
        throw std::invalid_argument("phi needs d >= 1");
    }
    return 2L * (d + 1) * (d + 1) + 1;
}

inline double phi(int d) { return 1.0 / static_cast<double>(phi_denominator(d)); }

/// 1 + 2(d+1) + 4 binom(d+1, 2), the count in the pigeonhole argument.
inline long phi_translate_count(int d) { return 1L + 2L * (d + 1) + 4L * ((d + 1L) * d / 2); }

struct BoundInputs {
    int d = 1;
    double u = 0.0;
    double R = 1.0;
    int n = 2;
    double beta = 1.0;
    /// K' = prod 4k_r, the number of vertices.
    double K_prime = 4.0;
    /// NaN selects e^3 d^2 2^{d+3} R.
    double C1 = std::numeric_limits<double>::quiet_NaN();
};

struct BoundValues {
    double C1 = 0.0;
    double bound_E = 0.0;
    double bound_T = 0.0;
    double bound_C = 0.0;
    /// n beta K / (4R) with K = K' / 2^d.
    double m0 = 0.0;
    /// e^2 d n beta K'.
    double M = 0.0;
    /// 3d + R/n.
    double Delta = 0.0;
    /// Exponent of the partition-function lower bound.
    double log_Z_lower = 0.0;
};

inline double default_C1(int d, double R) { return std::exp(3.0) * d * d * std::ldexp(1.0, d + 3) * R; }

inline BoundValues lemma33_bounds(const BoundInputs& in) {
    if (in.d < 1 || !(in.R > 0.0) || in.n < 1 || !(in.beta > 0.0) || !(in.K_prime > 0.0)) {
        throw std::invalid_argument("bound parameters must be positive");
    }
    if (!(in.u >= 0.0 && in.u <= 1.0)) {
        throw std::invalid_argument("u must lie in [0, 1]");
    }
    BoundValues b;
    const int d = in.d;
    b.C1 = std::isnan(in.C1) ? default_C1(d, in.R) : in.C1;
    b.bound_E = std::ldexp(1.0, d + 2) * std::exp(-(1.0 - in.u) * in.R / 4.0);
    double tail = (in.u < 1.0) ? std::pow(b.C1 * (1.0 - in.u) * in.n, -0.2) : std::numeric_limits<double>::infinity();
    b.bound_T = std::exp(-d * std::ldexp(1.0, d) * in.R) + tail;
    b.bound_C = static_cast<double>(crowded_pairs_per_cube(d)) * b.bound_T;
    double K = in.K_prime / std::ldexp(1.0, d);
    b.m0 = in.n * in.beta * K / (4.0 * in.R);
    b.M = std::exp(2.0) * d * in.n * in.beta * in.K_prime;
    b.Delta = 3.0 * d + in.R / in.n;
    b.log_Z_lower = (in.n * (1.0 - in.u) / 2.0 - d) * in.beta * in.K_prime;
    return b;
}

}  // namespace loopsim

#endif  // LOOPSIM_EVENTS_HPP
