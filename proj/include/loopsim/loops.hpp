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
#ifndef LOOPSIM_LOOPS_HPP
#define LOOPSIM_LOOPS_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "loopsim/configuration.hpp"

namespace loopsim {

struct SpaceTimePoint {
    VertexId vertex = 0;
    double time = 0.0;
};

class DisjointSets {
  public:
    explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0u); }

    std::uint32_t find(std::uint32_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    bool unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) {
            return false;
        }
        if (rank_[a] < rank_[b]) {
            std::swap(a, b);
        }
        parent_[b] = a;
        if (rank_[a] == rank_[b]) {
            ++rank_[a];
        }
        return true;
    }

    std::size_t size() const { return parent_.size(); }

  private:
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint8_t> rank_;
};

/// Partition of the maximal intervals of a configuration into loops.
///
/// With the periodic time circle a site carrying m >= 1 incidences has m
/// intervals; interval i is (key_{i-1}, key_i], with interval 0 wrapping
/// through time beta = 0. With pairing boundary conditions the circle is
/// cut and a site has m + 1 intervals (0, key_0], ..., (key_{m-1}, beta].
class LoopDecomposition {
  public:
    LoopDecomposition(const LinkConfiguration& cfg, bool periodic) : periodic_(periodic) {
        const TorusGeometry& g = cfg.geometry();
        const std::size_t V = g.num_vertices();
        times_.resize(V);
        offset_.resize(V + 1, 0);
        for (VertexId v = 0; v < V; ++v) {
            auto inc = cfg.incidences(v);
            times_[v].reserve(inc.size());
            for (const Incidence& i : inc) {
                times_[v].push_back(i.time);
            }
            offset_[v + 1] = offset_[v] + static_cast<std::uint32_t>(intervals_at(inc.size()));
        }
    }

    bool periodic() const { return periodic_; }
    std::size_t count() const { return count_; }
    std::size_t num_intervals() const { return label_.size(); }

    /// Interval containing the point (v, t); a point at a link time belongs
    /// to the interval that ends there.
    std::uint32_t interval_at(VertexId v, double t) const {
        const auto& ts = times_[v];
        auto i = static_cast<std::size_t>(std::lower_bound(ts.begin(), ts.end(), t) - ts.begin());
        if (periodic_ && i == ts.size()) {
            i = 0;
        }
        return offset_[v] + static_cast<std::uint32_t>(i);
    }

    std::uint32_t loop_of(VertexId v, double t) const { return label_[interval_at(v, t)]; }
    std::uint32_t loop_of(const SpaceTimePoint& p) const { return loop_of(p.vertex, p.time); }
    std::uint32_t loop_of_interval(std::uint32_t i) const { return label_[i]; }

    bool connected(const SpaceTimePoint& a, const SpaceTimePoint& b) const { return loop_of(a) == loop_of(b); }

    std::uint32_t first_interval(VertexId v) const { return offset_[v]; }
    std::uint32_t end_interval(VertexId v) const { return offset_[v + 1]; }

    // Used by the builders below.
    std::size_t intervals_at(std::size_t m) const { return periodic_ ? std::max<std::size_t>(m, 1) : m + 1; }
    void set_labels(std::vector<std::uint32_t> labels, std::size_t count) {
        label_ = std::move(labels);
        count_ = count;
    }

  private:
    bool periodic_;
    std::vector<std::vector<double>> times_;
    std::vector<std::uint32_t> offset_;
    std::vector<std::uint32_t> label_;
    std::size_t count_ = 0;
};

/// A perfect matching of the vertices: `partner[v]` is v's pair.
using Pairing = std::vector<VertexId>;

inline void validate_pairing(const Pairing& p, std::size_t num_vertices) {
    if (p.size() != num_vertices) {
        throw std::invalid_argument("pairing has " + std::to_string(p.size()) + " entries, expected " +
                                    std::to_string(num_vertices));
    }
    for (VertexId v = 0; v < p.size(); ++v) {
        if (p[v] >= p.size() || p[v] == v || p[p[v]] != v) {
            throw std::invalid_argument("not a perfect matching at vertex " + std::to_string(v));
        }
    }
}

namespace detail {

inline void unite_link_intervals(const LinkConfiguration& cfg, LoopDecomposition& dec, DisjointSets& ds) {
    const TorusGeometry& g = cfg.geometry();
    const bool periodic = dec.periodic();
    for (VertexId v = 0; v < g.num_vertices(); ++v) {
        auto inc_v = cfg.incidences(v);
        const std::uint32_t mv = static_cast<std::uint32_t>(inc_v.size());
        for (std::uint32_t i = 0; i < mv; ++i) {
            const Incidence& a = inc_v[i];
            VertexId w = g.edge(a.edge).other(v);
            if (w < v) {
                continue;  // each link handled once, from its lower endpoint
            }
            auto inc_w = cfg.incidences(w);
            const std::uint32_t mw = static_cast<std::uint32_t>(inc_w.size());
            auto jt = std::lower_bound(inc_w.begin(), inc_w.end(), a.key(),
                                       [](const Incidence& x, const LinkKey& k) { return x.key() < k; });
            auto j = static_cast<std::uint32_t>(jt - inc_w.begin());
            std::uint32_t below_v = dec.first_interval(v) + i;
            std::uint32_t below_w = dec.first_interval(w) + j;
            std::uint32_t above_v = dec.first_interval(v) + (periodic ? (i + 1) % mv : i + 1);
            std::uint32_t above_w = dec.first_interval(w) + (periodic ? (j + 1) % mw : j + 1);
            if (a.kind == LinkKind::Cross) {
                ds.unite(above_v, below_w);
                ds.unite(below_v, above_w);
            } else {
                ds.unite(above_v, above_w);
                ds.unite(below_v, below_w);
            }
        }
    }
}

inline void finish_labels(LoopDecomposition& dec, DisjointSets& ds) {
    const std::size_t n = ds.size();
    std::vector<std::uint32_t> root_label(n, std::numeric_limits<std::uint32_t>::max());
    std::vector<std::uint32_t> labels(n);
    std::uint32_t next = 0;
    for (std::uint32_t i = 0; i < n; ++i) {
        std::uint32_t r = ds.find(i);
        if (root_label[r] == std::numeric_limits<std::uint32_t>::max()) {
            root_label[r] = next++;
        }
        labels[i] = root_label[r];
    }
    dec.set_labels(std::move(labels), next);
}

}  // namespace detail

/// Loops on the periodic time circle; `count()` is the loop number.
inline LoopDecomposition decompose_periodic(const LinkConfiguration& cfg) {
    LoopDecomposition dec(cfg, true);
    DisjointSets ds(dec.end_interval(static_cast<VertexId>(cfg.geometry().num_vertices() - 1)));
    detail::unite_link_intervals(cfg, dec, ds);
    detail::finish_labels(dec, ds);
    return dec;
}

/// Loops with the time circle cut at 0 / beta; strands are closed below
/// time 0 by `xi0` and above time beta by `xi1`.
inline LoopDecomposition decompose_with_pairings(const LinkConfiguration& cfg, const Pairing& xi0, const Pairing& xi1) {
    const TorusGeometry& g = cfg.geometry();
    validate_pairing(xi0, g.num_vertices());
    validate_pairing(xi1, g.num_vertices());
    LoopDecomposition dec(cfg, false);
    DisjointSets ds(dec.end_interval(static_cast<VertexId>(g.num_vertices() - 1)));
    detail::unite_link_intervals(cfg, dec, ds);
    for (VertexId v = 0; v < g.num_vertices(); ++v) {
        ds.unite(dec.first_interval(v), dec.first_interval(xi0[v]));
        ds.unite(dec.end_interval(v) - 1, dec.end_interval(xi1[v]) - 1);
    }
    detail::finish_labels(dec, ds);
    return dec;
}

inline std::size_t count_loops(const LinkConfiguration& cfg) { return decompose_periodic(cfg).count(); }

inline bool connected(const LinkConfiguration& cfg, const SpaceTimePoint& a, const SpaceTimePoint& b) {
    return decompose_periodic(cfg).connected(a, b);
}

// ---- pairings -------------------------------------------------------------

template <class Rng>
Pairing random_pairing(std::size_t num_vertices, Rng& rng) {
    if (num_vertices % 2 != 0) {
        throw std::invalid_argument("odd vertex count has no perfect matching");
    }
    std::vector<VertexId> order(num_vertices);
    std::iota(order.begin(), order.end(), 0u);
    std::shuffle(order.begin(), order.end(), rng);
    Pairing p(num_vertices);
    for (std::size_t i = 0; i < num_vertices; i += 2) {
        p[order[i]] = order[i + 1];
        p[order[i + 1]] = order[i];
    }
    return p;
}

/// Pairs every vertex with an even coordinate along `axis` with its
/// successor along that axis; a dimer cover of the torus.
inline Pairing dimer_pairing(const TorusGeometry& g, int axis = 0) {
    Pairing p(g.num_vertices());
    for (VertexId v = 0; v < g.num_vertices(); ++v) {
        p[v] = g.coord(v, axis) % 2 == 0 ? g.shift(v, axis, +1) : g.shift(v, axis, -1);
    }
    return p;
}

/// Number of pairs xy of the pairing with x, y nearest neighbours.
inline std::size_t minimal_pair_count(const Pairing& xi, const TorusGeometry& g) {
    std::size_t count = 0;
    for (VertexId v = 0; v < xi.size(); ++v) {
        if (v < xi[v] && g.are_neighbours(v, xi[v])) {
            ++count;
        }
    }
    return count;
}

/// Number of cycles of the union of two perfect matchings (a pair shared
/// by both counts as one cycle).
inline std::size_t pairing_cycles(const Pairing& a, const Pairing& b) {
    std::vector<char> seen(a.size(), 0);
    std::size_t cycles = 0;
    for (VertexId s = 0; s < a.size(); ++s) {
        if (seen[s]) {
            continue;
        }
        ++cycles;
        VertexId v = s;
        do {
            seen[v] = 1;
            seen[a[v]] = 1;
            v = b[a[v]];
        } while (v != s);
    }
    return cycles;
}

/// Reveals one link on top of the pairing `xi` (the pairs joined by loop
/// segments below the link). Returns true if the link closes a loop.
inline bool evolve_pairing_inplace(Pairing& xi, const TorusGeometry& g, const Link& link) {
    const Edge& e = g.edge(link.edge);
    VertexId x = e.lo;
    VertexId y = e.hi;
    if (xi[x] == y) {
        return link.kind == LinkKind::DoubleBar;
    }
    VertexId w = xi[x];
    VertexId z = xi[y];
    if (link.kind == LinkKind::DoubleBar) {
        xi[w] = z;
        xi[z] = w;
        xi[x] = y;
        xi[y] = x;
    } else {
        xi[x] = z;
        xi[z] = x;
        xi[y] = w;
        xi[w] = y;
    }
    return false;
}

struct PairingStep {
    Pairing pairing;
    bool closed = false;
};

inline PairingStep evolve_pairing(const Pairing& xi, const TorusGeometry& g, const Link& link) {
    PairingStep out{xi, false};
    out.closed = evolve_pairing_inplace(out.pairing, g, link);
    return out;
}

struct ClosingSweep {
    /// Links in (time, edge) order.
    std::vector<Link> links;
    /// closes[i] is true when links[i] closes a loop.
    std::vector<char> closes;
    std::size_t closing = 0;
    /// The pairing just below time beta.
    Pairing final_pairing;
};

inline ClosingSweep sweep_closing_links(const LinkConfiguration& cfg, const Pairing& xi0) {
    validate_pairing(xi0, cfg.geometry().num_vertices());
    ClosingSweep s;
    s.links = cfg.sorted_links();
    s.closes.assign(s.links.size(), 0);
    s.final_pairing = xi0;
    for (std::size_t i = 0; i < s.links.size(); ++i) {
        if (evolve_pairing_inplace(s.final_pairing, cfg.geometry(), s.links[i])) {
            s.closes[i] = 1;
            ++s.closing;
        }
    }
    return s;
}

/// L: the number of links that close a loop in the sweep from time 0.
inline std::size_t count_closing_links(const LinkConfiguration& cfg, const Pairing& xi0) {
    return sweep_closing_links(cfg, xi0).closing;
}

// ---- incremental loop counts ---------------------------------------------

enum class MoveType { Insert, Remove, Flip };

/// A proposed change. For Remove and Flip only the position (edge, time) of
/// `link` is used; the stored kind is looked up in the configuration.
struct Move {
    MoveType type = MoveType::Insert;
    Link link;
};

struct DeltaOptions {
    /// Maximum number of traversed intervals before falling back to a full
    /// recount; 0 means no limit.
    std::size_t max_steps = 0;
};

namespace detail {

/// Where a walk started just above (x, t) first hits the cut at (x, t) or
/// (y, t) of a would-be link on {x, y}.
enum class WalkOutcome { OtherLoop, ReachedGoingUp, ReachedGoingDown, Capped };

inline bool strictly_between_up(const LinkKey& a, const LinkKey& c, const LinkKey& b) {
    if (a < b) {
        return a < c && c < b;
    }
    if (b < a) {
        return c > a || c < b;
    }
    return c != a;
}

class CutWalker {
  public:
    CutWalker(const LinkConfiguration& cfg, const LinkKey* ignore) : cfg_(cfg), ignore_(ignore) {}

    WalkOutcome walk(EdgeId e, double t, std::size_t max_steps) const {
        const TorusGeometry& g = cfg_.geometry();
        const VertexId x = g.edge(e).lo;
        const VertexId y = g.edge(e).hi;
        const LinkKey cut{t, e};
        VertexId v = x;
        LinkKey k = cut;
        bool up = true;
        const std::size_t hard_cap = 4 * cfg_.size() + 2 * g.num_vertices() + 8;
        for (std::size_t steps = 0;; ++steps) {
            if (max_steps != 0 && steps > max_steps) {
                return WalkOutcome::Capped;
            }
            if (steps > hard_cap) {
                throw std::logic_error("loop walk exceeded the number of intervals");
            }
            auto inc = cfg_.incidences(v);
            std::optional<std::size_t> nxt = up ? next_up(inc, k) : next_down(inc, k);
            if (v == x || v == y) {
                bool hit;
                if (!nxt) {
                    hit = true;
                } else {
                    const LinkKey b = inc[*nxt].key();
                    hit = up ? strictly_between_up(k, cut, b) : strictly_between_up(b, cut, k);
                }
                if (hit) {
                    if (v == x) {
                        return WalkOutcome::OtherLoop;
                    }
                    return up ? WalkOutcome::ReachedGoingUp : WalkOutcome::ReachedGoingDown;
                }
            }
            if (!nxt) {
                throw std::logic_error("loop walk stranded on a site without links");
            }
            const Incidence& hop = inc[*nxt];
            v = g.edge(hop.edge).other(v);
            k = hop.key();
            if (hop.kind == LinkKind::DoubleBar) {
                up = !up;
            }
        }
    }

  private:
    bool ignored(const Incidence& i) const { return ignore_ && i.key() == *ignore_; }

    std::optional<std::size_t> next_up(std::span<const Incidence> inc, const LinkKey& k) const {
        const std::size_t m = inc.size();
        if (m == 0) {
            return std::nullopt;
        }
        auto idx = static_cast<std::size_t>(
            std::upper_bound(inc.begin(), inc.end(), k, [](const LinkKey& a, const Incidence& b) { return a < b.key(); }) -
            inc.begin());
        for (std::size_t tries = 0; tries < m; ++tries) {
            std::size_t i = (idx + tries) % m;
            if (!ignored(inc[i])) {
                return i;
            }
        }
        return std::nullopt;
    }

    std::optional<std::size_t> next_down(std::span<const Incidence> inc, const LinkKey& k) const {
        const std::size_t m = inc.size();
        if (m == 0) {
            return std::nullopt;
        }
        auto lb = static_cast<std::size_t>(
            std::lower_bound(inc.begin(), inc.end(), k, [](const Incidence& a, const LinkKey& b) { return a.key() < b; }) -
            inc.begin());
        std::size_t idx = (lb + m - 1) % m;
        for (std::size_t tries = 0; tries < m; ++tries) {
            std::size_t i = (idx + m - tries) % m;
            if (!ignored(inc[i])) {
                return i;
            }
        }
        return std::nullopt;
    }

    const LinkConfiguration& cfg_;
    const LinkKey* ignore_;
};

inline int insert_delta_from(WalkOutcome o, LinkKind kind) {
    switch (o) {
        case WalkOutcome::OtherLoop:
            return -1;
        case WalkOutcome::ReachedGoingUp:
            return kind == LinkKind::Cross ? +1 : 0;
        case WalkOutcome::ReachedGoingDown:
            return kind == LinkKind::DoubleBar ? +1 : 0;
        case WalkOutcome::Capped:
            break;
    }
    throw std::logic_error("no delta for a capped walk");
}

}  // namespace detail

/// Change of the periodic loop number under `move`, found by walking only
/// the loop(s) through the affected position.
inline int delta_loops(const LinkConfiguration& cfg, const Move& move, const DeltaOptions& opt = {}) {
    const Link& l = move.link;
    if (move.type == MoveType::Insert) {
        if (cfg.contains(l.edge, l.time)) {
            throw std::invalid_argument("insert at an occupied position");
        }
        detail::CutWalker walker(cfg, nullptr);
        auto o = walker.walk(l.edge, l.time, opt.max_steps);
        if (o != detail::WalkOutcome::Capped) {
            return detail::insert_delta_from(o, l.kind);
        }
        LinkConfiguration after = cfg;
        after.insert(l);
        return static_cast<int>(count_loops(after)) - static_cast<int>(count_loops(cfg));
    }
    const Link* present = cfg.find(l.edge, l.time);
    if (!present) {
        throw std::logic_error("move refers to a link that is not present");
    }
    const LinkKind old_kind = present->kind;
    const LinkKey key = key_of(*present);
    detail::CutWalker walker(cfg, &key);
    auto o = walker.walk(l.edge, l.time, opt.max_steps);
    if (o == detail::WalkOutcome::Capped) {
        LinkConfiguration after = cfg;
        if (move.type == MoveType::Remove) {
            after.remove(l.edge, l.time);
        } else {
            after.flip(l.edge, l.time);
        }
        return static_cast<int>(count_loops(after)) - static_cast<int>(count_loops(cfg));
    }
    if (move.type == MoveType::Remove) {
        return -detail::insert_delta_from(o, old_kind);
    }
    return detail::insert_delta_from(o, other_kind(old_kind)) - detail::insert_delta_from(o, old_kind);
}

}  // namespace loopsim

#endif  // LOOPSIM_LOOPS_HPP
