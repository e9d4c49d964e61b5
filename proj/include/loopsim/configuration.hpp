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
#ifndef LOOPSIM_CONFIGURATION_HPP
#define LOOPSIM_CONFIGURATION_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "loopsim/geometry.hpp"

namespace loopsim {

enum class LinkKind : std::uint8_t { Cross, DoubleBar };

inline LinkKind other_kind(LinkKind k) { return k == LinkKind::Cross ? LinkKind::DoubleBar : LinkKind::Cross; }
inline char kind_char(LinkKind k) { return k == LinkKind::Cross ? 'C' : 'D'; }

struct Link {
    EdgeId edge = 0;
    double time = 0.0;
    LinkKind kind = LinkKind::DoubleBar;

    bool operator==(const Link& o) const { return edge == o.edge && time == o.time && kind == o.kind; }
};

/// Total order on link positions: time first, then the fixed edge order.
struct LinkKey {
    double time = 0.0;
    EdgeId edge = 0;

    auto operator<=>(const LinkKey&) const = default;
};

inline LinkKey key_of(const Link& l) { return LinkKey{l.time, l.edge}; }

/// One link as seen from one of its endpoints.
struct Incidence {
    double time = 0.0;
    EdgeId edge = 0;
    LinkKind kind = LinkKind::DoubleBar;

    LinkKey key() const { return LinkKey{time, edge}; }
};

/// A finite set of typed links on E x [0, beta).
///
/// Links are indexed three ways: per edge (sorted by time), per vertex
/// (sorted by (time, edge)) and in a flat array for uniform selection. The
/// per-vertex lists are what loop traversal walks along.
class LinkConfiguration {
  public:
    explicit LinkConfiguration(GeometryPtr geom) : geom_(std::move(geom)) {
        if (!geom_) {
            throw std::invalid_argument("null geometry");
        }
        per_edge_.resize(geom_->num_edges());
        per_vertex_.resize(geom_->num_vertices());
    }

    const TorusGeometry& geometry() const { return *geom_; }
    const GeometryPtr& geometry_ptr() const { return geom_; }

    std::size_t size() const { return flat_.size(); }
    bool empty() const { return flat_.empty(); }
    std::size_t cross_count() const { return crosses_; }

    /// Link by flat slot; the slot order is arbitrary and changes on removal.
    const Link& at(std::size_t slot) const { return flat_[slot]; }
    std::span<const Link> links() const { return flat_; }

    std::span<const Incidence> incidences(VertexId v) const { return per_vertex_[v]; }

    std::vector<Link> links_on_edge(EdgeId e) const {
        std::vector<Link> out;
        for (const auto& el : per_edge_[e]) {
            out.push_back(Link{e, el.time, el.kind});
        }
        return out;
    }
    std::size_t count_on_edge(EdgeId e) const { return per_edge_[e].size(); }

    /// All links in (time, edge) order.
    std::vector<Link> sorted_links() const {
        std::vector<Link> out(flat_.begin(), flat_.end());
        std::sort(out.begin(), out.end(), [](const Link& a, const Link& b) { return key_of(a) < key_of(b); });
        return out;
    }

    bool contains(EdgeId e, double t) const { return find_on_edge(e, t) != per_edge_[e].end(); }

    const Link* find(EdgeId e, double t) const {
        auto it = find_on_edge(e, t);
        return it == per_edge_[e].end() ? nullptr : &flat_[it->slot];
    }

    void insert(const Link& l) {
        check_link(l);
        auto& pe = per_edge_[l.edge];
        auto it = std::lower_bound(pe.begin(), pe.end(), l.time,
                                   [](const EdgeEntry& a, double t) { return a.time < t; });
        if (it != pe.end() && it->time == l.time) {
            throw std::invalid_argument("duplicate link at edge " + std::to_string(l.edge) + ", time " +
                                        std::to_string(l.time));
        }
        pe.insert(it, EdgeEntry{l.time, l.kind, static_cast<std::uint32_t>(flat_.size())});
        flat_.push_back(l);
        const Edge& ed = geom_->edge(l.edge);
        for (VertexId v : {ed.lo, ed.hi}) {
            auto& pv = per_vertex_[v];
            Incidence inc{l.time, l.edge, l.kind};
            auto jt = std::lower_bound(pv.begin(), pv.end(), inc.key(),
                                       [](const Incidence& a, const LinkKey& k) { return a.key() < k; });
            pv.insert(jt, inc);
        }
        if (l.kind == LinkKind::Cross) {
            ++crosses_;
        }
    }

    /// Removes the link at (e, t) and returns it.
    Link remove(EdgeId e, double t) {
        auto& pe = per_edge_[e];
        auto it = find_on_edge(e, t);
        if (it == pe.end()) {
            throw std::logic_error("remove: no link at edge " + std::to_string(e) + ", time " + std::to_string(t));
        }
        std::uint32_t slot = it->slot;
        Link removed = flat_[slot];
        pe.erase(it);
        erase_incidences(removed);
        // Swap-remove from the flat array and patch the moved entry.
        std::uint32_t last = static_cast<std::uint32_t>(flat_.size() - 1);
        if (slot != last) {
            flat_[slot] = flat_[last];
            auto mt = find_on_edge(flat_[slot].edge, flat_[slot].time);
            mt->slot = slot;
        }
        flat_.pop_back();
        if (removed.kind == LinkKind::Cross) {
            --crosses_;
        }
        return removed;
    }

    /// Changes the kind of the link at (e, t); returns the new kind.
    LinkKind flip(EdgeId e, double t) {
        auto it = find_on_edge(e, t);
        if (it == per_edge_[e].end()) {
            throw std::logic_error("flip: no link at edge " + std::to_string(e) + ", time " + std::to_string(t));
        }
        LinkKind nk = other_kind(it->kind);
        it->kind = nk;
        flat_[it->slot].kind = nk;
        const Edge& ed = geom_->edge(e);
        for (VertexId v : {ed.lo, ed.hi}) {
            auto& pv = per_vertex_[v];
            auto jt = std::lower_bound(pv.begin(), pv.end(), LinkKey{t, e},
                                       [](const Incidence& a, const LinkKey& k) { return a.key() < k; });
            jt->kind = nk;
        }
        crosses_ = nk == LinkKind::Cross ? crosses_ + 1 : crosses_ - 1;
        return nk;
    }

    void clear() {
        for (auto& pe : per_edge_) {
            pe.clear();
        }
        for (auto& pv : per_vertex_) {
            pv.clear();
        }
        flat_.clear();
        crosses_ = 0;
    }

    /// Same geometry shape and the same set of links.
    bool operator==(const LinkConfiguration& o) const {
        return geom_->same_shape(*o.geom_) && sorted_links() == o.sorted_links();
    }

  private:
    struct EdgeEntry {
        double time;
        LinkKind kind;
        std::uint32_t slot;
    };

    std::vector<EdgeEntry>::iterator find_on_edge(EdgeId e, double t) {
        auto& pe = per_edge_[e];
        auto it = std::lower_bound(pe.begin(), pe.end(), t, [](const EdgeEntry& a, double x) { return a.time < x; });
        return (it != pe.end() && it->time == t) ? it : pe.end();
    }
    std::vector<EdgeEntry>::const_iterator find_on_edge(EdgeId e, double t) const {
        const auto& pe = per_edge_[e];
        auto it = std::lower_bound(pe.begin(), pe.end(), t, [](const EdgeEntry& a, double x) { return a.time < x; });
        return (it != pe.end() && it->time == t) ? it : pe.end();
    }

    void erase_incidences(const Link& l) {
        const Edge& ed = geom_->edge(l.edge);
        for (VertexId v : {ed.lo, ed.hi}) {
            auto& pv = per_vertex_[v];
            auto jt = std::lower_bound(pv.begin(), pv.end(), key_of(l),
                                       [](const Incidence& a, const LinkKey& k) { return a.key() < k; });
            pv.erase(jt);
        }
    }

    void check_link(const Link& l) const {
        if (l.edge >= geom_->num_edges()) {
            throw std::invalid_argument("edge id " + std::to_string(l.edge) + " out of range");
        }
        if (!(l.time >= 0.0 && l.time < geom_->beta())) {
            throw std::invalid_argument("link time " + std::to_string(l.time) + " outside [0, beta)");
        }
    }

    GeometryPtr geom_;
    std::vector<std::vector<EdgeEntry>> per_edge_;
    std::vector<std::vector<Incidence>> per_vertex_;
    std::vector<Link> flat_;
    std::size_t crosses_ = 0;
};

/// Independent Poisson processes of crosses (intensity u) and double bars
/// (intensity 1-u) on every edge, scaled by `intensity_scale`.
template <class Rng>
LinkConfiguration sample_poisson(GeometryPtr geom, double u, double intensity_scale, Rng& rng) {
    if (!(u >= 0.0 && u <= 1.0)) {
        throw std::invalid_argument("u must lie in [0, 1]");
    }
    if (!(intensity_scale > 0.0)) {
        throw std::invalid_argument("intensity scale must be positive");
    }
    LinkConfiguration cfg(geom);
    const double beta = geom->beta();
    std::uniform_real_distribution<double> when(0.0, beta);
    for (EdgeId e = 0; e < geom->num_edges(); ++e) {
        for (LinkKind kind : {LinkKind::Cross, LinkKind::DoubleBar}) {
            double rate = beta * intensity_scale * (kind == LinkKind::Cross ? u : 1.0 - u);
            if (rate <= 0.0) {
                continue;
            }
            std::poisson_distribution<int> count(rate);
            int c = count(rng);
            for (int i = 0; i < c; ++i) {
                double t = when(rng);
                if (!cfg.contains(e, t)) {
                    cfg.insert(Link{e, t, kind});
                }
            }
        }
    }
    return cfg;
}

}  // namespace loopsim

#endif  // LOOPSIM_CONFIGURATION_HPP
