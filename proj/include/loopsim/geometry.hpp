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
#ifndef LOOPSIM_GEOMETRY_HPP
#define LOOPSIM_GEOMETRY_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace loopsim {

using VertexId = std::uint32_t;
using EdgeId = std::uint32_t;

/// Nearest-neighbour pair of the torus. `lo < hi` in the vertex order;
/// `base` is the endpoint from which a unit step along `direction` reaches
/// the other one (differs from `lo` only for wrap-around edges).
struct Edge {
    VertexId lo = 0;
    VertexId hi = 0;
    int direction = 0;
    VertexId base = 0;

    bool has(VertexId v) const { return v == lo || v == hi; }
    VertexId other(VertexId v) const { return v == lo ? hi : lo; }
};

/// The discrete torus {0..4k_1-1} x ... x {0..4k_d-1} together with the
/// length `beta` of the time circle.
///
/// Vertices are numbered lexicographically (first coordinate most
/// significant), so the numeric order of `VertexId` is the fixed total order
/// on vertices. Edges are numbered in lexicographic order of their
/// `(lo, hi)` endpoint pairs, which is the fixed edge order used to break
/// time ties.
class TorusGeometry {
  public:
    TorusGeometry(int dim, std::vector<int> k, double beta) : dim_(dim), k_(std::move(k)), beta_(beta) {
        if (dim_ < 1) {
            throw std::invalid_argument("torus dimension must be >= 1, got " + std::to_string(dim_));
        }
        if (static_cast<int>(k_.size()) != dim_) {
            throw std::invalid_argument("expected " + std::to_string(dim_) + " side parameters, got " +
                                        std::to_string(k_.size()));
        }
        for (int kr : k_) {
            if (kr < 1) {
                throw std::invalid_argument("side parameters k_r must be >= 1");
            }
        }
        if (!(beta_ > 0.0)) {
            throw std::invalid_argument("beta must be positive");
        }
        build_tables();
    }

    int dim() const { return dim_; }
    const std::vector<int>& k() const { return k_; }
    double beta() const { return beta_; }
    int side(int r) const { return 4 * k_[static_cast<std::size_t>(r)]; }

    /// K' = prod_r 4 k_r.
    std::size_t num_vertices() const { return num_vertices_; }
    std::size_t num_edges() const { return edges_.size(); }
    /// K = prod_r 2 k_r, the number of spatial boxes of width 2.
    std::size_t num_boxes() const { return num_vertices_ >> dim_; }

    std::vector<int> coords(VertexId v) const {
        std::vector<int> c(static_cast<std::size_t>(dim_));
        for (int r = dim_ - 1; r >= 0; --r) {
            c[static_cast<std::size_t>(r)] = static_cast<int>(v % static_cast<VertexId>(side(r)));
            v /= static_cast<VertexId>(side(r));
        }
        return c;
    }

    int coord(VertexId v, int r) const {
        return static_cast<int>((v / strides_[static_cast<std::size_t>(r)]) % static_cast<VertexId>(side(r)));
    }

    /// Vertex with the given coordinates, reduced periodically.
    VertexId vertex(std::span<const int> c) const {
        if (static_cast<int>(c.size()) != dim_) {
            throw std::invalid_argument("coordinate vector has wrong dimension");
        }
        VertexId v = 0;
        for (int r = 0; r < dim_; ++r) {
            v = v * static_cast<VertexId>(side(r)) + static_cast<VertexId>(wrap(c[static_cast<std::size_t>(r)], side(r)));
        }
        return v;
    }

    VertexId shift(VertexId v, int r, int delta) const {
        int x = coord(v, r);
        int y = wrap(x + delta, side(r));
        return v + static_cast<VertexId>((y - x)) * strides_[static_cast<std::size_t>(r)];
    }

    std::span<const VertexId> neighbours(VertexId v) const {
        return {neighbours_.data() + static_cast<std::size_t>(v) * degree(), degree()};
    }
    std::span<const EdgeId> incident_edges(VertexId v) const {
        return {incident_.data() + static_cast<std::size_t>(v) * degree(), degree()};
    }
    std::size_t degree() const { return static_cast<std::size_t>(2 * dim_); }

    const Edge& edge(EdgeId e) const { return edges_[e]; }
    const std::vector<Edge>& edges() const { return edges_; }

    std::optional<EdgeId> find_edge(VertexId a, VertexId b) const {
        for (EdgeId e : incident_edges(a)) {
            if (edges_[e].has(b)) {
                return e;
            }
        }
        return std::nullopt;
    }

    bool are_neighbours(VertexId a, VertexId b) const { return find_edge(a, b).has_value(); }

    /// Edges sharing exactly one endpoint.
    bool adjacent_edges(EdgeId e, EdgeId f) const {
        if (e == f) {
            return false;
        }
        const Edge& a = edges_[e];
        const Edge& b = edges_[f];
        int shared = static_cast<int>(a.has(b.lo)) + static_cast<int>(a.has(b.hi));
        return shared == 1;
    }

    /// Spatial coordinate of the edge midpoint along axis r, in [0, side(r)).
    double midpoint(EdgeId e, int r) const {
        const Edge& ed = edges_[e];
        double x = coord(ed.base, r);
        return r == ed.direction ? x + 0.5 : x;
    }

    /// Periodic L1 distance between two vertices.
    int distance(VertexId a, VertexId b) const {
        int total = 0;
        for (int r = 0; r < dim_; ++r) {
            int diff = std::abs(coord(a, r) - coord(b, r));
            total += std::min(diff, side(r) - diff);
        }
        return total;
    }

    bool same_shape(const TorusGeometry& o) const { return dim_ == o.dim_ && k_ == o.k_ && beta_ == o.beta_; }

    static int wrap(int x, int period) {
        int m = x % period;
        return m < 0 ? m + period : m;
    }

  private:
    void build_tables() {
        num_vertices_ = 1;
        strides_.assign(static_cast<std::size_t>(dim_), 1);
        for (int r = dim_ - 1; r >= 0; --r) {
            strides_[static_cast<std::size_t>(r)] = static_cast<VertexId>(num_vertices_);
            num_vertices_ *= static_cast<std::size_t>(side(r));
        }
        std::vector<Edge> raw;
        raw.reserve(num_vertices_ * static_cast<std::size_t>(dim_));
        for (VertexId v = 0; v < num_vertices_; ++v) {
            for (int r = 0; r < dim_; ++r) {
                VertexId w = shift(v, r, +1);
                raw.push_back(Edge{std::min(v, w), std::max(v, w), r, v});
            }
        }
        std::sort(raw.begin(), raw.end(), [](const Edge& a, const Edge& b) {
            return a.lo != b.lo ? a.lo < b.lo : a.hi < b.hi;
        });
        edges_ = std::move(raw);

        neighbours_.assign(num_vertices_ * degree(), 0);
        incident_.assign(num_vertices_ * degree(), 0);
        std::vector<std::size_t> fill(num_vertices_, 0);
        for (EdgeId e = 0; e < edges_.size(); ++e) {
            for (VertexId v : {edges_[e].lo, edges_[e].hi}) {
                std::size_t slot = static_cast<std::size_t>(v) * degree() + fill[v]++;
                incident_[slot] = e;
                neighbours_[slot] = edges_[e].other(v);
            }
        }
    }

    int dim_;
    std::vector<int> k_;
    double beta_;
    std::size_t num_vertices_ = 0;
    std::vector<VertexId> strides_;
    std::vector<Edge> edges_;
    std::vector<VertexId> neighbours_;
    std::vector<EdgeId> incident_;
};

using GeometryPtr = std::shared_ptr<const TorusGeometry>;

inline GeometryPtr build_geometry(int dim, std::vector<int> k, double beta) {
    return std::make_shared<const TorusGeometry>(dim, std::move(k), beta);
}

}  // namespace loopsim

#endif  // LOOPSIM_GEOMETRY_HPP
