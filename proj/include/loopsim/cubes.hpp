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
#ifndef LOOPSIM_CUBES_HPP
#define LOOPSIM_CUBES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "loopsim/geometry.hpp"

namespace loopsim {

/// Raised when no admissible block height exists for the requested
/// parameters.
class Infeasible : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

struct RSelection {
    double R = 0.0;
    int k_time = 0;
    /// Number of time slabs, 2 * k_time = beta n / R.
    int slabs = 0;
};

/// Smallest R > R0 with beta*n/R an even positive integer.
inline RSelection select_R(double R0, double beta, int n) {
    if (!(R0 > 0.0) || !(beta > 0.0) || n < 1) {
        throw std::invalid_argument("select_R needs R0 > 0, beta > 0, n >= 1");
    }
    double x = beta * static_cast<double>(n) / R0;
    // Largest even integer strictly below x.
    long m = 2 * static_cast<long>(std::ceil(x / 2.0)) - 2;
    if (m < 2) {
        throw Infeasible("no even slab count m >= 2 with beta*n/m > R0 (beta*n/R0 = " + std::to_string(x) +
                         "); need beta > 2*R0/n");
    }
    RSelection sel;
    sel.slabs = static_cast<int>(m);
    sel.k_time = sel.slabs / 2;
    sel.R = beta * static_cast<double>(n) / static_cast<double>(m);
    return sel;
}

/// A small cube s: one vertex times one time window of height R/(2n).
struct SmallCube {
    VertexId vertex = 0;
    int window = 0;
    bool operator==(const SmallCube& o) const { return vertex == o.vertex && window == o.window; }
    bool operator!=(const SmallCube& o) const { return !(*this == o); }
};

/// A box of 2 x ... x 2 small cubes, given by its lowest corner. Big cubes
/// of the reference torus have even corners; the translated tori use the
/// other parities.
struct Block {
    std::vector<int> corner;
    int window = 0;
    bool operator==(const Block& o) const { return corner == o.corner && window == o.window; }
};

/// Big cubes, small cubes, translated tori and reflection maps of a torus
/// geometry for a given block height.
class CubeComplex {
  public:
    CubeComplex(GeometryPtr geom, double R0, int n) : geom_(std::move(geom)), R0_(R0), n_(n) {
        if (!geom_) {
            throw std::invalid_argument("null geometry");
        }
        sel_ = select_R(R0_, geom_->beta(), n_);
        const int d = geom_->dim();
        box_counts_.resize(static_cast<std::size_t>(d));
        num_boxes_ = 1;
        for (int r = 0; r < d; ++r) {
            box_counts_[static_cast<std::size_t>(r)] = 2 * geom_->k()[static_cast<std::size_t>(r)];
            num_boxes_ *= static_cast<std::size_t>(box_counts_[static_cast<std::size_t>(r)]);
        }
    }

    const TorusGeometry& geometry() const { return *geom_; }
    const GeometryPtr& geometry_ptr() const { return geom_; }
    double R0() const { return R0_; }
    double R() const { return sel_.R; }
    int n() const { return n_; }
    int k_time() const { return sel_.k_time; }
    int slabs() const { return sel_.slabs; }
    int windows() const { return 2 * sel_.slabs; }
    double slab_height() const { return geom_->beta() / sel_.slabs; }
    double window_height() const { return geom_->beta() / windows(); }

    /// K = prod 2k_r spatial boxes.
    std::size_t num_boxes() const { return num_boxes_; }
    /// K_{d+1} big cubes in each translated torus.
    std::size_t num_big_cubes() const { return num_boxes_ * static_cast<std::size_t>(sel_.slabs); }
    std::size_t num_small_cubes() const { return geom_->num_vertices() * static_cast<std::size_t>(windows()); }
    int num_translates() const { return 1 << (geom_->dim() + 1); }
    int small_cubes_per_block() const { return 1 << (geom_->dim() + 1); }

    // ---- indexing -------------------------------------------------------

    std::vector<int> box_coords(std::size_t box) const {
        const int d = geom_->dim();
        std::vector<int> b(static_cast<std::size_t>(d));
        for (int r = d - 1; r >= 0; --r) {
            auto cnt = static_cast<std::size_t>(box_counts_[static_cast<std::size_t>(r)]);
            b[static_cast<std::size_t>(r)] = static_cast<int>(box % cnt);
            box /= cnt;
        }
        return b;
    }

    std::size_t box_index(const std::vector<int>& b) const {
        std::size_t idx = 0;
        for (int r = 0; r < geom_->dim(); ++r) {
            int cnt = box_counts_[static_cast<std::size_t>(r)];
            idx = idx * static_cast<std::size_t>(cnt) +
                  static_cast<std::size_t>(TorusGeometry::wrap(b[static_cast<std::size_t>(r)], cnt));
        }
        return idx;
    }

    /// Big cube q = box * slabs + j of translate `translate`. Bit r of the
    /// translate shifts spatial axis r by one site, bit d shifts time by one
    /// window.
    Block block(std::size_t q, int translate = 0) const {
        check_cube(q);
        const int d = geom_->dim();
        Block blk;
        std::vector<int> b = box_coords(q / static_cast<std::size_t>(sel_.slabs));
        blk.corner.resize(static_cast<std::size_t>(d));
        for (int r = 0; r < d; ++r) {
            blk.corner[static_cast<std::size_t>(r)] = 2 * b[static_cast<std::size_t>(r)] + ((translate >> r) & 1);
        }
        blk.window = 2 * static_cast<int>(q % static_cast<std::size_t>(sel_.slabs)) + ((translate >> d) & 1);
        return blk;
    }

    int translate_of(const Block& blk) const {
        int t = 0;
        for (int r = 0; r < geom_->dim(); ++r) {
            t |= (TorusGeometry::wrap(blk.corner[static_cast<std::size_t>(r)], 2)) << r;
        }
        t |= TorusGeometry::wrap(blk.window, 2) << geom_->dim();
        return t;
    }

    std::size_t cube_index_of(const Block& blk) const {
        std::vector<int> b(blk.corner.size());
        for (std::size_t r = 0; r < b.size(); ++r) {
            b[r] = TorusGeometry::wrap(blk.corner[r], geom_->side(static_cast<int>(r))) / 2;
        }
        int j = TorusGeometry::wrap(blk.window, windows()) / 2;
        return box_index(b) * static_cast<std::size_t>(sel_.slabs) + static_cast<std::size_t>(j);
    }

    /// The big cube of the given translate that contains a small cube.
    Block block_containing(const SmallCube& s, int translate) const {
        const int d = geom_->dim();
        Block blk;
        blk.corner.resize(static_cast<std::size_t>(d));
        for (int r = 0; r < d; ++r) {
            int x = geom_->coord(s.vertex, r);
            int parity = (translate >> r) & 1;
            blk.corner[static_cast<std::size_t>(r)] =
                TorusGeometry::wrap(((x - parity) % 2 == 0) ? x : x - 1, geom_->side(r));
        }
        int tp = (translate >> d) & 1;
        blk.window = TorusGeometry::wrap(((s.window - tp) % 2 == 0) ? s.window : s.window - 1, windows());
        return blk;
    }

    std::size_t small_index(const SmallCube& s) const {
        return static_cast<std::size_t>(s.vertex) * static_cast<std::size_t>(windows()) +
               static_cast<std::size_t>(s.window);
    }
    SmallCube small_cube(std::size_t idx) const {
        auto w = static_cast<std::size_t>(windows());
        return SmallCube{static_cast<VertexId>(idx / w), static_cast<int>(idx % w)};
    }

    /// Small cube containing the point (v, t); window boundaries go to the
    /// window above.
    SmallCube small_cube_at(VertexId v, double t) const {
        int w = static_cast<int>(std::floor(t / window_height()));
        w = std::min(std::max(w, 0), windows() - 1);
        return SmallCube{v, w};
    }

    SmallCube shift_window(const SmallCube& s, int delta) const {
        return SmallCube{s.vertex, TorusGeometry::wrap(s.window + delta, windows())};
    }

    std::vector<SmallCube> small_cubes_of(const Block& blk) const {
        const int d = geom_->dim();
        std::vector<SmallCube> out;
        for (int mask = 0; mask < small_cubes_per_block(); ++mask) {
            std::vector<int> c(blk.corner);
            for (int r = 0; r < d; ++r) {
                c[static_cast<std::size_t>(r)] += (mask >> r) & 1;
            }
            out.push_back(SmallCube{geom_->vertex(c), TorusGeometry::wrap(blk.window + ((mask >> d) & 1), windows())});
        }
        return out;
    }

    bool small_adjacent(const SmallCube& a, const SmallCube& b) const {
        if (a.vertex == b.vertex) {
            int diff = TorusGeometry::wrap(a.window - b.window, windows());
            return diff == 1 || diff == windows() - 1;
        }
        return a.window == b.window && geom_->are_neighbours(a.vertex, b.vertex);
    }

    /// Neighbours of a big cube, counted with multiplicity: two per axis.
    std::vector<std::size_t> big_neighbours(std::size_t q) const {
        check_cube(q);
        std::vector<std::size_t> out;
        std::size_t box = q / static_cast<std::size_t>(sel_.slabs);
        int j = static_cast<int>(q % static_cast<std::size_t>(sel_.slabs));
        std::vector<int> b = box_coords(box);
        for (int r = 0; r < geom_->dim(); ++r) {
            for (int delta : {-1, +1}) {
                std::vector<int> bb = b;
                bb[static_cast<std::size_t>(r)] += delta;
                out.push_back(box_index(bb) * static_cast<std::size_t>(sel_.slabs) + static_cast<std::size_t>(j));
            }
        }
        for (int delta : {-1, +1}) {
            out.push_back(box * static_cast<std::size_t>(sel_.slabs) +
                          static_cast<std::size_t>(TorusGeometry::wrap(j + delta, sel_.slabs)));
        }
        return out;
    }

    // ---- membership (closed sets) --------------------------------------

    bool block_has_small(const Block& blk, const SmallCube& s) const {
        for (int r = 0; r < geom_->dim(); ++r) {
            int diff = TorusGeometry::wrap(geom_->coord(s.vertex, r) - blk.corner[static_cast<std::size_t>(r)], geom_->side(r));
            if (diff > 1) {
                return false;
            }
        }
        return TorusGeometry::wrap(s.window - blk.window, windows()) <= 1;
    }

    bool block_has_vertex(const Block& blk, VertexId v) const {
        for (int r = 0; r < geom_->dim(); ++r) {
            int diff = TorusGeometry::wrap(geom_->coord(v, r) - blk.corner[static_cast<std::size_t>(r)], geom_->side(r));
            if (diff > 1) {
                return false;
            }
        }
        return true;
    }

    bool block_has_edge(const Block& blk, EdgeId e) const {
        const Edge& ed = geom_->edge(e);
        return block_has_vertex(blk, ed.lo) || block_has_vertex(blk, ed.hi);
    }

    bool block_edge_interior(const Block& blk, EdgeId e) const {
        const Edge& ed = geom_->edge(e);
        return block_has_vertex(blk, ed.lo) && block_has_vertex(blk, ed.hi);
    }

    /// Time t lies in the closed window range [w0, w0 + count] (cyclic).
    bool time_in_windows(double t, int w0, int count) const {
        const int W = windows();
        w0 = TorusGeometry::wrap(w0, W);
        if (count >= W) {
            return true;
        }
        double lo = boundary_time(w0);
        int top = w0 + count;
        if (top <= W) {
            double hi = boundary_time(top);
            return (t >= lo && t <= hi) || (top == W && t == 0.0);
        }
        return t >= lo || t <= boundary_time(top - W);
    }

    /// The point (midpoint of e, t) lies in the closed block.
    bool block_has_link(const Block& blk, EdgeId e, double t) const {
        const Edge& ed = geom_->edge(e);
        for (int r = 0; r < geom_->dim(); ++r) {
            // Work with doubled coordinates so midpoints are integers.
            int twice = 2 * geom_->coord(ed.base, r) + (r == ed.direction ? 1 : 0);
            int lo = 2 * blk.corner[static_cast<std::size_t>(r)] - 1;
            int diff = TorusGeometry::wrap(twice - lo, 2 * geom_->side(r));
            if (diff > 4) {
                return false;
            }
        }
        return time_in_windows(t, blk.window, 2);
    }

    /// The point (midpoint of e, t) lies in the closed small cube.
    bool small_has_link(const SmallCube& s, EdgeId e, double t) const {
        return geom_->edge(e).has(s.vertex) && time_in_windows(t, s.window, 1);
    }

    double boundary_time(int w) const {
        return geom_->beta() * static_cast<double>(w) / static_cast<double>(windows());
    }

    // ---- reflections ----------------------------------------------------

    /// theta_q on a spatial coordinate along axis r (real, for midpoints).
    double reflect_coord(std::size_t q, int r, double x, bool inverse = false) const {
        check_cube(q);
        std::vector<int> b = box_coords(q / static_cast<std::size_t>(sel_.slabs));
        int c = b[static_cast<std::size_t>(r)];
        double L = geom_->side(r);
        double y = (c % 2 == 1) ? 2.0 * c + 1.0 - x : (inverse ? x - 2.0 * c : x + 2.0 * c);
        y = std::fmod(y, L);
        return y < 0 ? y + L : y;
    }

    double reflect_time(std::size_t q, double t, bool inverse = false) const {
        check_cube(q);
        int j = static_cast<int>(q % static_cast<std::size_t>(sel_.slabs));
        double beta = geom_->beta();
        double y;
        if (j % 2 == 1) {
            y = beta * static_cast<double>(j + 1) / sel_.slabs - t;
        } else {
            double shift = beta * static_cast<double>(j) / sel_.slabs;
            y = inverse ? t - shift : t + shift;
        }
        y = std::fmod(y, beta);
        if (y < 0) {
            y += beta;
        }
        return y >= beta ? 0.0 : y;
    }

    VertexId reflect_vertex(std::size_t q, VertexId v, bool inverse = false) const {
        const int d = geom_->dim();
        std::vector<int> c(static_cast<std::size_t>(d));
        for (int r = 0; r < d; ++r) {
            c[static_cast<std::size_t>(r)] = static_cast<int>(std::lround(reflect_coord(q, r, geom_->coord(v, r), inverse)));
        }
        return geom_->vertex(c);
    }

    EdgeId reflect_edge(std::size_t q, EdgeId e, bool inverse = false) const {
        const Edge& ed = geom_->edge(e);
        auto f = geom_->find_edge(reflect_vertex(q, ed.lo, inverse), reflect_vertex(q, ed.hi, inverse));
        if (!f) {
            throw std::logic_error("reflection did not map an edge to an edge");
        }
        return *f;
    }

    /// Big cube of translate 0 that contains a small cube.
    std::size_t big_cube_of(const SmallCube& s) const { return cube_index_of(block_containing(s, 0)); }

  private:
    void check_cube(std::size_t q) const {
        if (q >= num_big_cubes()) {
            throw std::out_of_range("big cube index " + std::to_string(q) + " out of range");
        }
    }

    GeometryPtr geom_;
    double R0_;
    int n_;
    RSelection sel_;
    std::vector<int> box_counts_;
    std::size_t num_boxes_ = 1;
};

inline CubeComplex build_cube_complex(GeometryPtr geom, double R0, int n) {
    return CubeComplex(std::move(geom), R0, n);
}

}  // namespace loopsim

#endif  // LOOPSIM_CUBES_HPP
