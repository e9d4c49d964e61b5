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

#include <cmath>
#include <random>
#include <set>

#include "gtest/gtest.h"
#include "loopsim/cubes.hpp"

using namespace loopsim;

namespace {

// Direct search over even slab counts.
RSelection brute_select(double R0, double beta, int n) {
    for (int m = 100000; m >= 2; m -= 2) {
        double R = beta * n / m;
        if (R > R0) {
            return RSelection{R, m / 2, m};
        }
    }
    throw Infeasible("none");
}

}  // namespace

TEST(select_R, hand_examples) {
    auto a = select_R(2.0, 1.0, 10);
    EXPECT_DOUBLE_EQ(a.R, 2.5);
    EXPECT_EQ(a.slabs, 4);
    auto b = select_R(1.0, 1.0, 4);
    EXPECT_DOUBLE_EQ(b.R, 2.0);
    EXPECT_EQ(b.slabs, 2);
    EXPECT_EQ(b.k_time, 1);
    EXPECT_THROW(select_R(2.0, 0.3, 10), Infeasible);
}

TEST(select_R, agrees_with_direct_search_and_is_monotone) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> R0d(0.1, 5.0), betad(0.2, 6.0);
    std::uniform_int_distribution<int> nd(1, 30);
    for (int trial = 0; trial < 2000; ++trial) {
        double R0 = R0d(rng), beta = betad(rng);
        int n = nd(rng);
        if (beta * n / R0 <= 2.0) {
            EXPECT_THROW(select_R(R0, beta, n), Infeasible);
            continue;
        }
        auto s = select_R(R0, beta, n);
        auto o = brute_select(R0, beta, n);
        EXPECT_EQ(s.slabs, o.slabs);
        EXPECT_GT(s.R, R0);
        double ratio = beta * n / s.R;
        EXPECT_NEAR(ratio, std::round(ratio), 1e-9);
        EXPECT_EQ(static_cast<long>(std::round(ratio)) % 2, 0);
        double smaller = R0 * 0.9;
        if (beta * n / smaller > 2.0) {
            EXPECT_LE(select_R(smaller, beta, n).R, s.R + 1e-12);
        }
    }
}

TEST(cube_complex, counts) {
    auto g = build_geometry(1, {1}, 1.0);
    CubeComplex cc(g, 1.0, 4);
    EXPECT_EQ(cc.num_big_cubes(), 4u);
    EXPECT_EQ(cc.num_small_cubes(), 16u);
    // beta n / R0 = 8 gives six slabs under the smallest-R rule.
    CubeComplex c8(g, 1.0, 8);
    EXPECT_EQ(c8.slabs(), 6);
    EXPECT_EQ(c8.num_big_cubes(), 12u);
    EXPECT_EQ(c8.num_small_cubes(), 48u);
    EXPECT_THROW(CubeComplex(g, 2.0, 1), Infeasible);
}

TEST(cube_complex, blocks_partition_small_cubes_in_every_translate) {
    for (auto g : {build_geometry(1, {1}, 1.0), build_geometry(2, {1, 2}, 2.0)}) {
        CubeComplex cc(g, 1.0, 4);
        for (int tr = 0; tr < cc.num_translates(); ++tr) {
            std::vector<int> hits(cc.num_small_cubes(), 0);
            for (std::size_t q = 0; q < cc.num_big_cubes(); ++q) {
                Block b = cc.block(q, tr);
                EXPECT_EQ(cc.translate_of(b), tr);
                EXPECT_EQ(cc.cube_index_of(b), q);
                auto smalls = cc.small_cubes_of(b);
                EXPECT_EQ(static_cast<int>(smalls.size()), 1 << (g->dim() + 1));
                for (const auto& s : smalls) {
                    ++hits[cc.small_index(s)];
                    EXPECT_TRUE(cc.block_has_small(b, s));
                    EXPECT_EQ(cc.block_containing(s, tr), b);
                }
            }
            for (int h : hits) {
                EXPECT_EQ(h, 1);
            }
        }
    }
}

TEST(cube_complex, reference_cube_membership_in_one_dimension) {
    auto g = build_geometry(1, {1}, 1.0);
    CubeComplex cc(g, 1.0, 4);
    Block s00 = cc.block(0);
    std::set<VertexId> verts;
    for (VertexId v = 0; v < 4; ++v) {
        if (cc.block_has_vertex(s00, v)) verts.insert(v);
    }
    EXPECT_EQ(verts, (std::set<VertexId>{0, 1}));
    std::set<EdgeId> edges, interior;
    for (EdgeId e = 0; e < 4; ++e) {
        if (cc.block_has_edge(s00, e)) edges.insert(e);
        if (cc.block_edge_interior(s00, e)) interior.insert(e);
    }
    EXPECT_EQ(edges, (std::set<EdgeId>{*g->find_edge(3, 0), *g->find_edge(0, 1), *g->find_edge(1, 2)}));
    EXPECT_EQ(interior, (std::set<EdgeId>{*g->find_edge(0, 1)}));
}

TEST(cube_complex, boundary_links_belong_to_all_touching_cubes) {
    auto g = build_geometry(1, {1}, 1.0);
    CubeComplex cc(g, 1.0, 4);  // two boxes, two slabs of height 0.5
    EdgeId wrap = *g->find_edge(3, 0);
    // Midpoint 3.5 lies on the face shared by box 0 and box 1.
    int holders = 0;
    for (std::size_t q = 0; q < cc.num_big_cubes(); ++q) {
        holders += cc.block_has_link(cc.block(q), wrap, 0.2) ? 1 : 0;
    }
    EXPECT_EQ(holders, 2);
    // Time 0.5 is the face between the two slabs.
    EdgeId inner = *g->find_edge(0, 1);
    EXPECT_TRUE(cc.block_has_link(cc.block(0), inner, 0.5));
    EXPECT_TRUE(cc.block_has_link(cc.block(1), inner, 0.5));
    // Time 0 is shared with the top slab through the periodic identification.
    EXPECT_TRUE(cc.block_has_link(cc.block(1), inner, 0.0));
}

TEST(cube_complex, big_cubes_cover_the_torus_with_disjoint_interiors) {
    std::mt19937_64 rng(5);
    auto g = build_geometry(2, {1, 1}, 3.0);
    CubeComplex cc(g, 1.0, 3);
    std::uniform_int_distribution<EdgeId> ed(0, static_cast<EdgeId>(g->num_edges() - 1));
    std::uniform_real_distribution<double> td(0.0, g->beta());
    for (int i = 0; i < 2000; ++i) {
        EdgeId e = ed(rng);
        double t = td(rng);
        int holders = 0;
        for (std::size_t q = 0; q < cc.num_big_cubes(); ++q) {
            holders += cc.block_has_link(cc.block(q), e, t) ? 1 : 0;
        }
        // Midpoints on a face between boxes sit in two cubes, others in one.
        const Edge& edge = g->edge(e);
        int base = g->coord(edge.base, edge.direction);
        bool on_face = base % 2 == 1;
        EXPECT_EQ(holders, on_face ? 2 : 1);
    }
}

TEST(cube_complex, adjacency_is_symmetric) {
    for (auto g : {build_geometry(1, {1}, 1.0), build_geometry(2, {2, 1}, 2.0)}) {
        CubeComplex cc(g, 0.5, 2);
        for (std::size_t q = 0; q < cc.num_big_cubes(); ++q) {
            auto nb = cc.big_neighbours(q);
            EXPECT_EQ(nb.size(), 2u * static_cast<std::size_t>(g->dim() + 1));
            for (auto p : nb) {
                auto back = cc.big_neighbours(p);
                EXPECT_NE(std::find(back.begin(), back.end(), q), back.end());
            }
        }
    }
}

TEST(reflection, reference_cube_is_fixed) {
    auto g = build_geometry(2, {1, 1}, 2.0);
    CubeComplex cc(g, 1.0, 4);
    for (VertexId v = 0; v < g->num_vertices(); ++v) {
        EXPECT_EQ(cc.reflect_vertex(0, v), v);
    }
    EXPECT_DOUBLE_EQ(cc.reflect_time(0, 0.3), 0.3);
}

TEST(reflection, single_spatial_reflection) {
    auto g = build_geometry(1, {1}, 1.0);
    CubeComplex cc(g, 1.0, 4);
    std::size_t q = 1 * static_cast<std::size_t>(cc.slabs());  // box 1, slab 0
    EXPECT_EQ(cc.reflect_vertex(q, 1), 2u);
    EXPECT_EQ(cc.reflect_vertex(q, 0), 3u);
}

TEST(reflection, maps_reference_cube_onto_target) {
    for (auto g : {build_geometry(1, {2}, 2.0), build_geometry(2, {1, 1}, 2.0)}) {
        CubeComplex cc(g, 0.4, 2);
        Block ref = cc.block(0);
        for (std::size_t q = 0; q < cc.num_big_cubes(); ++q) {
            Block tgt = cc.block(q);
            std::set<VertexId> img, want;
            std::set<EdgeId> eimg, ewant;
            for (VertexId v = 0; v < g->num_vertices(); ++v) {
                if (cc.block_has_vertex(ref, v)) img.insert(cc.reflect_vertex(q, v));
                if (cc.block_has_vertex(tgt, v)) want.insert(v);
                EXPECT_EQ(cc.reflect_vertex(q, cc.reflect_vertex(q, v), true), v);
            }
            EXPECT_EQ(img, want);
            std::set<EdgeId> all;
            for (EdgeId e = 0; e < g->num_edges(); ++e) {
                all.insert(cc.reflect_edge(q, e));
                if (cc.block_has_edge(ref, e)) eimg.insert(cc.reflect_edge(q, e));
                if (cc.block_has_edge(tgt, e)) ewant.insert(e);
            }
            EXPECT_EQ(all.size(), g->num_edges());  // bijection on edges
            EXPECT_EQ(eimg, ewant);
            // Time: the reference slab is carried onto slab j.
            double h = cc.slab_height();
            int j = static_cast<int>(q % static_cast<std::size_t>(cc.slabs()));
            for (double frac : {0.1, 0.5, 0.9}) {
                double t = cc.reflect_time(q, frac * h);
                EXPECT_GE(t, j * h - 1e-12);
                EXPECT_LE(t, (j + 1) * h + 1e-12);
                EXPECT_NEAR(cc.reflect_time(q, t, true), frac * h, 1e-12);
            }
        }
    }
}
