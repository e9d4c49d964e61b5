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

#include "gtest/gtest.h"
#include "loopsim/coloring.hpp"
#include "loopsim/cubes.hpp"
#include "loopsim/loops.hpp"
#include "test_util.hpp"

using namespace loopsim;
using test_support::link_on;
using test_support::random_config;

namespace {

std::uint64_t ipow(std::uint64_t b, std::size_t e) {
    std::uint64_t r = 1;
    while (e-- > 0) r *= b;
    return r;
}

// Independent loop count: follow oriented strands interval by interval.
// Each interval is visited going up or going down; a loop is a closed
// orbit of the walk, and each loop is seen exactly twice (once per
// orientation).
std::size_t walk_count(const LinkConfiguration& cfg) {
    const TorusGeometry& g = cfg.geometry();
    std::vector<std::size_t> offset(g.num_vertices() + 1, 0);
    for (VertexId v = 0; v < g.num_vertices(); ++v) {
        offset[v + 1] = offset[v] + std::max<std::size_t>(cfg.incidences(v).size(), 1);
    }
    std::vector<char> seen(2 * offset.back(), 0);
    std::size_t orbits = 0;
    for (VertexId v0 = 0; v0 < g.num_vertices(); ++v0) {
        for (std::size_t i0 = 0; i0 < offset[v0 + 1] - offset[v0]; ++i0) {
            for (int up0 = 0; up0 < 2; ++up0) {
                if (seen[2 * (offset[v0] + i0) + up0]) continue;
                ++orbits;
                VertexId v = v0;
                std::size_t i = i0;
                bool up = up0 != 0;
                while (!seen[2 * (offset[v] + i) + (up ? 1 : 0)]) {
                    seen[2 * (offset[v] + i) + (up ? 1 : 0)] = 1;
                    auto inc = cfg.incidences(v);
                    const std::size_t m = inc.size();
                    if (m == 0) {
                        continue;  // loop closes on itself
                    }
                    // Interval i is (key_{i-1}, key_i]: going up leaves at key_i,
                    // going down leaves at key_{i-1}.
                    const Incidence& hop = up ? inc[i] : inc[(i + m - 1) % m];
                    VertexId w = g.edge(hop.edge).other(v);
                    auto iw = cfg.incidences(w);
                    std::size_t j = 0;
                    while (iw[j].key() != hop.key()) ++j;
                    const std::size_t mw = iw.size();
                    bool arrive_above = hop.kind == LinkKind::Cross ? up : !up;
                    // Above the link at w is interval j+1; below is j.
                    i = arrive_above ? (j + 1) % mw : j;
                    up = arrive_above;
                    v = w;
                }
            }
        }
    }
    return orbits / 2;
}

}  // namespace

TEST(decompose_periodic, empty_configuration) {
    auto g = build_geometry(2, {1, 1}, 1.0);
    LinkConfiguration cfg(g);
    EXPECT_EQ(count_loops(cfg), g->num_vertices());
}

TEST(decompose_periodic, double_bars_on_one_edge) {
    auto g = build_geometry(1, {1}, 1.0);
    LinkConfiguration cfg(g);
    link_on(cfg, 0, 1, 0.3, LinkKind::DoubleBar);
    EXPECT_EQ(count_loops(cfg), 3u);
    link_on(cfg, 0, 1, 0.6, LinkKind::DoubleBar);
    EXPECT_EQ(count_loops(cfg), 4u);
}

TEST(decompose_periodic, crosses_on_one_edge) {
    auto g = build_geometry(1, {1}, 1.0);
    LinkConfiguration cfg(g);
    link_on(cfg, 0, 1, 0.3, LinkKind::Cross);
    EXPECT_EQ(count_loops(cfg), 3u);
    link_on(cfg, 0, 1, 0.6, LinkKind::Cross);
    EXPECT_EQ(count_loops(cfg), 4u);
}

TEST(connected, empty_and_single_double_bar) {
    auto g = build_geometry(1, {1}, 1.0);
    LinkConfiguration cfg(g);
    EXPECT_TRUE(connected(cfg, {2, 0.0}, {2, 0.77}));
    EXPECT_FALSE(connected(cfg, {2, 0.0}, {3, 0.0}));
    link_on(cfg, 1, 2, 0.4, LinkKind::DoubleBar);
    auto dec = decompose_periodic(cfg);
    for (double s : {0.0, 0.2, 0.4, 0.9}) {
        for (double t : {0.0, 0.39, 0.41, 0.99}) {
            EXPECT_TRUE(dec.connected({1, s}, {2, t}));
        }
    }
}

TEST(connected, is_an_equivalence_relation) {
    auto g = build_geometry(2, {1, 1}, 1.0);
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> U(0, 1);
    for (int rep = 0; rep < 50; ++rep) {
        auto cfg = random_config(g, 25, 0.5, rng);
        auto dec = decompose_periodic(cfg);
        std::vector<SpaceTimePoint> pts;
        for (int i = 0; i < 12; ++i) pts.push_back({static_cast<VertexId>(rng() % 16), U(rng)});
        for (auto& a : pts) {
            EXPECT_TRUE(dec.connected(a, a));
            for (auto& b : pts) {
                EXPECT_EQ(dec.connected(a, b), dec.connected(b, a));
                for (auto& c : pts) {
                    if (dec.connected(a, b) && dec.connected(b, c)) {
                        EXPECT_TRUE(dec.connected(a, c));
                    }
                }
            }
        }
    }
}

TEST(decompose_periodic, agrees_with_strand_walk) {
    std::mt19937_64 rng(22);
    for (auto g : {build_geometry(1, {1}, 1.0), build_geometry(1, {2}, 1.0), build_geometry(2, {1, 1}, 1.0)}) {
        for (int rep = 0; rep < 300; ++rep) {
            auto cfg = random_config(g, rng() % 30, 0.4, rng);
            ASSERT_EQ(count_loops(cfg), walk_count(cfg));
        }
    }
}

TEST(decompose_with_pairings, empty_with_equal_pairings) {
    auto g = build_geometry(2, {1, 1}, 1.0);
    std::mt19937_64 rng(3);
    LinkConfiguration cfg(g);
    auto xi = random_pairing(g->num_vertices(), rng);
    EXPECT_EQ(decompose_with_pairings(cfg, xi, xi).count(), g->num_vertices() / 2);
}

TEST(decompose_with_pairings, inequalities_and_closing_identity) {
    std::mt19937_64 rng(4);
    for (auto g : {build_geometry(1, {1}, 1.0), build_geometry(1, {2}, 1.0), build_geometry(2, {1, 1}, 1.0)}) {
        const std::size_t K = g->num_vertices();
        for (int rep = 0; rep < 400; ++rep) {
            auto cfg = random_config(g, rng() % 40, 0.3, rng);
            auto xi = random_pairing(K, rng);
            auto xi1 = random_pairing(K, rng);
            auto per = count_loops(cfg);
            auto bc = decompose_with_pairings(cfg, xi, xi1).count();
            auto sweep = sweep_closing_links(cfg, xi);
            EXPECT_LE(per, bc + K - 1);
            EXPECT_LE(bc, sweep.closing + K / 2);
            // Loops closed below beta, plus those formed by the strands that
            // reach beta with the top pairing.
            EXPECT_EQ(bc, sweep.closing + pairing_cycles(sweep.final_pairing, xi1));
        }
    }
}

TEST(decompose_with_pairings, rejects_bad_pairings) {
    auto g = build_geometry(1, {1}, 1.0);
    LinkConfiguration cfg(g);
    Pairing ok{1, 0, 3, 2};
    EXPECT_THROW(decompose_with_pairings(cfg, Pairing{1, 0, 2, 3}, ok), std::invalid_argument);
    EXPECT_THROW(decompose_with_pairings(cfg, ok, Pairing{1, 2, 3, 0}), std::invalid_argument);
}

TEST(evolve_pairing, examples) {
    auto g = build_geometry(1, {1}, 1.0);
    Pairing xi{1, 0, 3, 2};
    EdgeId e01 = *g->find_edge(0, 1);
    auto a = evolve_pairing(xi, *g, Link{e01, 0.1, LinkKind::DoubleBar});
    EXPECT_TRUE(a.closed);
    EXPECT_EQ(a.pairing, xi);
    auto b = evolve_pairing(xi, *g, Link{e01, 0.1, LinkKind::Cross});
    EXPECT_FALSE(b.closed);
    EXPECT_EQ(b.pairing, xi);
    // x=1, y=2 paired with w=0, z=3.
    EdgeId e12 = *g->find_edge(1, 2);
    auto c = evolve_pairing(xi, *g, Link{e12, 0.1, LinkKind::DoubleBar});
    EXPECT_FALSE(c.closed);
    EXPECT_EQ(c.pairing, (Pairing{3, 2, 1, 0}));
    auto d = evolve_pairing(xi, *g, Link{e12, 0.1, LinkKind::Cross});
    EXPECT_FALSE(d.closed);
    EXPECT_EQ(d.pairing, (Pairing{2, 3, 0, 1}));
}

TEST(count_closing_links, examples) {
    auto g = build_geometry(1, {1}, 1.0);
    Pairing xi{1, 0, 3, 2};
    LinkConfiguration cfg(g);
    EXPECT_EQ(count_closing_links(cfg, xi), 0u);
    link_on(cfg, 0, 1, 0.5, LinkKind::DoubleBar);
    EXPECT_EQ(count_closing_links(cfg, xi), 1u);
}

TEST(count_closing_links, crosses_never_close) {
    std::mt19937_64 rng(6);
    auto g = build_geometry(2, {1, 1}, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        auto cfg = random_config(g, 30, 1.0, rng);
        EXPECT_EQ(count_closing_links(cfg, random_pairing(16, rng)), 0u);
    }
}

TEST(minimal_pair_count, examples_and_bound) {
    auto g = build_geometry(1, {1}, 1.0);
    EXPECT_EQ(minimal_pair_count(Pairing{2, 3, 0, 1}, *g), 0u);
    std::mt19937_64 rng(7);
    for (auto h : {build_geometry(1, {3}, 1.0), build_geometry(2, {1, 2}, 1.0), build_geometry(3, {1, 1, 1}, 1.0)}) {
        for (int axis = 0; axis < h->dim(); ++axis) {
            auto dimer = dimer_pairing(*h, axis);
            validate_pairing(dimer, h->num_vertices());
            EXPECT_EQ(minimal_pair_count(dimer, *h), h->num_vertices() / 2);
        }
        for (int rep = 0; rep < 100; ++rep) {
            EXPECT_LE(minimal_pair_count(random_pairing(h->num_vertices(), rng), *h), h->num_vertices() / 2);
        }
    }
}

TEST(delta_loops, merge_and_split) {
    auto g = build_geometry(1, {1}, 1.0);
    LinkConfiguration cfg(g);
    Link l{*g->find_edge(0, 1), 0.25, LinkKind::DoubleBar};
    EXPECT_EQ(delta_loops(cfg, Move{MoveType::Insert, l}), -1);
    cfg.insert(l);
    EXPECT_EQ(delta_loops(cfg, Move{MoveType::Remove, l}), +1);
    EXPECT_EQ(delta_loops(cfg, Move{MoveType::Flip, l}), 0);
}

TEST(delta_loops, twisted_insertion_leaves_count_unchanged) {
    // A cross placed on a loop that visits both endpoints with the same
    // orientation re-routes the loop without splitting it.
    auto g = build_geometry(1, {1}, 1.0);
    LinkConfiguration cfg(g);
    link_on(cfg, 0, 1, 0.2, LinkKind::DoubleBar);
    Link l{*g->find_edge(0, 1), 0.6, LinkKind::DoubleBar};
    int d = delta_loops(cfg, Move{MoveType::Insert, l});
    auto after = cfg;
    after.insert(l);
    EXPECT_EQ(d, static_cast<int>(count_loops(after)) - static_cast<int>(count_loops(cfg)));
    Link c{*g->find_edge(0, 1), 0.6, LinkKind::Cross};
    int dc = delta_loops(cfg, Move{MoveType::Insert, c});
    auto afterc = cfg;
    afterc.insert(c);
    EXPECT_EQ(dc, 0);
    EXPECT_EQ(dc, static_cast<int>(count_loops(afterc)) - static_cast<int>(count_loops(cfg)));
}

TEST(delta_loops, random_moves_match_recount) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> U(0, 1);
    for (auto g : {build_geometry(1, {1}, 1.0), build_geometry(1, {2}, 2.0), build_geometry(2, {1, 1}, 1.0)}) {
        auto cfg = random_config(g, 10, 0.3, rng);
        for (int step = 0; step < 1000; ++step) {
            Move mv;
            double r = U(rng);
            if (r < 0.4 || cfg.empty()) {
                mv = Move{MoveType::Insert, Link{static_cast<EdgeId>(rng() % g->num_edges()), U(rng) * g->beta(),
                                                 U(rng) < 0.3 ? LinkKind::Cross : LinkKind::DoubleBar}};
            } else {
                mv = Move{r < 0.8 ? MoveType::Remove : MoveType::Flip, cfg.at(rng() % cfg.size())};
            }
            auto before = static_cast<int>(count_loops(cfg));
            int d = delta_loops(cfg, mv);
            int capped = delta_loops(cfg, mv, DeltaOptions{3});
            if (mv.type == MoveType::Insert) {
                cfg.insert(mv.link);
            } else if (mv.type == MoveType::Remove) {
                cfg.remove(mv.link.edge, mv.link.time);
            } else {
                cfg.flip(mv.link.edge, mv.link.time);
            }
            int truth = static_cast<int>(count_loops(cfg)) - before;
            ASSERT_EQ(d, truth);
            ASSERT_EQ(capped, truth);
            ASSERT_GE(d, -1);
            ASSERT_LE(d, 1);
        }
    }
}

TEST(count_colorings, examples) {
    auto g = build_geometry(1, {1}, 1.0);
    LinkConfiguration cfg(g);
    EXPECT_EQ(count_colorings(cfg, 2), 16u);
    link_on(cfg, 0, 1, 0.5, LinkKind::DoubleBar);
    EXPECT_EQ(count_colorings(cfg, 3), 27u);
}

TEST(count_colorings, matches_loop_count) {
    std::mt19937_64 rng(9);
    auto g = build_geometry(1, {1}, 1.0);
    for (int rep = 0; rep < 200; ++rep) {
        auto cfg = random_config(g, rng() % 7, 0.5, rng);
        for (int n : {2, 3}) {
            ASSERT_EQ(count_colorings(cfg, n), ipow(static_cast<std::uint64_t>(n), count_loops(cfg)));
        }
    }
}

TEST(count_colorings, size_guard) {
    std::mt19937_64 rng(10);
    auto g = build_geometry(1, {1}, 1.0);
    auto cfg = random_config(g, 30, 0.5, rng);
    EXPECT_THROW(count_colorings(cfg, 2), std::length_error);
}

TEST(reflection, loop_count_is_invariant) {
    std::mt19937_64 rng(11);
    auto g = build_geometry(2, {1, 1}, 1.0);
    CubeComplex cc(g, 0.3, 2);
    for (int rep = 0; rep < 20; ++rep) {
        auto cfg = random_config(g, 30, 0.4, rng);
        auto want = count_loops(cfg);
        for (std::size_t q = 0; q < cc.num_big_cubes(); q += 3) {
            LinkConfiguration img(g);
            for (const Link& l : cfg.links()) {
                img.insert(Link{cc.reflect_edge(q, l.edge), cc.reflect_time(q, l.time), l.kind});
            }
            EXPECT_EQ(count_loops(img), want);
        }
    }
}
