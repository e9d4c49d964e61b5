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
#include "loopsim/path.hpp"
#include "loopsim/sampler.hpp"
#include "test_util.hpp"

using namespace loopsim;
using test_support::link_on;

namespace {

// Ring of four sites, beta = 1, four windows of height 1/4.
CubeComplex ring_complex() { return CubeComplex(build_geometry(1, {1}, 1.0), 1.0, 4); }

std::vector<std::string> rules(const ExtractedPath& p) {
    std::vector<std::string> out;
    for (const auto& s : p.segments) {
        out.push_back(s.rule);
    }
    return out;
}

}  // namespace

TEST(trace_loop, empty_site_is_one_vertical_circle) {
    auto cx = ring_complex();
    LinkConfiguration cfg(cx.geometry_ptr());
    auto tr = trace_loop(cfg, cx, {2, 0.6});
    ASSERT_EQ(tr.runs.size(), 1u);
    EXPECT_DOUBLE_EQ(tr.runs[0].to - tr.runs[0].from, 1.0);
    // Windows 2, 3, 0, 1, 2.
    EXPECT_EQ(tr.visits.size(), 5u);
}

TEST(trace_loop, double_bar_turns_the_walk) {
    auto cx = ring_complex();
    LinkConfiguration cfg(cx.geometry_ptr());
    link_on(cfg, 0, 1, 0.1, LinkKind::DoubleBar);
    auto tr = trace_loop(cfg, cx, {0, 0.05}, SpaceTimePoint{1, 0.05});
    ASSERT_EQ(tr.runs.size(), 2u);
    EXPECT_EQ(tr.runs[1].direction, -1);
    EXPECT_TRUE(tr.reached_target);
    EXPECT_THROW(trace_loop(cfg, cx, {0, 0.05}, SpaceTimePoint{2, 0.5}), std::invalid_argument);
}

TEST(extract_path, same_small_cube) {
    auto cx = ring_complex();
    LinkConfiguration cfg(cx.geometry_ptr());
    auto p = extract_path(cfg, cx, {3, 0.3}, {3, 0.45});
    ASSERT_EQ(p.cubes.size(), 1u);
    EXPECT_EQ(p.cubes[0], (SmallCube{3, 1}));
    EXPECT_TRUE(path_problems(cx, p, {3, 0.3}, {3, 0.45}).empty());
}

TEST(extract_path, one_double_bar_between_neighbours) {
    auto cx = ring_complex();
    LinkConfiguration cfg(cx.geometry_ptr());
    link_on(cfg, 0, 1, 0.1, LinkKind::DoubleBar);
    SpaceTimePoint src{0, 0.05}, dst{1, 0.05};
    auto p = extract_path(cfg, cx, src, dst);
    ASSERT_EQ(p.cubes.size(), 2u);
    EXPECT_EQ(p.cubes[0], (SmallCube{0, 0}));
    EXPECT_EQ(p.cubes[1], (SmallCube{1, 0}));
    auto tr = trace_loop(cfg, cx, src, dst);
    EXPECT_EQ(tr.visits[1].entry, Entry::Spatial);
    EXPECT_TRUE(path_problems(cx, p, src, dst).empty());
}

TEST(extract_path, type_3b_through_a_cross) {
    // Up from (0, 0.05) into window 1, where a cross on 01 is the only
    // link: the cube is entered temporally and left spatially.
    auto cx = ring_complex();
    LinkConfiguration cfg(cx.geometry_ptr());
    link_on(cfg, 0, 1, 0.3, LinkKind::Cross);
    SpaceTimePoint src{0, 0.05}, dst{1, 0.6};
    auto p = extract_path(cfg, cx, src, dst);
    std::vector<SmallCube> want{{0, 0}, {0, 1}, {1, 1}, {1, 2}};
    EXPECT_EQ(p.cubes, want);
    EXPECT_EQ(rules(p), (std::vector<std::string>{"first", "3b-cross", "final"}));
    ASSERT_TRUE(p.segments[1].bad);
    EXPECT_TRUE(path_problems(cx, p, src, dst).empty());
}

TEST(extract_path, type_3a_into_an_empty_cube) {
    // A double bar sends the walk from site 1 to site 0, heading down out
    // of window 0 into window 3, which has no links.
    auto cx = ring_complex();
    LinkConfiguration cfg(cx.geometry_ptr());
    link_on(cfg, 0, 1, 0.1, LinkKind::DoubleBar);
    link_on(cfg, 1, 2, 0.6, LinkKind::DoubleBar);
    SpaceTimePoint src{1, 0.05}, dst{0, 0.8};
    auto p = extract_path(cfg, cx, src, dst);
    std::vector<SmallCube> want{{1, 0}, {0, 0}, {0, 3}};
    EXPECT_EQ(p.cubes, want);
    EXPECT_EQ(rules(p), (std::vector<std::string>{"first", "3a-above-empty"}));
    EXPECT_TRUE(p.segments[1].bad);
}

TEST(extract_path, reentered_type_3_cube_is_not_charged) {
    // Window 1 at site 0 holds a cross and then a double bar on 01: the
    // walk leaves through the cross and comes straight back through the
    // double bar.
    auto cx = ring_complex();
    LinkConfiguration cfg(cx.geometry_ptr());
    link_on(cfg, 0, 1, 0.3, LinkKind::Cross);
    link_on(cfg, 0, 1, 0.4, LinkKind::DoubleBar);
    link_on(cfg, 1, 2, 0.9, LinkKind::DoubleBar);
    SpaceTimePoint src{0, 0.05};
    auto tr = trace_loop(cfg, cx, src);
    // Pick the far end of the loop as the target.
    const LoopRun& r = tr.runs[tr.runs.size() / 2];
    SpaceTimePoint dst{r.vertex, detail::wrap_time(0.5 * (r.from + r.to), 1.0)};
    auto p = extract_path(cfg, cx, src, dst);
    EXPECT_TRUE(path_problems(cx, p, src, dst).empty());
}

TEST(extract_path, disconnected_points_are_rejected) {
    auto cx = ring_complex();
    LinkConfiguration cfg(cx.geometry_ptr());
    EXPECT_THROW(extract_path(cfg, cx, {0, 0.1}, {1, 0.1}), std::invalid_argument);
}

TEST(extract_path, sampled_configurations) {
    struct Case {
        int d;
        double beta;
        int n;
        double u;
    };
    for (Case c : {Case{1, 4.0, 4, 0.25}, Case{2, 2.0, 4, 0.25}, Case{1, 1.0, 20, 0.0}, Case{2, 1.5, 8, 0.5}}) {
        auto g = build_geometry(c.d, std::vector<int>(static_cast<std::size_t>(c.d), 1), c.beta);
        CubeComplex cx(g, 1.0, c.n);
        SamplerParams sp;
        sp.n = c.n;
        sp.u = c.u;
        sp.sweeps = 150;
        sp.burnin = 100;
        sp.seed = 31 + static_cast<std::uint64_t>(c.d);
        std::mt19937_64 rng(7);
        int checked = 0;
        run_chain(g, sp, [&](const Chain& ch, std::uint64_t) {
            std::uniform_int_distribution<VertexId> V(0, static_cast<VertexId>(g->num_vertices() - 1));
            std::uniform_real_distribution<double> T(0.0, c.beta);
            SpaceTimePoint src{V(rng), T(rng)};
            auto tr = trace_loop(ch.config(), cx, src);
            const LoopRun& r = tr.runs[tr.runs.size() / 2];
            SpaceTimePoint dst{r.vertex, detail::wrap_time(0.5 * (r.from + r.to), c.beta)};
            ExtractedPath p;
            ASSERT_NO_THROW(p = extract_path(ch.config(), cx, src, dst));
            auto problems = path_problems(cx, p, src, dst);
            EXPECT_TRUE(problems.empty()) << problems.front();
            EXPECT_GE(p.best_fraction, phi(c.d));
            EXPECT_EQ(p.bad_fraction.size(), static_cast<std::size_t>(cx.num_translates()));
            ++checked;
        });
        EXPECT_EQ(checked, 150);
    }
}
