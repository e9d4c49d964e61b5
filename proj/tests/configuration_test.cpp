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
#include "loopsim/configuration.hpp"
#include "loopsim/serialization.hpp"
#include "test_util.hpp"

using namespace loopsim;

TEST(sample_poisson, pure_kinds) {
    auto g = build_geometry(1, {2}, 3.0);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 50; ++i) {
        EXPECT_EQ(sample_poisson(g, 0.0, 1.0, rng).cross_count(), 0u);
        auto c = sample_poisson(g, 1.0, 1.0, rng);
        EXPECT_EQ(c.cross_count(), c.size());
    }
}

TEST(sample_poisson, mean_count_and_cross_fraction) {
    auto g = build_geometry(2, {1, 1}, 0.75);
    std::mt19937_64 rng(2);
    const double u = 0.3, scale = 1.5;
    const int draws = 10000;
    double sum = 0, sum2 = 0, cross = 0;
    for (int i = 0; i < draws; ++i) {
        auto c = sample_poisson(g, u, scale, rng);
        sum += static_cast<double>(c.size());
        sum2 += static_cast<double>(c.size() * c.size());
        cross += static_cast<double>(c.cross_count());
    }
    double mean = sum / draws;
    double var = sum2 / draws - mean * mean;
    double expect = static_cast<double>(g->num_edges()) * g->beta() * scale;
    EXPECT_LT(std::abs(mean - expect), 3.0 * std::sqrt(var / draws));
    double frac = cross / sum;
    EXPECT_LT(std::abs(frac - u), 3.0 * std::sqrt(u * (1 - u) / sum));
}

TEST(sample_poisson, reproducible) {
    auto g = build_geometry(1, {1}, 2.0);
    std::mt19937_64 a(99), b(99);
    EXPECT_EQ(sample_poisson(g, 0.4, 1.0, a), sample_poisson(g, 0.4, 1.0, b));
}

TEST(link_configuration, insert_remove_flip) {
    auto g = build_geometry(1, {1}, 1.0);
    std::mt19937_64 rng(3);
    auto cfg = test_support::random_config(g, 6, 0.5, rng);
    auto orig = cfg;
    Link l{2, 0.123, LinkKind::Cross};
    cfg.insert(l);
    EXPECT_EQ(cfg.size(), orig.size() + 1);
    EXPECT_THROW(cfg.insert(Link{2, 0.123, LinkKind::DoubleBar}), std::invalid_argument);
    cfg.remove(2, 0.123);
    EXPECT_EQ(cfg, orig);
    const Link first = cfg.sorted_links().front();
    cfg.flip(first.edge, first.time);
    EXPECT_NE(cfg.find(first.edge, first.time)->kind, first.kind);
    cfg.flip(first.edge, first.time);
    EXPECT_EQ(cfg, orig);
    EXPECT_THROW(cfg.remove(1, 0.999), std::logic_error);
    EXPECT_THROW(cfg.flip(1, 0.999), std::logic_error);
    EXPECT_THROW(cfg.insert(Link{0, 1.0, LinkKind::Cross}), std::invalid_argument);
}

TEST(link_configuration, indices_stay_consistent) {
    auto g = build_geometry(2, {1, 1}, 1.0);
    std::mt19937_64 rng(4);
    auto cfg = test_support::random_config(g, 40, 0.5, rng);
    std::uniform_real_distribution<double> U(0, 1);
    for (int step = 0; step < 2000; ++step) {
        double r = U(rng);
        if (r < 0.4 || cfg.empty()) {
            Link l{static_cast<EdgeId>(rng() % g->num_edges()), U(rng), U(rng) < 0.5 ? LinkKind::Cross : LinkKind::DoubleBar};
            if (!cfg.contains(l.edge, l.time)) cfg.insert(l);
        } else {
            Link l = cfg.at(rng() % cfg.size());
            if (r < 0.8) {
                // Links on other edges are untouched.
                std::vector<std::vector<Link>> before;
                for (EdgeId e = 0; e < g->num_edges(); ++e) before.push_back(cfg.links_on_edge(e));
                cfg.remove(l.edge, l.time);
                for (EdgeId e = 0; e < g->num_edges(); ++e) {
                    if (e != l.edge) {
                        EXPECT_EQ(cfg.links_on_edge(e), before[e]);
                    }
                }
            } else {
                cfg.flip(l.edge, l.time);
            }
        }
        std::size_t per_edge = 0, per_vertex = 0, crosses = 0;
        for (EdgeId e = 0; e < g->num_edges(); ++e) {
            auto le = cfg.links_on_edge(e);
            per_edge += le.size();
            for (std::size_t i = 1; i < le.size(); ++i) EXPECT_LT(le[i - 1].time, le[i].time);
        }
        for (VertexId v = 0; v < g->num_vertices(); ++v) per_vertex += cfg.incidences(v).size();
        for (const auto& l : cfg.links()) {
            crosses += l.kind == LinkKind::Cross;
            ASSERT_NE(cfg.find(l.edge, l.time), nullptr);
            EXPECT_EQ(*cfg.find(l.edge, l.time), l);
        }
        ASSERT_EQ(per_edge, cfg.size());
        ASSERT_EQ(per_vertex, 2 * cfg.size());
        ASSERT_EQ(crosses, cfg.cross_count());
    }
}

TEST(serialization, empty_configuration) {
    auto g = build_geometry(2, {1, 2}, 0.5);
    LinkConfiguration cfg(g);
    std::string text = serialize(cfg);
    EXPECT_EQ(text, "loopsim-config 1\nd 2\nk 1 2\nbeta 0.5\nlinks 0\n");
    EXPECT_EQ(deserialize(text), cfg);
}

TEST(serialization, round_trip_and_canonical_order) {
    std::mt19937_64 rng(5);
    for (auto g : {build_geometry(1, {2}, 1.7), build_geometry(2, {1, 1}, 0.3)}) {
        for (int i = 0; i < 20; ++i) {
            auto cfg = sample_poisson(g, 0.4, 2.0, rng);
            std::string text = serialize(cfg);
            auto back = deserialize(text, g);
            EXPECT_EQ(back, cfg);
            EXPECT_EQ(serialize(back), text);
        }
    }
}

TEST(serialization, header_mismatch_and_parse_errors) {
    auto g = build_geometry(1, {1}, 1.0);
    LinkConfiguration cfg(g);
    cfg.insert(Link{0, 0.5, LinkKind::Cross});
    std::string text = serialize(cfg);
    EXPECT_THROW(deserialize(text, build_geometry(1, {2}, 1.0)), ParseError);
    try {
        deserialize("loopsim-config 1\nd 1\nk 1\nbeta 1\nlinks 1\n0 1 0.5 X\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 6);
        EXPECT_EQ(e.field(), "kind");
    }
    try {
        deserialize("loopsim-config 1\nd 1\nk 1\nbeta 1\nlinks 1\n0 2 0.5 C\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.field(), "endpoints");
    }
    try {
        deserialize("loopsim-config 1\nd 1\nk 1\nbeta abc\nlinks 0\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 4);
        EXPECT_EQ(e.field(), "beta");
    }
}
