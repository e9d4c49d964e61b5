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
#include "loopsim/sampler.hpp"
#include "loopsim/statistics.hpp"

using namespace loopsim;

TEST(batch_means, independent_series) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> N(2.0, 3.0);
    BatchMeans bm;
    const int n = 200000;
    for (int i = 0; i < n; ++i) bm.add(N(rng));
    EXPECT_NEAR(bm.mean(), 2.0, 4 * 3.0 / std::sqrt(n));
    EXPECT_NEAR(bm.se(), 3.0 / std::sqrt(n), 0.15 * 3.0 / std::sqrt(n));
    EXPECT_GT(bm.batches(), 500u);
    EXPECT_LE(bm.batches(), 1024u);
}

TEST(batch_means, autocorrelated_series) {
    // AR(1): the integrated autocorrelation inflates the variance of the
    // mean by (1 + rho) / (1 - rho).
    std::mt19937_64 rng(2);
    std::normal_distribution<double> N(0.0, 1.0);
    const double rho = 0.9;
    BatchMeans bm;
    double x = 0.0;
    const int n = 1 << 20;
    for (int i = 0; i < n; ++i) {
        x = rho * x + std::sqrt(1 - rho * rho) * N(rng);
        bm.add(x);
    }
    double want = std::sqrt((1 + rho) / (1 - rho) / n);
    EXPECT_NEAR(bm.se(), want, 0.2 * want);
    EXPECT_NEAR(bm.ess(), n * (1 - rho) / (1 + rho), 0.4 * n * (1 - rho) / (1 + rho));
}

TEST(batch_means, combine_pools_by_sample_count) {
    std::vector<Estimate> parts{{1.0, 0.1, 100, 100}, {3.0, 0.2, 100, 300}};
    auto c = combine(parts);
    EXPECT_DOUBLE_EQ(c.mean, 2.5);
    EXPECT_NEAR(c.se, std::sqrt(0.0625 * 0.01 + 0.5625 * 0.04), 1e-15);
    EXPECT_EQ(c.samples, 400u);
}

TEST(sampler, rejects_bad_parameters) {
    auto g = build_geometry(1, {1}, 1.0);
    SamplerParams p;
    p.n = 0;
    EXPECT_THROW(Chain(g, p), std::invalid_argument);
    p.n = 1;
    p.u = 1.5;
    EXPECT_THROW(Chain(g, p), std::invalid_argument);
    p.u = 0.5;
    p.init = "warm";
    EXPECT_THROW(Chain(g, p), std::invalid_argument);
}

TEST(sampler, poisson_target_at_n_one) {
    auto g = build_geometry(1, {2}, 2.0);
    SamplerParams p;
    p.n = 1;
    p.u = 0.3;
    p.sweeps = 60000;
    p.burnin = 200;
    p.seed = 5;
    p.check_every = 997;
    BatchMeans count, cross;
    RunningStats raw;
    run_chain(g, p, [&](const Chain& c, std::uint64_t) {
        double m = static_cast<double>(c.config().size());
        count.add(m);
        raw.add(m);
        if (c.config().size() > 0) {
            cross.add(static_cast<double>(c.config().cross_count()) / m);
        }
    });
    double mean = static_cast<double>(g->num_edges()) * g->beta();
    EXPECT_LT(std::abs(count.mean() - mean), 3 * count.se());
    // Poisson: variance equals mean.
    EXPECT_NEAR(raw.variance() / mean, 1.0, 0.1);
    EXPECT_LT(std::abs(cross.mean() - 0.3), 3 * cross.se());
}

TEST(sampler, two_state_balance) {
    // P_n(one double bar) / P_n(empty) = d K' beta (1-u) / n, since the link
    // merges two of the K' single-site loops.
    auto g = build_geometry(1, {1}, 0.1);
    for (int n : {1, 3}) {
        SamplerParams p;
        p.n = n;
        p.u = 0.3;
        p.sweeps = 400000;
        p.burnin = 100;
        p.seed = 11 + n;
        double empty = 0, one_bar = 0, one_cross = 0;
        run_chain(g, p, [&](const Chain& c, std::uint64_t) {
            if (c.config().empty()) {
                empty += 1;
            } else if (c.config().size() == 1) {
                (c.config().cross_count() == 1 ? one_cross : one_bar) += 1;
            }
        });
        double vol = 4 * 0.1;
        double want_bar = vol * 0.7 / n;
        double want_cross = vol * 0.3 / n;
        // Counts are correlated; a binomial error inflated by 3 is generous
        // for this fast-mixing chain.
        EXPECT_NEAR(one_bar / empty, want_bar, 3 * 3 * want_bar * std::sqrt(1 / one_bar + 1 / empty)) << n;
        EXPECT_NEAR(one_cross / empty, want_cross, 3 * 3 * want_cross * std::sqrt(1 / one_cross + 1 / empty)) << n;
    }
}

TEST(sampler, deterministic_and_zero_sweeps) {
    auto g = build_geometry(1, {1}, 1.0);
    SamplerParams p;
    p.n = 3;
    p.u = 0.25;
    p.sweeps = 200;
    p.seed = 42;
    std::vector<std::size_t> a, b;
    run_chain(g, p, [&](const Chain& c, std::uint64_t) { a.push_back(c.config().size() * 1000 + c.loops()); });
    run_chain(g, p, [&](const Chain& c, std::uint64_t) { b.push_back(c.config().size() * 1000 + c.loops()); });
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.size(), 200u);
    p.sweeps = 0;
    int calls = 0;
    run_chain(g, p, [&](const Chain&, std::uint64_t) { ++calls; });
    EXPECT_EQ(calls, 0);
}

TEST(sampler, thinning) {
    auto g = build_geometry(1, {1}, 1.0);
    SamplerParams p;
    p.sweeps = 100;
    p.thin = 7;
    std::vector<std::uint64_t> seen;
    run_chain(g, p, [&](const Chain&, std::uint64_t s) { seen.push_back(s); });
    EXPECT_EQ(seen.size(), 15u);
    EXPECT_EQ(seen[1], 7u);
}

TEST(sampler, loop_count_tracks_recount_at_large_n) {
    auto g = build_geometry(2, {1, 1}, 1.0);
    SamplerParams p;
    p.n = 8;
    p.u = 0.25;
    p.seed = 3;
    Chain c(g, p);
    for (int i = 0; i < 50000; ++i) {
        c.step();
        if (i % 101 == 0) {
            ASSERT_NO_THROW(c.verify_loop_count());
        }
    }
    EXPECT_GT(c.counters().accepted[kInsert], 0u);
    EXPECT_GT(c.counters().accepted[kFlip], 0u);
}

TEST(sampler, reaches_empty_configuration_from_dimer_start) {
    auto g = build_geometry(1, {1}, 0.3);
    SamplerParams p;
    p.n = 10;
    p.u = 0.0;
    p.init = "dimer";
    p.seed = 8;
    Chain c(g, p);
    EXPECT_GT(c.config().size(), 0u);
    bool hit = false;
    for (int i = 0; i < 200000 && !hit; ++i) {
        c.step();
        hit = c.config().empty();
    }
    EXPECT_TRUE(hit);
}

TEST(sampler, replicas_are_reproducible_and_distinct) {
    auto g = build_geometry(1, {1}, 1.0);
    SamplerParams p;
    p.n = 2;
    p.sweeps = 50;
    p.seed = 77;
    auto make = [](std::size_t) {
        return [v = std::make_shared<std::vector<std::size_t>>()](const Chain& c, std::uint64_t) mutable {
            v->push_back(c.config().size());
        };
    };
    auto one = run_replicas(g, p, 3, make, 1);
    auto two = run_replicas(g, p, 3, make, 3);
    EXPECT_EQ(one.second.proposed, two.second.proposed);
    EXPECT_NE(replica_seed(77, 1), replica_seed(77, 2));
    EXPECT_EQ(replica_seed(77, 0), 77u);
}

TEST(sampler, poisson_domination) {
    auto g = build_geometry(1, {2}, 1.0);
    SamplerParams p;
    p.n = 5;
    p.u = 0.25;
    p.sweeps = 20000;
    p.seed = 9;
    BatchMeans counts;
    std::uint64_t exceed = 0;
    const double M = std::exp(2.0) * 1 * 5 * 1.0 * 8;
    run_chain(g, p, [&](const Chain& c, std::uint64_t) {
        counts.add(static_cast<double>(c.config().size()));
        exceed += static_cast<double>(c.config().size()) > M;
    });
    auto r = check_poisson_domination(counts, exceed, *g, 5);
    EXPECT_DOUBLE_EQ(r.poisson_mean, 40.0);
    EXPECT_TRUE(r.mean_ok);
    EXPECT_TRUE(r.tail_ok);
}
