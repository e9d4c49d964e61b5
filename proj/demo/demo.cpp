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


// Small tour of the library: sample the loop model on a ring, estimate a
// few connection probabilities and compare them with exact spin
// correlations.

#include <cstdio>
#include <memory>

#include "loopsim/loopsim.hpp"

int main() {
    using namespace loopsim;
    const int n = 2;
    const double u = 0.25, beta = 0.5;
    auto g = build_geometry(1, {1}, beta);  // 4-site ring

    SamplerParams sp;
    sp.n = n;
    sp.u = u;
    sp.sweeps = 200000;
    sp.burnin = 2000;
    sp.seed = 42;

    std::vector<Displacement> disp{{{1}, 0.0}, {{2}, 0.0}, {{0}, beta / 4}, {{1}, beta / 4}};
    ConnectionAccumulator acc(g, disp);
    BatchMeans links, loops;
    MoveCounters mc = run_chain(g, sp, [&](const Chain& ch, std::uint64_t) {
        acc.add(ch.config());
        links.add(static_cast<double>(ch.config().size()));
        loops.add(static_cast<double>(ch.loops()));
    });
    Estimate L = links.estimate(), N = loops.estimate();
    std::printf("ring of 4, n=%d u=%.2f beta=%.2f, %llu sweeps\n", n, u, beta,
                static_cast<unsigned long long>(sp.sweeps));
    std::printf("mean links %.4f +- %.4f, mean loops %.4f +- %.4f\n", L.mean, L.se, N.mean, N.se);
    std::printf("acceptance: insert %.3f remove %.3f flip %.3f\n\n", mc.rate(kInsert), mc.rate(kRemove),
                mc.rate(kFlip));

    QuantumModel model = build_hamiltonian(*g, n, u, PairConvention::LoopMatched);
    std::printf("%4s %6s %12s %12s %10s %7s\n", "x", "t", "exact", "loop est.", "se", "z");
    for (const ConnectionEstimate& e : acc.estimates()) {
        CorrelationReport r = verify_lemma22(model, 0, 0.0, e.displacement.x[0], e.displacement.t, beta, e);
        std::printf("%4d %6.3f %12.6f %12.6f %10.2e %7.2f\n", e.displacement.x[0], e.displacement.t, r.exact_s1,
                    r.predicted, r.coefficient * r.se, r.z);
    }

    // Loop counts of the final state under different boundary conditions.
    Chain ch(g, sp);
    for (int i = 0; i < 1000 && (i < 100 || ch.config().size() < 3); ++i) {
        ch.sweep();
    }
    const LinkConfiguration& c = ch.config();
    Pairing xi = dimer_pairing(*g, 0);
    std::printf("\nsample state: %zu links, periodic loops %zu, with pairings %zu, closing links %zu\n", c.size(),
                count_loops(c), decompose_with_pairings(c, xi, xi).count(), sweep_closing_links(c, xi).closing);
    std::printf("%s", serialize(c).c_str());
    return 0;
}
